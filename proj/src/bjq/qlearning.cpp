#include "bjq/qlearning.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "bjq/errors.hpp"
#include "bjq/linalg.hpp"

namespace bjq {

namespace {

// Cox designs drop the intercept column but keep the term order.
Eigen::MatrixXd strip_intercept(const Eigen::MatrixXd& x, int intercept_col) {
  Eigen::MatrixXd out(x.rows(), x.cols() - 1);
  for (Eigen::Index j = 0, c = 0; j < x.cols(); ++j) {
    if (j == intercept_col) continue;
    out.col(c++) = x.col(j);
  }
  return out;
}

Eigen::VectorXd strip_intercept_row(const Eigen::RowVectorXd& row, int intercept_col) {
  Eigen::VectorXd out(row.size() - 1);
  for (Eigen::Index j = 0, c = 0; j < row.size(); ++j) {
    if (j == intercept_col) continue;
    out(c++) = row(j);
  }
  return out;
}

}  // namespace

Eigen::VectorXd stage_outcome_estimates(const Cohort& cohort, int stage, const TermSpec& terms,
                                        FitMethod method, const QFitOptions& options) {
  const StageSample sample = stage_sample(cohort, stage, terms);
  if (method == FitMethod::BJ) {
    const BJFit fit = bj_fit(sample, options.bj);
    return bj_impute(sample, fit.beta, options.bj.tail_correction);
  }
  const Eigen::MatrixXd x = strip_intercept(sample.design, sample.intercept_col);
  const CoxFit fit = cox_fit(sample.times, sample.events, x, options.cox);
  Eigen::VectorXd out(sample.size());
  for (Eigen::Index i = 0; i < sample.size(); ++i)
    out(i) = cox_expected_survival(fit, x.row(i).transpose());
  return out;
}

double StageQModel::q_value(const Eigen::RowVectorXd& row) const {
  if (row.size() != terms.size())
    throw validation_error("q_value: design row length does not match terms");
  if (method == FitMethod::BJ) return row * beta_hat;
  if (!cox) throw validation_error("q_value: Cox model has no stored fit");
  return cox_expected_survival(*cox, strip_intercept_row(row, terms.intercept_index()));
}

double StageQModel::q_value(const Trajectory& subject, int stage, Arm arm) const {
  return q_value(design_row(subject, stage, terms, arm));
}

StageSample stage_sample(const Cohort& cohort, int stage, const TermSpec& terms) {
  DesignBlock block = build_design(cohort, stage, terms);
  StageSample sample;
  sample.design = std::move(block.rows);
  sample.intercept_col = terms.intercept_index();
  sample.times.resize(static_cast<Eigen::Index>(block.subject_index.size()));
  sample.events.resize(block.subject_index.size());
  for (std::size_t r = 0; r < block.subject_index.size(); ++r) {
    const auto& rec = cohort.subjects[static_cast<std::size_t>(block.subject_index[r])]
                          .stages[static_cast<std::size_t>(stage - 1)];
    sample.times(static_cast<Eigen::Index>(r)) = rec.time;
    sample.events[r] = rec.event;
  }
  return sample;
}

StageQModel fit_final_stage(const Cohort& cohort, int stage, const TermSpec& terms,
                            FitMethod method, const QFitOptions& options) {
  terms.validate();
  StageQModel model;
  model.stage_index = stage;
  model.terms = terms;
  model.method = method;
  const StageSample sample = stage_sample(cohort, stage, terms);
  if (method == FitMethod::BJ) {
    model.beta_hat = bj_fit(sample, options.bj).beta;
  } else {
    const Eigen::MatrixXd x = strip_intercept(sample.design, sample.intercept_col);
    model.cox = cox_fit(sample.times, sample.events, x, options.cox);
    model.beta_hat = model.cox->beta;
  }
  return model;
}

Eigen::VectorXd pseudo_outcomes(const Cohort& cohort, int stage, const StageQModel& next_model,
                                FitMethod method, const QFitOptions& options) {
  const Eigen::VectorXd current = stage_outcome_estimates(cohort, stage, next_model.terms,
                                                          method, options);
  const int next_stage = stage + 1;
  Eigen::VectorXd pseudo(current.size());
  Eigen::Index r = 0;
  for (const auto& subject : cohort.subjects) {
    if (!subject.entered(stage)) continue;
    double future = 0.0;
    if (subject.entered(next_stage)) {
      const double qa = next_model.q_value(subject, next_stage, Arm::A);
      const double qb = next_model.q_value(subject, next_stage, Arm::B);
      future = std::max(qa, qb);
    }
    pseudo(r) = current(r) + future;
    ++r;
  }
  return pseudo;
}

StageQModel fit_stage(const Cohort& cohort, int stage, const Eigen::VectorXd& pseudo,
                      const TermSpec& terms, const QFitOptions& options) {
  terms.validate();
  const DesignBlock block = build_design(cohort, stage, terms);
  if (pseudo.size() != block.rows.rows())
    throw validation_error("fit_stage: pseudo-outcome length (" + std::to_string(pseudo.size()) +
                           ") does not match stage-" + std::to_string(stage) + " entrant count (" +
                           std::to_string(block.rows.rows()) + ")");
  StageQModel model;
  model.stage_index = stage;
  model.terms = terms;
  model.method = FitMethod::BJ;  // linear Q-regression regardless of imputer
  model.beta_hat = ols_solve_checked(block.rows, pseudo, options.bj.rcond_min,
                                     "fit_stage (stage " + std::to_string(stage) + ")");
  return model;
}

Arm decide(const StageQModel& model, const Trajectory& subject, int stage) {
  const double qa = model.q_value(subject, stage, Arm::A);
  const double qb = model.q_value(subject, stage, Arm::B);
  return qa > qb ? Arm::A : Arm::B;
}

Policy fit_policy(const Cohort& cohort, int stages, const TermSpec& terms, FitMethod method,
                  const QFitOptions& options) {
  if (stages < 1) throw validation_error("fit_policy: stages must be >= 1");
  Policy policy;
  policy.label_a = cohort.label_a;
  policy.label_b = cohort.label_b;
  policy.stage_models.resize(static_cast<std::size_t>(stages));
  policy.stage_models[static_cast<std::size_t>(stages - 1)] =
      fit_final_stage(cohort, stages, terms, method, options);
  for (int k = stages - 1; k >= 1; --k) {
    const Eigen::VectorXd pseudo =
        pseudo_outcomes(cohort, k, policy.stage(k + 1), method, options);
    policy.stage_models[static_cast<std::size_t>(k - 1)] =
        fit_stage(cohort, k, pseudo, terms, options);
  }
  return policy;
}

std::vector<Arm> recommend_sequence(const Policy& policy, const Trajectory& subject) {
  const int covered = static_cast<int>(subject.stages.size());
  if (covered > policy.stages())
    throw validation_error("recommend_sequence: subject '" + subject.id + "' entered " +
                           std::to_string(covered) + " stages but the policy covers only " +
                           std::to_string(policy.stages()));

  // Per-stage counterfactual Q-values, computed once.
  std::vector<std::array<double, 2>> q(static_cast<std::size_t>(covered));
  for (int k = 1; k <= covered; ++k) {
    q[static_cast<std::size_t>(k - 1)][static_cast<int>(Arm::B)] =
        policy.stage(k).q_value(subject, k, Arm::B);
    q[static_cast<std::size_t>(k - 1)][static_cast<int>(Arm::A)] =
        policy.stage(k).q_value(subject, k, Arm::A);
  }

  // Enumerate arm sequences; a candidate replaces the incumbent only when
  // strictly better, with all-B first, so ties resolve to B stage-wise.
  std::vector<Arm> best;
  double best_sum = -std::numeric_limits<double>::infinity();
  const unsigned combos = 1u << covered;
  for (unsigned mask = 0; mask < combos; ++mask) {
    double sum = 0.0;
    std::vector<Arm> seq(static_cast<std::size_t>(covered));
    for (int k = 0; k < covered; ++k) {
      const Arm a = (mask >> (covered - 1 - k)) & 1u ? Arm::A : Arm::B;
      seq[static_cast<std::size_t>(k)] = a;
      sum += q[static_cast<std::size_t>(k)][static_cast<int>(a)];
    }
    if (sum > best_sum) {
      best_sum = sum;
      best = std::move(seq);
    }
  }
  return best;
}

}  // namespace bjq
