#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "bjq/buckley_james.hpp"
#include "bjq/cox.hpp"
#include "bjq/terms.hpp"
#include "bjq/types.hpp"

namespace bjq {

enum class FitMethod { BJ, Cox };

// Fitted Q-function for one stage. For BJ the model is the coefficient
// vector over the term columns; for Cox the Q-value is the restricted-mean
// prediction from the stage's proportional-hazards fit (whose design is the
// term set minus the intercept).
struct StageQModel {
  int stage_index = 1;
  TermSpec terms;
  FitMethod method = FitMethod::BJ;
  Eigen::VectorXd beta_hat;
  std::optional<CoxFit> cox;

  double q_value(const Eigen::RowVectorXd& design_row) const;
  double q_value(const Trajectory& subject, int stage, Arm arm) const;
};

struct Policy {
  std::vector<StageQModel> stage_models;  // index k-1 = stage k
  std::string label_a = "A";
  std::string label_b = "B";

  int stages() const { return static_cast<int>(stage_models.size()); }
  const StageQModel& stage(int k) const { return stage_models.at(static_cast<std::size_t>(k - 1)); }
};

struct QFitOptions {
  BJConfig bj;
  CoxConfig cox;
};

// Regression sample (design, durations, event flags) for the entrants of
// one stage.
StageSample stage_sample(const Cohort& cohort, int stage, const TermSpec& terms);

// Stage-k outcome estimates under the observed treatment, one per entrant in
// cohort order: BJ-imputed times (observed for events), or Cox
// restricted-mean predictions.
Eigen::VectorXd stage_outcome_estimates(const Cohort& cohort, int stage, const TermSpec& terms,
                                        FitMethod method, const QFitOptions& options = {});

// Final-stage Q-model: the Buckley-James coefficient vector itself, or the
// stage's Cox fit.
StageQModel fit_final_stage(const Cohort& cohort, int stage, const TermSpec& terms,
                            FitMethod method, const QFitOptions& options = {});

// Pseudo-outcomes for stage k: the imputed (BJ) or model-predicted (Cox)
// stage-k outcome plus the best achievable next-stage Q-value; subjects who
// never reached stage k+1 contribute no future reward. One value per stage-k
// entrant, in cohort order.
Eigen::VectorXd pseudo_outcomes(const Cohort& cohort, int stage, const StageQModel& next_model,
                                FitMethod method, const QFitOptions& options = {});

// Least-squares Q-regression of pseudo-outcomes on the stage design.
StageQModel fit_stage(const Cohort& cohort, int stage, const Eigen::VectorXd& pseudo,
                      const TermSpec& terms, const QFitOptions& options = {});

// Arm with the strictly higher estimated Q-value; ties go to B.
Arm decide(const StageQModel& model, const Trajectory& subject, int stage);

// Backward-recursive fit over all stages.
Policy fit_policy(const Cohort& cohort, int stages, const TermSpec& terms, FitMethod method,
                  const QFitOptions& options = {});

// Arm sequence maximizing the summed stage Q-values, by enumeration over
// all arm combinations; ties resolve toward B at every stage.
std::vector<Arm> recommend_sequence(const Policy& policy, const Trajectory& subject);

}  // namespace bjq
