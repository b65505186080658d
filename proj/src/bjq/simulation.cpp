#include "bjq/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <optional>
#include <thread>

#include "bjq/errors.hpp"
#include "bjq/util.hpp"

namespace bjq {

const char* const kSexCovariate = "sex";
const char* const kTumorCovariate = "tumor_size";

TermSpec simulation_terms() {
  return TermSpec::parse("intercept + sex + tumor_size + treatment + tumor_size:treatment");
}

std::vector<std::string> SimConfig::problems() const {
  std::vector<std::string> bad;
  if (n < 2) bad.push_back("n: must be at least 2");
  if (stages < 1 || stages > 8) bad.push_back("stages: must be in 1..8");
  if (!(noise_sd >= 0.0)) bad.push_back("noise_sd: must be nonnegative");
  if (!(censor_quantile_low >= 0.0 && censor_quantile_low < censor_quantile_high &&
        censor_quantile_high <= 1.0))
    bad.push_back("censor_quantile_low/censor_quantile_high: need 0 <= low < high <= 1");
  if (!(missing_rate >= 0.0 && missing_rate <= 1.0))
    bad.push_back("missing_rate: must be in [0,1]");
  if (pmm_donors < 1) bad.push_back("pmm_donors: must be positive");
  if (replicates < 1) bad.push_back("replicates: must be positive");
  if (!(bj.tolerance > 0.0)) bad.push_back("bj.tolerance: must be positive");
  if (bj.max_iterations < 1) bad.push_back("bj.max_iterations: must be positive");
  return bad;
}

void SimConfig::validate() const {
  const auto bad = problems();
  if (!bad.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& b : bad) msg += "\n  - " + b;
    throw validation_error(msg);
  }
}

std::string method_name(FitMethod m) { return m == FitMethod::BJ ? "BJ-Q" : "Cox-Q"; }

std::string scope_name(Scope s) {
  switch (s) {
    case Scope::Stage1: return "stage1";
    case Scope::Stage2: return "stage2";
    case Scope::Cumulative: return "cumulative";
  }
  return "?";
}

GeneratedCohort generate_cohort(const SimConfig& config, RngStream& rng) {
  config.validate();
  const auto& c = config.coefficients;
  const int n = config.n;
  const int stages = config.stages;

  GeneratedCohort out;
  out.oracle.resize(static_cast<std::size_t>(n));
  std::vector<std::vector<Arm>> arms(static_cast<std::size_t>(n));

  for (int i = 0; i < n; ++i) {
    auto& rec = out.oracle[static_cast<std::size_t>(i)];
    rec.sex = rng.bernoulli(0.5) ? 1.0 : 0.0;
    rec.stages.resize(static_cast<std::size_t>(stages));
    arms[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(stages));
    for (int k = 0; k < stages; ++k) {
      auto& st = rec.stages[static_cast<std::size_t>(k)];
      st.tumor = rng.uniform(-1.0, 3.0);
      arms[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
          rng.bernoulli(0.5) ? Arm::A : Arm::B;
      const double eps = rng.normal(0.0, config.noise_sd);
      st.q_b = c.intercept + c.sex * rec.sex + c.tumor * st.tumor;
      st.q_a = st.q_b + c.treat + c.treat_tumor * st.tumor;
      st.time_b = st.q_b + eps;
      st.time_a = st.q_a + eps;
      st.decision = st.q_a > st.q_b ? Arm::A : Arm::B;
    }
  }

  // Censoring times are uniform between two empirical quantiles of the
  // cohort's total survival times.
  std::vector<double> censor_times(static_cast<std::size_t>(n),
                                   std::numeric_limits<double>::infinity());
  if (config.censoring_enabled) {
    std::vector<double> totals(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
      const auto& rec = out.oracle[static_cast<std::size_t>(i)];
      for (int k = 0; k < stages; ++k) {
        const auto& st = rec.stages[static_cast<std::size_t>(k)];
        totals[static_cast<std::size_t>(i)] +=
            arms[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] == Arm::A ? st.time_a
                                                                                     : st.time_b;
      }
    }
    const double lo = quantile(totals, config.censor_quantile_low);
    const double hi = quantile(totals, config.censor_quantile_high);
    for (int i = 0; i < n; ++i)
      censor_times[static_cast<std::size_t>(i)] = rng.uniform(lo, hi);
  }

  out.observed.covariate_names = {kSexCovariate, kTumorCovariate};
  out.observed.subjects.resize(static_cast<std::size_t>(n));
  int censored_subjects = 0;
  for (int i = 0; i < n; ++i) {
    auto& subject = out.observed.subjects[static_cast<std::size_t>(i)];
    subject.id = std::to_string(i + 1);
    const auto& rec = out.oracle[static_cast<std::size_t>(i)];
    double budget = censor_times[static_cast<std::size_t>(i)];
    bool censored = false;
    for (int k = 0; k < stages && !censored; ++k) {
      const auto& st = rec.stages[static_cast<std::size_t>(k)];
      const Arm arm = arms[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
      const double t = arm == Arm::A ? st.time_a : st.time_b;
      const double limit = config.literal_stagewise_censoring
                               ? censor_times[static_cast<std::size_t>(i)]
                               : budget;
      StageRecord sr;
      sr.covariates[kSexCovariate] = rec.sex;
      sr.covariates[kTumorCovariate] = st.tumor;
      sr.treatment = arm;
      sr.event = t <= limit;
      sr.time = sr.event ? t : limit;
      if (!sr.event) censored = true;  // follow-up ends here
      subject.stages.push_back(std::move(sr));
      budget -= t;
    }
    if (censored) ++censored_subjects;
  }
  out.censoring_fraction = static_cast<double>(censored_subjects) / static_cast<double>(n);
  return out;
}

namespace {

// Intercept of the sex-shifted logistic masking model such that the
// empirical mean masking probability equals `rate`.
double calibrate_mar_intercept(const std::vector<double>& sex_signs, double rate) {
  auto marginal = [&](double alpha) {
    double total = 0.0;
    for (double s : sex_signs) total += 1.0 / (1.0 + std::exp(-(alpha + 0.5 * s)));
    return total / static_cast<double>(sex_signs.size());
  };
  double lo = -50.0, hi = 50.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (marginal(mid) < rate) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

void apply_missingness(Cohort& cohort, const SimConfig& config, RngStream& rng) {
  const double rate = config.missing_rate;
  if (rate <= 0.0) return;

  // Collect the maskable records (tumor size at stage 1, optionally later).
  std::vector<StageRecord*> records;
  std::vector<double> sex_signs;
  for (auto& subject : cohort.subjects) {
    for (std::size_t k = 0; k < subject.stages.size(); ++k) {
      if (k > 0 && !config.mask_stage2) continue;
      auto& rec = subject.stages[k];
      if (!rec.has_covariate(kTumorCovariate)) continue;
      records.push_back(&rec);
      sex_signs.push_back(rec.covariates.at(kSexCovariate) > 0.5 ? 1.0 : -1.0);
    }
  }
  if (records.empty()) return;

  if (rate >= 1.0) {
    for (auto* rec : records) rec->covariates.erase(kTumorCovariate);
    return;
  }

  double alpha = 0.0;
  if (config.missing_mechanism == MissingMechanism::MAR_on_sex)
    alpha = calibrate_mar_intercept(sex_signs, rate);

  for (std::size_t i = 0; i < records.size(); ++i) {
    const double p = config.missing_mechanism == MissingMechanism::MCAR
                         ? rate
                         : 1.0 / (1.0 + std::exp(-(alpha + 0.5 * sex_signs[i])));
    if (rng.bernoulli(p)) records[i]->covariates.erase(kTumorCovariate);
  }
}

void pmm_impute(Cohort& cohort, const SimConfig& config, RngStream& rng) {
  struct Row {
    StageRecord* rec;
    double pred = 0.0;
  };
  std::vector<StageRecord*> complete, missing;
  for (auto& subject : cohort.subjects) {
    for (auto& rec : subject.stages) {
      if (rec.has_covariate(kTumorCovariate)) complete.push_back(&rec);
      else missing.push_back(&rec);
    }
  }
  if (missing.empty()) return;
  if (static_cast<int>(complete.size()) < config.pmm_donors)
    throw insufficient_donors_error("pmm_impute: " + std::to_string(complete.size()) +
                                    " complete cases but " + std::to_string(config.pmm_donors) +
                                    " donors requested");

  auto predictor_row = [](const StageRecord& rec) {
    Eigen::RowVectorXd row(5);
    row << 1.0, rec.covariates.at(kSexCovariate), rec.time, rec.event ? 1.0 : 0.0,
        rec.treatment == Arm::A ? 1.0 : 0.0;
    return row;
  };

  Eigen::MatrixXd x(static_cast<Eigen::Index>(complete.size()), 5);
  Eigen::VectorXd y(static_cast<Eigen::Index>(complete.size()));
  for (std::size_t i = 0; i < complete.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = predictor_row(*complete[i]);
    y(static_cast<Eigen::Index>(i)) = complete[i]->covariates.at(kTumorCovariate);
  }
  // Rank-revealing solve: collinear predictors (e.g. a constant event flag)
  // just drop out of the prediction.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  const Eigen::VectorXd coef = qr.solve(y);

  std::vector<Row> donors(complete.size());
  for (std::size_t i = 0; i < complete.size(); ++i)
    donors[i] = {complete[i], predictor_row(*complete[i]) * coef};
  std::stable_sort(donors.begin(), donors.end(),
                   [](const Row& a, const Row& b) { return a.pred < b.pred; });

  const auto k = static_cast<std::size_t>(config.pmm_donors);
  for (auto* rec : missing) {
    const double pred = predictor_row(*rec) * coef;
    // Window of the k nearest predicted means in the sorted donor list.
    auto it = std::lower_bound(donors.begin(), donors.end(), pred,
                               [](const Row& r, double v) { return r.pred < v; });
    std::size_t right = static_cast<std::size_t>(it - donors.begin());
    std::size_t left = right;  // [left, right) is the current window
    while (right - left < k) {
      const bool can_left = left > 0;
      const bool can_right = right < donors.size();
      if (!can_left && !can_right) break;
      const double dl = can_left ? pred - donors[left - 1].pred
                                 : std::numeric_limits<double>::infinity();
      const double dr = can_right ? donors[right].pred - pred
                                  : std::numeric_limits<double>::infinity();
      if (dl <= dr) --left; else ++right;
    }
    const std::size_t chosen = left + rng.uniform_index(right - left);
    rec->covariates[kTumorCovariate] = donors[chosen].rec->covariates.at(kTumorCovariate);
  }
}

namespace {

Cohort oracle_evaluation_cohort(const GeneratedCohort& gen) {
  Cohort eval;
  eval.covariate_names = gen.observed.covariate_names;
  eval.label_a = gen.observed.label_a;
  eval.label_b = gen.observed.label_b;
  eval.subjects.resize(gen.oracle.size());
  for (std::size_t i = 0; i < gen.oracle.size(); ++i) {
    auto& subject = eval.subjects[i];
    subject.id = std::to_string(i + 1);
    for (const auto& st : gen.oracle[i].stages) {
      StageRecord rec;
      rec.covariates[kSexCovariate] = gen.oracle[i].sex;
      rec.covariates[kTumorCovariate] = st.tumor;
      rec.treatment = Arm::B;
      rec.time = 1.0;
      rec.event = true;
      subject.stages.push_back(std::move(rec));
    }
  }
  return eval;
}

struct ReplicateOutput {
  std::vector<ReplicateAccuracy> accuracies;
  std::vector<QValueRow> q_values;
};

std::string sequence_label(const std::vector<Arm>& seq) {
  std::string s;
  for (Arm a : seq) s += a == Arm::A ? 'A' : 'B';
  return s;
}

ReplicateOutput run_replicate(const SimConfig& config, int replicate) {
  RngStream rng(config.seed, static_cast<std::uint64_t>(replicate));
  GeneratedCohort gen = generate_cohort(config, rng);
  apply_missingness(gen.observed, config, rng);
  pmm_impute(gen.observed, config, rng);

  const TermSpec terms = simulation_terms();
  QFitOptions options;
  options.bj = config.bj;

  const Policy bj_policy = fit_policy(gen.observed, config.stages, terms, FitMethod::BJ, options);
  const Policy cox_policy =
      fit_policy(gen.observed, config.stages, terms, FitMethod::Cox, options);
  const Cohort eval = oracle_evaluation_cohort(gen);

  const int n = static_cast<int>(eval.subjects.size());
  const int stages = config.stages;

  ReplicateOutput out;
  for (FitMethod method : {FitMethod::BJ, FitMethod::Cox}) {
    const Policy& policy = method == FitMethod::BJ ? bj_policy : cox_policy;
    std::vector<int> stage_matches(static_cast<std::size_t>(stages), 0);
    int sequence_matches = 0;
    for (int i = 0; i < n; ++i) {
      const auto& subject = eval.subjects[static_cast<std::size_t>(i)];
      const auto& oracle = gen.oracle[static_cast<std::size_t>(i)];
      const std::vector<Arm> estimated = recommend_sequence(policy, subject);
      bool all = true;
      for (int k = 0; k < stages; ++k) {
        const bool match =
            estimated[static_cast<std::size_t>(k)] == oracle.stages[static_cast<std::size_t>(k)].decision;
        if (match) ++stage_matches[static_cast<std::size_t>(k)];
        all = all && match;
      }
      if (all) ++sequence_matches;
    }
    auto push = [&](Scope scope, double value) {
      out.accuracies.push_back({replicate, method, scope, value});
    };
    push(Scope::Stage1, static_cast<double>(stage_matches[0]) / n);
    if (stages >= 2) {
      push(Scope::Stage2, static_cast<double>(stage_matches[1]) / n);
      push(Scope::Cumulative, static_cast<double>(sequence_matches) / n);
    }
  }

  // Per-subject Q-value export rows (single-replicate boxplot data).
  for (int i = 0; i < n; ++i) {
    const auto& subject = eval.subjects[static_cast<std::size_t>(i)];
    const auto& oracle = gen.oracle[static_cast<std::size_t>(i)];
    if (stages == 1) {
      for (Arm arm : {Arm::A, Arm::B}) {
        QValueRow row;
        row.subject = i + 1;
        row.label = arm == Arm::A ? "A" : "B";
        row.q_true = arm == Arm::A ? oracle.stages[0].q_a : oracle.stages[0].q_b;
        row.q_bj = bj_policy.stage(1).q_value(subject, 1, arm);
        row.q_cox = cox_policy.stage(1).q_value(subject, 1, arm);
        out.q_values.push_back(std::move(row));
      }
    } else {
      std::vector<Arm> seq(static_cast<std::size_t>(stages), Arm::B);
      const unsigned combos = 1u << stages;
      for (unsigned mask = 0; mask < combos; ++mask) {
        for (int k = 0; k < stages; ++k)
          seq[static_cast<std::size_t>(k)] = (mask >> (stages - 1 - k)) & 1u ? Arm::A : Arm::B;
        QValueRow row;
        row.subject = i + 1;
        row.label = sequence_label(seq);
        for (int k = 0; k < stages; ++k) {
          const Arm a = seq[static_cast<std::size_t>(k)];
          const auto& st = oracle.stages[static_cast<std::size_t>(k)];
          row.q_true += a == Arm::A ? st.q_a : st.q_b;
          row.q_bj += bj_policy.stage(k + 1).q_value(subject, k + 1, a);
          row.q_cox += cox_policy.stage(k + 1).q_value(subject, k + 1, a);
        }
        out.q_values.push_back(std::move(row));
      }
    }
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const SimConfig& config, int threads) {
  config.validate();
  const int reps = config.replicates;
  std::vector<std::optional<ReplicateOutput>> outputs(static_cast<std::size_t>(reps));
  std::vector<std::string> failures(static_cast<std::size_t>(reps));

  auto work = [&](int r) {
    try {
      outputs[static_cast<std::size_t>(r)] = run_replicate(config, r);
    } catch (const fit_error& e) {
      failures[static_cast<std::size_t>(r)] = e.what();
    }
  };

  if (threads <= 1 || reps == 1) {
    for (int r = 0; r < reps; ++r) work(r);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
      while (true) {
        const int r = next.fetch_add(1);
        if (r >= reps) return;
        try {
          work(r);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    const int count = std::min(threads, reps);
    pool.reserve(static_cast<std::size_t>(count));
    for (int t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }

  ExperimentResult result;
  for (int r = 0; r < reps; ++r) {
    if (outputs[static_cast<std::size_t>(r)]) continue;
    ++result.failed_replicates;
    result.failure_messages.push_back("replicate " + std::to_string(r) + ": " +
                                      failures[static_cast<std::size_t>(r)]);
  }
  if (result.failed_replicates * 10 > reps) {
    std::string msg = "run_experiment: " + std::to_string(result.failed_replicates) + " of " +
                      std::to_string(reps) + " replicates failed (>10%)";
    for (const auto& m : result.failure_messages) msg += "\n  " + m;
    throw fit_error(msg);
  }

  // Ordered aggregation: per-replicate rows by index, then six-number
  // summaries per method and scope.
  std::vector<Scope> scopes{Scope::Stage1};
  if (config.stages >= 2) {
    scopes.push_back(Scope::Stage2);
    scopes.push_back(Scope::Cumulative);
  }
  for (int r = 0; r < reps; ++r) {
    if (!outputs[static_cast<std::size_t>(r)]) continue;
    auto& rep = *outputs[static_cast<std::size_t>(r)];
    result.replicate_accuracies.insert(result.replicate_accuracies.end(),
                                       rep.accuracies.begin(), rep.accuracies.end());
    if (result.q_values.empty()) result.q_values = std::move(rep.q_values);
  }
  for (FitMethod method : {FitMethod::BJ, FitMethod::Cox}) {
    for (Scope scope : scopes) {
      std::vector<double> values;
      for (const auto& acc : result.replicate_accuracies)
        if (acc.method == method && acc.scope == scope) values.push_back(acc.accuracy);
      if (values.empty()) continue;
      const SixNumber s = six_number_summary(values);
      result.summaries.push_back({method, scope, s.min, s.q1, s.median, s.mean, s.q3, s.max});
    }
  }
  return result;
}

}  // namespace bjq
