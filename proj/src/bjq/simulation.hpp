#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bjq/qlearning.hpp"
#include "bjq/rng.hpp"
#include "bjq/types.hpp"

namespace bjq {

enum class MissingMechanism { MCAR, MAR_on_sex };

// Outcome model coefficients for the synthetic cohorts: survival time is
// intercept + sex*Sex + tumor*TumorSize + treat*1(A) + treat_tumor*TumorSize*1(A) + noise.
struct SimCoefficients {
  double intercept = 10.0;
  double sex = 0.1;
  double tumor = -1.0;
  double treat = 0.01;
  double treat_tumor = 1.3;
};

struct SimConfig {
  int n = 500;
  int stages = 1;
  SimCoefficients coefficients;
  double noise_sd = 1.0;
  bool censoring_enabled = true;
  double censor_quantile_low = 0.2;
  double censor_quantile_high = 0.8;
  // Censor each stage against the whole censoring time instead of the
  // remaining budget (the comparison is then cumulative-time free).
  bool literal_stagewise_censoring = false;
  double missing_rate = 0.5;
  MissingMechanism missing_mechanism = MissingMechanism::MAR_on_sex;
  bool mask_stage2 = true;  // false restricts masking to stage 1
  int pmm_donors = 5;
  int replicates = 50;
  std::uint64_t seed = 20250810;
  BJConfig bj;

  std::vector<std::string> problems() const;  // one entry per bad field
  void validate() const;  // throws validation_error listing every bad field
};

// Ground truth for one subject and stage: potential outcomes under both
// arms, the noise-free counterfactual expected survival times, and the
// resulting oracle decision.
struct OracleStage {
  double tumor = 0.0;
  double time_a = 0.0, time_b = 0.0;
  double q_a = 0.0, q_b = 0.0;
  Arm decision = Arm::B;
};

struct OracleRecord {
  double sex = 0.0;
  std::vector<OracleStage> stages;
};

struct GeneratedCohort {
  Cohort observed;
  std::vector<OracleRecord> oracle;
  double censoring_fraction = 0.0;  // subjects censored at some stage
};

extern const char* const kSexCovariate;
extern const char* const kTumorCovariate;

// The default Q-model terms for simulated cohorts:
// intercept + sex + tumor_size + treatment + tumor_size:treatment.
TermSpec simulation_terms();

GeneratedCohort generate_cohort(const SimConfig& config, RngStream& rng);

// Mask tumor-size values at the configured rate (MCAR, or MAR with the
// masking probability shifted +-0.5 on the logit scale by sex and the
// intercept calibrated so the marginal rate is preserved).
void apply_missingness(Cohort& cohort, const SimConfig& config, RngStream& rng);

// Single-imputation predictive mean matching for masked tumor sizes:
// regress on (sex, observed time, event flag, treatment) over complete
// records, then donate the observed value of one of the `pmm_donors`
// complete records with the closest predicted mean.
void pmm_impute(Cohort& cohort, const SimConfig& config, RngStream& rng);

enum class Scope { Stage1, Stage2, Cumulative };

std::string method_name(FitMethod m);
std::string scope_name(Scope s);

struct AccuracySummary {
  FitMethod method = FitMethod::BJ;
  Scope scope = Scope::Stage1;
  double min = 0, q1 = 0, median = 0, mean = 0, q3 = 0, max = 0;
};

struct ReplicateAccuracy {
  int replicate = 0;
  FitMethod method = FitMethod::BJ;
  Scope scope = Scope::Stage1;
  double accuracy = 0.0;
};

// Per-subject true and estimated Q-values from one replicate, for the
// boxplot exports. For one stage `label` is an arm; for multi-stage runs it
// is an arm sequence such as "AB" and the values are cumulative.
struct QValueRow {
  int subject = 0;
  std::string label;
  double q_true = 0.0;
  double q_bj = 0.0;
  double q_cox = 0.0;
};

struct ExperimentResult {
  std::vector<AccuracySummary> summaries;
  std::vector<ReplicateAccuracy> replicate_accuracies;
  std::vector<QValueRow> q_values;  // first successful replicate
  int failed_replicates = 0;
  std::vector<std::string> failure_messages;
};

// Replicated experiment: generate, mask, impute, fit BJ and Cox policies,
// and score decisions against the oracle. Replicates run on independent RNG
// substreams and may execute in parallel; aggregation is ordered by
// replicate index. Failed replicates are excluded and counted; more than
// 10% failures aborts.
ExperimentResult run_experiment(const SimConfig& config, int threads = 1);

}  // namespace bjq
