#pragma once

#include <string>
#include <vector>

#include "bjq/csv.hpp"
#include "bjq/qlearning.hpp"
#include "bjq/simulation.hpp"

namespace bjq {

// Runs the replicated experiment described by the config file (empty path =
// defaults) and writes summary.csv, accuracies.csv, qvalues.csv and
// manifest.txt under out_dir. The manifest lists the output files, the
// resolved configuration and the replicate failure count; re-running with
// the same configuration reproduces the listed files byte for byte.
// Returns the written output files (manifest last).
std::vector<std::string> run_simulate(const std::string& config_path, const std::string& out_dir,
                                      int threads);

// Fits a policy on a cohort and writes the model files plus
// recommendations.csv, imputed.csv and (single-stage only) km_curves.csv.
Policy run_fit(const Cohort& cohort, int stages, FitMethod method, const TermSpec& terms,
               const std::string& out_dir);

// Per-subject recommended arms with both counterfactual Q-values per stage.
void write_recommendations(const Policy& policy, const Cohort& cohort, const std::string& path);

}  // namespace bjq
