#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "bjq/qlearning.hpp"
#include "bjq/simulation.hpp"
#include "bjq/types.hpp"

namespace bjq {

// One plottable survival curve: step values at event times plus the
// starting point (0, 1, n).
struct KMExport {
  std::string label;
  struct Point {
    double time;
    double survival;
    int at_risk;
  };
  std::vector<Point> points;
};

// Observed (censoring respected) and imputed (all-event) survival curves per
// arm for single-stage data; `imputed_times` is one value per subject in
// cohort order. Curve order: observed_A, observed_B, imputed_A, imputed_B.
std::vector<KMExport> export_km_pairs(const Cohort& cohort,
                                      const Eigen::VectorXd& imputed_times);

void write_km_export_csv(const std::vector<KMExport>& curves, const std::string& path);

struct SummaryRow {
  int n = 0;
  FitMethod method = FitMethod::BJ;
  Scope scope = Scope::Stage1;
  double min = 0, q1 = 0, median = 0, mean = 0, q3 = 0, max = 0;
};

// CSV columns (n, method, scope, min, q1, median, mean, q3, max), values to
// three decimals, rows ordered by (n, method, scope).
void write_summary_tables(std::vector<SummaryRow> rows, const std::string& path);

void write_qvalues_csv(const std::vector<QValueRow>& rows, int stages, const std::string& path);
void write_accuracies_csv(const std::vector<ReplicateAccuracy>& rows, const std::string& path);

}  // namespace bjq
