#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bjq/km.hpp"

namespace bjq {

// Regression sample for one decision stage: design rows (one column of
// ones at `intercept_col`), observed durations, and event flags.
struct StageSample {
  Eigen::MatrixXd design;
  Eigen::VectorXd times;
  std::vector<bool> events;
  int intercept_col = 0;

  void validate() const;
  Eigen::Index size() const { return design.rows(); }
  Eigen::Index dim() const { return design.cols(); }
  int event_count() const;
};

struct BJConfig {
  double tolerance = 1e-6;      // sup-norm on successive coefficient vectors
  int max_iterations = 100;
  bool tail_correction = true;
  double rcond_min = 1e-10;     // Gram matrix reciprocal condition threshold
};

struct BJFit {
  Eigen::VectorXd beta;
  KMCurve residual_km;
  int iterations = 0;
  bool converged = false;
  bool oscillation_detected = false;
};

// Conditional-expectation imputation of censored outcomes at coefficient
// vector `beta`: event rows keep their observed time, censored rows get
// E[T | T > Y, H] estimated from the KM curve of the residuals.
Eigen::VectorXd bj_impute(const StageSample& sample, const Eigen::VectorXd& beta,
                          bool tail_correction = true);

// One step of the iterative estimator: the closed-form least-squares
// solution on outcomes imputed at `b`. Slopes come from the centered normal
// equations; the intercept is recovered from the means so the result is the
// exact OLS fit of the imputed outcomes on the design.
Eigen::VectorXd bj_step(const StageSample& sample, const Eigen::VectorXd& b,
                        const BJConfig& config = {});

// Iterate bj_step from the uncensored-only least-squares start until the
// coefficients settle (or a 2-cycle is detected, in which case the two
// cycle points are averaged).
BJFit bj_fit(const StageSample& sample, const BJConfig& config = {});

}  // namespace bjq
