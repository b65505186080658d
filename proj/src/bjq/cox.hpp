#pragma once

#include <Eigen/Dense>
#include <vector>

namespace bjq {

struct CoxConfig {
  double gradient_tolerance = 1e-8;  // sup-norm of the score at the optimum
  int max_iterations = 50;
  double coefficient_bound = 50.0;   // beyond this the likelihood is monotone
  double rcond_min = 1e-10;
};

// Proportional-hazards fit: coefficients maximizing the Breslow-tie log
// partial likelihood, plus the Breslow cumulative baseline hazard step
// function and the largest observed time (the integration horizon for
// expected-survival predictions).
struct CoxFit {
  Eigen::VectorXd beta;
  std::vector<std::pair<double, double>> baseline_cum_hazard;  // (time, cumulative hazard)
  double log_likelihood = 0.0;
  bool converged = false;
  int iterations = 0;
  double max_time = 0.0;
};

// Log partial likelihood and its analytic gradient at `beta` (Breslow ties).
double cox_log_partial_likelihood(const Eigen::VectorXd& times,
                                  const std::vector<bool>& event_flags,
                                  const Eigen::MatrixXd& covariates,
                                  const Eigen::VectorXd& beta);
Eigen::VectorXd cox_score(const Eigen::VectorXd& times,
                          const std::vector<bool>& event_flags,
                          const Eigen::MatrixXd& covariates,
                          const Eigen::VectorXd& beta);

// Newton-Raphson with step halving from beta = 0.
CoxFit cox_fit(const Eigen::VectorXd& times, const std::vector<bool>& event_flags,
               const Eigen::MatrixXd& covariates, const CoxConfig& config = {});

// Restricted mean survival for a covariate row: the exact integral of the
// piecewise-constant survival function exp(-Lambda0(t) * exp(beta'x)) from
// 0 to the largest observed time.
double cox_expected_survival(const CoxFit& fit, const Eigen::VectorXd& covariate_row);

}  // namespace bjq
