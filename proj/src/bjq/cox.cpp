#include "bjq/cox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bjq/errors.hpp"
#include "bjq/linalg.hpp"

namespace bjq {

namespace {

struct SortedSample {
  // Row indices ordered by descending time. A whole tied-time group joins
  // the risk set before its events are scored, so tied censorings stay at
  // risk for tied events.
  std::vector<std::size_t> order;
  std::vector<std::size_t> group_start;  // starts of tied-time groups
};

SortedSample sort_sample(const Eigen::VectorXd& times) {
  SortedSample s;
  s.order.resize(times.size());
  std::iota(s.order.begin(), s.order.end(), 0);
  std::sort(s.order.begin(), s.order.end(), [&](std::size_t a, std::size_t b) {
    return times(a) > times(b);
  });
  for (std::size_t i = 0; i < s.order.size(); ++i) {
    if (i == 0 || times(s.order[i]) != times(s.order[i - 1])) s.group_start.push_back(i);
  }
  return s;
}

void check_inputs(const Eigen::VectorXd& times, const std::vector<bool>& flags,
                  const Eigen::MatrixXd& x) {
  if (times.size() == 0) throw validation_error("cox: empty sample");
  if (static_cast<Eigen::Index>(flags.size()) != times.size() || x.rows() != times.size())
    throw validation_error("cox: row counts differ");
  if (!x.allFinite() || !times.allFinite())
    throw validation_error("cox: non-finite input");
  if (std::none_of(flags.begin(), flags.end(), [](bool b) { return b; }))
    throw no_events_error("cox: no events in sample");
}

// Accumulates log-likelihood, score and information in one sweep over the
// risk sets (times descending, so the at-risk sums grow as we go). The
// running sums use extended precision: the score must be resolvable down to
// the 1e-8 convergence tolerance even for a few thousand rows.
struct Accumulated {
  double loglik = 0.0;
  Eigen::VectorXd score;
  Eigen::MatrixXd info;
  bool finite = true;
};

using VectorXld = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

Accumulated accumulate(const Eigen::VectorXd& times, const std::vector<bool>& flags,
                       const Eigen::MatrixXd& x, const Eigen::VectorXd& beta,
                       bool want_derivatives) {
  const Eigen::Index p = x.cols();
  Accumulated acc;

  const SortedSample s = sort_sample(times);
  const Eigen::VectorXd eta = x * beta;
  const MatrixXld xl = x.cast<long double>();

  long double loglik = 0.0L;
  long double s0 = 0.0L;
  VectorXld s1 = VectorXld::Zero(p);
  MatrixXld s2 = MatrixXld::Zero(p, p);
  VectorXld score = VectorXld::Zero(p);
  MatrixXld info = MatrixXld::Zero(p, p);

  const std::size_t n = s.order.size();
  for (std::size_t g = 0; g < s.group_start.size(); ++g) {
    const std::size_t begin = s.group_start[g];
    const std::size_t end = g + 1 < s.group_start.size() ? s.group_start[g + 1] : n;
    // Everyone with this time joins the risk set before the group's events.
    for (std::size_t i = begin; i < end; ++i) {
      const auto row = static_cast<Eigen::Index>(s.order[i]);
      const long double w = std::exp(static_cast<long double>(eta(row)));
      if (!std::isfinite(static_cast<double>(w))) { acc.finite = false; return acc; }
      s0 += w;
      if (want_derivatives) {
        s1 += w * xl.row(row).transpose();
        s2 += w * xl.row(row).transpose() * xl.row(row);
      }
    }
    int d = 0;
    VectorXld xsum = VectorXld::Zero(p);
    for (std::size_t i = begin; i < end; ++i) {
      const auto row = static_cast<Eigen::Index>(s.order[i]);
      if (!flags[s.order[i]]) continue;
      ++d;
      loglik += eta(row);
      if (want_derivatives) xsum += xl.row(row).transpose();
    }
    if (d > 0) {
      loglik -= d * std::log(s0);
      if (want_derivatives) {
        const VectorXld mu = s1 / s0;
        score += xsum - d * mu;
        info += d * (s2 / s0 - mu * mu.transpose());
      }
    }
  }
  acc.loglik = static_cast<double>(loglik);
  acc.score = score.cast<double>();
  acc.info = info.cast<double>();
  if (!std::isfinite(acc.loglik)) acc.finite = false;
  return acc;
}

}  // namespace

double cox_log_partial_likelihood(const Eigen::VectorXd& times,
                                  const std::vector<bool>& event_flags,
                                  const Eigen::MatrixXd& covariates,
                                  const Eigen::VectorXd& beta) {
  check_inputs(times, event_flags, covariates);
  return accumulate(times, event_flags, covariates, beta, false).loglik;
}

Eigen::VectorXd cox_score(const Eigen::VectorXd& times,
                          const std::vector<bool>& event_flags,
                          const Eigen::MatrixXd& covariates,
                          const Eigen::VectorXd& beta) {
  check_inputs(times, event_flags, covariates);
  return accumulate(times, event_flags, covariates, beta, true).score;
}

CoxFit cox_fit(const Eigen::VectorXd& times, const std::vector<bool>& event_flags,
               const Eigen::MatrixXd& covariates, const CoxConfig& config) {
  check_inputs(times, event_flags, covariates);
  const Eigen::Index p = covariates.cols();
  if (p == 0) throw validation_error("cox_fit: design has no columns");

  CoxFit fit;
  fit.beta = Eigen::VectorXd::Zero(p);
  Accumulated acc = accumulate(times, event_flags, covariates, fit.beta, true);
  fit.log_likelihood = acc.loglik;

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    fit.iterations = iter;
    if (acc.score.lpNorm<Eigen::Infinity>() < config.gradient_tolerance) {
      fit.converged = true;
      break;
    }
    if (reciprocal_condition(acc.info) < config.rcond_min) {
      throw rank_deficiency_error("cox_fit: information matrix is singular (columns " +
                                  column_list(dependent_columns(covariates)) +
                                  " are linearly dependent)");
    }
    Eigen::VectorXd step = acc.info.ldlt().solve(acc.score);

    // Step halving: accept the first step that does not decrease the
    // log partial likelihood (up to rounding noise in the sum).
    const double slack = 1e-11 * (1.0 + std::fabs(fit.log_likelihood));
    double scale = 1.0;
    Eigen::VectorXd candidate;
    Accumulated cand_acc;
    bool accepted = false;
    for (int h = 0; h < 30; ++h, scale *= 0.5) {
      candidate = fit.beta + scale * step;
      cand_acc = accumulate(times, event_flags, covariates, candidate, true);
      if (cand_acc.finite && cand_acc.loglik >= fit.log_likelihood - slack) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // no ascent direction left; report non-convergence

    fit.beta = candidate;
    acc = cand_acc;
    fit.log_likelihood = acc.loglik;

    if (fit.beta.lpNorm<Eigen::Infinity>() > config.coefficient_bound) {
      throw separation_error(
          "cox_fit: monotone likelihood, coefficient diverged beyond " +
          std::to_string(config.coefficient_bound) + " (separation)");
    }
  }
  if (!fit.converged && acc.score.lpNorm<Eigen::Infinity>() < config.gradient_tolerance)
    fit.converged = true;

  // Breslow cumulative baseline hazard at the fitted coefficients.
  const SortedSample s = sort_sample(times);
  const Eigen::VectorXd eta = covariates * fit.beta;
  const std::size_t n = s.order.size();
  double s0 = 0.0;
  std::vector<std::pair<double, double>> increments;  // at event times, descending
  for (std::size_t g = 0; g < s.group_start.size(); ++g) {
    const std::size_t begin = s.group_start[g];
    const std::size_t end = g + 1 < s.group_start.size() ? s.group_start[g + 1] : n;
    int d = 0;
    for (std::size_t i = begin; i < end; ++i) {
      s0 += std::exp(eta(s.order[i]));
      if (event_flags[s.order[i]]) ++d;
    }
    if (d > 0) increments.emplace_back(times(s.order[begin]), static_cast<double>(d) / s0);
  }
  std::reverse(increments.begin(), increments.end());
  double cum = 0.0;
  for (auto& [t, inc] : increments) {
    cum += inc;
    fit.baseline_cum_hazard.emplace_back(t, cum);
  }
  fit.max_time = times.maxCoeff();
  return fit;
}

double cox_expected_survival(const CoxFit& fit, const Eigen::VectorXd& covariate_row) {
  if (covariate_row.size() != fit.beta.size())
    throw validation_error("cox_expected_survival: covariate row length mismatch");
  const double risk = std::exp(fit.beta.dot(covariate_row));

  // Survival is piecewise constant between hazard jumps; sum the rectangles.
  double integral = 0.0;
  double prev_t = 0.0;
  double prev_surv = 1.0;
  for (const auto& [t, lambda] : fit.baseline_cum_hazard) {
    if (t > fit.max_time) break;
    integral += prev_surv * (t - prev_t);
    prev_t = t;
    prev_surv = std::exp(-lambda * risk);
  }
  if (fit.max_time > prev_t) integral += prev_surv * (fit.max_time - prev_t);
  return integral;
}

}  // namespace bjq
