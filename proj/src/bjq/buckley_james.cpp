#include "bjq/buckley_james.hpp"

#include <algorithm>
#include <cmath>

#include "bjq/errors.hpp"
#include "bjq/linalg.hpp"

namespace bjq {

void StageSample::validate() const {
  if (design.rows() == 0) throw validation_error("StageSample: empty sample");
  if (times.size() != design.rows() || static_cast<Eigen::Index>(events.size()) != design.rows())
    throw validation_error("StageSample: row counts differ");
  if (intercept_col < 0 || intercept_col >= design.cols())
    throw validation_error("StageSample: intercept column out of range");
  if (!design.allFinite()) throw validation_error("StageSample: non-finite design entry");
  if (!times.allFinite()) throw validation_error("StageSample: non-finite observed time");
  if (event_count() == 0) throw no_events_error("StageSample: no uncensored observations");
}

int StageSample::event_count() const {
  return static_cast<int>(std::count(events.begin(), events.end(), true));
}

Eigen::VectorXd bj_impute(const StageSample& sample, const Eigen::VectorXd& beta,
                          bool tail_correction) {
  sample.validate();
  if (beta.size() != sample.dim())
    throw validation_error("bj_impute: beta length does not match design columns");

  const Eigen::VectorXd linpred = sample.design * beta;
  const Eigen::VectorXd resid = sample.times - linpred;
  std::vector<double> rv(resid.data(), resid.data() + resid.size());
  const KMCurve km = km_estimate(rv, sample.events, tail_correction);

  // Suffix sums over jumps for O(log m) conditional means per censored row.
  const std::size_t m = km.jump_points.size();
  std::vector<double> mass_above(m + 1, 0.0), moment_above(m + 1, 0.0);
  for (std::size_t j = m; j-- > 0;) {
    mass_above[j] = mass_above[j + 1] + km.mass[j];
    moment_above[j] = moment_above[j + 1] + km.mass[j] * km.jump_points[j];
  }

  Eigen::VectorXd out(sample.size());
  for (Eigen::Index i = 0; i < sample.size(); ++i) {
    if (sample.events[i]) {
      out(i) = sample.times(i);
      continue;
    }
    const double e = resid(i);
    const auto it = std::upper_bound(km.jump_points.begin(), km.jump_points.end(), e);
    const auto j = static_cast<std::size_t>(it - km.jump_points.begin());
    const double cond_mean =
        mass_above[j] > 0.0 ? moment_above[j] / mass_above[j] : km.jump_points.back();
    out(i) = cond_mean + linpred(i);
  }
  return out;
}

Eigen::VectorXd bj_step(const StageSample& sample, const Eigen::VectorXd& b,
                        const BJConfig& config) {
  const Eigen::VectorXd imputed = bj_impute(sample, b, config.tail_correction);

  const Eigen::Index n = sample.size();
  const Eigen::Index p = sample.dim();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);

  // Non-intercept columns, centered.
  Eigen::MatrixXd z(n, p - 1);
  std::vector<int> zcols;
  for (Eigen::Index j = 0, c = 0; j < p; ++j) {
    if (j == sample.intercept_col) continue;
    z.col(c++) = sample.design.col(j);
    zcols.push_back(static_cast<int>(j));
  }

  const double ymean = imputed.mean();
  if (p == 1) {
    beta(sample.intercept_col) = ymean;
    return beta;
  }

  const Eigen::RowVectorXd zmean = z.colwise().mean();
  const Eigen::MatrixXd zc = z.rowwise() - zmean;
  const Eigen::VectorXd yc = imputed.array() - ymean;

  const Eigen::MatrixXd gram = zc.transpose() * zc;
  if (reciprocal_condition(gram) < config.rcond_min) {
    std::vector<int> offending;
    for (int c : dependent_columns(zc)) offending.push_back(zcols[static_cast<std::size_t>(c)]);
    throw rank_deficiency_error("bj_step: centered design is rank deficient (columns " +
                                column_list(offending) + " are linearly dependent)");
  }

  const Eigen::VectorXd slopes = gram.ldlt().solve(zc.transpose() * yc);
  for (Eigen::Index c = 0; c < slopes.size(); ++c) beta(zcols[static_cast<std::size_t>(c)]) = slopes(c);
  beta(sample.intercept_col) = ymean - zmean * slopes;
  return beta;
}

BJFit bj_fit(const StageSample& sample, const BJConfig& config) {
  sample.validate();
  const Eigen::Index p = sample.dim();
  if (sample.event_count() < p)
    throw no_events_error("bj_fit: fewer uncensored rows (" +
                          std::to_string(sample.event_count()) + ") than design columns (" +
                          std::to_string(p) + ")");

  // Initial estimate: least squares on the uncensored rows only.
  const int ne = sample.event_count();
  Eigen::MatrixXd xe(ne, p);
  Eigen::VectorXd ye(ne);
  for (Eigen::Index i = 0, r = 0; i < sample.size(); ++i) {
    if (!sample.events[i]) continue;
    xe.row(r) = sample.design.row(i);
    ye(r) = sample.times(i);
    ++r;
  }
  Eigen::VectorXd prev = ols_solve_checked(xe, ye, config.rcond_min, "bj_fit (uncensored start)");

  BJFit fit;
  Eigen::VectorXd prev2;
  for (int l = 1; l <= config.max_iterations; ++l) {
    Eigen::VectorXd cur = bj_step(sample, prev, config);
    fit.iterations = l;
    if ((cur - prev).lpNorm<Eigen::Infinity>() < config.tolerance) {
      fit.beta = cur;
      fit.converged = true;
      break;
    }
    if (l >= 2 && (cur - prev2).lpNorm<Eigen::Infinity>() < config.tolerance) {
      // The map has settled into a 2-cycle; report the cycle midpoint.
      fit.beta = 0.5 * (cur + prev);
      fit.converged = true;
      fit.oscillation_detected = true;
      break;
    }
    prev2 = prev;
    prev = cur;
    if (l == config.max_iterations) fit.beta = cur;
  }

  const Eigen::VectorXd resid = sample.times - sample.design * fit.beta;
  std::vector<double> rv(resid.data(), resid.data() + resid.size());
  fit.residual_km = km_estimate(rv, sample.events, config.tail_correction);
  return fit;
}

}  // namespace bjq
