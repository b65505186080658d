#include "bjq/km.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bjq/errors.hpp"

namespace bjq {

void KMCurve::validate() const {
  if (jump_points.size() != cdf_values.size() || jump_points.size() != mass.size())
    throw validation_error("KMCurve: field lengths differ");
  if (jump_points.empty()) throw validation_error("KMCurve: no jump points");
  double total = 0.0;
  for (std::size_t j = 0; j < jump_points.size(); ++j) {
    if (j > 0 && !(jump_points[j] > jump_points[j - 1]))
      throw validation_error("KMCurve: jump points not strictly increasing");
    if (mass[j] < 0.0) throw validation_error("KMCurve: negative mass");
    total += mass[j];
    if (cdf_values[j] < 0.0 || cdf_values[j] > 1.0 + 1e-12)
      throw validation_error("KMCurve: cdf value outside [0,1]");
    if (j > 0 && cdf_values[j] < cdf_values[j - 1])
      throw validation_error("KMCurve: cdf not nondecreasing");
  }
  if (std::fabs(total - cdf_values.back()) > 1e-12)
    throw validation_error("KMCurve: mass does not sum to final cdf value");
}

KMCurve km_estimate(const std::vector<double>& values,
                    const std::vector<bool>& event_flags,
                    bool tail_correction) {
  const std::size_t n = values.size();
  if (n == 0) throw validation_error("km_estimate: empty input");
  if (event_flags.size() != n)
    throw validation_error("km_estimate: values and event_flags lengths differ");
  for (double v : values)
    if (!std::isfinite(v)) throw validation_error("km_estimate: non-finite value");
  if (std::none_of(event_flags.begin(), event_flags.end(), [](bool b) { return b; }))
    throw no_events_error("km_estimate: no uncensored observations");

  std::vector<bool> flags = event_flags;
  if (tail_correction) {
    const double vmax = *std::max_element(values.begin(), values.end());
    for (std::size_t i = 0; i < n; ++i)
      if (values[i] == vmax) flags[i] = true;
  }

  // Sort ascending; at tied values events precede censorings.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] < values[b];
    return flags[a] && !flags[b];
  });

  KMCurve km;
  double surv = 1.0;
  std::size_t i = 0;
  while (i < n) {
    const double u = values[order[i]];
    const std::size_t at_risk = n - i;
    std::size_t d = 0, c = 0;
    while (i < n && values[order[i]] == u) {
      if (flags[order[i]]) ++d; else ++c;
      ++i;
    }
    if (d > 0) {
      const double next = surv * (1.0 - static_cast<double>(d) / static_cast<double>(at_risk));
      km.jump_points.push_back(u);
      km.mass.push_back(surv - next);
      km.cdf_values.push_back(1.0 - next);
      surv = next;
    }
  }
  return km;
}

double conditional_mean_above(const KMCurve& km, double e) {
  km.validate();
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < km.jump_points.size(); ++j) {
    if (km.jump_points[j] > e) {
      num += km.jump_points[j] * km.mass[j];
      den += km.mass[j];
    }
  }
  if (den <= 0.0) return km.jump_points.back();
  return num / den;
}

}  // namespace bjq
