#pragma once

#include <vector>

namespace bjq {

// Product-limit estimate of a distribution function under right censoring,
// stored as a right-continuous step function. mass[j] is the probability
// mass placed at jump_points[j], so cdf_values[j] = sum of mass[0..j].
struct KMCurve {
  std::vector<double> jump_points;  // strictly increasing
  std::vector<double> cdf_values;   // nondecreasing, in [0,1]
  std::vector<double> mass;         // nonnegative, sums to cdf_values.back()

  void validate() const;
};

// Kaplan-Meier estimate of the distribution of `values` given censoring
// flags (true = observed). Tied values are processed events-first. With
// tail_correction, censored observations at the largest value are treated
// as events so the estimate reaches 1.
KMCurve km_estimate(const std::vector<double>& values,
                    const std::vector<bool>& event_flags,
                    bool tail_correction);

// Mean of the KM mass strictly above e, i.e. an estimate of E[U | U > e].
// If no mass lies above e, falls back to the largest jump point.
double conditional_mean_above(const KMCurve& km, double e);

}  // namespace bjq
