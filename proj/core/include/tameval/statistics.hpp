#pragma once

#include <cstddef>
#include <span>

namespace tameval {

/// Sample mean with its standard error and a normal 95% interval.
struct MeanEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t count = 0;
};

MeanEstimate mean_estimate(std::span<const double> samples);

/// Weighted mean; weights must sum to one. The error is the weighted sample
/// deviation over sqrt(count), which is zero for exact (enumerated) spaces
/// only when the caller passes exact = true.
MeanEstimate weighted_mean_estimate(std::span<const double> samples,
                                    std::span<const double> weights,
                                    bool exact);

/// Empirical quantile with linear interpolation; q in [0, 1].
double quantile(std::span<const double> samples, double q);

double standard_normal_cdf(double x);

}  // namespace tameval
