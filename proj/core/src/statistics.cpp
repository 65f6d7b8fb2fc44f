#include "tameval/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tameval/errors.hpp"

namespace tameval {

namespace {
constexpr double kZ95 = 1.959963984540054;
}

MeanEstimate mean_estimate(std::span<const double> samples) {
  MeanEstimate out;
  out.count = samples.size();
  if (samples.empty()) return out;
  // Two-pass for accuracy; summation order is fixed (path order).
  double sum = 0.0;
  for (double x : samples) sum += x;
  const double mean = sum / static_cast<double>(samples.size());
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  out.estimate = mean;
  if (samples.size() > 1) {
    const double var = ss / static_cast<double>(samples.size() - 1);
    out.std_error = std::sqrt(var / static_cast<double>(samples.size()));
  }
  out.ci_low = mean - kZ95 * out.std_error;
  out.ci_high = mean + kZ95 * out.std_error;
  return out;
}

MeanEstimate weighted_mean_estimate(std::span<const double> samples,
                                    std::span<const double> weights,
                                    bool exact) {
  if (samples.size() != weights.size()) {
    throw ValidationError("weighted_mean_estimate: size mismatch");
  }
  MeanEstimate out;
  out.count = samples.size();
  double mean = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    mean += weights[i] * samples[i];
  }
  out.estimate = mean;
  if (!exact && samples.size() > 1) {
    double var = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      var += weights[i] * (samples[i] - mean) * (samples[i] - mean);
    }
    const double n = static_cast<double>(samples.size());
    out.std_error = std::sqrt(var * n / (n - 1.0) / n);
  }
  out.ci_low = mean - kZ95 * out.std_error;
  out.ci_high = mean + kZ95 * out.std_error;
  return out;
}

double quantile(std::span<const double> samples, double q) {
  if (samples.empty()) return 0.0;
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = std::clamp(q, 0.0, 1.0) *
                     static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double standard_normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

}  // namespace tameval
