#pragma once

#include <cstddef>
#include <vector>

namespace tameval {

/// Ordered simulation times 0 = t_0 < t_1 < ... < t_N = horizon.
class TimeGrid {
 public:
  TimeGrid() = default;

  /// Uniform grid t_k = k * horizon / n_steps.
  static TimeGrid uniform(double horizon, std::size_t n_steps);
  /// Arbitrary strictly increasing times starting at zero.
  static TimeGrid from_times(std::vector<double> times);

  double horizon() const { return times_.back(); }
  std::size_t steps() const { return times_.size() - 1; }
  std::size_t points() const { return times_.size(); }
  double time(std::size_t k) const { return times_[k]; }
  double dt(std::size_t k) const { return times_[k + 1] - times_[k]; }
  const std::vector<double>& times() const { return times_; }
  bool is_uniform() const { return uniform_; }

  /// Largest k with t_k <= t (clamped to the grid).
  std::size_t index_at_or_before(double t) const;

  bool operator==(const TimeGrid&) const = default;

 private:
  std::vector<double> times_{0.0};
  bool uniform_ = true;
};

TimeGrid build_time_grid(double horizon, std::size_t n_steps);

}  // namespace tameval
