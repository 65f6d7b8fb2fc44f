#include "tameval/time_grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tameval/errors.hpp"

namespace tameval {

TimeGrid TimeGrid::uniform(double horizon, std::size_t n_steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ValidationError("time grid: horizon must be positive and finite, got " +
                          std::to_string(horizon));
  }
  if (n_steps == 0) {
    throw ValidationError("time grid: n_steps must be at least 1");
  }
  TimeGrid grid;
  grid.times_.resize(n_steps + 1);
  for (std::size_t k = 0; k <= n_steps; ++k) {
    grid.times_[k] =
        horizon * static_cast<double>(k) / static_cast<double>(n_steps);
  }
  grid.times_.back() = horizon;
  grid.uniform_ = true;
  return grid;
}

TimeGrid TimeGrid::from_times(std::vector<double> times) {
  if (times.size() < 2) {
    throw ValidationError("time grid: need at least two points");
  }
  if (times.front() != 0.0) {
    throw ValidationError("time grid: first time must be 0");
  }
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1]) || !std::isfinite(times[k])) {
      throw ValidationError("time grid: times must be strictly increasing");
    }
  }
  TimeGrid grid;
  grid.times_ = std::move(times);
  const double h = grid.times_.back() / static_cast<double>(grid.steps());
  grid.uniform_ = std::all_of(
      grid.times_.begin(), grid.times_.end(), [&, k = 0.0](double t) mutable {
        return std::abs(t - h * (k++)) <= 1e-12 * grid.times_.back();
      });
  return grid;
}

std::size_t TimeGrid::index_at_or_before(double t) const {
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return 0;
  return static_cast<std::size_t>(it - times_.begin()) - 1;
}

TimeGrid build_time_grid(double horizon, std::size_t n_steps) {
  return TimeGrid::uniform(horizon, n_steps);
}

}  // namespace tameval
