#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace tameval {

/// Dense (path, point, component) array stored path-major. A width of one is
/// used for scalar processes such as the bond or the deflator.
class PathArray {
 public:
  PathArray() = default;
  PathArray(std::size_t paths, std::size_t points, std::size_t width = 1,
            double fill = 0.0)
      : paths_(paths), points_(points), width_(width),
        data_(paths * points * width, fill) {}

  std::size_t paths() const { return paths_; }
  std::size_t points() const { return points_; }
  std::size_t width() const { return width_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t path, std::size_t point, std::size_t c = 0) {
    assert(path < paths_ && point < points_ && c < width_);
    return data_[(path * points_ + point) * width_ + c];
  }
  double operator()(std::size_t path, std::size_t point,
                    std::size_t c = 0) const {
    assert(path < paths_ && point < points_ && c < width_);
    return data_[(path * points_ + point) * width_ + c];
  }

  std::span<double> at(std::size_t path, std::size_t point) {
    return {data_.data() + (path * points_ + point) * width_, width_};
  }
  std::span<const double> at(std::size_t path, std::size_t point) const {
    return {data_.data() + (path * points_ + point) * width_, width_};
  }

  /// All points of one path, point-major.
  std::span<double> path(std::size_t p) {
    return {data_.data() + p * points_ * width_, points_ * width_};
  }
  std::span<const double> path(std::size_t p) const {
    return {data_.data() + p * points_ * width_, points_ * width_};
  }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  bool operator==(const PathArray&) const = default;

 private:
  std::size_t paths_ = 0;
  std::size_t points_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

}  // namespace tameval
