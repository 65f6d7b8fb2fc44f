#include "tameval/brownian.hpp"

#include <cmath>
#include <numbers>

#include "tameval/errors.hpp"
#include "tameval/parallel.hpp"
#include "tameval/philox.hpp"

namespace tameval {
namespace {

// Uniform on the open interval (0, 1) with 53 bits of resolution.
double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits =
      ((std::uint64_t{hi} << 32) | std::uint64_t{lo}) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

void standard_normals(std::uint64_t seed, std::uint64_t path,
                      std::span<double> out) {
  const Philox4x32::Key key{static_cast<std::uint32_t>(seed),
                            static_cast<std::uint32_t>(seed >> 32)};
  const std::size_t blocks = (out.size() + 1) / 2;
  for (std::size_t b = 0; b < blocks; ++b) {
    const Philox4x32::Counter ctr{
        static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
        static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
    const auto w = Philox4x32::generate(ctr, key);
    const double u1 = to_open_unit(w[0], w[1]);
    const double u2 = to_open_unit(w[2], w[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    out[2 * b] = radius * std::cos(angle);
    if (2 * b + 1 < out.size()) out[2 * b + 1] = radius * std::sin(angle);
  }
}

void brownian_path_increments(const TimeGrid& grid, std::size_t drivers,
                              std::uint64_t seed, std::uint64_t path,
                              std::span<double> out) {
  if (out.size() != grid.steps() * drivers) {
    throw ValidationError("brownian_path_increments: output size mismatch");
  }
  standard_normals(seed, path, out);
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const double scale = std::sqrt(grid.dt(k));
    for (std::size_t j = 0; j < drivers; ++j) out[k * drivers + j] *= scale;
  }
}

BrownianBatch simulate_brownian(const TimeGrid& grid, std::size_t drivers,
                                std::size_t n_paths, std::uint64_t seed) {
  if (drivers == 0) throw ValidationError("simulate_brownian: d must be >= 1");
  if (n_paths == 0) {
    throw ValidationError("simulate_brownian: n_paths must be >= 1");
  }
  BrownianBatch batch;
  batch.drivers = drivers;
  batch.n_paths = n_paths;
  batch.seed = seed;
  batch.grid = grid;
  batch.increments = PathArray(n_paths, grid.steps(), drivers);
  parallel_for(n_paths, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      brownian_path_increments(grid, drivers, seed, p,
                               batch.increments.path(p));
    }
  });
  return batch;
}

}  // namespace tameval
