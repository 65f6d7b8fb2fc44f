#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "tameval/path_array.hpp"
#include "tameval/time_grid.hpp"

namespace tameval {

/// Fills `out` with the standard normals number 0..out.size()-1 of the stream
/// owned by (seed, path). Normal m of a path is derived from Philox block m/2,
/// so a path's draws never depend on which other paths are simulated.
void standard_normals(std::uint64_t seed, std::uint64_t path,
                      std::span<double> out);

/// Brownian increments of one path: out[step * drivers + j] ~ N(0, dt_step).
void brownian_path_increments(const TimeGrid& grid, std::size_t drivers,
                              std::uint64_t seed, std::uint64_t path,
                              std::span<double> out);

struct BrownianBatch {
  std::size_t drivers = 0;
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  TimeGrid grid;
  PathArray increments;  // (paths, steps, drivers)
};

BrownianBatch simulate_brownian(const TimeGrid& grid, std::size_t drivers,
                                std::size_t n_paths, std::uint64_t seed);

}  // namespace tameval
