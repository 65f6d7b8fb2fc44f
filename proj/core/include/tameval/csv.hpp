#pragma once

#include <cstddef>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "tameval/american.hpp"
#include "tameval/deflator.hpp"
#include "tameval/european.hpp"
#include "tameval/path_array.hpp"
#include "tameval/scenario.hpp"

namespace tameval {

/// Shortest representation that round-trips; identical on every platform
/// with a conforming to_chars.
std::string format_double(double v);

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}
  CsvWriter& header(const std::vector<std::string>& names);
  CsvWriter& field(double v);
  CsvWriter& field(std::size_t v);
  CsvWriter& field(std::string_view v);
  void end_row();

 private:
  std::ostream& out_;
  bool first_ = true;
};

inline constexpr std::size_t kAllPaths = std::numeric_limits<std::size_t>::max();

void write_scenarios_csv(std::ostream& out, const ScenarioSet& s,
                         std::size_t max_paths = kAllPaths);
void write_deflators_csv(std::ostream& out, const ScenarioSet& s,
                         const DeflatorSet& d, std::size_t max_paths = kAllPaths);
/// One column per component of a (path, point, width) array.
void write_path_array_csv(std::ostream& out, const TimeGrid& grid,
                          const PathArray& values, const std::string& name,
                          std::size_t max_paths = kAllPaths);
void write_trace_csv(std::ostream& out, const ImprovementTrace& trace);
void write_exercise_region_csv(std::ostream& out, const TimeGrid& grid,
                               const std::vector<ExerciseRegionRow>& rows);
/// Hedge wealth, stock amounts and residual along one path.
void write_hedge_path_csv(std::ostream& out, const ScenarioSet& s,
                          const HedgeResult& h, std::size_t path);

}  // namespace tameval
