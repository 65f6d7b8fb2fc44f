#include "tameval/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace tameval {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

CsvWriter& CsvWriter::header(const std::vector<std::string>& names) {
  for (const auto& n : names) field(std::string_view(n));
  end_row();
  return *this;
}

CsvWriter& CsvWriter::field(double v) { return field(std::string_view(format_double(v))); }

CsvWriter& CsvWriter::field(std::size_t v) {
  char buf[24];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return field(std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)));
}

CsvWriter& CsvWriter::field(std::string_view v) {
  if (!first_) out_ << ',';
  out_ << v;
  first_ = false;
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  first_ = true;
}

void write_scenarios_csv(std::ostream& out, const ScenarioSet& s, std::size_t max_paths) {
  CsvWriter w(out);
  std::vector<std::string> h{"path", "point", "t"};
  for (std::size_t i = 0; i < s.assets(); ++i) h.push_back("price_" + std::to_string(i));
  h.insert(h.end(), {"aux", "bond", "discount"});
  w.header(h);
  const std::size_t paths = std::min(max_paths, s.paths());
  for (std::size_t p = 0; p < paths; ++p) {
    for (std::size_t k = 0; k < s.points(); ++k) {
      w.field(p).field(k).field(s.grid.time(k));
      for (std::size_t i = 0; i < s.assets(); ++i) w.field(s.prices(p, k, i));
      w.field(s.aux(p, k)).field(s.bond(p, k)).field(s.discount(p, k));
      w.end_row();
    }
  }
}

void write_deflators_csv(std::ostream& out, const ScenarioSet& s, const DeflatorSet& d,
                         std::size_t max_paths) {
  CsvWriter w(out);
  std::vector<std::string> h{"path", "point", "t"};
  for (std::size_t j = 0; j < s.drivers(); ++j) h.push_back("theta_" + std::to_string(j));
  for (std::size_t i = 0; i < s.assets(); ++i) h.push_back("p_" + std::to_string(i));
  h.insert(h.end(), {"p_norm", "density", "deflator"});
  w.header(h);
  const std::size_t paths = std::min(max_paths, s.paths());
  for (std::size_t p = 0; p < paths; ++p) {
    for (std::size_t k = 0; k < s.points(); ++k) {
      w.field(p).field(k).field(s.grid.time(k));
      for (std::size_t j = 0; j < s.drivers(); ++j) w.field(d.theta(p, k, j));
      for (std::size_t i = 0; i < s.assets(); ++i) w.field(d.residual(p, k, i));
      w.field(d.residual_norm(p, k)).field(d.density(p, k)).field(d.deflator(p, k));
      w.end_row();
    }
  }
}

void write_path_array_csv(std::ostream& out, const TimeGrid& grid, const PathArray& v,
                          const std::string& name, std::size_t max_paths) {
  CsvWriter w(out);
  std::vector<std::string> h{"path", "point", "t"};
  if (v.width() == 1) {
    h.push_back(name);
  } else {
    for (std::size_t c = 0; c < v.width(); ++c) h.push_back(name + "_" + std::to_string(c));
  }
  w.header(h);
  const std::size_t paths = std::min(max_paths, v.paths());
  for (std::size_t p = 0; p < paths; ++p) {
    for (std::size_t k = 0; k < v.points(); ++k) {
      w.field(p).field(k).field(grid.time(k));
      for (std::size_t c = 0; c < v.width(); ++c) w.field(v(p, k, c));
      w.end_row();
    }
  }
}

void write_trace_csv(std::ostream& out, const ImprovementTrace& trace) {
  CsvWriter w(out);
  w.header({"round", "candidate", "value"});
  for (std::size_t i = 0; i < trace.values.size(); ++i) {
    w.field(i).field(std::string_view(trace.labels[i])).field(trace.values[i]);
    w.end_row();
  }
}

void write_exercise_region_csv(std::ostream& out, const TimeGrid& grid,
                               const std::vector<ExerciseRegionRow>& rows) {
  CsvWriter w(out);
  w.header({"point", "t", "exercised", "min_price", "max_price"});
  for (const auto& r : rows) {
    w.field(r.point).field(grid.time(r.point)).field(r.exercised)
        .field(r.min_price).field(r.max_price);
    w.end_row();
  }
}

void write_hedge_path_csv(std::ostream& out, const ScenarioSet& s, const HedgeResult& h,
                          std::size_t path) {
  CsvWriter w(out);
  std::vector<std::string> hd{"point", "t"};
  for (std::size_t i = 0; i < s.assets(); ++i) hd.push_back("price_" + std::to_string(i));
  hd.push_back("wealth");
  for (std::size_t i = 0; i < s.assets(); ++i) hd.push_back("stock_" + std::to_string(i));
  for (std::size_t j = 0; j < s.drivers(); ++j) hd.push_back("phi_" + std::to_string(j));
  hd.push_back("replication_residual");
  w.header(hd);
  const bool has_pf = h.portfolio.stock.paths() == s.paths();
  for (std::size_t k = 0; k < s.points(); ++k) {
    w.field(k).field(s.grid.time(k));
    for (std::size_t i = 0; i < s.assets(); ++i) w.field(s.prices(path, k, i));
    w.field(h.wealth(path, k));
    for (std::size_t i = 0; i < s.assets(); ++i) {
      w.field(has_pf ? h.portfolio.stock(path, k, i) : 0.0);
    }
    for (std::size_t j = 0; j < s.drivers(); ++j) w.field(h.phi(path, k, j));
    w.field(has_pf ? h.replication_residual(path, k) : 0.0);
    w.end_row();
  }
}

}  // namespace tameval
