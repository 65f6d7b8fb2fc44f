#include "tameval/deflator.hpp"

#include <algorithm>
#include <cmath>

#include "tameval/errors.hpp"
#include "tameval/parallel.hpp"

namespace tameval {
namespace {

struct PathOutputs {
  std::span<double> theta;          // points * d
  std::span<double> residual;       // points * n
  std::span<double> residual_norm;  // points
  std::span<double> log_density;    // points
  std::span<double> density;        // points
  std::span<double> deflator;       // points
};

struct Workspace {
  Coefficients coeffs;
  Eigen::VectorXd excess;
  Eigen::VectorXd theta;
  Eigen::VectorXd residual;
  CachedProjector projector;
  explicit Workspace(double rank_tol) : projector(rank_tol) {}
};

// Returns the trapezoidal integral of |theta|^2; updates min_rank.
double deflate_path(const MarketModel& model, const TimeGrid& grid,
                    std::span<const double> prices, std::span<const double> aux,
                    std::span<const double> discount,
                    std::span<const double> increments, const PathOutputs& out,
                    Workspace& ws, std::size_t& min_rank,
                    bool terminal_only = false) {
  const std::size_t n = model.assets();
  const std::size_t d = model.drivers();
  const std::size_t points = grid.points();
  ws.coeffs.resize(n, d);

  double log_z = 0.0;
  double integral = 0.0;
  double theta_sq_left = 0.0;
  for (std::size_t k = 0; k < points; ++k) {
    model.evaluate(grid.time(k), prices.subspan(k * n, n), aux[k], ws.coeffs);
    const RiskProjector& proj = ws.projector.get(ws.coeffs.volatility);
    min_rank = std::min(min_rank, proj.rank());
    ws.coeffs.excess_return(ws.excess);
    if (!ws.excess.allFinite()) {
      throw SimulationError("non-finite excess return at step " +
                            std::to_string(k));
    }
    proj.apply(ws.excess, ws.theta, ws.residual);

    for (std::size_t j = 0; j < d; ++j) out.theta[k * d + j] = ws.theta[j];
    for (std::size_t i = 0; i < n; ++i) out.residual[k * n + i] = ws.residual[i];
    out.residual_norm[k] = ws.residual.norm();
    out.log_density[k] = log_z;
    if (!terminal_only || k + 1 == points) {
      out.density[k] = std::exp(log_z);
      out.deflator[k] = discount[k] * out.density[k];
    }

    const double theta_sq = ws.theta.squaredNorm();
    if (k > 0) integral += 0.5 * (theta_sq_left + theta_sq) * grid.dt(k - 1);
    theta_sq_left = theta_sq;

    if (k + 1 < points) {
      double drift = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        drift += ws.theta[j] * increments[k * d + j];
      }
      log_z += -drift - 0.5 * theta_sq * grid.dt(k);
    }
  }
  return integral;
}

}  // namespace

double DeflatorSet::step_ratio(std::size_t path, std::size_t step) const {
  return std::exp(log_density(path, step + 1) - log_density(path, step));
}

DeflatorSet deflator_paths(const ScenarioSet& s, DeflatorOptions options) {
  if (!s.model) throw ValidationError("deflator_paths: scenarios have no model");
  const std::size_t paths = s.paths();
  const std::size_t points = s.points();
  DeflatorSet out;
  out.rank_tol = options.rank_tol;
  out.theta = PathArray(paths, points, s.drivers());
  out.residual = PathArray(paths, points, s.assets());
  out.residual_norm = PathArray(paths, points);
  out.log_density = PathArray(paths, points);
  out.density = PathArray(paths, points);
  out.deflator = PathArray(paths, points);
  out.theta_sq_integral.assign(paths, 0.0);

  const std::size_t chunks = (paths + 255) / 256;
  std::vector<std::size_t> chunk_rank(chunks, s.assets() + s.drivers());
  parallel_for(paths, [&](std::size_t begin, std::size_t end) {
    Workspace ws(options.rank_tol);
    std::size_t& rank = chunk_rank[begin / 256];
    for (std::size_t p = begin; p < end; ++p) {
      const PathOutputs po{out.theta.path(p),       out.residual.path(p),
                           out.residual_norm.path(p), out.log_density.path(p),
                           out.density.path(p),     out.deflator.path(p)};
      out.theta_sq_integral[p] =
          deflate_path(*s.model, s.grid, s.prices.path(p), s.aux.path(p),
                       s.discount.path(p), s.increments.path(p), po, ws, rank);
    }
  });
  out.min_rank = chunk_rank.empty()
                     ? 0
                     : *std::min_element(chunk_rank.begin(), chunk_rank.end());
  return out;
}

IntegrabilityReport integrability_diagnostic(const DeflatorSet& deflators,
                                             double cap) {
  IntegrabilityReport r;
  r.cap = cap;
  const auto& v = deflators.theta_sq_integral;
  if (v.empty()) return r;
  double sum = 0.0;
  for (std::size_t p = 0; p < v.size(); ++p) {
    if (!std::isfinite(v[p])) r.all_finite = false;
    r.max = std::max(r.max, v[p]);
    sum += v[p];
    if (v[p] > cap || !std::isfinite(v[p])) {
      ++r.flagged_count;
      if (r.flagged_paths.size() < 100) r.flagged_paths.push_back(p);
    }
  }
  r.mean = sum / static_cast<double>(v.size());
  r.median = quantile(v, 0.5);
  r.q90 = quantile(v, 0.9);
  r.q99 = quantile(v, 0.99);
  return r;
}

MeanEstimate estimate_ez0(std::span<const double> terminal_density) {
  if (terminal_density.size() < 2) {
    throw ValidationError("estimate_ez0: need at least two paths");
  }
  return mean_estimate(terminal_density);
}

MeanEstimate estimate_ez0(const DeflatorSet& deflators) {
  std::vector<double> terminal(deflators.paths());
  const std::size_t last = deflators.points() - 1;
  for (std::size_t p = 0; p < terminal.size(); ++p) {
    terminal[p] = deflators.density(p, last);
  }
  return estimate_ez0(terminal);
}

TerminalSample sample_terminal(std::shared_ptr<const MarketModel> model,
                               const TimeGrid& grid, std::size_t n_paths,
                               std::uint64_t seed, SimulationOptions sim_options,
                               DeflatorOptions options) {
  if (!model) throw ValidationError("sample_terminal: null model");
  if (n_paths == 0) throw ValidationError("sample_terminal: n_paths must be >= 1");
  const std::size_t n = model->assets();
  const std::size_t d = model->drivers();
  const std::size_t points = grid.points();
  const std::size_t last = points - 1;

  TerminalSample out;
  out.density.resize(n_paths);
  out.deflator.resize(n_paths);
  out.theta_sq_integral.resize(n_paths);
  out.aux.resize(n_paths);
  out.prices = PathArray(n_paths, 1, n);

  const PathSimulator simulator(*model, grid, sim_options);
  parallel_for(n_paths, [&](std::size_t begin, std::size_t end) {
    std::vector<double> inc(grid.steps() * d), prices(points * n), aux(points),
        bond(points), discount(points), theta(points * d), resid(points * n),
        resid_norm(points), log_z(points), z(points), h(points);
    Coefficients coeffs;
    Workspace ws(options.rank_tol);
    std::size_t rank = n + d;
    for (std::size_t p = begin; p < end; ++p) {
      brownian_path_increments(grid, d, seed, p, inc);
      simulator.run(p, inc, prices, aux, bond, discount, coeffs);
      const PathOutputs po{theta, resid, resid_norm, log_z, z, h};
      out.theta_sq_integral[p] =
          deflate_path(*model, grid, prices, aux, discount, inc, po, ws, rank, true);
      out.density[p] = z[last];
      out.deflator[p] = h[last];
      out.aux[p] = aux[last];
      for (std::size_t i = 0; i < n; ++i) out.prices(p, 0, i) = prices[last * n + i];
    }
  });
  return out;
}

}  // namespace tameval
