#include "tameval/scenario.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "tameval/errors.hpp"
#include "tameval/parallel.hpp"

namespace tameval {
namespace {

double coefficient_size(const Coefficients& c) {
  return std::abs(c.rate) + c.mean_return.norm() + c.dividend.norm() +
         c.volatility.squaredNorm();
}

[[noreturn]] void fail(std::size_t path, std::size_t step,
                       const std::string& what) {
  throw SimulationError(what + " at path " + std::to_string(path) +
                        ", step " + std::to_string(step));
}

}  // namespace

void ScenarioSet::coefficients(std::size_t path, std::size_t point,
                               Coefficients& out) const {
  out.resize(assets(), drivers());
  model->evaluate(grid.time(point), prices.at(path, point), aux(path, point),
                  out);
}

PathSimulator::PathSimulator(const MarketModel& model, const TimeGrid& grid,
                             SimulationOptions options)
    : model_(model), grid_(grid), options_(options) {
  if (model.scheme() == Scheme::kLogExactConstant &&
      !model.constant_coefficients()) {
    throw ValidationError(
        "scheme log-exact-constant requires constant coefficients");
  }
}

void PathSimulator::run(std::size_t path_id,
                        std::span<const double> increments,
                        std::span<double> prices, std::span<double> aux,
                        std::span<double> bond, std::span<double> discount,
                        Coefficients& c) const {
  const std::size_t n = model_.assets();
  const std::size_t d = model_.drivers();
  const std::size_t steps = grid_.steps();
  c.resize(n, d);

  for (std::size_t i = 0; i < n; ++i) prices[i] = model_.initial_prices()[i];
  aux[0] = model_.initial_aux();
  bond[0] = 1.0;
  discount[0] = 1.0;

  model_.evaluate(0.0, prices.subspan(0, n), aux[0], c);
  if (!c.all_finite()) fail(path_id, 0, "non-finite coefficient");

  double log_bond = 0.0;
  double rate_left = c.rate;
  double size_left = coefficient_size(c);
  double integral = 0.0;

  for (std::size_t k = 0; k < steps; ++k) {
    const double dt = grid_.dt(k);
    const auto dw = increments.subspan(k * d, d);
    const auto now = prices.subspan(k * n, n);
    const auto next = prices.subspan((k + 1) * n, n);

    for (std::size_t i = 0; i < n; ++i) {
      double diffusion = 0.0;
      double variance = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double s = c.volatility(static_cast<Eigen::Index>(i),
                                      static_cast<Eigen::Index>(j));
        diffusion += s * dw[j];
        variance += s * s;
      }
      const double b = c.mean_return[static_cast<Eigen::Index>(i)];
      if (model_.scheme() == Scheme::kEuler) {
        next[i] = now[i] * (1.0 + b * dt + diffusion);
        if (!(next[i] > 0.0)) {
          fail(path_id, k + 1, "non-positive price under the euler scheme");
        }
      } else {
        next[i] = now[i] * std::exp((b - 0.5 * variance) * dt + diffusion);
      }
    }
    aux[k + 1] = model_.advance_aux(grid_.time(k), dt, now, aux[k], dw);

    model_.evaluate(grid_.time(k + 1), next, aux[k + 1], c);
    if (!c.all_finite()) fail(path_id, k + 1, "non-finite coefficient");
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(next[i])) fail(path_id, k + 1, "non-finite price");
    }

    log_bond += 0.5 * (rate_left + c.rate) * dt;
    bond[k + 1] = std::exp(log_bond);
    discount[k + 1] = 1.0 / bond[k + 1];
    if (!(bond[k + 1] > 0.0) || !std::isfinite(bond[k + 1])) {
      fail(path_id, k + 1, "bond left (0, inf)");
    }

    const double size_right = coefficient_size(c);
    integral += 0.5 * (size_left + size_right) * dt;
    rate_left = c.rate;
    size_left = size_right;
  }
  if (integral > options_.integrability_cap) {
    fail(path_id, steps,
         "coefficient integral " + std::to_string(integral) +
             " exceeds the integrability cap");
  }
}

ScenarioSet simulate_market(std::shared_ptr<const MarketModel> model,
                            BrownianBatch brownian,
                            const TimeGrid& grid, SimulationOptions options) {
  if (!model) throw ValidationError("simulate_market: null model");
  if (model->drivers() != brownian.drivers) {
    throw ValidationError("simulate_market: model has " +
                          std::to_string(model->drivers()) +
                          " drivers but the Brownian batch has " +
                          std::to_string(brownian.drivers));
  }
  if (!(grid == brownian.grid)) {
    throw ValidationError("simulate_market: grid differs from Brownian grid");
  }
  const std::size_t paths = brownian.n_paths;
  const std::size_t points = grid.points();

  ScenarioSet out;
  out.grid = grid;
  out.model = model;
  out.seed = brownian.seed;
  out.increments = std::move(brownian.increments);
  out.prices = PathArray(paths, points, model->assets());
  out.aux = PathArray(paths, points);
  out.bond = PathArray(paths, points);
  out.discount = PathArray(paths, points);

  const PathSimulator simulator(*model, out.grid, options);
  parallel_for(paths, [&](std::size_t begin, std::size_t end) {
    Coefficients scratch;
    for (std::size_t p = begin; p < end; ++p) {
      simulator.run(p, out.increments.path(p), out.prices.path(p),
                    out.aux.path(p), out.bond.path(p), out.discount.path(p),
                    scratch);
    }
  });
  return out;
}

ScenarioSet simulate(std::shared_ptr<const MarketModel> model,
                     const TimeGrid& grid, std::size_t n_paths,
                     std::uint64_t seed, SimulationOptions options) {
  if (!model) throw ValidationError("simulate: null model");
  return simulate_market(model,
                         simulate_brownian(grid, model->drivers(), n_paths, seed),
                         grid, options);
}

}  // namespace tameval
