#include "tameval/lattice.hpp"

#include <cmath>
#include <span>

#include "tameval/errors.hpp"

namespace tameval {

Lattice Lattice::crr(double spot, double rate, double vol, double horizon,
                     std::size_t n_steps, double dividend, double physical_up) {
  if (!(vol > 0.0) || !std::isfinite(vol)) throw ValidationError("lattice vol must be > 0");
  if (!(horizon > 0.0) || n_steps == 0) {
    throw ValidationError("lattice horizon and n_steps must be positive");
  }
  const double dt = horizon / static_cast<double>(n_steps);
  const double u = std::exp(vol * std::sqrt(dt));
  return custom(spot, u, 1.0 / u, rate, horizon, n_steps, physical_up, dividend);
}

Lattice Lattice::custom(double spot, double up, double down, double rate,
                        double horizon, std::size_t n_steps, double physical_up,
                        double dividend) {
  if (!(spot > 0.0)) throw ValidationError("lattice spot must be > 0");
  if (!(up > down) || !(down > 0.0)) throw ValidationError("lattice needs 0 < d < u");
  if (!(horizon > 0.0) || n_steps == 0) {
    throw ValidationError("lattice horizon and n_steps must be positive");
  }
  Lattice l;
  l.spot_ = spot;
  l.up_ = up;
  l.down_ = down;
  l.rate_ = rate;
  l.horizon_ = horizon;
  l.n_steps_ = n_steps;
  const double growth = std::exp((rate - dividend) * l.dt());
  l.p_star_ = (growth - down) / (up - down);
  if (!(l.p_star_ > 0.0 && l.p_star_ < 1.0)) {
    throw ValidationError("lattice pricing probability outside (0, 1)");
  }
  l.q_ = physical_up < 0.0 ? l.p_star_ : physical_up;
  if (!(l.q_ > 0.0 && l.q_ < 1.0)) {
    throw ValidationError("lattice physical probability outside (0, 1)");
  }
  return l;
}

double Lattice::price(std::size_t k, std::size_t j) const {
  return spot_ * std::exp(static_cast<double>(j) * std::log(up_) +
                          static_cast<double>(k - j) * std::log(down_));
}

double Lattice::deflator(std::size_t k, std::size_t j) const {
  if (custom_deflator_) return custom_deflator_(k, j);
  if (q_ == p_star_) return std::exp(-rate_ * time(k));
  const double lh = -rate_ * time(k) +
                    static_cast<double>(j) * std::log(p_star_ / q_) +
                    static_cast<double>(k - j) * std::log((1.0 - p_star_) / (1.0 - q_));
  return std::exp(lh);
}

PathState Lattice::state(std::size_t k, std::size_t j, double& storage) const {
  storage = price(k, j);
  return {time(k), std::span<const double>(&storage, 1), 0.0,
          std::exp(rate_ * time(k))};
}

NodeFunction node_function(const Lattice& lattice, const Payoff& payoff) {
  payoff.validate(1);
  return [&lattice, payoff](std::size_t k, std::size_t j) {
    double storage = 0.0;
    return payoff(lattice.state(k, j, storage));
  };
}

LatticeResult snell_lattice_oracle(const Lattice& lat, const NodeFunction& settlement,
                                   const NodeFunction& rate) {
  const std::size_t n = lat.steps();
  const double q = lat.physical_up();
  const double dt = lat.dt();
  LatticeResult r;
  r.exercise.resize(n + 1);
  r.deflated.resize(n + 1);
  std::vector<double> next(n + 1);
  std::vector<double> next_eu(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    next[j] = lat.deflator(n, j) * settlement(n, j);
    next_eu[j] = next[j];
  }
  r.exercise[n].assign(n + 1, 1);
  r.deflated[n] = next;
  std::vector<double> cur(n + 1);
  std::vector<double> cur_eu(n + 1);
  for (std::size_t kk = n; kk-- > 0;) {
    r.exercise[kk].assign(kk + 1, 0);
    for (std::size_t j = 0; j <= kk; ++j) {
      const double h = lat.deflator(kk, j);
      const double flow = rate ? h * rate(kk, j) * dt : 0.0;
      const double cont = flow + q * next[j + 1] + (1.0 - q) * next[j];
      const double stop = h * settlement(kk, j);
      if (stop > cont) {
        cur[j] = stop;
        r.exercise[kk][j] = 1;
      } else {
        cur[j] = cont;
      }
      cur_eu[j] = flow + q * next_eu[j + 1] + (1.0 - q) * next_eu[j];
    }
    std::swap(cur, next);
    std::swap(cur_eu, next_eu);
    r.deflated[kk].assign(next.begin(), next.begin() + static_cast<long>(kk + 1));
  }
  r.value = next[0];
  r.european_value = next_eu[0];
  return r;
}

LatticeResult snell_lattice_oracle(const Lattice& lat, const AmericanClaim& claim) {
  const NodeFunction l = node_function(lat, claim.settlement);
  if (claim.rate.is_zero()) return snell_lattice_oracle(lat, l);
  return snell_lattice_oracle(lat, l, node_function(lat, claim.rate));
}

LatticePaths lattice_paths(const Lattice& lat, const NodeFunction& settlement,
                           const NodeFunction& rate) {
  const std::size_t n = lat.steps();
  if (n > 24) throw ValidationError("lattice path enumeration limited to 24 steps");
  const std::size_t paths = std::size_t{1} << n;
  const std::size_t points = n + 1;
  LatticePaths out;
  auto& y = out.payoff;
  y.y = PathArray(paths, points);
  y.income = PathArray(paths, points);
  y.deflator = PathArray(paths, points);
  y.settlement = PathArray(paths, points);
  y.horizon.assign(paths, n);
  y.weights.assign(paths, 1.0);
  y.exact = true;
  out.prices = PathArray(paths, points);
  out.ups.assign(paths, std::vector<std::size_t>(points, 0));
  const double q = lat.physical_up();
  y.min_value = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < paths; ++p) {
    std::size_t j = 0;
    double income = 0.0;
    double w = 1.0;
    for (std::size_t k = 0; k <= n; ++k) {
      if (k > 0) {
        const bool up = (p >> (n - k)) & 1U;
        j += up ? 1 : 0;
        w *= up ? q : 1.0 - q;
      }
      out.ups[p][k] = j;
      const double h = lat.deflator(k, j);
      const double l = settlement(k, j);
      out.prices(p, k) = lat.price(k, j);
      y.income(p, k) = income;
      y.deflator(p, k) = h;
      y.settlement(p, k) = l;
      y.y(p, k) = income + h * l;
      y.min_value = std::min(y.min_value, y.y(p, k));
      if (rate && k < n) income += h * rate(k, j) * lat.dt();
    }
    y.weights[p] = w;
  }
  return out;
}

double tree_supremum(const DiscountedPayoffPaths& y, std::size_t n) {
  const std::size_t paths = y.paths();
  if (paths != (std::size_t{1} << n) || y.weights.size() != paths) {
    throw ValidationError("tree_supremum needs a fully enumerated path space");
  }
  // value[g] for prefix groups at the current depth, with the group mass.
  std::vector<double> value(paths);
  std::vector<double> mass(paths);
  for (std::size_t p = 0; p < paths; ++p) {
    value[p] = y.y(p, n);
    mass[p] = y.weights[p];
  }
  for (std::size_t kk = n; kk-- > 0;) {
    const std::size_t groups = std::size_t{1} << kk;
    const std::size_t width = std::size_t{1} << (n - kk);
    for (std::size_t g = 0; g < groups; ++g) {
      const double m = mass[2 * g] + mass[2 * g + 1];
      const double cont = (mass[2 * g] * value[2 * g] +
                           mass[2 * g + 1] * value[2 * g + 1]) / m;
      // Y at depth kk is identical across the group; read it from its first path.
      const double stop = y.y(g * width, kk);
      value[g] = std::max(stop, cont);
      mass[g] = m;
    }
  }
  return value[0];
}

}  // namespace tameval
