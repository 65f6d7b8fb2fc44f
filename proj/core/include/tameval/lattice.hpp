#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "tameval/american.hpp"
#include "tameval/claims.hpp"

namespace tameval {

/// Recombining binomial lattice for one asset. Node (k, j) has j up moves
/// out of k and price spot * u^j * d^(k-j).
class Lattice {
 public:
  /// Cox-Ross-Rubinstein factors u = exp(vol sqrt(dt)), d = 1/u. The
  /// physical up-probability defaults to the pricing one (theta = 0).
  static Lattice crr(double spot, double rate, double vol, double horizon,
                     std::size_t n_steps, double dividend = 0.0,
                     double physical_up = -1.0);
  static Lattice custom(double spot, double up, double down, double rate,
                        double horizon, std::size_t n_steps, double physical_up,
                        double dividend = 0.0);

  std::size_t steps() const { return n_steps_; }
  double horizon() const { return horizon_; }
  double dt() const { return horizon_ / static_cast<double>(n_steps_); }
  double time(std::size_t k) const { return dt() * static_cast<double>(k); }
  double rate() const { return rate_; }
  double up() const { return up_; }
  double down() const { return down_; }
  double pricing_up() const { return p_star_; }
  double physical_up() const { return q_; }

  double price(std::size_t k, std::size_t j) const;
  /// H = exp(-r t) (p*/q)^j ((1 - p*)/(1 - q))^(k - j), unless overridden.
  double deflator(std::size_t k, std::size_t j) const;
  void set_deflator(std::function<double(std::size_t, std::size_t)> h) {
    custom_deflator_ = std::move(h);
  }

  /// Observable state at a node, for evaluating Payoff objects.
  PathState state(std::size_t k, std::size_t j, double& price_storage) const;

 private:
  double spot_ = 0.0;
  double up_ = 1.0;
  double down_ = 1.0;
  double rate_ = 0.0;
  double horizon_ = 1.0;
  std::size_t n_steps_ = 1;
  double p_star_ = 0.5;
  double q_ = 0.5;
  std::function<double(std::size_t, std::size_t)> custom_deflator_;
};

/// Undiscounted settlement or income rate at a node.
using NodeFunction = std::function<double(std::size_t k, std::size_t j)>;

NodeFunction node_function(const Lattice& lattice, const Payoff& payoff);

struct LatticeResult {
  double value = 0.0;           // American value at the root
  double european_value = 0.0;  // settlement at the horizon only
  std::vector<std::vector<char>> exercise;    // [k][j], strictly better to stop
  std::vector<std::vector<double>> deflated;  // [k][j], value net of past income
};

/// Backward induction on deflated node values, stopping only when strictly
/// better than continuing.
LatticeResult snell_lattice_oracle(const Lattice& lattice, const NodeFunction& settlement,
                                   const NodeFunction& rate = {});
LatticeResult snell_lattice_oracle(const Lattice& lattice, const AmericanClaim& claim);

/// All 2^n move sequences of the lattice as a weighted path space, path
/// index bits giving the moves (first move most significant).
struct LatticePaths {
  DiscountedPayoffPaths payoff;
  std::vector<std::vector<std::size_t>> ups;  // [path][k], j at point k
  PathArray prices;                           // (paths, points)
};

LatticePaths lattice_paths(const Lattice& lattice, const NodeFunction& settlement,
                           const NodeFunction& rate = {});

/// Exhaustive dynamic programme on the non-recombining event tree:
/// the supremum of E[Y(tau)] over every adapted stopping time.
double tree_supremum(const DiscountedPayoffPaths& y, std::size_t n_steps);

}  // namespace tameval
