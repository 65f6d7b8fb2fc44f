#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "tameval/scenario.hpp"

namespace tameval {

enum class PayoffFamily {
  kCall,
  kPut,
  kForward,
  kPiecewiseLinear,
  kConstant,
  kBond,
  kAuxLinear,
  kAuxCall,
  kCustom,
};

std::string to_string(PayoffFamily family);
PayoffFamily parse_payoff_family(const std::string& name);

/// A function of the observable state. Used both for terminal payoffs and
/// for payment rates.
struct Payoff {
  PayoffFamily family = PayoffFamily::kConstant;
  double strike = 0.0;
  double scale = 1.0;
  std::size_t asset = 0;
  std::vector<double> knots;   // piecewise-linear: increasing asset levels
  std::vector<double> values;  // piecewise-linear: payoff at the knots
  std::function<double(const PathState&)> custom;

  double operator()(const PathState& state) const;
  bool is_zero() const {
    return family == PayoffFamily::kConstant && scale == 0.0;
  }
  void validate(std::size_t assets) const;

  static Payoff zero() { return constant(0.0); }
  static Payoff constant(double value);
  static Payoff call(double strike, std::size_t asset = 0);
  static Payoff put(double strike, std::size_t asset = 0);
  static Payoff forward(double strike, std::size_t asset = 0);
  static Payoff bond_multiple(double k);
  static Payoff piecewise_linear(std::vector<double> knots,
                                 std::vector<double> values,
                                 std::size_t asset = 0);
  static Payoff from_function(std::function<double(const PathState&)> f);
};

enum class ExpiryKind { kHorizon, kHitAbove, kHitBelow };

/// Fixed horizon, or the first grid point at which a price (or the
/// auxiliary state) crosses a level, capped at the horizon.
struct ExpiryRule {
  ExpiryKind kind = ExpiryKind::kHorizon;
  bool on_aux = false;
  std::size_t asset = 0;
  double level = 0.0;
  double horizon = std::numeric_limits<double>::infinity();  // capped at grid end

  std::size_t index(const ScenarioSet& scenarios, std::size_t path) const;
  std::vector<std::size_t> indices(const ScenarioSet& scenarios) const;
};

std::string to_string(ExpiryKind kind);
ExpiryKind parse_expiry_kind(const std::string& name);

/// Terminal lump g at expiry plus a payment rate c before it.
struct EuropeanClaim {
  std::string id = "claim";
  Payoff payoff = Payoff::zero();
  Payoff rate = Payoff::zero();
  ExpiryRule expiry;
  std::vector<std::size_t> driver_support;  // 0-based driver indices
  bool hedge = false;
};

enum class TournamentOrder { kLatestFirst, kEarliestFirst };

std::string to_string(TournamentOrder order);
TournamentOrder parse_tournament_order(const std::string& name);

/// Lump-sum settlement L on exercise plus an income rate before it.
struct AmericanClaim {
  std::string id = "claim";
  Payoff settlement = Payoff::zero();
  Payoff rate = Payoff::zero();
  ExpiryRule horizon;
  std::vector<std::size_t> driver_support;
  TournamentOrder order = TournamentOrder::kLatestFirst;
  /// Candidate exercise dates as grid indices; empty means every date.
  std::vector<std::size_t> candidates;
};

}  // namespace tameval
