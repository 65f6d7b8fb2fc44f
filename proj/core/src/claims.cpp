#include "tameval/claims.hpp"

#include <algorithm>
#include <cmath>

#include "tameval/errors.hpp"

namespace tameval {

std::string to_string(PayoffFamily f) {
  switch (f) {
    case PayoffFamily::kCall: return "call";
    case PayoffFamily::kPut: return "put";
    case PayoffFamily::kForward: return "forward";
    case PayoffFamily::kPiecewiseLinear: return "piecewise-linear";
    case PayoffFamily::kConstant: return "constant";
    case PayoffFamily::kBond: return "bond";
    case PayoffFamily::kAuxLinear: return "aux-linear";
    case PayoffFamily::kAuxCall: return "aux-call";
    case PayoffFamily::kCustom: return "custom";
  }
  return "unknown";
}

PayoffFamily parse_payoff_family(const std::string& name) {
  for (auto f : {PayoffFamily::kCall, PayoffFamily::kPut, PayoffFamily::kForward,
                 PayoffFamily::kPiecewiseLinear, PayoffFamily::kConstant,
                 PayoffFamily::kBond, PayoffFamily::kAuxLinear,
                 PayoffFamily::kAuxCall}) {
    if (to_string(f) == name) return f;
  }
  throw ValidationError("unknown payoff family '" + name + "'");
}

double Payoff::operator()(const PathState& s) const {
  switch (family) {
    case PayoffFamily::kCall:
      return scale * std::max(s.prices[asset] - strike, 0.0);
    case PayoffFamily::kPut:
      return scale * std::max(strike - s.prices[asset], 0.0);
    case PayoffFamily::kForward:
      return scale * (s.prices[asset] - strike);
    case PayoffFamily::kConstant:
      return scale;
    case PayoffFamily::kBond:
      return scale * s.bond;
    case PayoffFamily::kAuxLinear:
      return scale * (s.aux - strike);
    case PayoffFamily::kAuxCall:
      return scale * std::max(s.aux - strike, 0.0);
    case PayoffFamily::kCustom:
      return custom(s);
    case PayoffFamily::kPiecewiseLinear: {
      const double x = s.prices[asset];
      const std::size_t m = knots.size();
      if (m == 1) return scale * values[0];
      // Linear extrapolation with the end segments.
      std::size_t j = static_cast<std::size_t>(
          std::upper_bound(knots.begin(), knots.end(), x) - knots.begin());
      j = std::clamp<std::size_t>(j, 1, m - 1);
      const double w = (x - knots[j - 1]) / (knots[j] - knots[j - 1]);
      return scale * (values[j - 1] + w * (values[j] - values[j - 1]));
    }
  }
  return 0.0;
}

void Payoff::validate(std::size_t assets) const {
  if (!std::isfinite(strike) || !std::isfinite(scale)) {
    throw ValidationError("payoff strike and scale must be finite");
  }
  const bool uses_asset = family == PayoffFamily::kCall ||
                          family == PayoffFamily::kPut ||
                          family == PayoffFamily::kForward ||
                          family == PayoffFamily::kPiecewiseLinear;
  if (uses_asset && asset >= assets) {
    throw ValidationError("payoff asset index out of range");
  }
  if (family == PayoffFamily::kPiecewiseLinear) {
    if (knots.empty() || knots.size() != values.size()) {
      throw ValidationError("piecewise-linear payoff needs matching knots and values");
    }
    for (std::size_t i = 1; i < knots.size(); ++i) {
      if (!(knots[i] > knots[i - 1])) {
        throw ValidationError("piecewise-linear knots must be strictly increasing");
      }
    }
  }
  if (family == PayoffFamily::kCustom && !custom) {
    throw ValidationError("custom payoff without a function");
  }
}

Payoff Payoff::constant(double value) {
  Payoff p;
  p.family = PayoffFamily::kConstant;
  p.scale = value;
  return p;
}

Payoff Payoff::call(double strike, std::size_t asset) {
  Payoff p;
  p.family = PayoffFamily::kCall;
  p.strike = strike;
  p.asset = asset;
  return p;
}

Payoff Payoff::put(double strike, std::size_t asset) {
  Payoff p = call(strike, asset);
  p.family = PayoffFamily::kPut;
  return p;
}

Payoff Payoff::forward(double strike, std::size_t asset) {
  Payoff p = call(strike, asset);
  p.family = PayoffFamily::kForward;
  return p;
}

Payoff Payoff::bond_multiple(double k) {
  Payoff p;
  p.family = PayoffFamily::kBond;
  p.scale = k;
  return p;
}

Payoff Payoff::piecewise_linear(std::vector<double> knots,
                                std::vector<double> values, std::size_t asset) {
  Payoff p;
  p.family = PayoffFamily::kPiecewiseLinear;
  p.knots = std::move(knots);
  p.values = std::move(values);
  p.asset = asset;
  p.validate(asset + 1);
  return p;
}

Payoff Payoff::from_function(std::function<double(const PathState&)> f) {
  Payoff p;
  p.family = PayoffFamily::kCustom;
  p.custom = std::move(f);
  return p;
}

std::string to_string(ExpiryKind k) {
  switch (k) {
    case ExpiryKind::kHorizon: return "horizon";
    case ExpiryKind::kHitAbove: return "hit-above";
    case ExpiryKind::kHitBelow: return "hit-below";
  }
  return "unknown";
}

ExpiryKind parse_expiry_kind(const std::string& name) {
  for (auto k : {ExpiryKind::kHorizon, ExpiryKind::kHitAbove, ExpiryKind::kHitBelow}) {
    if (to_string(k) == name) return k;
  }
  throw ValidationError("unknown expiry rule '" + name + "'");
}

std::size_t ExpiryRule::index(const ScenarioSet& s, std::size_t path) const {
  const std::size_t last = std::isfinite(horizon)
                               ? s.grid.index_at_or_before(horizon)
                               : s.points() - 1;
  if (kind == ExpiryKind::kHorizon) return last;
  for (std::size_t k = 0; k < last; ++k) {
    const double x = on_aux ? s.aux(path, k) : s.prices(path, k, asset);
    if (kind == ExpiryKind::kHitAbove ? x >= level : x <= level) return k;
  }
  return last;
}

std::vector<std::size_t> ExpiryRule::indices(const ScenarioSet& s) const {
  if (!on_aux && kind != ExpiryKind::kHorizon && asset >= s.assets()) {
    throw ValidationError("expiry rule asset index out of range");
  }
  std::vector<std::size_t> out(s.paths());
  for (std::size_t p = 0; p < s.paths(); ++p) out[p] = index(s, p);
  return out;
}

std::string to_string(TournamentOrder o) {
  return o == TournamentOrder::kLatestFirst ? "latest-first" : "earliest-first";
}

TournamentOrder parse_tournament_order(const std::string& name) {
  if (name == "latest-first") return TournamentOrder::kLatestFirst;
  if (name == "earliest-first") return TournamentOrder::kEarliestFirst;
  throw ValidationError("unknown tournament order '" + name + "'");
}

}  // namespace tameval
