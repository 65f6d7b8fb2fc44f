#include "tameval/market_model.hpp"

#include <cmath>
#include <limits>

#include "tameval/errors.hpp"

namespace tameval {

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::kLogExactConstant:
      return "log-exact-constant";
    case Scheme::kEulerLog:
      return "euler-log";
    case Scheme::kEuler:
      return "euler";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "log-exact-constant") return Scheme::kLogExactConstant;
  if (name == "euler-log") return Scheme::kEulerLog;
  if (name == "euler") return Scheme::kEuler;
  throw ValidationError("unknown scheme '" + std::string(name) +
                        "' (expected log-exact-constant, euler-log or euler)");
}

void Coefficients::resize(std::size_t assets, std::size_t drivers) {
  const auto n = static_cast<Eigen::Index>(assets);
  const auto d = static_cast<Eigen::Index>(drivers);
  if (mean_return.size() != n) mean_return.resize(n);
  if (dividend.size() != n) dividend.resize(n);
  if (volatility.rows() != n || volatility.cols() != d) {
    volatility.resize(n, d);
  }
}

Eigen::VectorXd Coefficients::excess_return() const {
  Eigen::VectorXd out;
  excess_return(out);
  return out;
}

void Coefficients::excess_return(Eigen::VectorXd& out) const {
  const Eigen::Index n = mean_return.size();
  out.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = mean_return[i] + dividend[i] - rate;
}

bool Coefficients::all_finite() const {
  // Any inf or NaN makes the sum NaN.
  double acc = rate;
  for (Eigen::Index i = 0; i < mean_return.size(); ++i) acc += 0.0 * mean_return[i];
  for (Eigen::Index i = 0; i < dividend.size(); ++i) acc += 0.0 * dividend[i];
  for (Eigen::Index i = 0; i < volatility.size(); ++i) acc += 0.0 * volatility.data()[i];
  return std::isfinite(acc);
}

MarketModel::MarketModel(std::size_t assets, std::size_t drivers,
                         Eigen::VectorXd initial_prices, Scheme scheme)
    : assets_(assets),
      drivers_(drivers),
      initial_prices_(std::move(initial_prices)),
      scheme_(scheme) {
  if (assets_ == 0 || drivers_ == 0) {
    throw ValidationError("market: need at least one asset and one driver");
  }
  if (static_cast<std::size_t>(initial_prices_.size()) != assets_) {
    throw ValidationError("market: initial_prices has " +
                          std::to_string(initial_prices_.size()) +
                          " entries, expected " + std::to_string(assets_));
  }
  for (Eigen::Index i = 0; i < initial_prices_.size(); ++i) {
    if (!(initial_prices_[i] > 0.0) || !std::isfinite(initial_prices_[i])) {
      throw ValidationError("market: initial prices must be in (0, inf)");
    }
  }
}

double MarketModel::advance_aux(double, double, std::span<const double>,
                                double aux, std::span<const double>) const {
  return aux;
}

// ---------------------------------------------------------------------------

ParametricMarket::ParametricMarket(Eigen::VectorXd initial_prices,
                                   std::vector<CoefficientPiece> pieces,
                                   Scheme scheme,
                                   std::optional<BrownianFactor> factor)
    : MarketModel(static_cast<std::size_t>(initial_prices.size()),
                  pieces.empty()
                      ? 0
                      : static_cast<std::size_t>(pieces.front().volatility.cols()),
                  initial_prices, scheme),
      pieces_(std::move(pieces)),
      factor_(factor) {
  const auto n = static_cast<Eigen::Index>(assets());
  const auto d = static_cast<Eigen::Index>(drivers());
  double previous = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    auto& p = pieces_[i];
    if (p.mean_return.size() != n || p.dividend.size() != n ||
        p.volatility.rows() != n || p.volatility.cols() != d) {
      throw ValidationError("market: coefficient piece " + std::to_string(i) +
                            " has inconsistent dimensions");
    }
    if (!std::isfinite(p.rate) || !p.mean_return.allFinite() ||
        !p.dividend.allFinite() || !p.volatility.allFinite()) {
      throw ValidationError("market: coefficient piece " + std::to_string(i) +
                            " has non-finite entries");
    }
    if ((p.dividend.array() < 0.0).any()) {
      throw ValidationError("market: dividend rates must be >= 0");
    }
    if (i + 1 == pieces_.size()) {
      p.until = std::numeric_limits<double>::infinity();
    } else if (!(p.until > previous)) {
      throw ValidationError("market: piece end times must increase");
    }
    previous = p.until;
  }
  if (scheme == Scheme::kLogExactConstant && pieces_.size() != 1) {
    throw ValidationError(
        "market: scheme log-exact-constant requires constant coefficients");
  }
  if (factor_ && factor_->driver >= drivers()) {
    throw ValidationError("market: aux factor driver out of range");
  }
}

std::shared_ptr<ParametricMarket> ParametricMarket::constant(
    Eigen::VectorXd initial_prices, double rate, Eigen::VectorXd mean_return,
    Eigen::VectorXd dividend, Eigen::MatrixXd volatility, Scheme scheme,
    std::optional<BrownianFactor> factor) {
  CoefficientPiece piece;
  piece.rate = rate;
  piece.mean_return = std::move(mean_return);
  piece.dividend = std::move(dividend);
  piece.volatility = std::move(volatility);
  return std::make_shared<ParametricMarket>(
      std::move(initial_prices), std::vector<CoefficientPiece>{piece}, scheme,
      factor);
}

std::shared_ptr<ParametricMarket> ParametricMarket::black_scholes(
    double spot, double rate, double mean_return, double vol, double dividend,
    Scheme scheme) {
  return constant(Eigen::VectorXd::Constant(1, spot), rate,
                  Eigen::VectorXd::Constant(1, mean_return),
                  Eigen::VectorXd::Constant(1, dividend),
                  Eigen::MatrixXd::Constant(1, 1, vol), scheme);
}

const CoefficientPiece& ParametricMarket::piece_at(double t) const {
  for (const auto& p : pieces_) {
    if (t < p.until) return p;
  }
  return pieces_.back();
}

void ParametricMarket::evaluate(double t, std::span<const double>, double,
                                Coefficients& out) const {
  const auto& p = piece_at(t);
  out.rate = p.rate;
  out.mean_return = p.mean_return;
  out.dividend = p.dividend;
  out.volatility = p.volatility;
}

std::string ParametricMarket::family() const {
  return pieces_.size() == 1 ? "constant" : "piecewise-constant";
}

double ParametricMarket::initial_aux() const {
  return factor_ ? factor_->initial : 0.0;
}

double ParametricMarket::advance_aux(double, double dt,
                                     std::span<const double>, double aux,
                                     std::span<const double> dw) const {
  if (!factor_) return aux;
  return aux + factor_->drift * dt + factor_->vol * dw[factor_->driver];
}

// ---------------------------------------------------------------------------

BesselDeflatorMarket::BesselDeflatorMarket(double spot, double rate,
                                           double vol, double initial_radius,
                                           Scheme scheme)
    : MarketModel(1, 1, Eigen::VectorXd::Constant(1, spot), scheme),
      rate_(rate),
      vol_(vol),
      initial_radius_(initial_radius) {
  if (!(vol_ > 0.0) || !std::isfinite(vol_)) {
    throw ValidationError("bessel-deflator-demo: vol must be positive");
  }
  if (!(initial_radius_ > 0.0)) {
    throw ValidationError("bessel-deflator-demo: initial_radius must be > 0");
  }
  if (scheme == Scheme::kLogExactConstant) {
    throw ValidationError(
        "bessel-deflator-demo: coefficients are state dependent; use "
        "euler-log or euler");
  }
}

void BesselDeflatorMarket::evaluate(double, std::span<const double>,
                                    double aux, Coefficients& out) const {
  out.rate = rate_;
  // theta = 1 / R; R = inf (numerically escaped) gives theta = 0.
  out.mean_return[0] = rate_ + vol_ / aux;
  out.dividend[0] = 0.0;
  out.volatility(0, 0) = vol_;
}

double BesselDeflatorMarket::advance_aux(double, double dt,
                                         std::span<const double>, double aux,
                                         std::span<const double> dw) const {
  if (std::isinf(aux)) return aux;
  const double inv = 1.0 / aux;
  return aux * std::exp(dw[0] * inv + 0.5 * dt * inv * inv);
}

}  // namespace tameval
