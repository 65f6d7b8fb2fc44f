#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tameval {

/// Price discretization. All schemes freeze coefficients at the left end of
/// each step.
enum class Scheme {
  kLogExactConstant,  // exact lognormal step; constant coefficients only
  kEulerLog,          // Euler step on log prices
  kEuler,             // Euler step on prices; may fail on non-positive prices
};

std::string_view to_string(Scheme scheme);
Scheme parse_scheme(std::string_view name);

/// Market coefficients evaluated at one (time, state) point.
struct Coefficients {
  double rate = 0.0;                 // r
  Eigen::VectorXd mean_return;       // b, size n
  Eigen::VectorXd dividend;          // delta, size n
  Eigen::MatrixXd volatility;        // sigma, n x d

  void resize(std::size_t assets, std::size_t drivers);
  /// b + delta - r * 1
  Eigen::VectorXd excess_return() const;
  void excess_return(Eigen::VectorXd& out) const;  // no allocation once sized
  bool all_finite() const;
};

/// Coefficient processes of an Ito market driven by d Brownian motions.
/// Coefficients are functions of (t, prices, aux) where aux is an optional
/// scalar state adapted to the same Brownian motion. Implementations must be
/// immutable after construction; the engine shares them across threads.
class MarketModel {
 public:
  MarketModel(std::size_t assets, std::size_t drivers,
              Eigen::VectorXd initial_prices, Scheme scheme);
  virtual ~MarketModel() = default;

  std::size_t assets() const { return assets_; }
  std::size_t drivers() const { return drivers_; }
  const Eigen::VectorXd& initial_prices() const { return initial_prices_; }
  Scheme scheme() const { return scheme_; }

  virtual void evaluate(double t, std::span<const double> prices, double aux,
                        Coefficients& out) const = 0;

  virtual std::string family() const = 0;
  virtual bool constant_coefficients() const { return false; }
  /// True when r depends on t only.
  virtual bool deterministic_rate() const { return false; }

  virtual bool has_aux() const { return false; }
  virtual double initial_aux() const { return 0.0; }
  /// Advances the aux state over [t, t + dt] given prices and aux at t.
  virtual double advance_aux(double t, double dt,
                             std::span<const double> prices, double aux,
                             std::span<const double> dw) const;

 private:
  std::size_t assets_;
  std::size_t drivers_;
  Eigen::VectorXd initial_prices_;
  Scheme scheme_;
};

/// Coefficients that are constant on consecutive time pieces [start, until).
struct CoefficientPiece {
  double until = 0.0;  // +inf for the last piece
  double rate = 0.0;
  Eigen::VectorXd mean_return;
  Eigen::VectorXd dividend;
  Eigen::MatrixXd volatility;
};

/// Optional aux factor d(aux) = drift dt + vol dW_driver.
struct BrownianFactor {
  std::size_t driver = 0;  // zero-based
  double initial = 0.0;
  double drift = 0.0;
  double vol = 1.0;
};

/// Constant or piecewise-constant-in-time coefficients.
class ParametricMarket final : public MarketModel {
 public:
  ParametricMarket(Eigen::VectorXd initial_prices,
                   std::vector<CoefficientPiece> pieces, Scheme scheme,
                   std::optional<BrownianFactor> factor = std::nullopt);

  static std::shared_ptr<ParametricMarket> constant(
      Eigen::VectorXd initial_prices, double rate, Eigen::VectorXd mean_return,
      Eigen::VectorXd dividend, Eigen::MatrixXd volatility,
      Scheme scheme = Scheme::kLogExactConstant,
      std::optional<BrownianFactor> factor = std::nullopt);

  /// One-asset, one-driver geometric Brownian motion.
  static std::shared_ptr<ParametricMarket> black_scholes(
      double spot, double rate, double mean_return, double vol,
      double dividend = 0.0, Scheme scheme = Scheme::kLogExactConstant);

  void evaluate(double t, std::span<const double> prices, double aux,
                Coefficients& out) const override;
  std::string family() const override;
  bool constant_coefficients() const override { return pieces_.size() == 1; }
  bool deterministic_rate() const override { return true; }
  bool has_aux() const override { return factor_.has_value(); }
  double initial_aux() const override;
  double advance_aux(double t, double dt, std::span<const double> prices,
                     double aux, std::span<const double> dw) const override;

  const std::vector<CoefficientPiece>& pieces() const { return pieces_; }
  const std::optional<BrownianFactor>& factor() const { return factor_; }

 private:
  const CoefficientPiece& piece_at(double t) const;

  std::vector<CoefficientPiece> pieces_;
  std::optional<BrownianFactor> factor_;
};

/// One asset, one driver, with market price of risk theta = 1 / R where R is
/// a three-dimensional Bessel process driven by W and started at R(0). The
/// deflator Z_0 then equals R(0) / R, a strict local martingale with
/// E Z_0(T) = 2 Phi(R(0) / sqrt(T)) - 1 when R(0) = 1.
class BesselDeflatorMarket final : public MarketModel {
 public:
  BesselDeflatorMarket(double spot, double rate, double vol,
                       double initial_radius = 1.0,
                       Scheme scheme = Scheme::kEulerLog);

  void evaluate(double t, std::span<const double> prices, double aux,
                Coefficients& out) const override;
  std::string family() const override { return "bessel-deflator-demo"; }
  bool deterministic_rate() const override { return true; }
  bool has_aux() const override { return true; }
  double initial_aux() const override { return initial_radius_; }
  /// Euler step on ln R: d ln R = dW / R + dt / (2 R^2).
  double advance_aux(double t, double dt, std::span<const double> prices,
                     double aux, std::span<const double> dw) const override;

  double rate() const { return rate_; }
  double vol() const { return vol_; }

 private:
  double rate_;
  double vol_;
  double initial_radius_;
};

}  // namespace tameval
