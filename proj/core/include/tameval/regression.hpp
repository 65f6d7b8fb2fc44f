#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tameval/scenario.hpp"

namespace tameval {

/// Total-degree polynomial basis on standardized features. Features that
/// are constant across the fitting sample are dropped.
class PolynomialBasis {
 public:
  PolynomialBasis() = default;
  /// Standardization is taken from the rows of `features`.
  PolynomialBasis(const Eigen::MatrixXd& features, int degree);

  int degree() const { return degree_; }
  std::size_t size() const { return exponents_.size(); }
  std::size_t active_features() const { return active_.size(); }

  void evaluate(std::span<const double> x, std::span<double> out) const;
  Eigen::MatrixXd design(const Eigen::MatrixXd& features) const;
  PolynomialBasis with_degree(int degree) const;

 private:
  void build_exponents();

  int degree_ = 0;
  std::vector<std::size_t> active_;
  std::vector<double> mean_;
  std::vector<double> scale_;
  std::vector<std::vector<int>> exponents_;
};

struct RegressionFit {
  PolynomialBasis basis;
  Eigen::VectorXd coefficients;
  Eigen::VectorXd std_errors;  // OLS standard errors of the coefficients
  int requested_degree = 0;
  double residual_sd = 0.0;
  std::size_t samples = 0;
  std::vector<std::string> warnings;

  double predict(std::span<const double> x) const;
  Eigen::VectorXd predict(const Eigen::MatrixXd& features) const;
  int degree() const { return basis.degree(); }
};

/// Least squares of y on the basis of `features` (rows are samples), by
/// column-pivoted QR. A rank-deficient design drops one degree at a time
/// and records a warning.
RegressionFit fit_regression(const Eigen::MatrixXd& features,
                             const Eigen::VectorXd& y, int degree,
                             double rank_tol = 1e-10);

/// Regression features of the state at one point for the listed paths:
/// prices, then the auxiliary state when the model carries one.
Eigen::MatrixXd state_features(const ScenarioSet& scenarios, std::size_t point,
                               std::span<const std::size_t> paths);
Eigen::MatrixXd state_features(const ScenarioSet& scenarios, std::size_t point);

}  // namespace tameval
