#pragma once

#include <Eigen/Dense>
#include <cstddef>

namespace tameval {

inline constexpr double kDefaultRankTolerance = 1e-10;

/// Market price of risk at one (path, step).
struct ProjectionSlice {
  Eigen::VectorXd theta;     // size d, in the row space of sigma
  Eigen::VectorXd residual;  // p, size n, orthogonal to range(sigma)
  std::size_t rank = 0;
  double smallest_retained = 0.0;  // smallest singular value kept (0 if rank 0)
};

/// Minimal-norm least-squares solver for sigma x ~= y. Singular values below
/// rank_tol * s_max are treated as zero. The decomposition is computed once
/// and reused for every right-hand side.
class RiskProjector {
 public:
  RiskProjector() = default;
  explicit RiskProjector(const Eigen::MatrixXd& sigma,
                         double rank_tol = kDefaultRankTolerance);

  /// theta = sigma^+ y and residual = y - sigma theta.
  void apply(const Eigen::VectorXd& y, Eigen::VectorXd& theta,
             Eigen::VectorXd& residual) const;
  ProjectionSlice project(const Eigen::VectorXd& y) const;

  std::size_t rank() const { return rank_; }
  double smallest_retained() const { return smallest_retained_; }
  const Eigen::MatrixXd& sigma() const { return sigma_; }
  const Eigen::MatrixXd& pseudo_inverse() const { return pinv_; }
  /// Orthonormal basis of range(sigma), n x rank.
  const Eigen::MatrixXd& range_basis() const { return range_basis_; }

 private:
  Eigen::MatrixXd sigma_;
  Eigen::MatrixXd pinv_;
  Eigen::MatrixXd range_basis_;
  std::size_t rank_ = 0;
  double smallest_retained_ = 0.0;
};

/// Market price of risk by projection of the excess return onto range(sigma).
/// Throws ValidationError on non-finite input or rank_tol <= 0.
ProjectionSlice market_price_of_risk(const Eigen::MatrixXd& sigma,
                                     const Eigen::VectorXd& excess,
                                     double rank_tol = kDefaultRankTolerance);

/// Numerical rank of a matrix under the same relative threshold.
std::size_t numerical_rank(const Eigen::MatrixXd& m,
                           double rank_tol = kDefaultRankTolerance);

/// Reuses the last decomposition when sigma repeats bit-for-bit, which is the
/// common case for piecewise-constant volatility.
class CachedProjector {
 public:
  explicit CachedProjector(double rank_tol = kDefaultRankTolerance)
      : rank_tol_(rank_tol) {}
  const RiskProjector& get(const Eigen::MatrixXd& sigma);

 private:
  double rank_tol_;
  bool valid_ = false;
  RiskProjector projector_;
};

}  // namespace tameval
