#include "tameval/projection.hpp"

#include <Eigen/SVD>
#include <cstring>

#include "tameval/errors.hpp"

namespace tameval {

RiskProjector::RiskProjector(const Eigen::MatrixXd& sigma, double rank_tol)
    : sigma_(sigma) {
  if (!(rank_tol > 0.0)) {
    throw ValidationError("projection: rank_tol must be positive");
  }
  if (!sigma.allFinite()) {
    throw ValidationError("projection: volatility matrix has non-finite entries");
  }
  const Eigen::Index n = sigma.rows();
  const Eigen::Index d = sigma.cols();
  pinv_ = Eigen::MatrixXd::Zero(d, n);
  range_basis_.resize(n, 0);
  if (n == 0 || d == 0) return;

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      sigma, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double s_max = s.size() > 0 ? s[0] : 0.0;
  Eigen::Index r = 0;
  if (s_max > 0.0) {
    while (r < s.size() && s[r] >= rank_tol * s_max) ++r;
  }
  rank_ = static_cast<std::size_t>(r);
  smallest_retained_ = r > 0 ? s[r - 1] : 0.0;
  if (r == 0) return;

  const auto u = svd.matrixU().leftCols(r);
  const auto v = svd.matrixV().leftCols(r);
  pinv_ = v * s.head(r).cwiseInverse().asDiagonal() * u.transpose();
  range_basis_ = u;
}

void RiskProjector::apply(const Eigen::VectorXd& y, Eigen::VectorXd& theta,
                          Eigen::VectorXd& residual) const {
  // Plain loops: the slices are tiny and this runs once per path step.
  const Eigen::Index n = sigma_.rows();
  const Eigen::Index d = sigma_.cols();
  theta.resize(d);
  residual.resize(n);
  for (Eigen::Index j = 0; j < d; ++j) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) acc += pinv_(j, i) * y[i];
    theta[j] = acc;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = y[i];
    for (Eigen::Index j = 0; j < d; ++j) acc -= sigma_(i, j) * theta[j];
    residual[i] = acc;
  }
}

ProjectionSlice RiskProjector::project(const Eigen::VectorXd& y) const {
  if (y.size() != sigma_.rows()) {
    throw ValidationError("projection: excess return has wrong dimension");
  }
  if (!y.allFinite()) {
    throw ValidationError("projection: excess return has non-finite entries");
  }
  ProjectionSlice out;
  apply(y, out.theta, out.residual);
  out.rank = rank_;
  out.smallest_retained = smallest_retained_;
  return out;
}

ProjectionSlice market_price_of_risk(const Eigen::MatrixXd& sigma,
                                     const Eigen::VectorXd& excess,
                                     double rank_tol) {
  return RiskProjector(sigma, rank_tol).project(excess);
}

std::size_t numerical_rank(const Eigen::MatrixXd& m, double rank_tol) {
  return RiskProjector(m, rank_tol).rank();
}

const RiskProjector& CachedProjector::get(const Eigen::MatrixXd& sigma) {
  const auto& cached = projector_.sigma();
  const bool same =
      valid_ && cached.rows() == sigma.rows() && cached.cols() == sigma.cols() &&
      std::memcmp(cached.data(), sigma.data(),
                  sizeof(double) * static_cast<std::size_t>(sigma.size())) == 0;
  if (!same) {
    projector_ = RiskProjector(sigma, rank_tol_);
    valid_ = true;
  }
  return projector_;
}

}  // namespace tameval
