#include "tameval/regression.hpp"

#include <cmath>
#include <numeric>

#include "tameval/errors.hpp"

namespace tameval {

PolynomialBasis::PolynomialBasis(const Eigen::MatrixXd& features, int degree)
    : degree_(degree) {
  if (degree < 0) throw ValidationError("regression degree must be >= 0");
  const auto rows = features.rows();
  for (Eigen::Index c = 0; c < features.cols(); ++c) {
    if (rows == 0) break;
    const double mean = features.col(c).mean();
    const double var =
        (features.col(c).array() - mean).square().sum() / static_cast<double>(rows);
    const double sd = std::sqrt(var);
    if (!(sd > 1e-12 * (1.0 + std::abs(mean)))) continue;
    active_.push_back(static_cast<std::size_t>(c));
    mean_.push_back(mean);
    scale_.push_back(sd);
  }
  build_exponents();
}

PolynomialBasis PolynomialBasis::with_degree(int degree) const {
  PolynomialBasis b = *this;
  b.degree_ = degree;
  b.build_exponents();
  return b;
}

void PolynomialBasis::build_exponents() {
  exponents_.clear();
  const std::size_t m = active_.size();
  std::vector<int> e(m, 0);
  // Graded order: every monomial of total degree 0, then 1, and so on.
  auto emit = [&](auto&& self, std::size_t pos, int left) -> void {
    if (pos + 1 >= m) {
      if (m > 0) e[m - 1] = left;
      exponents_.push_back(e);
      return;
    }
    for (int q = left; q >= 0; --q) {
      e[pos] = q;
      self(self, pos + 1, left - q);
    }
  };
  for (int total = 0; total <= degree_; ++total) {
    if (m == 0 && total > 0) break;
    emit(emit, 0, total);
  }
}

void PolynomialBasis::evaluate(std::span<const double> x,
                               std::span<double> out) const {
  const std::size_t m = active_.size();
  double z[16];
  std::vector<double> zbig;
  double* zp = z;
  if (m > 16) {
    zbig.resize(m);
    zp = zbig.data();
  }
  for (std::size_t a = 0; a < m; ++a) {
    zp[a] = (x[active_[a]] - mean_[a]) / scale_[a];
  }
  for (std::size_t t = 0; t < exponents_.size(); ++t) {
    double v = 1.0;
    const auto& e = exponents_[t];
    for (std::size_t a = 0; a < m; ++a) {
      for (int q = 0; q < e[a]; ++q) v *= zp[a];
    }
    out[t] = v;
  }
}

Eigen::MatrixXd PolynomialBasis::design(const Eigen::MatrixXd& features) const {
  Eigen::MatrixXd a(features.rows(), static_cast<Eigen::Index>(size()));
  std::vector<double> x(static_cast<std::size_t>(features.cols()));
  std::vector<double> row(size());
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    for (Eigen::Index c = 0; c < features.cols(); ++c) {
      x[static_cast<std::size_t>(c)] = features(r, c);
    }
    evaluate(x, row);
    for (std::size_t t = 0; t < row.size(); ++t) {
      a(r, static_cast<Eigen::Index>(t)) = row[t];
    }
  }
  return a;
}

double RegressionFit::predict(std::span<const double> x) const {
  double row_small[64];
  std::vector<double> row_big;
  std::span<double> row;
  if (basis.size() <= 64) {
    row = std::span<double>(row_small, basis.size());
  } else {
    row_big.resize(basis.size());
    row = row_big;
  }
  basis.evaluate(x, row);
  double v = 0.0;
  for (std::size_t t = 0; t < row.size(); ++t) {
    v += row[t] * coefficients[static_cast<Eigen::Index>(t)];
  }
  return v;
}

Eigen::VectorXd RegressionFit::predict(const Eigen::MatrixXd& features) const {
  return basis.design(features) * coefficients;
}

RegressionFit fit_regression(const Eigen::MatrixXd& features,
                             const Eigen::VectorXd& y, int degree,
                             double rank_tol) {
  if (features.rows() != y.size()) {
    throw ValidationError("regression: feature rows and targets differ");
  }
  if (features.rows() == 0) throw ValidationError("regression: no samples");
  RegressionFit fit;
  fit.requested_degree = degree;
  fit.samples = static_cast<std::size_t>(y.size());
  PolynomialBasis basis(features, degree);
  for (int deg = degree; deg >= 0; --deg) {
    PolynomialBasis b = deg == degree ? basis : basis.with_degree(deg);
    const Eigen::MatrixXd a = b.design(features);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(rank_tol);
    const auto cols = a.cols();
    if (qr.rank() < cols || a.rows() < cols) {
      fit.warnings.push_back("rank-deficient design at degree " +
                             std::to_string(deg) + "; lowering degree");
      continue;
    }
    fit.basis = b;
    fit.coefficients = qr.solve(y);
    const Eigen::VectorXd resid = y - a * fit.coefficients;
    const auto dof = a.rows() - cols;
    const double s2 = dof > 0 ? resid.squaredNorm() / static_cast<double>(dof) : 0.0;
    fit.residual_sd = std::sqrt(s2);
    const Eigen::MatrixXd gram = a.transpose() * a;
    const Eigen::MatrixXd inv =
        gram.ldlt().solve(Eigen::MatrixXd::Identity(cols, cols));
    fit.std_errors = (s2 * inv.diagonal()).cwiseMax(0.0).cwiseSqrt();
    return fit;
  }
  throw SimulationError("regression failed even with a constant basis");
}

Eigen::MatrixXd state_features(const ScenarioSet& s, std::size_t point,
                               std::span<const std::size_t> paths) {
  const bool aux = s.model && s.model->has_aux();
  const auto n = s.assets();
  Eigen::MatrixXd f(static_cast<Eigen::Index>(paths.size()),
                    static_cast<Eigen::Index>(n + (aux ? 1 : 0)));
  for (std::size_t r = 0; r < paths.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    for (std::size_t i = 0; i < n; ++i) {
      f(row, static_cast<Eigen::Index>(i)) = s.prices(paths[r], point, i);
    }
    if (aux) f(row, static_cast<Eigen::Index>(n)) = s.aux(paths[r], point);
  }
  return f;
}

Eigen::MatrixXd state_features(const ScenarioSet& s, std::size_t point) {
  std::vector<std::size_t> all(s.paths());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return state_features(s, point, all);
}

}  // namespace tameval
