#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include "ruckep/error.hpp"
#include "ruckep/glm/design.hpp"

namespace ruckep::glm {

struct OlsFit {
  std::vector<std::string> labels;
  Eigen::VectorXd coefficients;
  Eigen::VectorXd std_errors;
  Eigen::VectorXd t_values;
  Eigen::VectorXd p_values;
  Eigen::VectorXd fitted;
  Eigen::VectorXd residuals;
  double residual_variance = 0.0;
  std::size_t n = 0;
  std::size_t p = 0;
};

/// Relative threshold below which |R_jj| marks column j as dependent on columns 0..j-1.
inline constexpr double kRankTolerance = 1e-10;

/// Throws SingularDesignError naming the first column that lies (numerically) in the
/// span of its predecessors. `r` is the R factor of an unpivoted QR of `x`.
inline void check_rank(const Eigen::MatrixXd& x, const Eigen::MatrixXd& r,
                       const std::vector<std::string>& labels) {
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double col_norm = x.col(j).norm();
    if (std::abs(r(j, j)) <= kRankTolerance * col_norm || col_norm == 0.0)
      throw SingularDesignError(static_cast<std::size_t>(j), labels[static_cast<std::size_t>(j)]);
  }
}

/// Least squares by Householder QR with classical inference: unbiased residual
/// variance, standard errors from (R'R)^-1, two-sided t-test p-values on n - p df.
inline OlsFit ols_fit(const DesignMatrix& design, std::span<const double> y) {
  const Eigen::MatrixXd& x = design.values();
  const auto n = x.rows();
  const auto p = x.cols();
  if (static_cast<Eigen::Index>(y.size()) != n)
    throw DataError("ols: response length " + std::to_string(y.size()) +
                    " does not match design rows " + std::to_string(n));
  if (p == 0) throw DataError("ols: design has no columns");
  if (n < p) throw DataError("ols: fewer observations than predictors");
  Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
  if (!yv.allFinite()) throw DataError("ols: response contains non-finite values");

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  check_rank(x, r, design.labels());

  const Eigen::VectorXd qty = (qr.householderQ().transpose() * yv).head(p);
  OlsFit fit;
  fit.labels = design.labels();
  fit.n = static_cast<std::size_t>(n);
  fit.p = static_cast<std::size_t>(p);
  fit.coefficients = r.triangularView<Eigen::Upper>().solve(qty);
  fit.fitted = x * fit.coefficients;
  fit.residuals = yv - fit.fitted;

  const double df = static_cast<double>(n - p);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  fit.residual_variance = df > 0 ? fit.residuals.squaredNorm() / df : nan;

  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  fit.std_errors = (r_inv.rowwise().squaredNorm() * fit.residual_variance).cwiseSqrt();
  fit.t_values = fit.coefficients.cwiseQuotient(fit.std_errors);
  fit.p_values.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double t = fit.t_values(j);
    if (df <= 0 || std::isnan(t)) {
      fit.p_values(j) = nan;
    } else if (std::isinf(t)) {
      fit.p_values(j) = 0.0;
    } else {
      boost::math::students_t dist(df);
      fit.p_values(j) = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    }
  }
  return fit;
}

}  // namespace ruckep::glm
