#pragma once

// B-spline bases by the Cox-de Boor recurrence, evaluated locally on the knot
// span that contains the query (only degree + 1 functions are nonzero there).

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ruckep/error.hpp"

namespace ruckep::glm {

class BSplineBasis {
 public:
  BSplineBasis(std::vector<double> knots, int degree) : knots_(std::move(knots)), degree_(degree) {
    if (degree_ < 0) throw DataError("B-spline degree must be >= 0");
    if (knots_.size() < static_cast<std::size_t>(2 * degree_ + 2))
      throw DataError("B-spline knot vector too short for degree " + std::to_string(degree_));
    for (std::size_t i = 0; i < knots_.size(); ++i) {
      if (!std::isfinite(knots_[i])) throw DataError("B-spline knots must be finite");
      if (i && knots_[i] < knots_[i - 1]) throw DataError("B-spline knots must be non-decreasing");
    }
    if (!(lower() < upper())) throw DataError("B-spline basis has an empty domain");
  }

  /// Equally spaced knots extended `degree` intervals past each end, so the
  /// Greville abscissae are uniform and second differences annihilate linear
  /// functions of the covariate.
  static BSplineBasis uniform(double lo, double hi, int n_basis, int degree) {
    if (!(hi > lo)) throw DataError("B-spline range must satisfy lo < hi");
    if (n_basis <= degree) throw DataError("B-spline needs more basis functions than its degree");
    const int intervals = n_basis - degree;
    const double h = (hi - lo) / intervals;
    std::vector<double> knots(static_cast<std::size_t>(n_basis + degree + 1));
    for (std::size_t i = 0; i < knots.size(); ++i)
      knots[i] = lo + (static_cast<double>(i) - degree) * h;
    // Pin the domain ends exactly.
    knots[static_cast<std::size_t>(degree)] = lo;
    knots[static_cast<std::size_t>(n_basis)] = hi;
    return BSplineBasis(std::move(knots), degree);
  }

  int degree() const noexcept { return degree_; }
  const std::vector<double>& knots() const noexcept { return knots_; }
  int size() const noexcept { return static_cast<int>(knots_.size()) - degree_ - 1; }
  double lower() const noexcept { return knots_[static_cast<std::size_t>(degree_)]; }
  double upper() const noexcept { return knots_[static_cast<std::size_t>(size())]; }

  bool contains(double x) const noexcept { return x >= lower() && x <= upper(); }

  /// Index i of the span [t_i, t_{i+1}) holding x; the right end of the domain
  /// belongs to the last nonempty span.
  int span(double x) const {
    if (!contains(x))
      throw DomainError("x", "B-spline query " + std::to_string(x) + " outside [" +
                                 std::to_string(lower()) + ", " + std::to_string(upper()) + "]");
    const int n = size();
    if (x >= upper()) {
      int i = n - 1;
      while (i > degree_ && knots_[static_cast<std::size_t>(i)] == knots_[static_cast<std::size_t>(i + 1)]) --i;
      return i;
    }
    auto first = knots_.begin() + degree_;
    auto last = knots_.begin() + n + 1;
    return static_cast<int>(std::upper_bound(first, last, x) - knots_.begin()) - 1;
  }

  /// Values of the degree-`deg` functions N_{span-deg..span} at x (deg <= degree()).
  std::vector<double> local_values(int sp, int deg, double x) const {
    std::vector<double> n(static_cast<std::size_t>(deg + 1), 0.0);
    std::vector<double> left(static_cast<std::size_t>(deg + 1)), right(static_cast<std::size_t>(deg + 1));
    n[0] = 1.0;
    for (int j = 1; j <= deg; ++j) {
      left[j] = x - knots_[static_cast<std::size_t>(sp + 1 - j)];
      right[j] = knots_[static_cast<std::size_t>(sp + j)] - x;
      double saved = 0.0;
      for (int r = 0; r < j; ++r) {
        const double denom = right[r + 1] + left[j - r];
        const double temp = denom != 0.0 ? n[r] / denom : 0.0;
        n[r] = saved + right[r + 1] * temp;
        saved = left[j - r] * temp;
      }
      n[j] = saved;
    }
    return n;
  }

  Eigen::RowVectorXd row(double x) const {
    Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(size());
    const int sp = span(x);
    const auto vals = local_values(sp, degree_, x);
    for (int k = 0; k <= degree_; ++k) out(sp - degree_ + k) = vals[static_cast<std::size_t>(k)];
    return out;
  }

  /// First derivatives of every basis function at x.
  Eigen::RowVectorXd derivative_row(double x) const {
    Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(size());
    if (degree_ == 0) return out;
    const int sp = span(x);
    const int p = degree_;
    const auto lower_vals = local_values(sp, p - 1, x);  // N_{sp-p+1..sp, p-1}
    auto lower_at = [&](int i) {
      const int k = i - (sp - p + 1);
      return (k >= 0 && k < p) ? lower_vals[static_cast<std::size_t>(k)] : 0.0;
    };
    auto t = [&](int i) { return knots_[static_cast<std::size_t>(i)]; };
    for (int i = sp - p; i <= sp; ++i) {
      double v = 0.0;
      const double d1 = t(i + p) - t(i);
      const double d2 = t(i + p + 1) - t(i + 1);
      if (d1 > 0.0) v += lower_at(i) / d1;
      if (d2 > 0.0) v -= lower_at(i + 1) / d2;
      out(i) = p * v;
    }
    return out;
  }

 private:
  std::vector<double> knots_;
  int degree_;
};

/// Basis matrix with one row per query point.
inline Eigen::MatrixXd bspline_basis(const BSplineBasis& basis, std::span<const double> x) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(x.size()), basis.size());
  for (std::size_t i = 0; i < x.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = basis.row(x[i]);
  return out;
}

}  // namespace ruckep::glm
