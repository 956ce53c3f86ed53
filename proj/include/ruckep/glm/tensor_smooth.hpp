#pragma once

#include <string>

#include <Eigen/Dense>

#include "ruckep/error.hpp"
#include "ruckep/glm/design.hpp"

namespace ruckep::glm {

/// Row-wise Kronecker product: column (i * kb + j) holds a_i * b_j.
inline Eigen::MatrixXd row_kronecker(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows())
    throw DataError("tensor product: margin row counts differ (" + std::to_string(a.rows()) +
                    " vs " + std::to_string(b.rows()) + ")");
  Eigen::MatrixXd out(a.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.cols(); ++i)
    out.middleCols(i * b.cols(), b.cols()) = b.array().colwise() * a.col(i).array();
  return out;
}

inline Eigen::MatrixXd kronecker(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// (k-2) x k second-difference operator D; the penalty matrix is S = D'D.
inline Eigen::MatrixXd second_difference(Eigen::Index k) {
  if (k < 3) return Eigen::MatrixXd::Zero(0, k);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(k - 2, k);
  for (Eigen::Index i = 0; i < k - 2; ++i) {
    d(i, i) = 1.0;
    d(i, i + 1) = -2.0;
    d(i, i + 2) = 1.0;
  }
  return d;
}

/// Square roots of the two marginal penalties of a tensor smooth:
/// S_d (x) I = (D_d (x) I)'(D_d (x) I), and likewise I (x) S_theta.
struct TensorPenalties {
  Eigen::MatrixXd root_first;
  Eigen::MatrixXd root_second;

  Eigen::MatrixXd matrix_first() const { return root_first.transpose() * root_first; }
  Eigen::MatrixXd matrix_second() const { return root_second.transpose() * root_second; }
};

inline TensorPenalties tensor_penalties(Eigen::Index k_first, Eigen::Index k_second) {
  return TensorPenalties{
      kronecker(second_difference(k_first), Eigen::MatrixXd::Identity(k_second, k_second)),
      kronecker(Eigen::MatrixXd::Identity(k_first, k_first), second_difference(k_second))};
}

/// beta' S beta for S = root' root.
inline double penalty_value(const Eigen::MatrixXd& root, const Eigen::VectorXd& beta) {
  return (root * beta).squaredNorm();
}

inline DesignMatrix tensor_product_design(const Eigen::MatrixXd& basis_first,
                                          const Eigen::MatrixXd& basis_second) {
  Eigen::MatrixXd x = row_kronecker(basis_first, basis_second);
  std::vector<std::string> labels;
  labels.reserve(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index i = 0; i < basis_first.cols(); ++i)
    for (Eigen::Index j = 0; j < basis_second.cols(); ++j)
      labels.push_back("te(" + std::to_string(i) + "," + std::to_string(j) + ")");
  return DesignMatrix(std::move(x), std::move(labels));
}

}  // namespace ruckep::glm
