#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ruckep/error.hpp"

namespace ruckep::glm {

/// Column-labelled n x p matrix of finite values.
class DesignMatrix {
 public:
  DesignMatrix(Eigen::MatrixXd values, std::vector<std::string> labels)
      : values_(std::move(values)), labels_(std::move(labels)) {
    if (labels_.empty()) {
      for (Eigen::Index j = 0; j < values_.cols(); ++j) labels_.push_back("x" + std::to_string(j));
    }
    if (static_cast<Eigen::Index>(labels_.size()) != values_.cols())
      throw DataError("design matrix: label count does not match column count");
    if (!values_.allFinite()) throw DataError("design matrix contains non-finite entries");
  }

  explicit DesignMatrix(Eigen::MatrixXd values) : DesignMatrix(std::move(values), {}) {}

  Eigen::Index rows() const noexcept { return values_.rows(); }
  Eigen::Index cols() const noexcept { return values_.cols(); }
  const Eigen::MatrixXd& values() const noexcept { return values_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

 private:
  Eigen::MatrixXd values_;
  std::vector<std::string> labels_;
};

}  // namespace ruckep::glm
