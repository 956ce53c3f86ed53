#pragma once

// Smoothing-parameter selection for two-penalty smooths by grid search.
// The default criterion is generalized cross-validation on the deviance,
//     V(lambda) = n D(lambda) / (n - tr A(lambda))^2,
// and any other criterion with the same signature can be passed in.

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ruckep/error.hpp"
#include "ruckep/glm/irls.hpp"

namespace ruckep::glm {

struct LambdaGrid {
  std::vector<double> first;
  std::vector<double> second;

  /// `points` log-spaced values in [lo, hi] for both margins.
  static LambdaGrid log_spaced(double lo = 1e-4, double hi = 1e4, int points = 9) {
    if (!(lo > 0.0 && hi >= lo) || points < 1) throw UsageError("lambda grid: need 0 < lo <= hi, points >= 1");
    std::vector<double> v;
    for (int i = 0; i < points; ++i) {
      const double t = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
      v.push_back(std::pow(10.0, std::log10(lo) + t * (std::log10(hi) - std::log10(lo))));
    }
    return LambdaGrid{v, v};
  }
};

struct LambdaCandidate {
  double lambda_first = 0.0;
  double lambda_second = 0.0;
  bool converged = false;
  double score = std::numeric_limits<double>::quiet_NaN();
  double edf = std::numeric_limits<double>::quiet_NaN();
  double deviance = std::numeric_limits<double>::quiet_NaN();
};

struct LambdaSelection {
  double lambda_first = 0.0;
  double lambda_second = 0.0;
  double score = 0.0;
  IrlsResult fit;
  std::vector<LambdaCandidate> candidates;  // in grid order (first-major)
};

using SmoothingCriterion = std::function<double(const IrlsResult&)>;

inline double gcv_score(const IrlsResult& fit) {
  const double n = static_cast<double>(fit.n_obs);
  const double denom = n - fit.edf;
  if (!(denom > 0.0)) return std::numeric_limits<double>::infinity();
  return n * fit.deviance / (denom * denom);
}

/// Fits every grid pair and returns the argmin of `criterion`. Exact ties go to the
/// smoother fit: larger lambda_first, then larger lambda_second. Non-convergent pairs
/// are skipped; if none converge a SelectionError is thrown.
inline LambdaSelection select_lambda(const Eigen::MatrixXd& x, const Eigen::MatrixXd& root_first,
                                     const Eigen::MatrixXd& root_second, std::span<const double> y,
                                     std::span<const double> w, const LambdaGrid& grid,
                                     const IrlsOptions& opt = {},
                                     const SmoothingCriterion& criterion = gcv_score) {
  if (grid.first.empty() || grid.second.empty()) throw UsageError("lambda grid is empty");
  LambdaSelection sel;
  std::optional<std::size_t> best;
  std::string last_error;

  for (double lf : grid.first) {
    for (double ls : grid.second) {
      LambdaCandidate cand{lf, ls};
      const PenaltyTerm terms[] = {{root_first, lf}, {root_second, ls}};
      try {
        IrlsResult fit = irls_logistic(x, y, w, terms, opt);
        cand.converged = true;
        cand.score = criterion(fit);
        cand.edf = fit.edf;
        cand.deviance = fit.deviance;
        bool better = false;
        if (!best) {
          better = true;
        } else {
          const auto& b = sel.candidates[*best];
          if (cand.score < b.score)
            better = true;
          else if (cand.score == b.score)
            better = lf > b.lambda_first || (lf == b.lambda_first && ls > b.lambda_second);
        }
        if (better && std::isfinite(cand.score)) {
          best = sel.candidates.size();
          sel.fit = std::move(fit);
        }
      } catch (const NonConvergenceError& e) {
        last_error = e.what();
      } catch (const SingularDesignError& e) {
        last_error = e.what();
      }
      sel.candidates.push_back(cand);
    }
  }
  if (!best)
    throw SelectionError("smoothing selection: no grid candidate converged" +
                         (last_error.empty() ? std::string() : " (last error: " + last_error + ")"));
  const auto& b = sel.candidates[*best];
  sel.lambda_first = b.lambda_first;
  sel.lambda_second = b.lambda_second;
  sel.score = b.score;
  return sel;
}

}  // namespace ruckep::glm
