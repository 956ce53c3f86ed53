#pragma once

// Penalized logistic regression by iteratively reweighted least squares.
//
// Responses are success proportions y_i in [0, 1] with trial weights m_i, so
// aggregated grid cells and individual Bernoulli trials share one code path.
// Each iteration solves the augmented least-squares problem
//
//     | sqrt(W) X          |        | sqrt(W) z |
//     | sqrt(lambda_k) R_k | beta = |     0     |
//     | sqrt(ridge) I      |        |     0     |
//
// with Householder QR, where S_k = R_k' R_k. The penalized deviance
// D(beta) + sum_k lambda_k beta' S_k beta is forced non-increasing by step halving.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ruckep/error.hpp"

namespace ruckep::glm {

struct PenaltyTerm {
  Eigen::MatrixXd root;  // S = root' root
  double lambda = 0.0;
};

struct IrlsOptions {
  double tolerance = 1e-8;        // relative change in penalized deviance
  int max_iterations = 100;
  double coef_tolerance = 1e-6;   // relative max-abs coefficient change
  int max_halvings = 40;
  double ridge = 0.0;             // identity penalty added to every fit
};

struct ConvergenceRecord {
  int iterations = 0;
  bool converged = false;
  std::vector<double> deviance;            // binomial deviance per accepted iterate
  std::vector<double> penalized_deviance;  // deviance + penalty per accepted iterate
  int step_halvings = 0;

  double final_deviance() const {
    return deviance.empty() ? std::numeric_limits<double>::quiet_NaN() : deviance.back();
  }
};

struct IrlsResult {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd linear_predictor;
  Eigen::VectorXd fitted;
  ConvergenceRecord record;
  double deviance = 0.0;
  double edf = 0.0;           // trace of the influence matrix
  double pearson_chi2 = 0.0;
  double weight_total = 0.0;
  Eigen::Index n_obs = 0;     // rows with positive weight
};

namespace detail {

inline double softplus(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

inline double inv_logit(double eta) { return 1.0 / (1.0 + std::exp(-eta)); }

// mu(1 - mu) without cancellation.
inline double logistic_variance(double eta) {
  const double a = 1.0 / (1.0 + std::exp(-eta));
  const double b = 1.0 / (1.0 + std::exp(eta));
  return std::max(a * b, std::numeric_limits<double>::min());
}

}  // namespace detail

inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// Binomial deviance for proportions y with trial weights w at linear predictor eta.
inline double binomial_deviance(std::span<const double> y, std::span<const double> w,
                                const Eigen::VectorXd& eta) {
  double dev = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (w[i] <= 0.0) continue;
    const double e = eta(static_cast<Eigen::Index>(i));
    const double log_mu = -detail::softplus(-e);
    const double log_1mu = -detail::softplus(e);
    double term = 0.0;
    if (y[i] > 0.0) term += y[i] * (std::log(y[i]) - log_mu);
    if (y[i] < 1.0) term += (1.0 - y[i]) * (std::log1p(-y[i]) - log_1mu);
    dev += 2.0 * w[i] * term;
  }
  return dev;
}

namespace detail {

inline double penalty_total(std::span<const PenaltyTerm> penalties, double ridge,
                            const Eigen::VectorXd& beta) {
  double s = ridge * beta.squaredNorm();
  for (const auto& p : penalties)
    if (p.lambda > 0.0) s += p.lambda * (p.root * beta).squaredNorm();
  return s;
}

inline Eigen::Index penalty_rows(std::span<const PenaltyTerm> penalties, double ridge,
                                 Eigen::Index p) {
  Eigen::Index rows = ridge > 0.0 ? p : 0;
  for (const auto& t : penalties)
    if (t.lambda > 0.0) rows += t.root.rows();
  return rows;
}

// Stacks sqrt(W) X over the scaled penalty roots.
inline Eigen::MatrixXd augmented(const Eigen::MatrixXd& x, const Eigen::VectorXd& sqrt_w,
                                 std::span<const PenaltyTerm> penalties, double ridge) {
  const Eigen::Index n = x.rows(), p = x.cols();
  Eigen::MatrixXd a(n + penalty_rows(penalties, ridge, p), p);
  a.topRows(n) = x.array().colwise() * sqrt_w.array();
  Eigen::Index row = n;
  for (const auto& t : penalties) {
    if (t.lambda <= 0.0) continue;
    a.middleRows(row, t.root.rows()) = std::sqrt(t.lambda) * t.root;
    row += t.root.rows();
  }
  if (ridge > 0.0) a.bottomRows(p) = std::sqrt(ridge) * Eigen::MatrixXd::Identity(p, p);
  return a;
}

inline void validate_irls_inputs(const Eigen::MatrixXd& x, std::span<const double> y,
                                 std::span<const double> w, std::span<const PenaltyTerm> penalties,
                                 const IrlsOptions& opt) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (y.size() != n || w.size() != n)
    throw DataError("irls: response/weight length does not match design rows");
  if (x.cols() == 0) throw DataError("irls: design has no columns");
  if (!x.allFinite()) throw DataError("irls: design contains non-finite entries");
  bool any_positive = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(y[i] >= 0.0 && y[i] <= 1.0)) throw DataError("irls: responses must lie in [0, 1]");
    if (!(w[i] >= 0.0) || !std::isfinite(w[i])) throw DataError("irls: weights must be finite and >= 0");
    any_positive = any_positive || w[i] > 0.0;
  }
  if (!any_positive) throw DataError("irls: at least one weight must be positive");
  for (const auto& t : penalties) {
    if (t.root.cols() != x.cols()) throw DataError("irls: penalty dimension does not match design");
    if (!(t.lambda >= 0.0) || !std::isfinite(t.lambda)) throw DataError("irls: lambda must be finite and >= 0");
  }
  if (!(opt.ridge >= 0.0)) throw DataError("irls: ridge must be >= 0");
}

}  // namespace detail

/// Fits a (penalized) logistic model. Throws NonConvergenceError, carrying the last
/// iterate, when coefficients are still moving after max_iterations; perfect
/// separation shows up this way since the coefficients diverge while the deviance
/// flattens toward zero.
inline IrlsResult irls_logistic(const Eigen::MatrixXd& x, std::span<const double> y,
                                std::span<const double> w, std::span<const PenaltyTerm> penalties,
                                const IrlsOptions& opt = {}) {
  detail::validate_irls_inputs(x, y, w, penalties, opt);
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();

  Eigen::VectorXd eta(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu0 = (w[i] * y[i] + 0.5) / (w[i] + 1.0);
    eta(i) = logit(mu0);
  }

  auto objective = [&](const Eigen::VectorXd& beta, const Eigen::VectorXd& lp, double& dev) {
    dev = binomial_deviance(y, w, lp);
    return dev + detail::penalty_total(penalties, opt.ridge, beta);
  };

  IrlsResult res;
  Eigen::VectorXd beta_old;
  double pdev_old = std::numeric_limits<double>::infinity();
  Eigen::VectorXd sqrt_w(n), z(n);

  for (int it = 1; it <= opt.max_iterations; ++it) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double mu = detail::inv_logit(eta(i));
      const double v = detail::logistic_variance(eta(i));
      z(i) = eta(i) + (y[i] - mu) / v;
      sqrt_w(i) = std::sqrt(w[i] * v);
    }
    const Eigen::MatrixXd a = detail::augmented(x, sqrt_w, penalties, opt.ridge);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(a.rows());
    b.head(n) = sqrt_w.cwiseProduct(z);

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    const Eigen::MatrixXd r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
    const double rmax = r.diagonal().cwiseAbs().maxCoeff();
    for (Eigen::Index j = 0; j < p; ++j)
      if (!(std::abs(r(j, j)) > 1e-13 * rmax))
        throw SingularDesignError(static_cast<std::size_t>(j), "coefficient " + std::to_string(j));
    const Eigen::VectorXd qtb = (qr.householderQ().transpose() * b).head(p);
    Eigen::VectorXd beta = r.triangularView<Eigen::Upper>().solve(qtb);
    Eigen::VectorXd lp = x * beta;
    double dev = 0.0;
    double pdev = objective(beta, lp, dev);

    if (it > 1 && !(pdev <= pdev_old)) {
      // Step halving toward the previous iterate.
      Eigen::VectorXd step = beta - beta_old;
      bool improved = false;
      for (int h = 0; h < opt.max_halvings; ++h) {
        step *= 0.5;
        ++res.record.step_halvings;
        beta = beta_old + step;
        lp = x * beta;
        pdev = objective(beta, lp, dev);
        if (pdev <= pdev_old) {
          improved = true;
          break;
        }
      }
      if (!improved) {
        // No descent direction left at working precision: stay put.
        beta = beta_old;
        lp = x * beta;
        pdev = objective(beta, lp, dev);
      }
    }

    res.record.iterations = it;
    res.record.deviance.push_back(dev);
    res.record.penalized_deviance.push_back(pdev);

    bool converged = false;
    if (it > 1) {
      const double dchange = std::abs(pdev - pdev_old) / (std::abs(pdev) + 0.1);
      const double bchange = (beta - beta_old).cwiseAbs().maxCoeff();
      const double bscale = 1.0 + beta.cwiseAbs().maxCoeff();
      converged = dchange < opt.tolerance && bchange <= opt.coef_tolerance * bscale;
    }
    beta_old = beta;
    pdev_old = pdev;
    eta = lp;
    if (!beta.allFinite())
      throw NonConvergenceError("irls: coefficients became non-finite",
                                std::vector<double>(beta.data(), beta.data() + p), it);
    if (converged) {
      res.record.converged = true;
      break;
    }
  }

  if (!res.record.converged)
    throw NonConvergenceError(
        "irls: no convergence after " + std::to_string(opt.max_iterations) +
            " iterations (coefficients still diverging; possible perfect separation)",
        std::vector<double>(beta_old.data(), beta_old.data() + p), res.record.iterations);

  res.coefficients = beta_old;
  res.linear_predictor = eta;
  res.fitted = eta.unaryExpr([](double e) { return detail::inv_logit(e); });
  res.deviance = res.record.deviance.back();

  // Influence-matrix trace at the converged weights: ||sqrt(W) X R^-1||_F^2.
  for (Eigen::Index i = 0; i < n; ++i) sqrt_w(i) = std::sqrt(w[i] * detail::logistic_variance(eta(i)));
  const Eigen::MatrixXd a = detail::augmented(x, sqrt_w, penalties, opt.ridge);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd wx = x.array().colwise() * sqrt_w.array();
  const Eigen::MatrixXd q1t = r.transpose().triangularView<Eigen::Lower>().solve(wx.transpose());
  res.edf = q1t.squaredNorm();

  for (Eigen::Index i = 0; i < n; ++i) {
    if (w[i] <= 0.0) continue;
    const double mu = res.fitted(i);
    res.pearson_chi2 += w[i] * (y[i] - mu) * (y[i] - mu) / detail::logistic_variance(eta(i));
    res.weight_total += w[i];
    ++res.n_obs;
  }
  return res;
}

}  // namespace ruckep::glm
