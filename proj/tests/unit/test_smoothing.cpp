#include <random>

#include <gtest/gtest.h>

#include "../oracles/newton_logistic.hpp"
#include "../oracles/second_difference.hpp"
#include "ruckep/glm/bspline.hpp"
#include "ruckep/glm/irls.hpp"
#include "ruckep/glm/smoothing.hpp"
#include "ruckep/glm/tensor_smooth.hpp"

using namespace ruckep;

namespace {

struct Problem {
  Eigen::MatrixXd x;
  std::vector<double> y, w;
  glm::TensorPenalties pen;
};

// Tensor spline design on random points with binomial proportions drawn from a
// smooth truth.
Problem random_problem(std::mt19937_64& gen, int n, int ka, int kb, bool weighted) {
  const auto ba = glm::BSplineBasis::uniform(0.0, 1.0, ka, 3);
  const auto bb = glm::BSplineBasis::uniform(0.0, 1.0, kb, 3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> s, t;
  Problem p;
  for (int i = 0; i < n; ++i) {
    s.push_back(u(gen));
    t.push_back(u(gen));
    const double prob = 1.0 / (1.0 + std::exp(-(1.5 - 3.0 * s.back() + std::sin(4.0 * t.back()))));
    const int trials = weighted ? 1 + static_cast<int>(gen() % 20) : 10;
    std::binomial_distribution<int> bin(trials, prob);
    p.y.push_back(static_cast<double>(bin(gen)) / trials);
    p.w.push_back(weighted ? trials : 1.0);
  }
  p.x = glm::row_kronecker(glm::bspline_basis(ba, s), glm::bspline_basis(bb, t));
  p.pen = glm::tensor_penalties(ka, kb);
  return p;
}

oracle::Matrix rows(const Eigen::MatrixXd& m) {
  oracle::Matrix out(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

}  // namespace

TEST(TensorSmooth, PenaltiesMatchBruteForce) {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> z;
  for (auto [ka, kb] : {std::pair{8, 6}, std::pair{4, 5}, std::pair{6, 3}}) {
    const auto pen = glm::tensor_penalties(ka, kb);
    std::vector<double> b(static_cast<std::size_t>(ka * kb));
    for (auto& v : b) v = z(gen);
    const Eigen::Map<const Eigen::VectorXd> beta(b.data(), ka * kb);
    EXPECT_NEAR(glm::penalty_value(pen.root_first, beta), oracle::penalty_first(b, ka, kb), 1e-10);
    EXPECT_NEAR(glm::penalty_value(pen.root_second, beta), oracle::penalty_second(b, ka, kb), 1e-10);
  }
}

TEST(TensorSmooth, PenaltyNullSpaceIsPlanes) {
  const int ka = 8, kb = 6;
  const auto pen = glm::tensor_penalties(ka, kb);
  Eigen::VectorXd beta(ka * kb);
  for (int i = 0; i < ka; ++i)
    for (int j = 0; j < kb; ++j) beta(i * kb + j) = 0.3 + 1.7 * i - 0.4 * j + 0.05 * i * j;
  EXPECT_NEAR(glm::penalty_value(pen.root_first, beta), 0.0, 1e-18);
  EXPECT_NEAR(glm::penalty_value(pen.root_second, beta), 0.0, 1e-18);
}

TEST(TensorSmooth, RowKroneckerOrdering) {
  Eigen::MatrixXd a(1, 2), b(1, 3);
  a << 1, 2;
  b << 3, 4, 5;
  const auto k = glm::row_kronecker(a, b);
  EXPECT_EQ(k(0, 1 * 3 + 2), 10.0);
  EXPECT_EQ(k(0, 0 * 3 + 1), 4.0);
  EXPECT_EQ(glm::second_difference(5).rows(), 3);
}

TEST(Irls, MatchesNewtonOracle) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 6; ++trial) {
    auto p = random_problem(gen, 80, 5, 4, trial % 2 == 1);
    const double lf = 0.1 * (trial + 1), ls = 2.0 / (trial + 1);
    const glm::PenaltyTerm terms[] = {{p.pen.root_first, lf}, {p.pen.root_second, ls}};
    glm::IrlsOptions opt;
    opt.ridge = 1e-6;
    const auto fit = glm::irls_logistic(p.x, p.y, p.w, terms, opt);
    const Eigen::MatrixXd s = lf * p.pen.matrix_first() + ls * p.pen.matrix_second() +
                              1e-6 * Eigen::MatrixXd::Identity(p.x.cols(), p.x.cols());
    const auto ref = oracle::newton_logistic(rows(p.x), p.y, p.w, rows(s));
    for (Eigen::Index j = 0; j < p.x.cols(); ++j)
      ASSERT_NEAR(fit.coefficients(j), ref.beta[static_cast<std::size_t>(j)], 1e-6) << trial;
  }
}

TEST(Irls, PenalizedDevianceNonIncreasing) {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> loglam(-4.0, 4.0);
  for (int trial = 0; trial < 100; ++trial) {
    auto p = random_problem(gen, 60, 6, 5, trial % 3 == 0);
    const glm::PenaltyTerm terms[] = {{p.pen.root_first, std::pow(10.0, loglam(gen))},
                                      {p.pen.root_second, std::pow(10.0, loglam(gen))}};
    glm::IrlsOptions opt;
    opt.ridge = 1e-6;
    const auto fit = glm::irls_logistic(p.x, p.y, p.w, terms, opt);
    const auto& pd = fit.record.penalized_deviance;
    for (std::size_t i = 1; i < pd.size(); ++i) ASSERT_LE(pd[i], pd[i - 1]) << trial << " " << i;
    ASSERT_TRUE(fit.record.converged);
  }
}

TEST(Irls, SeparationIsNonConvergence) {
  Eigen::MatrixXd x(8, 2);
  std::vector<double> y, w(8, 1.0);
  for (int i = 0; i < 8; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = i - 3.5;
    y.push_back(i < 4 ? 0.0 : 1.0);
  }
  try {
    glm::irls_logistic(x, y, w, {});
    FAIL();
  } catch (const NonConvergenceError& e) {
    EXPECT_EQ(e.last_iterate().size(), 2u);
    EXPECT_EQ(e.exit_code(), 3);
  }
}

TEST(Irls, AllOnesStaysFiniteWithRidge) {
  std::mt19937_64 gen(4);
  auto p = random_problem(gen, 40, 5, 4, false);
  std::fill(p.y.begin(), p.y.end(), 1.0);
  const glm::PenaltyTerm terms[] = {{p.pen.root_first, 1.0}, {p.pen.root_second, 1.0}};
  glm::IrlsOptions opt;
  opt.ridge = 1e-6;
  const auto fit = glm::irls_logistic(p.x, p.y, p.w, terms, opt);
  EXPECT_TRUE(fit.coefficients.allFinite());
  EXPECT_GT(fit.fitted.minCoeff(), 0.99);
}

TEST(Irls, RejectsBadInputs) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(3, 1);
  EXPECT_THROW(glm::irls_logistic(x, std::vector<double>{0.1, 1.2, 0.5}, std::vector<double>{1, 1, 1}, {}),
               DataError);
  EXPECT_THROW(glm::irls_logistic(x, std::vector<double>{0.1, 0.2, 0.5}, std::vector<double>{0, 0, 0}, {}),
               DataError);
}

TEST(Irls, EdfBetweenNullSpaceAndBasisSize) {
  std::mt19937_64 gen(8);
  auto p = random_problem(gen, 4000, 6, 5, false);
  glm::IrlsOptions opt;
  opt.ridge = 1e-6;
  const glm::PenaltyTerm heavy[] = {{p.pen.root_first, 1e6}, {p.pen.root_second, 1e6}};
  const auto a = glm::irls_logistic(p.x, p.y, p.w, heavy, opt);
  EXPECT_NEAR(a.edf, 4.0, 0.05);  // bilinear null space
  // outer P-spline bases only have their tails in range, so the corners are weakly
  // determined; the limit needs a really small lambda and no ridge
  opt.ridge = 0.0;
  const glm::PenaltyTerm light[] = {{p.pen.root_first, 1e-10}, {p.pen.root_second, 1e-10}};
  const auto b = glm::irls_logistic(p.x, p.y, p.w, light, opt);
  EXPECT_NEAR(b.edf, 30.0, 0.05);
}

TEST(Smoothing, GcvPicksInteriorAndIsOrderIndependent) {
  std::mt19937_64 gen(21);
  auto p = random_problem(gen, 150, 6, 5, true);
  const auto grid = glm::LambdaGrid::log_spaced(1e-4, 1e4, 9);
  glm::IrlsOptions opt;
  opt.ridge = 1e-6;
  const auto sel = glm::select_lambda(p.x, p.pen.root_first, p.pen.root_second, p.y, p.w, grid, opt);
  EXPECT_EQ(sel.candidates.size(), 81u);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : sel.candidates)
    if (c.converged) best = std::min(best, c.score);
  EXPECT_EQ(sel.score, best);

  auto reversed = grid;
  std::reverse(reversed.first.begin(), reversed.first.end());
  std::reverse(reversed.second.begin(), reversed.second.end());
  const auto sel2 = glm::select_lambda(p.x, p.pen.root_first, p.pen.root_second, p.y, p.w, reversed, opt);
  EXPECT_EQ(sel.lambda_first, sel2.lambda_first);
  EXPECT_EQ(sel.lambda_second, sel2.lambda_second);
}

TEST(Smoothing, TiesGoToLargerLambda) {
  std::mt19937_64 gen(22);
  auto p = random_problem(gen, 50, 5, 4, false);
  glm::IrlsOptions opt;
  opt.ridge = 1e-6;
  const auto flat = [](const glm::IrlsResult&) { return 1.0; };
  const auto sel = glm::select_lambda(p.x, p.pen.root_first, p.pen.root_second, p.y, p.w,
                                      glm::LambdaGrid::log_spaced(1e-2, 1e2, 3), opt, flat);
  EXPECT_EQ(sel.lambda_first, 1e2);
  EXPECT_EQ(sel.lambda_second, 1e2);
}

TEST(Smoothing, NoConvergentCandidate) {
  Eigen::MatrixXd x(8, 2);
  std::vector<double> y, w(8, 1.0);
  for (int i = 0; i < 8; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = i - 3.5;
    y.push_back(i < 4 ? 0.0 : 1.0);
  }
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(1, 2);
  EXPECT_THROW(glm::select_lambda(x, zero, zero, y, w, glm::LambdaGrid::log_spaced(1, 1, 1)), SelectionError);
}
