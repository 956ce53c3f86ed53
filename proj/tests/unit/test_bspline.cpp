#include <random>

#include <gtest/gtest.h>

#include "../oracles/cox_de_boor.hpp"
#include "ruckep/glm/bspline.hpp"

using namespace ruckep;

TEST(BSpline, RowsSumToOne) {
  const auto b = glm::BSplineBasis::uniform(5.0, 75.0, 8, 3);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(5.0, 75.0);
  for (int i = 0; i < 2000; ++i) ASSERT_NEAR(b.row(u(gen)).sum(), 1.0, 1e-12);
  EXPECT_NEAR(b.row(5.0).sum(), 1.0, 1e-12);
  EXPECT_NEAR(b.row(75.0).sum(), 1.0, 1e-12);
}

TEST(BSpline, MatchesCoxDeBoor) {
  for (int degree : {1, 2, 3}) {
    const auto b = glm::BSplineBasis::uniform(0.0, 1.45, 6, degree);
    std::mt19937_64 gen(degree);
    std::uniform_real_distribution<double> u(0.0, 1.45);
    for (int i = 0; i < 300; ++i) {
      const double x = i == 0 ? 0.0 : i == 1 ? 1.45 : u(gen);
      const auto row = b.row(x);
      for (int k = 0; k < b.size(); ++k)
        ASSERT_NEAR(row(k), oracle::cox_de_boor(b.knots(), k, degree, x), 1e-12) << x << " " << k;
    }
  }
}

TEST(BSpline, NonNegativeAndLocal) {
  const auto b = glm::BSplineBasis::uniform(0.0, 10.0, 9, 3);
  for (double x = 0.0; x <= 10.0; x += 0.37) {
    const auto row = b.row(x);
    int nonzero = 0;
    for (int k = 0; k < row.size(); ++k) {
      EXPECT_GE(row(k), 0.0);
      if (row(k) > 0.0) ++nonzero;
    }
    EXPECT_LE(nonzero, 4);
  }
}

TEST(BSpline, DerivativeMatchesFiniteDifference) {
  const auto b = glm::BSplineBasis::uniform(5.0, 75.0, 8, 3);
  for (double x : {7.3, 21.0, 44.4, 70.2}) {
    const double h = 1e-6;
    const Eigen::RowVectorXd fd = (b.row(x + h) - b.row(x - h)) / (2 * h);
    EXPECT_LT((fd - b.derivative_row(x)).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(BSpline, OutsideDomainThrows) {
  const auto b = glm::BSplineBasis::uniform(5.0, 75.0, 8, 3);
  EXPECT_THROW(b.row(4.99), DomainError);
  EXPECT_THROW(b.row(75.01), DomainError);
  EXPECT_THROW(glm::BSplineBasis::uniform(0.0, 1.0, 3, 3), Error);
}
