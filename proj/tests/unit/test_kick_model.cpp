#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "ruckep/bundle.hpp"
#include "ruckep/kick_model.hpp"

using namespace ruckep;

namespace {

std::vector<KickGridCell> generator_grid(double a, double bd, double bt) {
  std::vector<KickGridCell> cells;
  for (int r = 0; r < kGridRowBands; ++r)
    for (int c = 0; c < kGridColBands; ++c) {
      KickGridCell cell{5.0 * r, 5.0 * (r + 1), 5.0 * c, 5.0 * (c + 1), 0.0, std::nullopt};
      const auto g = to_kick_geometry(grid_cell_center(r, c));
      cell.proportion = 1.0 / (1.0 + std::exp(-(a + bd * g.distance + bt * g.angle)));
      cells.push_back(cell);
    }
  return cells;
}

}  // namespace

TEST(KickModel, RecoversSmoothGenerator) {
  const auto s = fit_kick_surface(generator_grid(4.0, -0.08, -1.5));
  for (const auto& c : generator_grid(4.0, -0.08, -1.5)) {
    if (c.center().x() < kKickFloor) continue;
    EXPECT_NEAR(s.probability(c.center()), c.proportion, 0.03);
  }
  EXPECT_TRUE(s.convergence.converged);
  EXPECT_EQ(s.n_cells, 168u);
}

TEST(KickModel, MirrorAndPermutationInvariant) {
  auto cells = generator_grid(3.0, -0.07, -1.2);
  const auto a = fit_kick_surface(cells);
  for (auto& c : cells) {
    const double lo = 70.0 - c.touch_hi, hi = 70.0 - c.touch_lo;
    c.touch_lo = lo;
    c.touch_hi = hi;
  }
  std::mt19937_64 gen(5);
  std::shuffle(cells.begin(), cells.end(), gen);
  const auto b = fit_kick_surface(cells);
  EXPECT_EQ(a.coefficients(), b.coefficients());
  const PitchPoint p(23.0, 11.0);
  EXPECT_EQ(a.probability(p), a.probability(p.mirrored()));
}

TEST(KickModel, MonotoneInDistanceForDemoGrid) {
  const auto& s = demo_bundle().kick;
  for (double x = 6.0; x < 60.0; x += 2.0)
    EXPECT_GT(s.probability(PitchPoint(x, 0.0)), s.probability(PitchPoint(x + 2.0, 0.0)) - 1e-9);
}

TEST(KickModel, DemoCalibration) {
  EXPECT_NEAR(demo_intercept(), 4.818, 0.001);
  EXPECT_NEAR(demo_generator(std::sqrt(1300.0), std::atan(2.0 / 3.0)), 0.7411, 1e-12);
  const double p = demo_bundle().kick.probability(PitchPoint(30.0, -20.0));
  EXPECT_NEAR(p, 0.7411, 0.002);
}

TEST(KickModel, DemoFixtureMatchesGenerator) {
  std::ifstream in(RUCKEP_DATA_DIR "/demo_kick_grid.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  std::ostringstream fresh;
  write_kick_grid_csv(fresh, demo_kick_grid());
  EXPECT_EQ(ss.str(), fresh.str());
}

TEST(KickModel, DomainErrors) {
  const auto& s = demo_bundle().kick;
  EXPECT_THROW(s.probability(PitchPoint(4.0, 0.0)), DomainError);
  EXPECT_THROW(ep_kick(1.2, 0.76), DomainError);
  EXPECT_NEAR(ep_kick(0.7411, 0.76), 3 * 0.7411 + 0.2589 * 0.76, 1e-12);
  EXPECT_DOUBLE_EQ(ep_kick(1.0, 5.0), 3.0);
}

TEST(KickModel, TooFewCellsRejected) {
  auto cells = generator_grid(4.0, -0.08, -1.5);
  cells.resize(20);
  EXPECT_THROW(fit_kick_surface(cells), FitDomainError);
}

TEST(KickModel, SaturatedGridStaysFinite) {
  auto cells = generator_grid(4.0, -0.08, -1.5);
  for (auto& c : cells) c.proportion = 1.0;
  const auto s = fit_kick_surface(cells);
  EXPECT_TRUE(s.coefficients().allFinite());
  EXPECT_GT(s.probability(PitchPoint(30.0, 0.0)), 0.99);
}

TEST(KickModel, GridCsvValidation) {
  std::istringstream bad("x_band_lo,x_band_hi,touch_band_lo,touch_band_hi,proportion,attempts\n0,5,0,5,1.5,\n");
  EXPECT_THROW(parse_kick_grid_csv(bad), DataError);
  std::istringstream attempts("x_band_lo,x_band_hi,touch_band_lo,touch_band_hi,proportion,attempts\n0,5,0,5,0.5,12\n");
  const auto cells = parse_kick_grid_csv(attempts);
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_EQ(cells[0].attempts.value(), 12);
}

TEST(KickModel, JsonRoundTrip) {
  const auto& s = demo_bundle().kick;
  const auto back = KickSuccessSurface::from_json(s.to_json());
  EXPECT_EQ(back.coefficients(), s.coefficients());
  EXPECT_EQ(back.probability(PitchPoint(17.0, -9.0)), s.probability(PitchPoint(17.0, -9.0)));
  EXPECT_EQ(back.lambda_distance, s.lambda_distance);
}

TEST(KickModel, CalibrationAndCrossValidation) {
  const auto cells = demo_kick_grid();
  const auto& s = demo_bundle().kick;
  const auto bins = calibration_bins(s, cells, 10);
  ASSERT_EQ(bins.size(), 10u);
  for (const auto& b : bins) EXPECT_NEAR(b.mean_predicted, b.mean_observed, 0.02);
  const double cv1 = kfold_deviance(cells, s.lambda_distance, s.lambda_angle, 5, 1);
  const double cv2 = kfold_deviance(cells, s.lambda_distance, s.lambda_angle, 5, 1);
  EXPECT_EQ(cv1, cv2);
  EXPECT_GT(cv1, 0.0);
}
