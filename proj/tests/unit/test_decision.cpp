#include <cmath>

#include <gtest/gtest.h>

#include "ruckep/bundle.hpp"
#include "ruckep/decision.hpp"
#include "ruckep/export.hpp"

using namespace ruckep;

namespace {

// p_make fixed everywhere; isolates the EP combination from the kick surface
struct ConstantKick {
  double p;
  double probability(const PitchPoint&) const { return p; }
};

static_assert(KickProbabilityModel<ConstantKick>);
static_assert(KickProbabilityModel<KickSuccessSurface>);

}  // namespace

TEST(Decision, CaseStudyWithFixedProbability) {
  const auto lo = LineoutCoefficients::premiership_2018_19();
  const auto rt = RestartValueTable::premiership_2018_19();
  const ConstantKick k{0.7411};
  const auto r = evaluate(DecisionQuery::make(30, -20, 20), DecisionModels{lo, k, rt});
  EXPECT_NEAR(r.ep_lineout, 2.6685, 1e-12);
  EXPECT_NEAR(r.ep_kick, 3 * 0.7411 + 0.2589 * 0.76, 1e-12);
  EXPECT_NEAR(r.delta, 2.6685 - 2.420064, 1e-9);
  EXPECT_EQ(r.recommendation, Option::lineout);
  EXPECT_EQ(r.x_lo, 10.0);
  EXPECT_EQ(r.ep_miss, 0.76);
}

TEST(Decision, TieRecommendsKick) {
  EXPECT_EQ(recommend(0.0), Option::kick);
  EXPECT_EQ(recommend(1e-15), Option::lineout);
  EXPECT_EQ(recommend(-0.3), Option::kick);
}

TEST(Decision, QueryDomain) {
  EXPECT_THROW(DecisionQuery::make(4.0, 0, 10), DomainError);
  EXPECT_THROW(DecisionQuery::make(30, 0, -1), DomainError);
  EXPECT_THROW(DecisionQuery::make(30, 40, 10), DomainError);
  EXPECT_NO_THROW(DecisionQuery::make(5.0, 0, 10));
}

TEST(Decision, ParseOption) {
  EXPECT_EQ(parse_option("Lineout"), Option::lineout);
  EXPECT_EQ(parse_option("kick"), Option::kick);
  EXPECT_THROW(parse_option("scrum"), DataError);
}

TEST(Decision, GridLayoutAndParity) {
  const auto& b = demo_bundle();
  GridSpec spec;
  spec.x_step = spec.y_step = 5.0;
  const auto g = decision_grid(spec, 15.0, {}, b.models(), b.model_ids());
  ASSERT_EQ(g.nx(), 13u);
  ASSERT_EQ(g.ny(), 15u);
  for (std::size_t ix = 0; ix < g.nx(); ix += 3)
    for (std::size_t iy = 0; iy < g.ny(); iy += 4)
      EXPECT_EQ(g.at(ix, iy), evaluate(DecisionQuery::make(g.x_axis[ix], g.y_axis[iy], 15.0), b.models()));
}

TEST(Decision, GridStepLargerThanSpan) {
  const ConstantKick k{0.5};
  const auto lo = LineoutCoefficients::premiership_2018_19();
  const auto rt = RestartValueTable::premiership_2018_19();
  GridSpec spec;
  spec.x_step = spec.y_step = 70.0;
  const auto g = decision_grid(spec, 10.0, {}, DecisionModels{lo, k, rt});
  EXPECT_EQ(g.nx(), 1u);
  EXPECT_EQ(g.ny(), 2u);
  EXPECT_TRUE(frontier(g).empty());
}

TEST(Decision, GridSpecValidation) {
  GridSpec spec;
  spec.x_step = 0.0;
  EXPECT_THROW(validate_grid_spec(spec), DomainError);
  spec = {};
  spec.x_min = 2.0;
  EXPECT_THROW(validate_grid_spec(spec), DomainError);
}

TEST(Frontier, LinearFieldWithinHalfStep) {
  for (double step : {1.0, 2.5, 3.0, 7.0}) {
    const auto xs = grid_axis(5.0, 65.0, step);
    const auto ys = grid_axis(-35.0, 35.0, step);
    std::vector<double> v;
    for (double x : xs)
      for (double y : ys) v.push_back(x - 30.0 + 0.0 * y);
    const auto segs = marching_squares(xs, ys, v);
    ASSERT_FALSE(segs.empty()) << step;
    for (const auto& s : segs) {
      EXPECT_LE(std::abs(s.a.x - 30.0), step / 2) << step;
      EXPECT_LE(std::abs(s.b.x - 30.0), step / 2) << step;
    }
  }
}

TEST(Frontier, CircleIsClosedAndNearRadius) {
  const auto xs = grid_axis(5.0, 65.0, 1.0);
  const auto ys = grid_axis(-35.0, 35.0, 1.0);
  std::vector<double> v;
  for (double x : xs)
    for (double y : ys) v.push_back(std::hypot(x - 35.0, y) - 12.3);
  const auto segs = marching_squares(xs, ys, v);
  ASSERT_GT(segs.size(), 40u);
  for (const auto& s : segs) EXPECT_NEAR(std::hypot(s.a.x - 35.0, s.a.y), 12.3, 0.1);
}

TEST(Frontier, SaddleCellsProduceTwoSegments) {
  const std::vector<double> xs = {0.0, 1.0}, ys = {0.0, 1.0};
  const auto segs = marching_squares(xs, ys, {1.0, -1.0, -1.0, 1.0});
  EXPECT_EQ(segs.size(), 2u);
}

TEST(Frontier, ShiftsWithDTouch) {
  const auto& b = demo_bundle();
  GridSpec spec;
  spec.x_step = spec.y_step = 2.5;
  const auto f0 = frontier(decision_grid(spec, 0.0, {}, b.models()));
  const auto f20 = frontier(decision_grid(spec, 20.0, {}, b.models()));
  EXPECT_NE(to_json(f0), to_json(f20));
}

TEST(Sweep, CaseStudyCrossing) {
  const auto& b = demo_bundle();
  const auto s = sweep_dtouch(PitchPoint(30, -20), {}, dtouch_range(30.0), b.models());
  ASSERT_EQ(s.points.size(), 31u);
  ASSERT_TRUE(s.crossing.has_value());
  EXPECT_GE(*s.crossing, 14.0);
  EXPECT_LE(*s.crossing, 18.0);
  EXPECT_LT(s.points.front().delta, 0.0);
}

TEST(Sweep, NoCrossingAndBadRanges) {
  const auto lo = LineoutCoefficients::premiership_2018_19();
  const auto rt = RestartValueTable::premiership_2018_19();
  const ConstantKick k{1.0};
  const auto s = sweep_dtouch(PitchPoint(30, 0), {}, dtouch_range(25.0), DecisionModels{lo, k, rt});
  EXPECT_FALSE(s.crossing.has_value());
  EXPECT_THROW(sweep_dtouch(PitchPoint(30, 0), {}, {5.0, 5.0}, DecisionModels{lo, k, rt}), DomainError);
  EXPECT_THROW(dtouch_range(-1.0), DomainError);
}
