#pragma once

// Penalty decision: kick to touch (lineout) versus kick at goal.
//
//     delta(x, y; d_touch) = EP_lineout(max(5, x - d_touch)) - EP_kick(x, y)
//
// Positive delta favors the lineout; delta == 0 recommends the kick.

#include <cmath>
#include <concepts>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ruckep/error.hpp"
#include "ruckep/geometry.hpp"
#include "ruckep/kick_model.hpp"
#include "ruckep/lineout_model.hpp"
#include "ruckep/restart_table.hpp"

namespace ruckep {

enum class Option { lineout, kick };

inline std::string to_string(Option o) { return o == Option::lineout ? "lineout" : "kick"; }

inline Option parse_option(std::string_view s) {
  std::string l;
  for (char c : s) l.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  while (!l.empty() && std::isspace(static_cast<unsigned char>(l.back()))) l.pop_back();
  while (!l.empty() && std::isspace(static_cast<unsigned char>(l.front()))) l.erase(0, 1);
  if (l == "lineout" || l == "touch") return Option::lineout;
  if (l == "kick" || l == "goal") return Option::kick;
  throw DataError("decision must be 'lineout' or 'kick', got '" + std::string(s) + "'");
}

inline Option recommend(double delta) { return delta > 0.0 ? Option::lineout : Option::kick; }

/// Anything that maps a penalty spot to a make probability.
template <class M>
concept KickProbabilityModel = requires(const M& m, const PitchPoint& p) {
  { m.probability(p) } -> std::convertible_to<double>;
};

struct DecisionQuery {
  PitchPoint point;
  double d_touch = 0.0;
  GameContext ctx{};

  static DecisionQuery make(double x, double y, double d_touch, GameContext ctx = {}) {
    PitchPoint p(x, y);
    if (x < kKickFloor)
      throw DomainError("x", "penalty at x = " + format_double(x) +
                                 " m is inside the 5 m line (kick model domain starts at 5 m)");
    if (!std::isfinite(d_touch) || d_touch < 0.0)
      throw DomainError("d_touch", "d_touch must be a finite value >= 0");
    return DecisionQuery{p, d_touch, ctx};
  }
};

struct DecisionResult {
  double ep_lineout = 0.0;
  double ep_kick = 0.0;
  double delta = 0.0;
  Option recommendation = Option::kick;
  double x_lo = 0.0;
  double p_make = 0.0;
  double ep_miss = 0.0;

  friend bool operator==(const DecisionResult&, const DecisionResult&) = default;
};

template <KickProbabilityModel Kick>
struct DecisionModels {
  const LineoutCoefficients& lineout;
  const Kick& kick;
  const RestartValueTable& restart;
};

template <KickProbabilityModel Kick>
DecisionModels(const LineoutCoefficients&, const Kick&, const RestartValueTable&) -> DecisionModels<Kick>;

template <KickProbabilityModel Kick>
DecisionResult evaluate(const DecisionQuery& q, const DecisionModels<Kick>& m) {
  if (q.point.x() < kKickFloor)
    throw DomainError("x", "penalty inside the 5 m line is outside the kick model domain");
  DecisionResult r;
  r.x_lo = touch_translation(q.point.x(), q.d_touch);
  r.ep_lineout = ep_lineout(m.lineout, r.x_lo, q.ctx);
  r.p_make = m.kick.probability(q.point);
  r.ep_miss = m.restart.ep_miss(q.point.x());  // at the penalty spot, before translation
  r.ep_kick = ep_kick(r.p_make, r.ep_miss);
  r.delta = r.ep_lineout - r.ep_kick;
  r.recommendation = recommend(r.delta);
  return r;
}

// ---------------------------------------------------------------------------
// Grids

struct GridSpec {
  double x_min = 5.0, x_max = 65.0;
  double y_min = -kHalfWidth, y_max = kHalfWidth;
  double x_step = 1.0, y_step = 1.0;
};

/// min, min + step, ... not exceeding max (within 1e-9 of a step).
inline std::vector<double> grid_axis(double lo, double hi, double step) {
  std::vector<double> axis;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
  axis.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) axis.push_back(lo + static_cast<double>(i) * step);
  return axis;
}

inline void validate_grid_spec(const GridSpec& g) {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(g.x_min) || !finite(g.x_max) || !finite(g.y_min) || !finite(g.y_max))
    throw DomainError("bounds", "grid bounds must be finite");
  if (!(g.x_step > 0.0) || !(g.y_step > 0.0) || !finite(g.x_step) || !finite(g.y_step))
    throw DomainError("step", "grid step must be > 0");
  if (g.x_min > g.x_max || g.y_min > g.y_max)
    throw DomainError("bounds", "grid bounds are degenerate (min > max)");
  if (g.x_min < kKickFloor || g.x_max > 65.0)
    throw DomainError("bounds", "grid x bounds must lie within [5, 65] m");
  if (g.y_min < -kHalfWidth || g.y_max > kHalfWidth)
    throw DomainError("bounds", "grid y bounds must lie within [-35, 35] m");
}

struct DecisionGrid {
  std::vector<double> x_axis;  // rows, from the try line outward
  std::vector<double> y_axis;  // columns, left to right
  std::vector<DecisionResult> nodes;  // row-major: nodes[ix * ny + iy]
  double d_touch = 0.0;
  GameContext ctx{};
  std::vector<std::string> model_ids;

  std::size_t nx() const noexcept { return x_axis.size(); }
  std::size_t ny() const noexcept { return y_axis.size(); }
  const DecisionResult& at(std::size_t ix, std::size_t iy) const { return nodes[ix * ny() + iy]; }
};

template <KickProbabilityModel Kick>
DecisionGrid decision_grid(const GridSpec& spec, double d_touch, const GameContext& ctx,
                           const DecisionModels<Kick>& m, std::vector<std::string> model_ids = {}) {
  validate_grid_spec(spec);
  if (!std::isfinite(d_touch) || d_touch < 0.0)
    throw DomainError("d_touch", "d_touch must be a finite value >= 0");
  DecisionGrid g;
  g.x_axis = grid_axis(spec.x_min, spec.x_max, spec.x_step);
  g.y_axis = grid_axis(spec.y_min, spec.y_max, spec.y_step);
  g.d_touch = d_touch;
  g.ctx = ctx;
  g.model_ids = std::move(model_ids);
  g.nodes.reserve(g.nx() * g.ny());
  for (double x : g.x_axis)
    for (double y : g.y_axis) g.nodes.push_back(evaluate(DecisionQuery{PitchPoint(x, y), d_touch, ctx}, m));
  return g;
}

// ---------------------------------------------------------------------------
// Indifference frontier (marching squares on delta = 0)

struct FrontierPoint {
  double x = 0.0;
  double y = 0.0;
};

struct FrontierSegment {
  FrontierPoint a;
  FrontierPoint b;
};

/// Zero-level segments of a row-major scalar field values[ix * ny + iy]. A node is
/// "inside" when its value is > 0, matching the lineout recommendation. Crossings
/// are linearly interpolated along cell edges; ambiguous saddle cells are resolved
/// by the sign of the mean of the four corners.
inline std::vector<FrontierSegment> marching_squares(const std::vector<double>& x_axis,
                                                     const std::vector<double>& y_axis,
                                                     const std::vector<double>& values) {
  const std::size_t nx = x_axis.size(), ny = y_axis.size();
  if (values.size() != nx * ny) throw DataError("marching squares: field size mismatch");
  std::vector<FrontierSegment> out;
  if (nx < 2 || ny < 2) return out;

  auto v = [&](std::size_t ix, std::size_t iy) { return values[ix * ny + iy]; };
  for (std::size_t i = 0; i + 1 < nx; ++i) {
    for (std::size_t j = 0; j + 1 < ny; ++j) {
      const double x0 = x_axis[i], x1 = x_axis[i + 1], y0 = y_axis[j], y1 = y_axis[j + 1];
      const double v00 = v(i, j), v10 = v(i + 1, j), v11 = v(i + 1, j + 1), v01 = v(i, j + 1);
      const int cell = (v00 > 0.0 ? 1 : 0) | (v10 > 0.0 ? 2 : 0) | (v11 > 0.0 ? 4 : 0) | (v01 > 0.0 ? 8 : 0);
      if (cell == 0 || cell == 15) continue;

      auto lerp = [](double pa, double pb, double va, double vb) { return pa + (va / (va - vb)) * (pb - pa); };
      // Edges: 0 bottom (y0), 1 right (x1), 2 top (y1), 3 left (x0).
      auto edge = [&](int e) -> FrontierPoint {
        switch (e) {
          case 0: return {lerp(x0, x1, v00, v10), y0};
          case 1: return {x1, lerp(y0, y1, v10, v11)};
          case 2: return {lerp(x0, x1, v01, v11), y1};
          default: return {x0, lerp(y0, y1, v00, v01)};
        }
      };
      auto emit = [&](int e1, int e2) { out.push_back({edge(e1), edge(e2)}); };

      const bool center_in = (v00 + v10 + v11 + v01) / 4.0 > 0.0;
      switch (cell) {
        case 1: case 14: emit(3, 0); break;
        case 2: case 13: emit(0, 1); break;
        case 3: case 12: emit(3, 1); break;
        case 4: case 11: emit(1, 2); break;
        case 6: case 9:  emit(0, 2); break;
        case 7: case 8:  emit(3, 2); break;
        case 5:
          if (center_in) { emit(0, 1); emit(2, 3); } else { emit(3, 0); emit(1, 2); }
          break;
        case 10:
          if (center_in) { emit(3, 0); emit(1, 2); } else { emit(0, 1); emit(2, 3); }
          break;
        default: break;
      }
    }
  }
  return out;
}

inline std::vector<double> delta_field(const DecisionGrid& g) {
  std::vector<double> d;
  d.reserve(g.nodes.size());
  for (const auto& n : g.nodes) d.push_back(n.delta);
  return d;
}

inline std::vector<FrontierSegment> frontier(const DecisionGrid& g) {
  return marching_squares(g.x_axis, g.y_axis, delta_field(g));
}

// ---------------------------------------------------------------------------
// d_touch sweep

struct SweepPoint {
  double d_touch = 0.0;
  double delta = 0.0;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::optional<double> crossing;  // smallest d_touch where the recommendation flips
};

/// `step`-spaced d_touch values from 0 to dmax inclusive.
inline std::vector<double> dtouch_range(double dmax, double step = 1.0) {
  if (!std::isfinite(dmax) || dmax < 0.0) throw DomainError("dmax", "dmax must be >= 0");
  if (!(step > 0.0)) throw DomainError("step", "step must be > 0");
  return grid_axis(0.0, dmax, step);
}

template <KickProbabilityModel Kick>
SweepResult sweep_dtouch(const PitchPoint& point, const GameContext& ctx,
                         const std::vector<double>& d_values, const DecisionModels<Kick>& m) {
  if (d_values.empty()) throw DomainError("d_range", "d_touch range must be non-empty");
  for (std::size_t i = 0; i < d_values.size(); ++i) {
    if (!std::isfinite(d_values[i]) || d_values[i] < 0.0)
      throw DomainError("d_range", "d_touch values must be finite and >= 0");
    if (i && !(d_values[i] > d_values[i - 1]))
      throw DomainError("d_range", "d_touch values must be strictly ascending");
  }
  SweepResult out;
  for (double d : d_values)
    out.points.push_back({d, evaluate(DecisionQuery{point, d, ctx}, m).delta});
  for (std::size_t i = 0; i + 1 < out.points.size(); ++i) {
    const auto& a = out.points[i];
    const auto& b = out.points[i + 1];
    if (recommend(a.delta) != recommend(b.delta)) {
      out.crossing = a.d_touch + (b.d_touch - a.d_touch) * (-a.delta) / (b.delta - a.delta);
      break;
    }
  }
  return out;
}

}  // namespace ruckep
