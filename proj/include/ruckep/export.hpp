#pragma once

// JSON / CSV renderings of decision-engine outputs.

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ruckep/csv.hpp"
#include "ruckep/decision.hpp"
#include "ruckep/format.hpp"
#include "ruckep/regret.hpp"

namespace ruckep {

inline constexpr int kGridSchemaVersion = 1;

inline nlohmann::json to_json(const DecisionResult& r) {
  return {{"ep_lineout", r.ep_lineout}, {"ep_kick", r.ep_kick},
          {"delta", r.delta},           {"recommendation", to_string(r.recommendation)},
          {"x_lo", r.x_lo},             {"p_make", r.p_make},
          {"ep_miss", r.ep_miss}};
}

inline DecisionResult decision_result_from_json(const nlohmann::json& j) {
  DecisionResult r;
  r.ep_lineout = j.at("ep_lineout").get<double>();
  r.ep_kick = j.at("ep_kick").get<double>();
  r.delta = j.at("delta").get<double>();
  r.recommendation = parse_option(j.at("recommendation").get<std::string>());
  r.x_lo = j.at("x_lo").get<double>();
  r.p_make = j.at("p_make").get<double>();
  r.ep_miss = j.at("ep_miss").get<double>();
  return r;
}

/// Frontier as a list of segments, each a two-point polyline [[x, y], [x, y]].
inline nlohmann::json to_json(const std::vector<FrontierSegment>& segments) {
  nlohmann::json f = nlohmann::json::array();
  for (const auto& s : segments) f.push_back({{s.a.x, s.a.y}, {s.b.x, s.b.y}});
  return f;
}

inline nlohmann::json to_json(const DecisionGrid& g) {
  nlohmann::json j;
  j["schema_version"] = kGridSchemaVersion;
  j["kind"] = "decision-grid";
  j["params"] = {{"d_touch", g.d_touch},
                 {"card_diff", g.ctx.card_diff},
                 {"winpct_diff", g.ctx.winpct_diff},
                 {"model_ids", g.model_ids}};
  j["x_axis"] = g.x_axis;
  j["y_axis"] = g.y_axis;
  auto layer = [&](auto field) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t ix = 0; ix < g.nx(); ++ix) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t iy = 0; iy < g.ny(); ++iy) row.push_back(field(g.at(ix, iy)));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  j["delta"] = layer([](const DecisionResult& r) { return r.delta; });
  j["recommendation"] = layer([](const DecisionResult& r) { return to_string(r.recommendation); });
  j["ep_lineout"] = layer([](const DecisionResult& r) { return r.ep_lineout; });
  j["ep_kick"] = layer([](const DecisionResult& r) { return r.ep_kick; });
  j["frontier"] = to_json(frontier(g));
  return j;
}

inline void write_grid_csv(std::ostream& out, const DecisionGrid& g) {
  csv::write_row(out, {"x", "y", "ep_lineout", "ep_kick", "delta", "rec"});
  for (std::size_t ix = 0; ix < g.nx(); ++ix)
    for (std::size_t iy = 0; iy < g.ny(); ++iy) {
      const auto& r = g.at(ix, iy);
      csv::write_row(out, {format_double(g.x_axis[ix]), format_double(g.y_axis[iy]),
                           format_double(r.ep_lineout), format_double(r.ep_kick),
                           format_double(r.delta), to_string(r.recommendation)});
    }
}

inline nlohmann::json to_json(const SweepResult& s) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : s.points) pts.push_back({{"d_touch", p.d_touch}, {"delta", p.delta}});
  return {{"points", pts}, {"crossing", s.crossing ? nlohmann::json(*s.crossing) : nlohmann::json()}};
}

inline nlohmann::json to_json(const RegretReport& rep) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : rep.rows)
    rows.push_back({{"team", r.team},
                    {"ep_lineout", r.ep_lineout},
                    {"ep_kick", r.ep_kick},
                    {"chosen", to_string(r.chosen)},
                    {"optimal", to_string(r.optimal)},
                    {"regret", r.regret}});
  return {{"rows", rows},
          {"total_regret", rep.total},
          {"optimal_count", rep.optimal_count},
          {"proportion_optimal",
           std::isnan(rep.proportion_optimal) ? nlohmann::json() : nlohmann::json(rep.proportion_optimal)}};
}

}  // namespace ruckep
