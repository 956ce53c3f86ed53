#pragma once

// Regret audit of realized penalty decisions:
//     R = EP(model-optimal option) - EP(option actually chosen)  >= 0

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "ruckep/csv.hpp"
#include "ruckep/decision.hpp"
#include "ruckep/format.hpp"

namespace ruckep {

struct RegretInput {
  std::string team;
  double ep_lineout = 0.0;
  double ep_kick = 0.0;
  Option chosen = Option::kick;
};

struct RegretRow {
  std::string team;
  double ep_lineout = 0.0;
  double ep_kick = 0.0;
  Option chosen = Option::kick;
  Option optimal = Option::kick;
  double regret = 0.0;
};

struct RegretReport {
  std::vector<RegretRow> rows;
  double total = 0.0;
  double proportion_optimal = std::numeric_limits<double>::quiet_NaN();  // NaN when empty
  std::size_t optimal_count = 0;
};

inline RegretRow regret_row(const RegretInput& in) {
  if (!std::isfinite(in.ep_lineout) || !std::isfinite(in.ep_kick))
    throw DataError("regret: expected points must be finite");
  RegretRow r{in.team, in.ep_lineout, in.ep_kick, in.chosen, recommend(in.ep_lineout - in.ep_kick), 0.0};
  auto ep = [&](Option o) { return o == Option::lineout ? in.ep_lineout : in.ep_kick; };
  r.regret = ep(r.optimal) - ep(r.chosen);
  return r;
}

inline RegretReport regret_report(const std::vector<RegretInput>& rows) {
  RegretReport rep;
  for (const auto& in : rows) {
    rep.rows.push_back(regret_row(in));
    rep.total += rep.rows.back().regret;
    if (rep.rows.back().chosen == rep.rows.back().optimal) ++rep.optimal_count;
  }
  if (!rows.empty()) rep.proportion_optimal = static_cast<double>(rep.optimal_count) / rows.size();
  return rep;
}

/// Decisions CSV with columns team, lineout_ep, kick_ep, decision. Extra columns
/// (e.g. optimal_decision, regret from an exported ledger) are ignored.
inline std::vector<RegretInput> parse_regret_csv(std::istream& in) {
  const csv::Table t = csv::read(in);
  const auto ct = t.require("team");
  const auto cl = t.require("lineout_ep");
  const auto ck = t.require("kick_ep");
  const auto cd = t.require("decision");
  std::vector<RegretInput> out;
  for (const auto& row : t.rows) {
    RegretInput r;
    r.team = row.fields[ct];
    if (!parse_double(row.fields[cl], r.ep_lineout)) throw RowError(row.line, "lineout_ep: expected a number");
    if (!parse_double(row.fields[ck], r.ep_kick)) throw RowError(row.line, "kick_ep: expected a number");
    try {
      r.chosen = parse_option(row.fields[cd]);
    } catch (const DataError& e) {
      throw RowError(row.line, e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

/// Rows mirroring the published audit table, then a two-line summary footer.
inline void write_regret_csv(std::ostream& out, const RegretReport& rep) {
  csv::write_row(out, {"team", "lineout_ep", "kick_ep", "decision", "optimal_decision", "regret"});
  for (const auto& r : rep.rows)
    csv::write_row(out, {r.team, format_fixed(r.ep_lineout, 2), format_fixed(r.ep_kick, 2),
                         to_string(r.chosen), to_string(r.optimal), format_fixed(r.regret, 2)});
  out << "# total_regret=" << format_fixed(rep.total, 2) << '\n';
  out << "# proportion_optimal=" << format_fixed(rep.proportion_optimal, 2) << '\n';
}

}  // namespace ruckep
