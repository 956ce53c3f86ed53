#pragma once

// Phase-level event log ingestion.
//
// Pipeline: parse_phase_csv -> derive_entries -> assign_run_ids -> sample_one_per_run.
// Only first-phase, lineout-initiated records become regression rows.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ruckep/csv.hpp"
#include "ruckep/error.hpp"
#include "ruckep/format.hpp"
#include "ruckep/geometry.hpp"

namespace ruckep {

enum class Side { home, away };
enum class Orientation { own, opp };

inline constexpr int kHalfSeconds = 2400;

inline std::string to_string(Side s) { return s == Side::home ? "Home" : "Away"; }

struct PhaseRecord {
  std::string match_id;
  int round = 0;
  std::string home;
  std::string away;
  int phase = 1;
  Side team_in_poss = Side::home;
  int points_difference = 0;  // for the team in possession
  int sec_remain_match = 0;
  int card_diff = 0;
  double winpct_diff = 0.0;
  std::string zone;
  std::string event_type;
  int points_next = 0;  // next score, signed for the team in possession
  std::vector<std::pair<std::string, std::string>> extra;
  std::size_t line = 0;
};

struct PossessionEntry {
  PhaseRecord record;
  double meter_line = 0.0;  // meters to the opposition try line
  int sec_remain_half = 0;
  int run_id = 0;
  int n_same = 0;
};

class ZoneMap {
 public:
  ZoneMap() = default;
  explicit ZoneMap(std::vector<std::pair<std::string, double>> zones) : zones_(std::move(zones)) {
    for (std::size_t i = 0; i < zones_.size(); ++i) {
      const auto& [label, mid] = zones_[i];
      if (label.empty()) throw DataError("zone map: empty label");
      if (!(mid > 0.0 && mid < kPitchLength))
        throw DataError("zone map: midpoint for '" + label + "' must lie strictly within (0, 100)");
      for (std::size_t j = 0; j < i; ++j)
        if (zones_[j].first == label) throw DataError("zone map: duplicate label '" + label + "'");
    }
  }

  /// Six symmetric zones whose midpoints reproduce the meter_line values in the
  /// published processed dataset.
  static ZoneMap standard() {
    return ZoneMap({{"opp_22", 13.5},
                    {"opp_22_10", 31.0},
                    {"opp_10_half", 45.0},
                    {"own_half_10", 55.0},
                    {"own_10_22", 69.0},
                    {"own_22", 86.5}});
  }

  /// `label = midpoint` per line; '#' starts a comment.
  static ZoneMap parse(std::istream& in) {
    std::vector<std::pair<std::string, double>> zones;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = csv::detail::trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw RowError(line_no, "zone map: expected 'label = midpoint'");
      std::string label = csv::detail::trim(line.substr(0, eq));
      double mid = 0.0;
      if (!parse_double(line.substr(eq + 1), mid))
        throw RowError(line_no, "zone map: unparseable midpoint for '" + label + "'");
      zones.emplace_back(std::move(label), mid);
    }
    return ZoneMap(std::move(zones));
  }

  static ZoneMap load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open zone map '" + path + "'");
    return parse(in);
  }

  double midpoint(const std::string& label) const {
    for (const auto& [l, m] : zones_)
      if (l == label) return m;
    throw MappingError(label, "zone label '" + label + "' is not in the zone map");
  }

  const std::vector<std::pair<std::string, double>>& zones() const noexcept { return zones_; }

 private:
  std::vector<std::pair<std::string, double>> zones_;
};

inline Orientation parse_orientation(std::string_view s) {
  if (s == "own") return Orientation::own;
  if (s == "opp") return Orientation::opp;
  throw UsageError("orientation must be 'own' or 'opp'");
}

/// Zone midpoint converted to meters from the opposition try line.
inline double meter_line_for(const ZoneMap& zones, const std::string& label, Orientation o) {
  const double mid = zones.midpoint(label);
  return o == Orientation::own ? kPitchLength - mid : mid;
}

namespace detail {

inline std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline bool is_lineout(const std::string& event_type) { return lower(event_type) == "lineout"; }

inline bool valid_score(int pts) {
  switch (pts) {
    case -7: case -5: case -3: case 0: case 3: case 5: case 7:
      return true;
    default:
      return false;
  }
}

struct ColumnSpec {
  const char* name;
  const char* alias;
};

inline constexpr ColumnSpec kPhaseColumns[] = {
    {"match_id", nullptr},        {"round", nullptr},
    {"home", nullptr},            {"away", nullptr},
    {"phase", nullptr},           {"team_in_poss", nullptr},
    {"points_difference", nullptr}, {"sec_remain_match", "sec_remain_half"},
    {"card_diff", nullptr},       {"winpct_diff", nullptr},
    {"zone", nullptr},            {"event_type", nullptr},
    {"points_next", "points"},
};

}  // namespace detail

/// Reads a phase log. Extra columns are kept verbatim in PhaseRecord::extra.
inline std::vector<PhaseRecord> parse_phase_csv(std::istream& in) {
  const csv::Table table = csv::read(in);

  constexpr std::size_t ncols = std::size(detail::kPhaseColumns);
  std::size_t idx[ncols];
  std::vector<bool> used(table.header.size(), false);
  for (std::size_t c = 0; c < ncols; ++c) {
    const auto& spec = detail::kPhaseColumns[c];
    auto found = table.find(spec.name);
    if (!found && spec.alias) found = table.find(spec.alias);
    if (!found)
      throw SchemaError(spec.name, std::string("missing required column '") + spec.name + "'");
    idx[c] = *found;
    used[*found] = true;
  }

  std::vector<PhaseRecord> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    const auto& f = row.fields;
    auto cell = [&](std::size_t c) -> const std::string& { return f[idx[c]]; };
    auto integer = [&](std::size_t c) {
      long long v = 0;
      if (!parse_long(cell(c), v))
        throw RowError(row.line, std::string("column '") + detail::kPhaseColumns[c].name +
                                     "': expected an integer, got '" + cell(c) + "'");
      return static_cast<int>(v);
    };

    PhaseRecord r;
    r.line = row.line;
    r.match_id = csv::detail::trim(cell(0));
    r.round = integer(1);
    r.home = cell(2);
    r.away = cell(3);
    r.phase = integer(4);
    if (r.phase < 1) throw RowError(row.line, "phase must be >= 1");
    const std::string side = detail::lower(csv::detail::trim(cell(5)));
    if (side == "home")
      r.team_in_poss = Side::home;
    else if (side == "away")
      r.team_in_poss = Side::away;
    else
      throw RowError(row.line, "team_in_poss must be Home or Away, got '" + cell(5) + "'");
    r.points_difference = integer(6);
    r.sec_remain_match = integer(7);
    if (r.sec_remain_match < 0) throw RowError(row.line, "seconds remaining must be >= 0");
    r.card_diff = integer(8);
    {
      const std::string w = csv::detail::trim(cell(9));
      if (w.empty() || w == "NA") {
        r.winpct_diff = 0.0;  // no prior matches (round 1)
      } else if (!parse_double(w, r.winpct_diff) || r.winpct_diff < -1.0 || r.winpct_diff > 1.0) {
        throw RowError(row.line, "winpct_diff must be a number in [-1, 1], got '" + w + "'");
      }
    }
    r.zone = csv::detail::trim(cell(10));
    r.event_type = csv::detail::trim(cell(11));
    r.points_next = integer(12);
    if (!detail::valid_score(r.points_next))
      throw RowError(row.line, "points_next must be one of -7,-5,-3,0,3,5,7");
    for (std::size_t i = 0; i < f.size(); ++i)
      if (!used[i]) r.extra.emplace_back(table.header[i], f[i]);
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<PhaseRecord> load_phase_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open phase file '" + path + "'");
  return parse_phase_csv(in);
}

/// Match clock -> clock within the current half. Values already at or below one
/// half length are taken as half-referenced; stoppage time clamps to 2400.
inline int half_clock(int sec_remain_match) {
  const int s = sec_remain_match > kHalfSeconds ? sec_remain_match - kHalfSeconds : sec_remain_match;
  return std::clamp(s, 0, kHalfSeconds);
}

namespace detail {

// Each match must be contiguous and its clock must not run backwards.
inline void check_match_order(const std::vector<PhaseRecord>& records) {
  std::vector<std::string> seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (i == 0 || records[i - 1].match_id != r.match_id) {
      if (std::find(seen.begin(), seen.end(), r.match_id) != seen.end())
        throw RowError(r.line, "match '" + r.match_id + "' is not contiguous in the input");
      seen.push_back(r.match_id);
    } else if (r.sec_remain_match > records[i - 1].sec_remain_match) {
      throw RowError(r.line, "seconds remaining increases within match '" + r.match_id + "'");
    }
  }
}

}  // namespace detail

inline std::vector<PossessionEntry> derive_entries(const std::vector<PhaseRecord>& records,
                                                   const ZoneMap& zones, Orientation orientation) {
  detail::check_match_order(records);
  std::vector<PossessionEntry> out;
  for (const auto& r : records) {
    if (r.phase != 1 || !detail::is_lineout(r.event_type)) continue;
    PossessionEntry e;
    e.record = r;
    e.meter_line = meter_line_for(zones, r.zone, orientation);
    e.sec_remain_half = half_clock(r.sec_remain_match);
    out.push_back(std::move(e));
  }
  return out;
}

/// Groups consecutive entries of one match that share the possessing team, the
/// possessing team's point differential, and the next-score outcome. Run ids are
/// dense from 1 in input order.
inline std::vector<PossessionEntry> assign_run_ids(std::vector<PossessionEntry> entries) {
  int run = 0;
  std::size_t group_start = 0;
  auto close_group = [&](std::size_t end) {
    for (std::size_t k = group_start; k < end; ++k)
      entries[k].n_same = static_cast<int>(end - group_start);
  };
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& cur = entries[i].record;
    bool same = false;
    if (i > 0) {
      const auto& prev = entries[i - 1].record;
      same = prev.match_id == cur.match_id && prev.team_in_poss == cur.team_in_poss &&
             prev.points_difference == cur.points_difference &&
             prev.points_next == cur.points_next;
    }
    if (!same) {
      close_group(i);
      group_start = i;
      ++run;
    }
    entries[i].run_id = run;
  }
  close_group(entries.size());
  return entries;
}

/// Unbiased draw from [0, n) on a 64-bit Mersenne Twister (std::mt19937_64, whose
/// output sequence is fixed by the standard). Rejection sampling rather than a
/// std distribution keeps selections identical across standard libraries.
inline std::uint64_t uniform_index(std::mt19937_64& gen, std::uint64_t n) {
  const std::uint64_t reject_below = (0 - n) % n;  // 2^64 mod n
  for (;;) {
    const std::uint64_t r = gen();
    if (r >= reject_below) return r % n;
  }
}

/// Keeps one uniformly chosen entry per run_id, ordered by run_id.
inline std::vector<PossessionEntry> sample_one_per_run(const std::vector<PossessionEntry>& entries,
                                                       std::uint64_t seed) {
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].run_id <= 0)
      throw DataError("sample_one_per_run: run ids have not been assigned");
    groups[entries[i].run_id].push_back(i);
  }
  std::mt19937_64 gen(seed);
  std::vector<PossessionEntry> out;
  out.reserve(groups.size());
  for (const auto& [run, members] : groups) {
    const auto pick = uniform_index(gen, members.size());
    out.push_back(entries[members[pick]]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Canonical possession CSV

inline const std::vector<std::string>& possession_columns() {
  static const std::vector<std::string> cols = {
      "match_id",   "round",          "home",        "away",      "phase",
      "team_in_poss", "points_difference", "sec_remain_match", "card_diff", "winpct_diff",
      "zone",       "event_type",     "points_next", "meter_line", "sec_remain_half",
      "run_id",     "n_same"};
  return cols;
}

inline void write_possession_csv(std::ostream& out, const std::vector<PossessionEntry>& entries) {
  csv::write_row(out, possession_columns());
  for (const auto& e : entries) {
    const auto& r = e.record;
    csv::write_row(out, {r.match_id, std::to_string(r.round), r.home, r.away,
                         std::to_string(r.phase), to_string(r.team_in_poss),
                         std::to_string(r.points_difference), std::to_string(r.sec_remain_match),
                         std::to_string(r.card_diff), format_double(r.winpct_diff), r.zone,
                         r.event_type, std::to_string(r.points_next), format_double(e.meter_line),
                         std::to_string(e.sec_remain_half), std::to_string(e.run_id),
                         std::to_string(e.n_same)});
  }
}

/// Reads the canonical possession CSV back (input to lineout fitting).
inline std::vector<PossessionEntry> parse_possession_csv(std::istream& in) {
  // Reuse the phase parser for the shared columns, then pick up the derived ones.
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  std::istringstream phase_in(text);
  const auto records = parse_phase_csv(phase_in);

  std::istringstream table_in(text);
  const csv::Table table = csv::read(table_in);
  const std::size_t c_meter = table.require("meter_line");
  const std::size_t c_half = table.require("sec_remain_half");
  const auto c_run = table.find("run_id");
  const auto c_same = table.find("n_same");

  std::vector<PossessionEntry> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& row = table.rows[i];
    PossessionEntry e;
    e.record = records[i];
    std::erase_if(e.record.extra, [](const auto& kv) {
      return kv.first == "meter_line" || kv.first == "sec_remain_half" || kv.first == "run_id" ||
             kv.first == "n_same";
    });
    long long v = 0;
    if (!parse_double(row.fields[c_meter], e.meter_line) || e.meter_line < 0.0 ||
        e.meter_line > kPitchLength)
      throw RowError(row.line, "meter_line must be a number in [0, 100]");
    if (!parse_long(row.fields[c_half], v) || v < 0 || v > kHalfSeconds)
      throw RowError(row.line, "sec_remain_half must be an integer in [0, 2400]");
    e.sec_remain_half = static_cast<int>(v);
    if (c_run) {
      if (!parse_long(row.fields[*c_run], v)) throw RowError(row.line, "run_id must be an integer");
      e.run_id = static_cast<int>(v);
    }
    if (c_same) {
      if (!parse_long(row.fields[*c_same], v)) throw RowError(row.line, "n_same must be an integer");
      e.n_same = static_cast<int>(v);
    }
    out.push_back(std::move(e));
  }
  return out;
}

struct IngestReport {
  std::size_t raw_rows = 0;
  std::size_t phase1_lineouts = 0;
  std::size_t groups = 0;
  std::size_t sampled = 0;
};

}  // namespace ruckep
