#pragma once

// Continuation value of a missed kick at goal. A miss is assumed to produce a
// 22 m drop-out; its value is the average next-score outcome of qualifying
// drop-outs, bucketed by the x of the original kick.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ruckep/error.hpp"
#include "ruckep/geometry.hpp"
#include "ruckep/phase_ingest.hpp"

namespace ruckep {

inline constexpr int kRestartSchemaVersion = 1;

struct RestartZone {
  double lo = 0.0;  // inclusive, meters to opposition try line
  double hi = 0.0;  // exclusive
  std::string label;
  double value = 0.0;
  int count = 0;
};

class RestartValueTable {
 public:
  RestartValueTable(std::vector<RestartZone> zones, double fallback)
      : zones_(std::move(zones)), fallback_(fallback) {
    if (!std::isfinite(fallback_)) throw DataError("restart table: fallback must be finite");
    std::sort(zones_.begin(), zones_.end(),
              [](const RestartZone& a, const RestartZone& b) { return a.lo < b.lo; });
    for (std::size_t i = 0; i < zones_.size(); ++i) {
      const auto& z = zones_[i];
      if (!(z.lo < z.hi) || z.lo < 0.0 || z.hi > kPitchLength)
        throw DataError("restart table: zone bounds must satisfy 0 <= lo < hi <= 100");
      if (!std::isfinite(z.value)) throw DataError("restart table: zone values must be finite");
      if (z.count < 0) throw DataError("restart table: counts must be >= 0");
      if (i && zones_[i - 1].hi > z.lo) throw DataError("restart table: zones overlap");
    }
  }

  /// Published drop-out values by original kick location, with the overall
  /// average as the fallback outside the four zones.
  static RestartValueTable premiership_2018_19() {
    return RestartValueTable({{10.0, 22.0, "10m-22m (opp)", 2.75, 4},
                              {40.0, 50.0, "Half-10m (opp)", 1.24, 17},
                              {50.0, 60.0, "10m-Half (own)", -0.63, 27},
                              {60.0, 78.0, "22m-10m (own)", 1.24, 45}},
                             0.76);
  }

  /// Zone boundaries of premiership_2018_19(), reused when deriving a table from phase data.
  static std::vector<RestartZone> standard_bounds() {
    auto zones = premiership_2018_19().zones();
    for (auto& z : zones) {
      z.value = 0.0;
      z.count = 0;
    }
    return zones;
  }

  double ep_miss(double x) const {
    if (!std::isfinite(x) || x < 0.0 || x > kPitchLength)
      throw DomainError("x", "ep_miss: x must lie in [0, 100] m");
    for (const auto& z : zones_)
      if (x >= z.lo && x < z.hi) return z.value;
    return fallback_;
  }

  const std::vector<RestartZone>& zones() const noexcept { return zones_; }
  double fallback() const noexcept { return fallback_; }

  int total_count() const {
    int n = 0;
    for (const auto& z : zones_) n += z.count;
    return n;
  }

  /// Count-weighted mean of the zone values (NaN when no counts).
  double weighted_mean() const {
    double s = 0.0;
    int n = 0;
    for (const auto& z : zones_) {
      s += z.count * z.value;
      n += z.count;
    }
    return n > 0 ? s / n : std::numeric_limits<double>::quiet_NaN();
  }

  /// Pool-adjacent-violators fit making values non-increasing in x (farther from
  /// the opposition line never worth more), weighted by counts.
  RestartValueTable monotone_pooled() const {
    struct Block {
      double value;
      double weight;
      std::size_t first, last;
    };
    std::vector<Block> blocks;
    for (std::size_t i = 0; i < zones_.size(); ++i) {
      blocks.push_back({zones_[i].value, std::max(1.0, double(zones_[i].count)), i, i});
      while (blocks.size() > 1 && blocks[blocks.size() - 2].value < blocks.back().value) {
        Block b = blocks.back();
        blocks.pop_back();
        Block& a = blocks.back();
        a.value = (a.value * a.weight + b.value * b.weight) / (a.weight + b.weight);
        a.weight += b.weight;
        a.last = b.last;
      }
    }
    auto zones = zones_;
    for (const auto& b : blocks)
      for (std::size_t i = b.first; i <= b.last; ++i) zones[i].value = b.value;
    return RestartValueTable(std::move(zones), fallback_);
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["schema_version"] = kRestartSchemaVersion;
    j["kind"] = "restart-table";
    auto& b = j["boundaries"] = nlohmann::json::array();
    auto& labels = j["labels"] = nlohmann::json::array();
    auto& values = j["values"] = nlohmann::json::array();
    auto& counts = j["counts"] = nlohmann::json::array();
    for (const auto& z : zones_) {
      b.push_back({z.lo, z.hi});
      labels.push_back(z.label);
      values.push_back(z.value);
      counts.push_back(z.count);
    }
    j["fallback"] = fallback_;
    return j;
  }

  static RestartValueTable from_json(const nlohmann::json& j) {
    try {
      if (j.at("kind").get<std::string>() != "restart-table")
        throw SchemaError("kind", "restart table: unexpected kind");
      if (j.at("schema_version").get<int>() != kRestartSchemaVersion)
        throw SchemaError("schema_version", "restart table: unsupported schema version");
      const auto& b = j.at("boundaries");
      const auto& values = j.at("values");
      const auto& counts = j.at("counts");
      if (b.size() != values.size() || b.size() != counts.size())
        throw SchemaError("boundaries", "restart table: array lengths differ");
      std::vector<RestartZone> zones;
      for (std::size_t i = 0; i < b.size(); ++i) {
        RestartZone z;
        z.lo = b[i].at(0).get<double>();
        z.hi = b[i].at(1).get<double>();
        z.value = values[i].get<double>();
        z.count = counts[i].get<int>();
        if (j.contains("labels") && i < j["labels"].size()) z.label = j["labels"][i].get<std::string>();
        zones.push_back(std::move(z));
      }
      return RestartValueTable(std::move(zones), j.at("fallback").get<double>());
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError("", std::string("restart table: malformed JSON (") + e.what() + ")");
    }
  }

 private:
  std::vector<RestartZone> zones_;
  double fallback_;
};

namespace detail {

inline bool is_drop_out(const std::string& event_type) {
  std::string s;
  for (char c : event_type)
    if (std::isalnum(static_cast<unsigned char>(c))) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return s.find("dropout") != std::string::npos;
}

inline int home_differential(const PhaseRecord& r) {
  return r.team_in_poss == Side::home ? r.points_difference : -r.points_difference;
}

}  // namespace detail

/// One qualifying drop-out: location of the kick that preceded it and the
/// next-score outcome from the kicking team's perspective.
struct RestartObservation {
  std::size_t line = 0;
  double kick_x = 0.0;
  int value = 0;
};

/// Drop-outs that (i) do not follow a change in score and (ii) are not the first
/// event of a half. The preceding record is taken as the missed kick: its zone
/// gives the original location and its possessing team the perspective.
inline std::vector<RestartObservation> qualifying_restarts(const std::vector<PhaseRecord>& records,
                                                           const ZoneMap& zones,
                                                           Orientation orientation) {
  detail::check_match_order(records);
  std::vector<RestartObservation> out;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& cur = records[i];
    const auto& prev = records[i - 1];
    if (!detail::is_drop_out(cur.event_type)) continue;
    if (prev.match_id != cur.match_id) continue;  // first event of a match
    if (prev.sec_remain_match > kHalfSeconds && cur.sec_remain_match <= kHalfSeconds) continue;
    if (detail::home_differential(prev) != detail::home_differential(cur)) continue;
    RestartObservation obs;
    obs.line = cur.line;
    obs.kick_x = meter_line_for(zones, prev.zone, orientation);
    obs.value = cur.team_in_poss == prev.team_in_poss ? cur.points_next : -cur.points_next;
    out.push_back(obs);
  }
  return out;
}

/// Averages qualifying restarts per zone. Zones without observations are left
/// out so lookups there use the fallback; the fallback is the overall mean, or
/// `empty_fallback` when nothing qualifies.
inline RestartValueTable restart_values_from_phases(
    const std::vector<PhaseRecord>& records, const ZoneMap& zones, Orientation orientation,
    std::vector<RestartZone> bounds = RestartValueTable::standard_bounds(),
    double empty_fallback = RestartValueTable::premiership_2018_19().fallback()) {
  const auto obs = qualifying_restarts(records, zones, orientation);
  std::vector<double> sums(bounds.size(), 0.0);
  std::vector<int> counts(bounds.size(), 0);
  double total = 0.0;
  for (const auto& o : obs) {
    total += o.value;
    for (std::size_t z = 0; z < bounds.size(); ++z) {
      if (o.kick_x >= bounds[z].lo && o.kick_x < bounds[z].hi) {
        sums[z] += o.value;
        ++counts[z];
        break;
      }
    }
  }
  std::vector<RestartZone> out;
  for (std::size_t z = 0; z < bounds.size(); ++z) {
    if (counts[z] == 0) continue;
    RestartZone zone = bounds[z];
    zone.value = sums[z] / counts[z];
    zone.count = counts[z];
    out.push_back(std::move(zone));
  }
  const double fallback = obs.empty() ? empty_fallback : total / static_cast<double>(obs.size());
  return RestartValueTable(std::move(out), fallback);
}

}  // namespace ruckep
