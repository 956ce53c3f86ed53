#pragma once

// A model bundle groups the three fitted components the decision engine needs.
// On disk it is a directory holding bundle.json plus one JSON file per component.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ruckep/decision.hpp"
#include "ruckep/error.hpp"
#include "ruckep/kick_model.hpp"
#include "ruckep/lineout_model.hpp"
#include "ruckep/restart_table.hpp"

namespace ruckep {

inline constexpr int kBundleSchemaVersion = 1;
inline constexpr const char* kBundleEnvVar = "RUCK_EP_BUNDLE";
inline constexpr const char* kDemoBundleRef = "builtin:demo";
inline constexpr const char* kDemoKickId = "demo-synthetic-grid";
inline constexpr const char* kPublishedRestartId = "restarts-premiership-2018-19";

// ---------------------------------------------------------------------------
// Demonstration kicking grid (synthetic, NOT real kicking data)

/// Target make probability at the reference point 30 m out, 15 m in from the
/// left touchline.
inline constexpr double kDemoReferenceProbability = 0.7411;
inline constexpr double kDemoDistanceSlope = -0.08;
inline constexpr double kDemoAngleSlope = -1.5;

/// Intercept placing the demo generator at kDemoReferenceProbability at (30, -20).
inline double demo_intercept() {
  const auto g = to_kick_geometry(PitchPoint(30.0, -20.0));
  return glm::logit(kDemoReferenceProbability) - kDemoDistanceSlope * g.distance -
         kDemoAngleSlope * g.angle;
}

inline double demo_generator(double distance, double angle) {
  return glm::detail::inv_logit(demo_intercept() + kDemoDistanceSlope * distance + kDemoAngleSlope * angle);
}

/// Full 13 x 14 grid of 5 m cells, proportions rounded to three decimals the
/// way published cell tables are. No attempt counts.
inline std::vector<KickGridCell> demo_kick_grid() {
  std::vector<KickGridCell> cells;
  for (int r = 0; r < kGridRowBands; ++r)
    for (int c = 0; c < kGridColBands; ++c) {
      KickGridCell cell;
      cell.x_lo = kGridBand * r;
      cell.x_hi = kGridBand * (r + 1);
      cell.touch_lo = kGridBand * c;
      cell.touch_hi = kGridBand * (c + 1);
      const auto g = to_kick_geometry(grid_cell_center(r, c));
      cell.proportion = std::round(demo_generator(g.distance, g.angle) * 1000.0) / 1000.0;
      cells.push_back(cell);
    }
  return cells;
}

// ---------------------------------------------------------------------------

struct ModelBundle {
  std::string bundle_id;
  nlohmann::json metadata = nlohmann::json::object();
  LineoutCoefficients lineout;
  KickSuccessSurface kick;
  std::string kick_id;
  RestartValueTable restart;
  std::string restart_id;

  DecisionModels<KickSuccessSurface> models() const { return {lineout, kick, restart}; }
  std::vector<std::string> model_ids() const { return {lineout.model_id, kick_id, restart_id}; }
};

namespace detail {

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline nlohmann::json read_json(const std::filesystem::path& p) {
  try {
    return nlohmann::json::parse(read_file(p));
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("", "'" + p.string() + "' is not valid JSON: " + e.what());
  }
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write '" + p.string() + "'");
  out << text;
}

}  // namespace detail

/// Content-derived id: identical components give identical ids.
inline std::string content_bundle_id(const LineoutCoefficients& l, const KickSuccessSurface& k,
                                     const RestartValueTable& r) {
  const auto h = detail::fnv1a(l.to_json().dump() + k.to_json().dump() + r.to_json().dump());
  char buf[32];
  std::snprintf(buf, sizeof(buf), "bundle-%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Published lineout coefficients and restart values plus a kick surface fitted to
/// the synthetic demonstration grid. Fitted once per process.
inline const ModelBundle& demo_bundle() {
  static const ModelBundle bundle = [] {
    auto kick = fit_kick_surface(demo_kick_grid());
    ModelBundle b{"demo",
                  {{"source", "built-in demonstration bundle"},
                   {"kick_grid", "synthetic, non-authoritative"}},
                  LineoutCoefficients::premiership_2018_19(),
                  std::move(kick),
                  kDemoKickId,
                  RestartValueTable::premiership_2018_19(),
                  kPublishedRestartId};
    return b;
  }();
  return bundle;
}

inline void save_bundle(const ModelBundle& b, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["schema_version"] = kBundleSchemaVersion;
  manifest["kind"] = "model-bundle";
  manifest["bundle_id"] = b.bundle_id;
  manifest["metadata"] = b.metadata;
  manifest["components"] = {{"lineout", "lineout.json"},
                            {"kick", "kick_surface.json"},
                            {"restart", "restart_table.json"}};
  manifest["model_ids"] = {{"lineout", b.lineout.model_id}, {"kick", b.kick_id}, {"restart", b.restart_id}};
  detail::write_text(dir / "lineout.json", b.lineout.to_json().dump(2) + "\n");
  detail::write_text(dir / "kick_surface.json", b.kick.to_json().dump(2) + "\n");
  detail::write_text(dir / "restart_table.json", b.restart.to_json().dump(2) + "\n");
  detail::write_text(dir / "bundle.json", manifest.dump(2) + "\n");
}

/// Loads `builtin:demo`, a bundle directory, or a bundle.json path.
inline ModelBundle load_bundle(const std::string& ref) {
  if (ref == kDemoBundleRef || ref == "builtin") return demo_bundle();
  if (ref.rfind("builtin:", 0) == 0) throw UsageError("unknown built-in bundle '" + ref + "'");
  std::filesystem::path path(ref);
  if (std::filesystem::is_directory(path)) path /= "bundle.json";
  const auto manifest = detail::read_json(path);
  try {
    if (manifest.at("kind").get<std::string>() != "model-bundle")
      throw SchemaError("kind", "bundle: unexpected kind");
    if (manifest.at("schema_version").get<int>() != kBundleSchemaVersion)
      throw SchemaError("schema_version", "bundle: unsupported schema version");
    const auto base = path.parent_path();
    auto component = [&](const char* name) {
      const auto& c = manifest.at("components").at(name);
      if (c.is_object()) return c;
      return detail::read_json(base / c.get<std::string>());
    };
    const auto ids = manifest.value("model_ids", nlohmann::json::object());
    ModelBundle b{manifest.at("bundle_id").get<std::string>(),
                  manifest.value("metadata", nlohmann::json::object()),
                  LineoutCoefficients::from_json(component("lineout")),
                  KickSuccessSurface::from_json(component("kick")),
                  ids.value("kick", std::string("kick")),
                  RestartValueTable::from_json(component("restart")),
                  ids.value("restart", std::string("restart"))};
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("", "bundle manifest '" + path.string() + "' is malformed: " + e.what());
  }
}

/// Explicit reference, else $RUCK_EP_BUNDLE, else the demo bundle.
inline std::string resolve_bundle_ref(const std::string& explicit_ref) {
  if (!explicit_ref.empty()) return explicit_ref;
  if (const char* env = std::getenv(kBundleEnvVar); env && *env) return env;
  return kDemoBundleRef;
}

}  // namespace ruckep
