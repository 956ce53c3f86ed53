// ruckep: command-line front end (ingest, fit, decide, surface, regret, serve).

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ruckep/ruckep.hpp"
#include "ruckep/service.hpp"

namespace fs = std::filesystem;
using namespace ruckep;

namespace {

struct IngestArgs {
  std::string input;
  std::string zones;
  std::string orientation = "opp";
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  bool no_sample = false;
};

struct FitArgs {
  std::string possessions;
  std::string lineout;
  std::string kick_grid;
  std::string kick;
  std::string phases;
  std::string zones;
  std::string orientation = "opp";
  std::string out = "bundle";
};

struct QueryArgs {
  std::string bundle;
  double x = 0, y = 0, d_touch = 0;
  int cards = 0;
  double winpct = 0;
};

struct SurfaceArgs {
  std::string bundle;
  std::vector<double> d_touch;
  int cards = 0;
  double winpct = 0;
  double step = 1.0;
  std::string format = "json";
  std::string out = ".";
};

struct RegretArgs {
  std::string decisions;
  std::string out;
};

struct ServeArgs {
  std::string bundle;
  std::string host = "127.0.0.1";
  int port = 8080;
  int grid_concurrency = 4;
};

ZoneMap zone_map(const std::string& path) { return path.empty() ? ZoneMap::standard() : ZoneMap::load(path); }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write '" + p.string() + "'");
  return out;
}

bool blank(const std::string& s) {
  return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

int cmd_ingest(const IngestArgs& a) {
  if (!a.no_sample && !a.seed) throw UsageError("ingest: --seed is required when sampling (or pass --no-sample)");
  const auto text = slurp(a.input);
  std::vector<PhaseRecord> records;
  if (!blank(text)) {
    std::istringstream in(text);
    records = parse_phase_csv(in);
  }
  IngestReport rep;
  rep.raw_rows = records.size();
  auto entries = assign_run_ids(derive_entries(records, zone_map(a.zones), parse_orientation(a.orientation)));
  rep.phase1_lineouts = entries.size();
  rep.groups = entries.empty() ? 0 : static_cast<std::size_t>(entries.back().run_id);
  if (!a.no_sample) entries = sample_one_per_run(entries, *a.seed);
  rep.sampled = entries.size();

  fs::create_directories(a.out);
  {
    auto out = open_out(fs::path(a.out) / "possessions.csv");
    write_possession_csv(out, entries);
  }
  nlohmann::json j = {{"raw_rows", rep.raw_rows},
                      {"phase1_lineouts", rep.phase1_lineouts},
                      {"groups", rep.groups},
                      {"sampled", rep.sampled},
                      {"seed", a.seed ? nlohmann::json(*a.seed) : nlohmann::json()},
                      {"orientation", a.orientation}};
  open_out(fs::path(a.out) / "ingest_report.json") << j.dump(2) << '\n';
  std::cerr << "ingest: " << rep.raw_rows << " rows -> " << rep.phase1_lineouts << " phase-1 lineouts -> "
            << rep.groups << " groups -> " << rep.sampled << " sampled\n";
  return 0;
}

void write_fit_report(std::ostream& out, const ModelBundle& b) {
  out << "bundle " << b.bundle_id << "\n\n";
  out << "Lineout model (" << b.lineout.model_id << ")\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-14s %10s %11s %9s %12s\n", "", "Estimate", "Std. Error", "t value",
                "Pr(>|t|)");
  out << line;
  const double beta[] = {b.lineout.beta0, b.lineout.beta1, b.lineout.beta2, b.lineout.beta3};
  for (int i = 0; i < 4; ++i) {
    const auto& lab = LineoutCoefficients::labels()[static_cast<std::size_t>(i)];
    if (b.lineout.inference) {
      const auto& inf = *b.lineout.inference;
      std::snprintf(line, sizeof line, "%-14s %10.4f %11.4f %9.3f %12s\n", lab.c_str(), beta[i],
                    inf.std_errors(i), inf.t_values(i), format_p_value(inf.p_values(i)).c_str());
    } else {
      std::snprintf(line, sizeof line, "%-14s %10.4f %11s %9s %12s\n", lab.c_str(), beta[i], "NA", "NA", "NA");
    }
    out << line;
  }
  if (b.lineout.inference) out << "n = " << b.lineout.inference->n << "\n";

  const auto& k = b.kick;
  out << "\nKick surface (" << b.kick_id << ")\n";
  out << "cells " << k.n_cells << ", lambda_d " << format_double(k.lambda_distance) << ", lambda_theta "
      << format_double(k.lambda_angle) << ", edf " << format_fixed(k.edf, 3) << ", phi "
      << format_fixed(k.dispersion, 4) << ", gcv " << format_fixed(k.gcv_score, 6) << "\n";
  out << "IRLS " << (k.convergence.converged ? "converged" : "did not converge") << " in "
      << k.convergence.iterations << " iterations, deviance " << format_fixed(k.convergence.final_deviance(), 6)
      << "\n";

  out << "\nRestart table (" << b.restart_id << ")\n";
  for (const auto& z : b.restart.zones())
    out << "[" << format_double(z.lo) << ", " << format_double(z.hi) << ")  " << z.label << "  "
        << format_fixed(z.value, 2) << "  n=" << z.count << "\n";
  out << "fallback " << format_fixed(b.restart.fallback(), 2) << "\n";
}

int cmd_fit(const FitArgs& a) {
  LineoutCoefficients lineout;
  if (!a.lineout.empty()) {
    if (a.lineout != std::string("builtin:") + kBuiltinLineoutId)
      throw UsageError("fit: unknown --lineout '" + a.lineout + "' (available: builtin:" + kBuiltinLineoutId + ")");
    lineout = LineoutCoefficients::premiership_2018_19();
  } else if (!a.possessions.empty()) {
    std::ifstream in(a.possessions);
    if (!in) throw DataError("cannot open '" + a.possessions + "'");
    lineout = fit_lineout_model(parse_possession_csv(in));
    lineout.model_id = "lineout-" + fs::path(a.possessions).stem().string();
  } else {
    throw UsageError("fit: no lineout data; pass --possessions <csv> or --lineout builtin:" +
                     std::string(kBuiltinLineoutId));
  }

  std::string kick_id;
  std::vector<KickGridCell> cells;
  if (!a.kick.empty()) {
    if (a.kick != kDemoBundleRef) throw UsageError("fit: unknown --kick '" + a.kick + "' (available: builtin:demo)");
    cells = demo_kick_grid();
    kick_id = kDemoKickId;
  } else if (!a.kick_grid.empty()) {
    cells = load_kick_grid_csv(a.kick_grid);
    kick_id = "kick-" + fs::path(a.kick_grid).stem().string();
  } else {
    throw UsageError("fit: missing kicking grid; pass --kick-grid <csv> or --kick builtin:demo");
  }
  auto kick = fit_kick_surface(cells);

  RestartValueTable restart = RestartValueTable::premiership_2018_19();
  std::string restart_id = kPublishedRestartId;
  if (!a.phases.empty()) {
    const auto records = load_phase_csv(a.phases);
    restart = restart_values_from_phases(records, zone_map(a.zones), parse_orientation(a.orientation));
    restart_id = "restart-" + fs::path(a.phases).stem().string();
  }

  ModelBundle b{content_bundle_id(lineout, kick, restart),
                {{"lineout_source", a.lineout.empty() ? a.possessions : a.lineout},
                 {"kick_source", a.kick.empty() ? a.kick_grid : a.kick},
                 {"restart_source", a.phases.empty() ? std::string("builtin:premiership-2018-19") : a.phases}},
                std::move(lineout),
                std::move(kick),
                kick_id,
                std::move(restart),
                restart_id};
  save_bundle(b, a.out);
  auto rep = open_out(fs::path(a.out) / "fit_report.txt");
  write_fit_report(rep, b);
  std::cerr << "fit: wrote bundle " << b.bundle_id << " to " << a.out << "\n";
  return 0;
}

int cmd_decide(const QueryArgs& a) {
  const auto bundle = load_bundle(resolve_bundle_ref(a.bundle));
  const auto q = DecisionQuery::make(a.x, a.y, a.d_touch, GameContext::make(a.cards, a.winpct));
  const auto r = evaluate(q, bundle.models());
  auto j = to_json(r);
  j["bundle_id"] = bundle.bundle_id;
  std::cout << j.dump(2) << '\n';
  std::cerr << "verdict: " << to_string(r.recommendation) << " (delta " << (r.delta > 0 ? "+" : "")
            << format_fixed(r.delta, 2) << ", lineout " << format_fixed(r.ep_lineout, 2) << " vs kick "
            << format_fixed(r.ep_kick, 2) << ")\n";
  return 0;
}

int cmd_surface(const SurfaceArgs& a) {
  const auto bundle = load_bundle(resolve_bundle_ref(a.bundle));
  const auto ctx = GameContext::make(a.cards, a.winpct);
  GridSpec spec;
  spec.x_step = spec.y_step = a.step;
  fs::create_directories(a.out);
  for (double d : a.d_touch) {
    const auto g = decision_grid(spec, d, ctx, bundle.models(), bundle.model_ids());
    const auto stem = fs::path(a.out) / ("grid_dtouch_" + format_double(d));
    if (a.format == "json" || a.format == "both") {
      auto out = open_out(stem.string() + ".json");
      out << to_json(g).dump() << '\n';
    }
    if (a.format == "csv" || a.format == "both") {
      auto out = open_out(stem.string() + ".csv");
      write_grid_csv(out, g);
    }
    std::cerr << "surface: d_touch " << format_double(d) << " -> " << g.nx() << "x" << g.ny() << " grid, "
              << frontier(g).size() << " frontier segments\n";
  }
  return 0;
}

int cmd_regret(const RegretArgs& a) {
  std::ifstream in(a.decisions);
  if (!in) throw DataError("cannot open '" + a.decisions + "'");
  const auto rep = regret_report(parse_regret_csv(in));
  if (a.out.empty()) {
    write_regret_csv(std::cout, rep);
  } else {
    auto out = open_out(a.out);
    write_regret_csv(out, rep);
  }
  std::cerr << "regret: " << rep.rows.size() << " decisions, total " << format_fixed(rep.total, 2)
            << ", optimal " << rep.optimal_count << "/" << rep.rows.size() << "\n";
  return 0;
}

httplib::Server* g_server = nullptr;

int cmd_serve(const ServeArgs& a) {
  ServiceOptions opt;
  opt.max_concurrent_grids = a.grid_concurrency;
  const DecisionService service(load_bundle(resolve_bundle_ref(a.bundle)), opt);
  auto server = make_http_server(service);
  g_server = server.get();
  std::signal(SIGINT, [](int) { if (g_server) g_server->stop(); });
  std::signal(SIGTERM, [](int) { if (g_server) g_server->stop(); });
  std::cerr << "serve: bundle " << service.bundle().bundle_id << " on http://" << a.host << ":" << a.port << "\n";
  if (!server->listen(a.host, a.port)) throw UsageError("serve: cannot bind " + a.host + ":" + std::to_string(a.port));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rugby penalty decision engine: lineout vs kick at goal expected points"};
  app.require_subcommand(1);

  IngestArgs ia;
  auto* ingest = app.add_subcommand("ingest", "Derive, group and sample phase-1 lineout possessions");
  ingest->add_option("--input", ia.input, "Phase-level CSV")->required();
  ingest->add_option("--zones", ia.zones, "Zone map (label = midpoint per line)");
  ingest->add_option("--orientation", ia.orientation, "Zone labels relative to: own|opp")
      ->check(CLI::IsMember({"own", "opp"}));
  ingest->add_option("--seed", ia.seed, "Sampler seed");
  ingest->add_flag("--no-sample", ia.no_sample, "Keep every entry");
  ingest->add_option("--out", ia.out, "Output directory");

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Fit lineout, kick and restart components into a bundle");
  fit->add_option("--possessions", fa.possessions, "Sampled possession CSV from ingest");
  fit->add_option("--lineout", fa.lineout, "Built-in lineout coefficients instead of fitting");
  fit->add_option("--kick-grid", fa.kick_grid, "Kicking success grid CSV");
  fit->add_option("--kick", fa.kick, "Built-in kicking grid (builtin:demo)");
  fit->add_option("--phases", fa.phases, "Phase CSV for restart values (default: built-in table)");
  fit->add_option("--zones", fa.zones, "Zone map");
  fit->add_option("--orientation", fa.orientation)->check(CLI::IsMember({"own", "opp"}));
  fit->add_option("--out", fa.out, "Bundle output directory");

  QueryArgs qa;
  auto* decide = app.add_subcommand("decide", "Evaluate one penalty");
  decide->add_option("--bundle", qa.bundle, "Bundle directory or builtin:demo (default $RUCK_EP_BUNDLE)");
  decide->add_option("--x", qa.x, "Meters from the opposition try line")->required();
  decide->add_option("--y", qa.y, "Lateral offset from the posts")->required();
  decide->add_option("--d-touch", qa.d_touch, "Assumed territory gained kicking to touch")->required();
  decide->add_option("--cards", qa.cards, "Net card advantage");
  decide->add_option("--winpct", qa.winpct, "Win percentage difference");

  SurfaceArgs sa;
  auto* surface = app.add_subcommand("surface", "Decision grids and frontiers");
  surface->add_option("--bundle", sa.bundle);
  surface->add_option("--d-touch", sa.d_touch, "One or more d_touch values")->required()->expected(1, -1);
  surface->add_option("--cards", sa.cards);
  surface->add_option("--winpct", sa.winpct);
  surface->add_option("--step", sa.step, "Grid step in meters");
  surface->add_option("--format", sa.format)->check(CLI::IsMember({"json", "csv", "both"}));
  surface->add_option("--out", sa.out, "Output directory");

  RegretArgs ra;
  auto* regret = app.add_subcommand("regret", "Regret audit of realized decisions");
  regret->add_option("--decisions", ra.decisions, "CSV: team, lineout_ep, kick_ep, decision")->required();
  regret->add_option("--out", ra.out, "Output CSV (default stdout)");

  ServeArgs va;
  auto* serve = app.add_subcommand("serve", "HTTP JSON API");
  serve->add_option("--bundle", va.bundle);
  serve->add_option("--host", va.host);
  serve->add_option("--port", va.port);
  serve->add_option("--grid-concurrency", va.grid_concurrency, "Max concurrent grid requests (0 = unbounded)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ErrorKind::usage);
  }

  try {
    if (*ingest) return cmd_ingest(ia);
    if (*fit) return cmd_fit(fa);
    if (*decide) return cmd_decide(qa);
    if (*surface) return cmd_surface(sa);
    if (*regret) return cmd_regret(ra);
    if (*serve) return cmd_serve(va);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::data);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::numeric);
  }
  return static_cast<int>(ErrorKind::usage);
}
