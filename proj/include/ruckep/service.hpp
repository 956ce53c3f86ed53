#pragma once

// HTTP JSON service over an immutable model bundle.
//
// Routing and validation live in DecisionService::handle, which is a pure
// function of (method, path, query, body); the httplib server is a thin shell.

#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ruckep/bundle.hpp"
#include "ruckep/decision.hpp"
#include "ruckep/error.hpp"
#include "ruckep/export.hpp"
#include "ruckep/format.hpp"
#include "ruckep/regret.hpp"

// after Eigen: <resolv.h> defines a _res macro that collides with Eigen internals
#include <httplib.h>

namespace ruckep {

inline constexpr int kApiSchemaVersion = 1;

using QueryParams = std::map<std::string, std::string>;

struct ServiceResponse {
  int status = 200;
  nlohmann::json body;
};

struct ServiceOptions {
  int max_concurrent_grids = 4;  // <= 0: unbounded
  double default_dmax = 30.0;
};

namespace detail {

struct FieldError {
  std::string field;
  std::string message;
};

// Accumulates per-field parse errors so a 400 reports all of them at once.
class QueryReader {
 public:
  explicit QueryReader(const QueryParams& q) : q_(q) {}

  double number(const std::string& name, std::optional<double> fallback = std::nullopt) {
    auto it = q_.find(name);
    if (it == q_.end() || it->second.empty()) {
      if (fallback) return *fallback;
      errors_.push_back({name, "required"});
      return 0.0;
    }
    double v = 0.0;
    if (!parse_double(it->second, v) || !std::isfinite(v)) {
      errors_.push_back({name, "expected a finite number, got '" + it->second + "'"});
      return 0.0;
    }
    return v;
  }

  int integer(const std::string& name, int fallback) {
    auto it = q_.find(name);
    if (it == q_.end() || it->second.empty()) return fallback;
    long long v = 0;
    if (!parse_long(it->second, v) || v < -1000 || v > 1000) {
      errors_.push_back({name, "expected an integer, got '" + it->second + "'"});
      return fallback;
    }
    return static_cast<int>(v);
  }

  const std::vector<FieldError>& errors() const { return errors_; }

 private:
  const QueryParams& q_;
  std::vector<FieldError> errors_;
};

}  // namespace detail

class DecisionService {
 public:
  explicit DecisionService(ModelBundle bundle, ServiceOptions opt = {})
      : bundle_(std::move(bundle)),
        opt_(opt),
        grid_slots_(opt.max_concurrent_grids > 0 ? opt.max_concurrent_grids : kUnbounded) {}

  const ModelBundle& bundle() const noexcept { return bundle_; }

  ServiceResponse handle(std::string_view method, std::string_view path, const QueryParams& query,
                         std::string_view body = {}) const {
    ServiceResponse r;
    try {
      if (path == "/api/health") {
        r = get_only(method, [&] { return health(); });
      } else if (path == "/api/decision") {
        r = get_only(method, [&] { return decision(query); });
      } else if (path == "/api/grid") {
        r = get_only(method, [&] { return grid(query); });
      } else if (path == "/api/sweep") {
        r = get_only(method, [&] { return sweep(query); });
      } else if (path == "/api/regret") {
        if (method != "POST")
          r = error(405, "method_not_allowed", "use POST");
        else
          r = regret(body);
      } else {
        r = error(404, "not_found", "no such endpoint: " + std::string(path));
      }
    } catch (const DomainError& e) {
      r = error(422, "domain", e.what());
      r.body["field"] = e.field();
    } catch (const DataError& e) {
      r = error(400, "bad_request", e.what());
    } catch (const Error& e) {
      r = error(500, "numeric", e.what());
    }
    r.body["bundle_id"] = bundle_.bundle_id;
    return r;
  }

 private:
  static constexpr std::ptrdiff_t kUnbounded = 1 << 20;

  template <class F>
  static ServiceResponse get_only(std::string_view method, F&& f) {
    if (method != "GET") return error(405, "method_not_allowed", "use GET");
    return f();
  }

  static ServiceResponse error(int status, const std::string& code, const std::string& message) {
    return {status, {{"error", code}, {"message", message}}};
  }

  static std::optional<ServiceResponse> field_errors(const detail::QueryReader& rd) {
    if (rd.errors().empty()) return std::nullopt;
    nlohmann::json fields = nlohmann::json::array();
    for (const auto& e : rd.errors()) fields.push_back({{"field", e.field}, {"message", e.message}});
    ServiceResponse r = error(400, "bad_request", "invalid query parameters");
    r.body["fields"] = std::move(fields);
    return r;
  }

  ServiceResponse health() const {
    return {200, {{"status", "ok"}, {"schema_version", kApiSchemaVersion}, {"model_ids", bundle_.model_ids()}}};
  }

  ServiceResponse decision(const QueryParams& q) const {
    detail::QueryReader rd(q);
    const double x = rd.number("x");
    const double y = rd.number("y");
    const double d = rd.number("d_touch");
    const int cards = rd.integer("cards", 0);
    const double winpct = rd.number("winpct", 0.0);
    if (auto bad = field_errors(rd)) return *bad;
    const auto query = DecisionQuery::make(x, y, d, GameContext::make(cards, winpct));
    auto body = to_json(evaluate(query, bundle_.models()));
    body["query"] = {{"x", x}, {"y", y}, {"d_touch", d}, {"cards", cards}, {"winpct", winpct}};
    return {200, std::move(body)};
  }

  ServiceResponse grid(const QueryParams& q) const {
    detail::QueryReader rd(q);
    const double d = rd.number("d_touch");
    const int cards = rd.integer("cards", 0);
    const double winpct = rd.number("winpct", 0.0);
    const double step = rd.number("step", 1.0);
    if (auto bad = field_errors(rd)) return *bad;
    GridSpec spec;
    spec.x_step = spec.y_step = step;
    const auto ctx = GameContext::make(cards, winpct);
    validate_grid_spec(spec);
    grid_slots_.acquire();
    struct Release {
      std::counting_semaphore<kUnbounded>& s;
      ~Release() { s.release(); }
    } release{grid_slots_};
    return {200, to_json(decision_grid(spec, d, ctx, bundle_.models(), bundle_.model_ids()))};
  }

  ServiceResponse sweep(const QueryParams& q) const {
    detail::QueryReader rd(q);
    const double x = rd.number("x");
    const double y = rd.number("y");
    const int cards = rd.integer("cards", 0);
    const double winpct = rd.number("winpct", 0.0);
    const double dmax = rd.number("dmax", opt_.default_dmax);
    const double step = rd.number("step", 1.0);
    if (auto bad = field_errors(rd)) return *bad;
    if (dmax > 100.0) throw DomainError("dmax", "dmax must be <= 100");
    const auto query = DecisionQuery::make(x, y, 0.0, GameContext::make(cards, winpct));
    return {200, to_json(sweep_dtouch(query.point, query.ctx, dtouch_range(dmax, step), bundle_.models()))};
  }

  // Body: {"rows": [{team, lineout_ep, kick_ep, decision}, ...]} or a bare array.
  ServiceResponse regret(std::string_view body) const {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error&) {
      return error(400, "bad_request", "body is not valid JSON");
    }
    const nlohmann::json& rows = j.is_object() && j.contains("rows") ? j["rows"] : j;
    if (!rows.is_array()) return error(400, "bad_request", "expected an array of rows");
    std::vector<RegretInput> inputs;
    nlohmann::json fields = nlohmann::json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& row = rows[i];
      const std::string at = "rows[" + std::to_string(i) + "].";
      RegretInput in;
      if (!row.is_object()) {
        fields.push_back({{"field", "rows[" + std::to_string(i) + "]"}, {"message", "expected an object"}});
        continue;
      }
      in.team = row.value("team", std::string());
      auto num = [&](const char* key, double& out) {
        if (!row.contains(key) || !row[key].is_number())
          fields.push_back({{"field", at + key}, {"message", "expected a number"}});
        else
          out = row[key].get<double>();
      };
      num("lineout_ep", in.ep_lineout);
      num("kick_ep", in.ep_kick);
      try {
        in.chosen = parse_option(row.at("decision").get<std::string>());
      } catch (const std::exception&) {
        fields.push_back({{"field", at + "decision"}, {"message", "expected 'lineout' or 'kick'"}});
      }
      inputs.push_back(std::move(in));
    }
    if (!fields.empty()) {
      ServiceResponse r = error(400, "bad_request", "invalid regret rows");
      r.body["fields"] = std::move(fields);
      return r;
    }
    return {200, to_json(regret_report(inputs))};
  }

  ModelBundle bundle_;
  ServiceOptions opt_;
  mutable std::counting_semaphore<kUnbounded> grid_slots_;
};

/// Server routing every /api/* request through `service`, which must outlive it.
inline std::unique_ptr<httplib::Server> make_http_server(const DecisionService& service) {
  auto server = std::make_unique<httplib::Server>();
  auto dispatch = [&service](const httplib::Request& req, httplib::Response& res) {
    QueryParams q;
    for (const auto& [k, v] : req.params) q.emplace(k, v);  // first value wins
    const auto out = service.handle(req.method, req.path, q, req.body);
    res.status = out.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("X-Bundle-Id", service.bundle().bundle_id);
    res.set_content(out.body.dump(), "application/json");
  };
  server->Get(R"(/api/.*)", dispatch);
  server->Post(R"(/api/.*)", dispatch);
  return server;
}

}  // namespace ruckep
