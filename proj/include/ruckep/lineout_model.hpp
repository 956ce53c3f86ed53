#pragma once

// Lineout expected points: a linear model of the next score on field position,
// card advantage and win-percentage differential,
//
//     EP = b0 + b1 * meter_line + b2 * card_diff + b3 * winpct_diff,
//
// fitted by OLS on one lineout per run_id.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ruckep/error.hpp"
#include "ruckep/format.hpp"
#include "ruckep/geometry.hpp"
#include "ruckep/glm/ols.hpp"
#include "ruckep/phase_ingest.hpp"

namespace ruckep {

inline constexpr int kLineoutSchemaVersion = 1;
inline constexpr const char* kBuiltinLineoutId = "premiership-2018-19";

struct GameContext {
  int card_diff = 0;         // net player advantage for the attacking team
  double winpct_diff = 0.0;  // season win % of attacking team minus opponent

  static GameContext make(int card_diff, double winpct_diff) {
    if (card_diff < -3 || card_diff > 3)
      throw DomainError("cards", "card_diff must lie in [-3, 3]");
    if (!std::isfinite(winpct_diff) || winpct_diff < -1.0 || winpct_diff > 1.0)
      throw DomainError("winpct", "winpct_diff must lie in [-1, 1]");
    return GameContext{card_diff, winpct_diff};
  }
};

struct CoefficientInference {
  Eigen::Vector4d std_errors;
  Eigen::Vector4d t_values;
  Eigen::Vector4d p_values;
  double residual_variance = std::numeric_limits<double>::quiet_NaN();
  std::size_t n = 0;
};

struct LineoutCoefficients {
  std::string model_id = "fitted";
  double beta0 = 0.0;  // intercept
  double beta1 = 0.0;  // per meter from the opposition try line
  double beta2 = 0.0;  // per card of player advantage
  double beta3 = 0.0;  // per unit win-percentage differential
  std::optional<CoefficientInference> inference;

  static const std::vector<std::string>& labels() {
    static const std::vector<std::string> l = {"(Intercept)", "meter_line", "Card_Diff", "WinPct_Diff"};
    return l;
  }

  Eigen::Vector4d vector() const { return {beta0, beta1, beta2, beta3}; }

  /// Published 2018/19 Premiership estimates. p-values reported as "< 2e-16"
  /// are stored at that bound.
  static LineoutCoefficients premiership_2018_19() {
    LineoutCoefficients c;
    c.model_id = kBuiltinLineoutId;
    c.beta0 = 3.2545;
    c.beta1 = -0.0586;
    c.beta2 = 0.8802;
    c.beta3 = 0.6503;
    CoefficientInference inf;
    inf.std_errors = {0.2093, 0.0044, 0.3052, 0.3430};
    inf.t_values = {15.553, -13.283, 2.884, 1.896};
    inf.p_values = {2e-16, 2e-16, 0.00397, 0.05809};
    inf.n = 2046;
    c.inference = inf;
    return c;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["schema_version"] = kLineoutSchemaVersion;
    j["kind"] = "lineout-linear";
    j["model_id"] = model_id;
    j["labels"] = labels();
    j["coefficients"] = {beta0, beta1, beta2, beta3};
    if (inference) {
      auto vec = [](const Eigen::Vector4d& v) {
        nlohmann::json a = nlohmann::json::array();
        for (int i = 0; i < 4; ++i) a.push_back(std::isfinite(v(i)) ? nlohmann::json(v(i)) : nlohmann::json());
        return a;
      };
      j["inference"] = {{"std_errors", vec(inference->std_errors)},
                        {"t_values", vec(inference->t_values)},
                        {"p_values", vec(inference->p_values)},
                        {"n", inference->n}};
      if (std::isfinite(inference->residual_variance))
        j["inference"]["residual_variance"] = inference->residual_variance;
    }
    return j;
  }

  static LineoutCoefficients from_json(const nlohmann::json& j) {
    try {
      if (j.at("kind").get<std::string>() != "lineout-linear")
        throw SchemaError("kind", "lineout model: unexpected kind");
      if (j.at("schema_version").get<int>() != kLineoutSchemaVersion)
        throw SchemaError("schema_version", "lineout model: unsupported schema version");
      const auto b = j.at("coefficients").get<std::vector<double>>();
      if (b.size() != 4) throw SchemaError("coefficients", "lineout model: expected 4 coefficients");
      LineoutCoefficients c;
      c.model_id = j.value("model_id", std::string("fitted"));
      c.beta0 = b[0];
      c.beta1 = b[1];
      c.beta2 = b[2];
      c.beta3 = b[3];
      if (j.contains("inference")) {
        const auto& inf = j["inference"];
        auto vec = [](const nlohmann::json& a) {
          Eigen::Vector4d v;
          for (int i = 0; i < 4; ++i)
            v(i) = a.at(i).is_null() ? std::numeric_limits<double>::quiet_NaN() : a.at(i).get<double>();
          return v;
        };
        CoefficientInference ci;
        ci.std_errors = vec(inf.at("std_errors"));
        ci.t_values = vec(inf.at("t_values"));
        ci.p_values = vec(inf.at("p_values"));
        ci.n = inf.value("n", std::size_t{0});
        ci.residual_variance = inf.value("residual_variance", std::numeric_limits<double>::quiet_NaN());
        c.inference = ci;
      }
      for (double v : b)
        if (!std::isfinite(v)) throw DataError("lineout model: coefficients must be finite");
      return c;
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError("", std::string("lineout model: malformed JSON (") + e.what() + ")");
    }
  }
};

inline constexpr std::size_t kMinLineoutEntries = 50;

inline glm::DesignMatrix lineout_design(const std::vector<PossessionEntry>& entries) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(entries.size()), 4);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    x(r, 0) = 1.0;
    x(r, 1) = entries[i].meter_line;
    x(r, 2) = entries[i].record.card_diff;
    x(r, 3) = entries[i].record.winpct_diff;
  }
  return glm::DesignMatrix(std::move(x), LineoutCoefficients::labels());
}

/// OLS of points_next on (meter_line, card_diff, winpct_diff). Entries must already
/// be one per run_id.
inline LineoutCoefficients fit_lineout_model(const std::vector<PossessionEntry>& entries,
                                             glm::OlsFit* full_fit = nullptr) {
  if (entries.size() < kMinLineoutEntries)
    throw DataError("lineout model: need at least " + std::to_string(kMinLineoutEntries) +
                    " entries, got " + std::to_string(entries.size()));
  std::vector<int> seen;
  for (const auto& e : entries) {
    if (e.run_id > 0) {
      if (std::find(seen.begin(), seen.end(), e.run_id) != seen.end())
        throw DataError("lineout model: run_id " + std::to_string(e.run_id) +
                        " appears more than once; sample one entry per run first");
      seen.push_back(e.run_id);
    }
  }
  std::vector<double> y;
  y.reserve(entries.size());
  for (const auto& e : entries) y.push_back(e.record.points_next);
  const auto fit = glm::ols_fit(lineout_design(entries), y);
  LineoutCoefficients c;
  c.beta0 = fit.coefficients(0);
  c.beta1 = fit.coefficients(1);
  c.beta2 = fit.coefficients(2);
  c.beta3 = fit.coefficients(3);
  CoefficientInference inf;
  inf.std_errors = fit.std_errors;
  inf.t_values = fit.t_values;
  inf.p_values = fit.p_values;
  inf.residual_variance = fit.residual_variance;
  inf.n = fit.n;
  c.inference = inf;
  if (full_fit) *full_fit = fit;
  return c;
}

inline double ep_lineout(const LineoutCoefficients& c, double x_lo, const GameContext& ctx) {
  if (!std::isfinite(x_lo) || x_lo < kLineoutFloor || x_lo > kPitchLength)
    throw DomainError("x_lo", "lineout position must lie in [5, 100] m");
  return c.beta0 + c.beta1 * x_lo + c.beta2 * ctx.card_diff + c.beta3 * ctx.winpct_diff;
}

/// R-style significance summary for the fit report.
inline std::string format_p_value(double p) {
  if (std::isnan(p)) return "NA";
  if (p <= 2e-16) return "< 2e-16";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", p);
  return buf;
}

}  // namespace ruckep
