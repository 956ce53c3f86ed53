#pragma once

// Kick-at-goal success surface: logit P(make) = f(d, theta), where f is a cubic
// tensor-product P-spline in distance and angle fitted by penalized IRLS to
// gridded success proportions, with smoothing chosen per margin by GCV.

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ruckep/csv.hpp"
#include "ruckep/error.hpp"
#include "ruckep/format.hpp"
#include "ruckep/geometry.hpp"
#include "ruckep/glm/bspline.hpp"
#include "ruckep/glm/irls.hpp"
#include "ruckep/glm/smoothing.hpp"
#include "ruckep/glm/tensor_smooth.hpp"
#include "ruckep/phase_ingest.hpp"

namespace ruckep {

inline constexpr int kKickSurfaceSchemaVersion = 1;
inline constexpr int kKickGridSchemaVersion = 1;
inline constexpr double kKickFloor = 5.0;  // no kicks modeled inside the 5 m line

struct KickGridCell {
  double x_lo = 0.0, x_hi = 0.0;          // meters from the try line
  double touch_lo = 0.0, touch_hi = 0.0;  // meters from the left touchline
  double proportion = 0.0;
  std::optional<int> attempts;

  PitchPoint center() const {
    return PitchPoint((x_lo + x_hi) / 2.0, from_left_touchline((touch_lo + touch_hi) / 2.0));
  }
};

inline void validate_cell(const KickGridCell& c) {
  auto bad = [](const std::string& m) { throw DataError("kick grid cell: " + m); };
  if (!(c.x_lo >= 0.0 && c.x_lo < c.x_hi && c.x_hi <= kGridBand * kGridRowBands))
    bad("x band must satisfy 0 <= lo < hi <= 65");
  if (!(c.touch_lo >= 0.0 && c.touch_lo < c.touch_hi && c.touch_hi <= kPitchWidth))
    bad("touchline band must satisfy 0 <= lo < hi <= 70");
  if (!(c.proportion >= 0.0 && c.proportion <= 1.0)) bad("proportion must lie in [0, 1]");
  if (c.attempts && *c.attempts < 0) bad("attempts must be >= 0");
}

/// CSV columns: x_band_lo, x_band_hi, touch_band_lo, touch_band_hi, proportion[, attempts].
/// An optional leading `# kick-grid schema_version=N` comment is checked.
inline std::vector<KickGridCell> parse_kick_grid_csv(std::istream& in) {
  const csv::Table t = csv::read(in);
  for (const auto& c : t.comments) {
    const auto pos = c.find("schema_version=");
    if (pos == std::string::npos) continue;
    long long v = 0;
    if (!parse_long(c.substr(pos + 15), v) || v != kKickGridSchemaVersion)
      throw SchemaError("schema_version", "kick grid: unsupported schema version");
  }
  const auto cx0 = t.require("x_band_lo"), cx1 = t.require("x_band_hi");
  const auto ct0 = t.require("touch_band_lo"), ct1 = t.require("touch_band_hi");
  const auto cp = t.require("proportion");
  const auto ca = t.find("attempts");
  std::vector<KickGridCell> out;
  for (const auto& row : t.rows) {
    KickGridCell c;
    auto num = [&](std::size_t col, const char* name) {
      double v = 0.0;
      if (!parse_double(row.fields[col], v))
        throw RowError(row.line, std::string("column '") + name + "': expected a number");
      return v;
    };
    c.x_lo = num(cx0, "x_band_lo");
    c.x_hi = num(cx1, "x_band_hi");
    c.touch_lo = num(ct0, "touch_band_lo");
    c.touch_hi = num(ct1, "touch_band_hi");
    c.proportion = num(cp, "proportion");
    if (ca) {
      const std::string s = csv::detail::trim(row.fields[*ca]);
      if (!s.empty() && s != "NA") {
        long long v = 0;
        if (!parse_long(s, v)) throw RowError(row.line, "column 'attempts': expected an integer");
        c.attempts = static_cast<int>(v);
      }
    }
    try {
      validate_cell(c);
    } catch (const DataError& e) {
      throw RowError(row.line, e.what());
    }
    out.push_back(c);
  }
  return out;
}

inline std::vector<KickGridCell> load_kick_grid_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open kicking grid '" + path + "'");
  return parse_kick_grid_csv(in);
}

inline void write_kick_grid_csv(std::ostream& out, const std::vector<KickGridCell>& cells) {
  out << "# kick-grid schema_version=" << kKickGridSchemaVersion << '\n';
  csv::write_row(out, {"x_band_lo", "x_band_hi", "touch_band_lo", "touch_band_hi", "proportion", "attempts"});
  for (const auto& c : cells)
    csv::write_row(out, {format_double(c.x_lo), format_double(c.x_hi), format_double(c.touch_lo),
                         format_double(c.touch_hi), format_double(c.proportion),
                         c.attempts ? std::to_string(*c.attempts) : std::string()});
}

struct KickSurfaceOptions {
  int distance_basis = 8;
  int angle_basis = 6;
  int degree = 3;
  double distance_lo = 5.0;
  double distance_hi = 75.0;  // covers the far corner of the kicking grid (~73.8 m)
  double angle_lo = 0.0;
  double angle_hi = 1.45;     // atan(35 / 5) ~ 1.43 at the 5 m line on the touchline
  glm::LambdaGrid lambda_grid = glm::LambdaGrid::log_spaced();
  glm::IrlsOptions irls = [] {
    glm::IrlsOptions o;
    o.ridge = 1e-6;  // keeps saturated (all-make) cells finite
    return o;
  }();
  std::size_t min_cells = 30;
  std::size_t min_distinct = 3;
};

/// Evaluation detail for one query.
struct KickPrediction {
  double probability = 0.0;
  double linear_predictor = 0.0;
  KickGeometry geometry{};
  bool clamped = false;  // (d, theta) fell outside the fitted basis domain
};

class KickSuccessSurface {
 public:
  KickSuccessSurface(glm::BSplineBasis distance_basis, glm::BSplineBasis angle_basis,
                     Eigen::VectorXd coefficients)
      : distance_(std::move(distance_basis)),
        angle_(std::move(angle_basis)),
        coef_(std::move(coefficients)) {
    if (coef_.size() != static_cast<Eigen::Index>(distance_.size()) * angle_.size())
      throw DataError("kick surface: coefficient count does not match basis sizes");
    if (!coef_.allFinite()) throw DataError("kick surface: non-finite coefficients");
  }

  const glm::BSplineBasis& distance_basis() const noexcept { return distance_; }
  const glm::BSplineBasis& angle_basis() const noexcept { return angle_; }
  const Eigen::VectorXd& coefficients() const noexcept { return coef_; }

  double lambda_distance = 0.0;
  double lambda_angle = 0.0;
  double ridge = 0.0;
  double dispersion = std::numeric_limits<double>::quiet_NaN();  // quasi-binomial phi
  double edf = std::numeric_limits<double>::quiet_NaN();
  double gcv_score = std::numeric_limits<double>::quiet_NaN();
  std::size_t n_cells = 0;
  glm::ConvergenceRecord convergence;

  double linear_predictor(double d, double theta) const {
    const Eigen::RowVectorXd rd = distance_.row(d);
    const Eigen::RowVectorXd rt = angle_.row(theta);
    return contract(rd, rt);
  }

  /// d(eta)/dd and d(eta)/dtheta inside the basis domain.
  std::pair<double, double> gradient(double d, double theta) const {
    return {contract(distance_.derivative_row(d), angle_.row(theta)),
            contract(distance_.row(d), angle_.derivative_row(theta))};
  }

  KickPrediction predict(const KickGeometry& g) const {
    KickPrediction out;
    out.geometry = g;
    const double d = std::clamp(g.distance, distance_.lower(), distance_.upper());
    const double t = std::clamp(g.angle, angle_.lower(), angle_.upper());
    out.clamped = d != g.distance || t != g.angle;
    out.linear_predictor = linear_predictor(d, t);
    // Keep the probability strictly inside (0, 1).
    constexpr double eps = 1e-12;
    out.probability = std::clamp(glm::detail::inv_logit(out.linear_predictor), eps, 1.0 - eps);
    return out;
  }

  KickPrediction predict(const PitchPoint& p) const {
    if (p.x() < kKickFloor)
      throw DomainError("x", "kicks inside the 5 m line are outside the model domain (x = " +
                                 format_double(p.x()) + ")");
    return predict(to_kick_geometry(p));
  }

  double probability(const PitchPoint& p) const { return predict(p).probability; }

  nlohmann::json to_json() const {
    auto basis_json = [](const glm::BSplineBasis& b) {
      return nlohmann::json{{"knots", b.knots()}, {"degree", b.degree()}};
    };
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); };
    nlohmann::json j;
    j["schema_version"] = kKickSurfaceSchemaVersion;
    j["kind"] = "kick-gam-logistic";
    j["basis"] = {{"distance", basis_json(distance_)}, {"angle", basis_json(angle_)}};
    j["coefficients"] = std::vector<double>(coef_.data(), coef_.data() + coef_.size());
    j["lambda"] = {{"distance", lambda_distance}, {"angle", lambda_angle}};
    j["ridge"] = ridge;
    j["phi"] = num(dispersion);
    j["edf"] = num(edf);
    j["gcv_score"] = num(gcv_score);
    j["n_cells"] = n_cells;
    j["convergence"] = {{"iterations", convergence.iterations},
                        {"converged", convergence.converged},
                        {"step_halvings", convergence.step_halvings},
                        {"deviance", convergence.deviance},
                        {"penalized_deviance", convergence.penalized_deviance}};
    return j;
  }

  static KickSuccessSurface from_json(const nlohmann::json& j) {
    try {
      if (j.at("kind").get<std::string>() != "kick-gam-logistic")
        throw SchemaError("kind", "kick surface: unexpected kind");
      if (j.at("schema_version").get<int>() != kKickSurfaceSchemaVersion)
        throw SchemaError("schema_version", "kick surface: unsupported schema version");
      auto basis = [](const nlohmann::json& b) {
        return glm::BSplineBasis(b.at("knots").get<std::vector<double>>(), b.at("degree").get<int>());
      };
      auto num = [](const nlohmann::json& v) {
        return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
      };
      const auto c = j.at("coefficients").get<std::vector<double>>();
      KickSuccessSurface s(basis(j.at("basis").at("distance")), basis(j.at("basis").at("angle")),
                           Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size())));
      s.lambda_distance = j.at("lambda").at("distance").get<double>();
      s.lambda_angle = j.at("lambda").at("angle").get<double>();
      s.ridge = j.value("ridge", 0.0);
      s.dispersion = num(j.value("phi", nlohmann::json()));
      s.edf = num(j.value("edf", nlohmann::json()));
      s.gcv_score = num(j.value("gcv_score", nlohmann::json()));
      s.n_cells = j.value("n_cells", std::size_t{0});
      if (j.contains("convergence")) {
        const auto& cv = j["convergence"];
        s.convergence.iterations = cv.value("iterations", 0);
        s.convergence.converged = cv.value("converged", false);
        s.convergence.step_halvings = cv.value("step_halvings", 0);
        s.convergence.deviance = cv.value("deviance", std::vector<double>{});
        s.convergence.penalized_deviance = cv.value("penalized_deviance", std::vector<double>{});
      }
      return s;
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError("", std::string("kick surface: malformed JSON (") + e.what() + ")");
    }
  }

 private:
  double contract(const Eigen::RowVectorXd& rd, const Eigen::RowVectorXd& rt) const {
    const Eigen::Index kt = rt.size();
    double eta = 0.0;
    for (Eigen::Index i = 0; i < rd.size(); ++i) {
      if (rd(i) == 0.0) continue;
      eta += rd(i) * rt.dot(coef_.segment(i * kt, kt));
    }
    return eta;
  }

  glm::BSplineBasis distance_;
  glm::BSplineBasis angle_;
  Eigen::VectorXd coef_;
};

inline double p_make(const KickSuccessSurface& surface, const PitchPoint& p) {
  return surface.probability(p);
}

/// Expected points of a kick at goal: 3 for a make, the restart value for a miss.
inline double ep_kick(double p_make, double ep_miss) {
  if (!(p_make >= 0.0 && p_make <= 1.0)) throw DomainError("p_make", "p_make must lie in [0, 1]");
  return 3.0 * p_make + (1.0 - p_make) * ep_miss;
}

/// One fitting row per retained cell.
struct KickObservation {
  double distance;
  double angle;
  double proportion;
  double weight;

  friend bool operator<(const KickObservation& a, const KickObservation& b) {
    return std::tie(a.distance, a.angle, a.proportion, a.weight) <
           std::tie(b.distance, b.angle, b.proportion, b.weight);
  }
};

/// Cells at the 5 m line or closer are dropped. Rows come back sorted so that
/// permuted or mirror-image inputs produce bit-identical fits.
inline std::vector<KickObservation> kick_observations(const std::vector<KickGridCell>& cells) {
  std::vector<KickObservation> obs;
  for (const auto& c : cells) {
    validate_cell(c);
    const PitchPoint center = c.center();
    if (center.x() < kKickFloor) continue;
    const KickGeometry g = to_kick_geometry(center);
    obs.push_back({g.distance, g.angle, c.proportion, c.attempts ? double(*c.attempts) : 1.0});
  }
  std::sort(obs.begin(), obs.end());
  return obs;
}

namespace detail {

struct KickDesign {
  glm::BSplineBasis distance;
  glm::BSplineBasis angle;
  Eigen::MatrixXd x;
  glm::TensorPenalties penalties;
  std::vector<double> y, w;
};

inline KickDesign kick_design(const std::vector<KickObservation>& obs, const KickSurfaceOptions& opt) {
  auto bd = glm::BSplineBasis::uniform(opt.distance_lo, opt.distance_hi, opt.distance_basis, opt.degree);
  auto ba = glm::BSplineBasis::uniform(opt.angle_lo, opt.angle_hi, opt.angle_basis, opt.degree);
  std::vector<double> d, t, y, w;
  for (const auto& o : obs) {
    if (!bd.contains(o.distance) || !ba.contains(o.angle))
      throw FitDomainError("kick grid cell at d=" + format_double(o.distance) +
                           ", theta=" + format_double(o.angle) + " lies outside the basis domain");
    d.push_back(o.distance);
    t.push_back(o.angle);
    y.push_back(o.proportion);
    w.push_back(o.weight);
  }
  Eigen::MatrixXd x = glm::row_kronecker(glm::bspline_basis(bd, d), glm::bspline_basis(ba, t));
  auto pen = glm::tensor_penalties(bd.size(), ba.size());
  return KickDesign{std::move(bd), std::move(ba), std::move(x), std::move(pen), std::move(y), std::move(w)};
}

inline void check_coverage(const std::vector<KickGridCell>& cells,
                           const std::vector<KickObservation>& obs, const KickSurfaceOptions& opt) {
  std::vector<double> xs, angles;
  for (const auto& c : cells)
    if (c.center().x() >= kKickFloor) xs.push_back(c.x_lo);
  for (const auto& o : obs) angles.push_back(o.angle);
  auto distinct = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
  };
  if (obs.size() < opt.min_cells)
    throw FitDomainError("kick grid: need at least " + std::to_string(opt.min_cells) +
                         " cells beyond the 5 m line, got " + std::to_string(obs.size()));
  if (distinct(xs) < opt.min_distinct || distinct(angles) < opt.min_distinct)
    throw FitDomainError("kick grid: need at least " + std::to_string(opt.min_distinct) +
                         " distinct x bands and angles");
}

}  // namespace detail

/// Fits the success surface with both smoothing parameters chosen over the grid.
inline KickSuccessSurface fit_kick_surface(const std::vector<KickGridCell>& cells,
                                           const KickSurfaceOptions& opt = {}) {
  const auto obs = kick_observations(cells);
  detail::check_coverage(cells, obs, opt);
  auto design = detail::kick_design(obs, opt);
  const auto sel = glm::select_lambda(design.x, design.penalties.root_first,
                                      design.penalties.root_second, design.y, design.w,
                                      opt.lambda_grid, opt.irls);
  KickSuccessSurface s(design.distance, design.angle, sel.fit.coefficients);
  s.lambda_distance = sel.lambda_first;
  s.lambda_angle = sel.lambda_second;
  s.ridge = opt.irls.ridge;
  s.edf = sel.fit.edf;
  s.gcv_score = sel.score;
  s.n_cells = obs.size();
  s.convergence = sel.fit.record;
  const double resid_df = static_cast<double>(sel.fit.n_obs) - sel.fit.edf;
  s.dispersion = resid_df > 0 ? sel.fit.pearson_chi2 / resid_df : std::numeric_limits<double>::quiet_NaN();
  return s;
}

/// Fit with fixed smoothing parameters (no selection).
inline KickSuccessSurface fit_kick_surface_fixed(const std::vector<KickObservation>& obs,
                                                 double lambda_distance, double lambda_angle,
                                                 const KickSurfaceOptions& opt = {}) {
  auto design = detail::kick_design(obs, opt);
  const glm::PenaltyTerm terms[] = {{design.penalties.root_first, lambda_distance},
                                    {design.penalties.root_second, lambda_angle}};
  const auto fit = glm::irls_logistic(design.x, design.y, design.w, terms, opt.irls);
  KickSuccessSurface s(design.distance, design.angle, fit.coefficients);
  s.lambda_distance = lambda_distance;
  s.lambda_angle = lambda_angle;
  s.ridge = opt.irls.ridge;
  s.edf = fit.edf;
  s.gcv_score = glm::gcv_score(fit);
  s.n_cells = obs.size();
  s.convergence = fit.record;
  const double resid_df = static_cast<double>(fit.n_obs) - fit.edf;
  s.dispersion = resid_df > 0 ? fit.pearson_chi2 / resid_df : std::numeric_limits<double>::quiet_NaN();
  return s;
}

// ---------------------------------------------------------------------------
// Validation exports

struct CalibrationBin {
  double mean_predicted = 0.0;
  double mean_observed = 0.0;
  double weight = 0.0;
  std::size_t cells = 0;
};

/// Cells sorted by predicted probability and split into `bins` equal-count groups;
/// weighted mean prediction vs weighted observed proportion per group.
inline std::vector<CalibrationBin> calibration_bins(const KickSuccessSurface& s,
                                                    const std::vector<KickGridCell>& cells,
                                                    std::size_t bins = 10) {
  const auto obs = kick_observations(cells);
  std::vector<std::pair<double, const KickObservation*>> pred;
  for (const auto& o : obs) pred.emplace_back(s.predict(KickGeometry{o.distance, o.angle}).probability, &o);
  std::stable_sort(pred.begin(), pred.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<CalibrationBin> out;
  if (pred.empty() || bins == 0) return out;
  bins = std::min(bins, pred.size());
  for (std::size_t b = 0; b < bins; ++b) {
    const std::size_t lo = b * pred.size() / bins, hi = (b + 1) * pred.size() / bins;
    CalibrationBin bin;
    for (std::size_t i = lo; i < hi; ++i) {
      const double w = pred[i].second->weight;
      bin.mean_predicted += w * pred[i].first;
      bin.mean_observed += w * pred[i].second->proportion;
      bin.weight += w;
      ++bin.cells;
    }
    if (bin.weight > 0) {
      bin.mean_predicted /= bin.weight;
      bin.mean_observed /= bin.weight;
    }
    out.push_back(bin);
  }
  return out;
}

/// K-fold held-out binomial deviance per unit weight at fixed smoothing parameters.
inline double kfold_deviance(const std::vector<KickGridCell>& cells, double lambda_distance,
                             double lambda_angle, int folds, std::uint64_t seed,
                             const KickSurfaceOptions& opt = {}) {
  const auto obs = kick_observations(cells);
  if (folds < 2 || static_cast<std::size_t>(folds) > obs.size())
    throw UsageError("kfold: need 2 <= folds <= number of cells");
  std::vector<std::size_t> order(obs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 gen(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_index(gen, i));
    std::swap(order[i - 1], order[j]);
  }
  double dev = 0.0, weight = 0.0;
  for (int f = 0; f < folds; ++f) {
    std::vector<KickObservation> train, test;
    for (std::size_t k = 0; k < order.size(); ++k)
      (static_cast<int>(k % folds) == f ? test : train).push_back(obs[order[k]]);
    std::sort(train.begin(), train.end());
    const auto s = fit_kick_surface_fixed(train, lambda_distance, lambda_angle, opt);
    for (const auto& o : test) {
      const double eta = s.predict(KickGeometry{o.distance, o.angle}).linear_predictor;
      const double y[] = {o.proportion}, w[] = {o.weight};
      dev += glm::binomial_deviance(y, w, Eigen::VectorXd::Constant(1, eta));
      weight += o.weight;
    }
  }
  return dev / weight;
}

}  // namespace ruckep
