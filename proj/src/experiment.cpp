#include "wbergman/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "wbergman/errors.hpp"

namespace wbergman {

// ---------------------------------------------------------------- scenarios

const std::vector<std::string>& ScenarioFlags::names() {
  static const std::vector<std::string> n{"theorem_1_1", "theorem_1_2", "theorem_1_3",     "theorem_2_1",
                                          "eq_2_3",      "gaussian_compare", "polynomial_mode"};
  return n;
}

bool& ScenarioFlags::get(std::string_view name) {
  if (name == "theorem_1_1") return theorem_1_1;
  if (name == "theorem_1_2") return theorem_1_2;
  if (name == "theorem_1_3") return theorem_1_3;
  if (name == "theorem_2_1") return theorem_2_1;
  if (name == "eq_2_3") return eq_2_3;
  if (name == "gaussian_compare") return gaussian_compare;
  if (name == "polynomial_mode") return polynomial_mode;
  throw std::out_of_range("unknown scenario '" + std::string(name) + "'");
}

bool ScenarioFlags::get(std::string_view name) const { return const_cast<ScenarioFlags*>(this)->get(name); }

void ScenarioFlags::set_all(bool on) {
  for (const auto& n : names()) get(n) = on;
}

// ---------------------------------------------------------------- config parsing

namespace {

std::string_view rule_name(QuadratureRule r) {
  return r == QuadratureRule::midpoint ? "midpoint" : "end_corrected";
}

double number_at(const ordered_json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
  return v;
}

int integer_at(const ordered_json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  return j.get<int>();
}

std::string string_at(const ordered_json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

bool bool_at(const ordered_json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
  return j.get<bool>();
}

Complex complex_at(const ordered_json& j, const std::string& path) {
  if (j.is_number()) return {number_at(j, path), 0.0};
  if (!j.is_array() || j.size() != 2) throw ConfigError(path, "expected [re, im]");
  return {number_at(j[0], path + "[0]"), number_at(j[1], path + "[1]")};
}

void only_keys(const ordered_json& j, const std::string& path, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    const bool known = std::any_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; });
    if (!known) throw ConfigError(path.empty() ? key : path + "." + key, "unknown field");
  }
}

}  // namespace

int required_resolution(double half_width, double k_max) {
  return static_cast<int>(std::ceil(8.0 * half_width * std::sqrt(k_max) - 1e-9));
}

ExperimentConfig parse_config(const ordered_json& j) {
  only_keys(j, "", {"weight", "domain", "resolution", "quadrature", "k_values", "margin", "basis_policy",
                    "eigen_floor", "test_function", "agmon_centers", "zero_set_samples", "scenarios", "thresholds",
                    "output"});
  ExperimentConfig c;

  if (j.contains("weight")) {
    const auto& w = j["weight"];
    if (w.is_string()) {
      c.weight_name = w.get<std::string>();
    } else {
      only_keys(w, "weight", {"name", "params"});
      if (!w.contains("name")) throw ConfigError("weight.name", "missing");
      c.weight_name = string_at(w["name"], "weight.name");
      if (w.contains("params")) {
        only_keys(w["params"], "weight.params", {"radius", "c", "m"});
        for (const auto& [key, value] : w["params"].items()) {
          c.weight_params[key] = number_at(value, "weight.params." + key);
        }
      }
    }
    if (!parse_weight_model(c.weight_name)) throw ConfigError("weight.name", "unknown weight '" + c.weight_name + "'");
  }

  if (j.contains("domain")) {
    const auto& d = j["domain"];
    only_keys(d, "domain", {"center", "half_width_x", "half_width_y"});
    Complex center = d.contains("center") ? complex_at(d["center"], "domain.center") : Complex{0.0, 0.0};
    const double hx = d.contains("half_width_x") ? number_at(d["half_width_x"], "domain.half_width_x") : 1.0;
    const double hy = d.contains("half_width_y") ? number_at(d["half_width_y"], "domain.half_width_y") : 1.0;
    if (!(hx > 0.0)) throw ConfigError("domain.half_width_x", "must be positive");
    if (!(hy > 0.0)) throw ConfigError("domain.half_width_y", "must be positive");
    c.domain = Rect{center, hx, hy};
  }

  if (j.contains("resolution")) {
    const auto& r = j["resolution"];
    if (r.is_number_integer()) {
      c.nx = c.ny = r.get<int>();
    } else if (r.is_array() && r.size() == 2) {
      c.nx = integer_at(r[0], "resolution[0]");
      c.ny = integer_at(r[1], "resolution[1]");
    } else {
      throw ConfigError("resolution", "expected an integer or [nx, ny]");
    }
    if (c.nx < 2 || c.ny < 2) throw ConfigError("resolution", "need at least 2 cells per direction");
  }

  if (j.contains("quadrature")) {
    const auto s = string_at(j["quadrature"], "quadrature");
    if (s == "midpoint") {
      c.quadrature = QuadratureRule::midpoint;
    } else if (s == "end_corrected") {
      c.quadrature = QuadratureRule::end_corrected;
    } else {
      throw ConfigError("quadrature", "expected 'midpoint' or 'end_corrected'");
    }
  }

  if (j.contains("k_values")) {
    const auto& ks = j["k_values"];
    if (!ks.is_array() || ks.empty()) throw ConfigError("k_values", "expected a nonempty array");
    c.k_values.clear();
    for (std::size_t i = 0; i < ks.size(); ++i) c.k_values.push_back(number_at(ks[i], "k_values[" + std::to_string(i) + "]"));
  }
  for (std::size_t i = 0; i < c.k_values.size(); ++i) {
    if (!(c.k_values[i] > 0.0)) throw ConfigError("k_values[" + std::to_string(i) + "]", "must be positive");
    if (i > 0 && !(c.k_values[i] > c.k_values[i - 1])) {
      throw ConfigError("k_values", "must be strictly increasing");
    }
  }

  if (j.contains("margin")) c.margin = number_at(j["margin"], "margin");
  if (!(c.margin >= 0.0) || c.margin >= c.domain.half_width_x || c.margin >= c.domain.half_width_y) {
    throw ConfigError("margin", "must satisfy 0 <= margin < min(half widths)");
  }

  if (j.contains("basis_policy")) {
    const auto& b = j["basis_policy"];
    only_keys(b, "basis_policy", {"initial_degree_rule", "fixed_degree", "stabilization_threshold", "max_degree"});
    if (b.contains("initial_degree_rule")) {
      const auto s = string_at(b["initial_degree_rule"], "basis_policy.initial_degree_rule");
      if (s == "sqrt") {
        c.basis_policy.initial = DegreePolicy::Initial::sqrt_rule;
      } else if (s == "fixed") {
        c.basis_policy.initial = DegreePolicy::Initial::fixed;
      } else {
        throw ConfigError("basis_policy.initial_degree_rule", "expected 'sqrt' or 'fixed'");
      }
    }
    if (b.contains("fixed_degree")) c.basis_policy.fixed_degree = integer_at(b["fixed_degree"], "basis_policy.fixed_degree");
    if (b.contains("stabilization_threshold")) {
      c.basis_policy.stabilization_threshold =
          number_at(b["stabilization_threshold"], "basis_policy.stabilization_threshold");
    }
    if (b.contains("max_degree")) c.basis_policy.max_degree = integer_at(b["max_degree"], "basis_policy.max_degree");
  }
  if (c.basis_policy.fixed_degree < 0) throw ConfigError("basis_policy.fixed_degree", "must be >= 0");
  if (c.basis_policy.max_degree < 1) throw ConfigError("basis_policy.max_degree", "must be >= 1");
  if (!(c.basis_policy.stabilization_threshold > 0.0)) {
    throw ConfigError("basis_policy.stabilization_threshold", "must be positive");
  }

  if (j.contains("eigen_floor")) c.basis_policy.eigen_floor = number_at(j["eigen_floor"], "eigen_floor");
  if (!(c.basis_policy.eigen_floor > 0.0) || c.basis_policy.eigen_floor >= 1.0) {
    throw ConfigError("eigen_floor", "must be in (0, 1)");
  }

  if (j.contains("test_function")) {
    c.test_function = string_at(j["test_function"], "test_function");
    const auto names = list_test_functions();
    if (std::find(names.begin(), names.end(), c.test_function) == names.end()) {
      throw ConfigError("test_function", "unknown test function '" + c.test_function + "'");
    }
  }

  if (j.contains("agmon_centers")) {
    const auto& a = j["agmon_centers"];
    if (!a.is_array()) throw ConfigError("agmon_centers", "expected an array");
    c.agmon_centers.clear();
    for (std::size_t i = 0; i < a.size(); ++i) {
      c.agmon_centers.push_back(complex_at(a[i], "agmon_centers[" + std::to_string(i) + "]"));
    }
  }

  if (j.contains("zero_set_samples")) c.zero_set_samples = integer_at(j["zero_set_samples"], "zero_set_samples");
  if (c.zero_set_samples < 2) throw ConfigError("zero_set_samples", "must be >= 2");

  if (j.contains("scenarios")) {
    const auto& s = j["scenarios"];
    if (!s.is_object()) throw ConfigError("scenarios", "expected an object");
    for (const auto& [key, value] : s.items()) {
      try {
        c.scenarios.get(key) = bool_at(value, "scenarios." + key);
      } catch (const std::out_of_range&) {
        throw ConfigError("scenarios." + key, "unknown scenario");
      }
    }
  }

  if (j.contains("thresholds")) {
    const auto& t = j["thresholds"];
    only_keys(t, "thresholds", {"slope", "r_squared", "spread", "bm_tolerance", "slope_gap"});
    if (t.contains("slope")) c.thresholds.slope = number_at(t["slope"], "thresholds.slope");
    if (t.contains("r_squared")) c.thresholds.r_squared = number_at(t["r_squared"], "thresholds.r_squared");
    if (t.contains("spread")) c.thresholds.spread = number_at(t["spread"], "thresholds.spread");
    if (t.contains("bm_tolerance")) c.thresholds.bm_tolerance = number_at(t["bm_tolerance"], "thresholds.bm_tolerance");
    if (t.contains("slope_gap")) c.thresholds.slope_gap = number_at(t["slope_gap"], "thresholds.slope_gap");
  }

  if (j.contains("output")) {
    const auto& o = j["output"];
    only_keys(o, "output", {"csv_path", "json_path"});
    if (o.contains("csv_path")) c.csv_path = string_at(o["csv_path"], "output.csv_path");
    if (o.contains("json_path")) c.json_path = string_at(o["json_path"], "output.json_path");
  }

  const double k_max = c.k_values.back();
  const int need_x = required_resolution(c.domain.half_width_x, k_max);
  const int need_y = required_resolution(c.domain.half_width_y, k_max);
  if (c.nx < need_x || c.ny < need_y) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "grid %dx%d is too coarse for k_max = %g (spacing must be <= 1/(4 sqrt(k_max))); need nx >= %d, ny >= %d",
                  c.nx, c.ny, k_max, need_x, need_y);
    throw ConfigError("resolution", buf);
  }
  if (c.quadrature == QuadratureRule::end_corrected && (c.nx < 12 || c.ny < 12)) {
    throw ConfigError("resolution", "end_corrected quadrature needs at least 12 cells per direction");
  }
  try {
    make_model_weight(*parse_weight_model(c.weight_name), c.weight_params, c.domain);
  } catch (const DomainError& e) {
    throw ConfigError("weight", e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open '" + path.string() + "'");
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

namespace {

ordered_json complex_json(Complex z) { return ordered_json::array({z.real(), z.imag()}); }

ordered_json optional_json(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

std::optional<double> optional_from(const ordered_json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

ordered_json config_to_json(const ExperimentConfig& c) {
  ordered_json j;
  ordered_json params = ordered_json::object();
  for (const auto& [k, v] : c.weight_params) params[k] = v;
  j["weight"] = {{"name", c.weight_name}, {"params", params}};
  j["domain"] = {{"center", complex_json(c.domain.center)},
                 {"half_width_x", c.domain.half_width_x},
                 {"half_width_y", c.domain.half_width_y}};
  j["resolution"] = ordered_json::array({c.nx, c.ny});
  j["quadrature"] = rule_name(c.quadrature);
  j["k_values"] = c.k_values;
  j["margin"] = c.margin;
  j["basis_policy"] = {
      {"initial_degree_rule", c.basis_policy.initial == DegreePolicy::Initial::sqrt_rule ? "sqrt" : "fixed"},
      {"fixed_degree", c.basis_policy.fixed_degree},
      {"stabilization_threshold", c.basis_policy.stabilization_threshold},
      {"max_degree", c.basis_policy.max_degree}};
  j["eigen_floor"] = c.basis_policy.eigen_floor;
  j["test_function"] = c.test_function;
  ordered_json centers = ordered_json::array();
  for (const auto& a : c.agmon_centers) centers.push_back(complex_json(a));
  j["agmon_centers"] = centers;
  j["zero_set_samples"] = c.zero_set_samples;
  ordered_json s;
  for (const auto& n : ScenarioFlags::names()) s[n] = c.scenarios.get(n);
  j["scenarios"] = s;
  j["thresholds"] = {{"slope", c.thresholds.slope},
                     {"r_squared", c.thresholds.r_squared},
                     {"spread", c.thresholds.spread},
                     {"bm_tolerance", c.thresholds.bm_tolerance},
                     {"slope_gap", c.thresholds.slope_gap}};
  j["output"] = {{"csv_path", c.csv_path}, {"json_path", c.json_path}};
  return j;
}

// ---------------------------------------------------------------- run

RunError::RunError(std::string scenario, double k, const std::string& what)
    : std::runtime_error([&] {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%g", k);
        return "scenario " + scenario + " at k = " + buf + ": " + what;
      }()),
      scenario_(std::move(scenario)),
      k_(k) {}

namespace {

template <class F>
auto guarded(const char* scenario, double k, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const RunError&) {
    throw;
  } catch (const std::exception& e) {
    throw RunError(scenario, k, e.what());
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

Verdict spread_verdict(const std::vector<double>& scaled, double limit, const char* label) {
  const double s = spread(scaled);
  Verdict v;
  v.pass = std::isfinite(s) && s <= limit;
  v.detail = std::string("max/min of ") + label + " = " + (std::isfinite(s) ? fmt(s) : std::string("inf")) +
             " (limit " + fmt(limit) + ")";
  return v;
}

}  // namespace

ExperimentReport run(const ExperimentConfig& config) {
  ExperimentReport rep;
  rep.config = config;
  const auto& sc = config.scenarios;
  const auto& ks = config.k_values;

  const Rect& domain = config.domain;
  const WeightModel model = *parse_weight_model(config.weight_name);
  const Weight weight = guarded("setup", 0.0, [&] { return make_model_weight(model, config.weight_params, domain); });
  rep.weight_delta = weight.delta;
  const Quadrature q = guarded("setup", 0.0, [&] { return build_grid(domain, config.nx, config.ny, config.quadrature); });
  const CompactK compact = guarded("setup", 0.0, [&] { return shrink_to_compact(domain, config.margin); });
  const TestFunction u = guarded("setup", 0.0, [&] { return make_test_function(config.test_function, domain); });

  const bool need_main = sc.theorem_1_1 || sc.theorem_1_2 || sc.theorem_1_3 || sc.eq_2_3 || sc.gaussian_compare;
  const bool any = need_main || sc.theorem_2_1 || sc.polynomial_mode;

  ZeroSetSample zero_set;
  std::vector<Complex> probes;
  if (need_main || sc.theorem_2_1) {
    zero_set = guarded("setup", 0.0, [&] { return sample_zero_set(weight, domain, config.zero_set_samples); });
    probes = restrict_to(zero_set, compact);
    if (probes.empty()) throw RunError("setup", 0.0, "E ∩ K is empty");
  }

  std::vector<Complex> f_nodes;
  if (any) f_nodes = sample(u.dbar, q.nodes);

  std::optional<RescaledWeight> rescaled;
  if (sc.theorem_2_1) {
    rescaled = guarded("theorem_2_1", 0.0, [&] { return rescale_for_agmon(weight); });
    rep.agmon_scale = rescaled->scale;
    if (config.agmon_centers.empty()) throw RunError("theorem_2_1", 0.0, "no Agmon centres configured");
  }

  std::optional<Complex> local_center;
  if (sc.eq_2_3) {
    for (const auto& a : config.agmon_centers) {
      if (domain.contains(a) && weight.eval(a) <= 1e-12) {
        local_center = a;
        break;
      }
    }
    if (!local_center) throw RunError("eq_2_3", 0.0, "needs an Agmon centre on E");
  }

  if (sc.gaussian_compare && weight.name != "flat_line") {
    throw RunError("gaussian_compare", 0.0, "the model-case comparison needs the flat_line weight");
  }

  // Polynomial mode: log_growth weight, degree pinned to k, E ∩ K = [-0.7, 0.7].
  std::optional<Weight> poly_weight;
  std::vector<Complex> poly_probes;
  if (sc.polynomial_mode) {
    const WeightParams pp = model == WeightModel::log_growth ? config.weight_params : WeightParams{};
    poly_weight = guarded("polynomial_mode", 0.0, [&] { return make_model_weight(WeightModel::log_growth, pp, domain); });
    const auto e = guarded("polynomial_mode", 0.0, [&] { return sample_zero_set(*poly_weight, domain, config.zero_set_samples); });
    for (const auto& p : e.points) {
      if (std::abs(p.real()) <= 0.7 && compact.contains(p)) poly_probes.push_back(p);
    }
    if (poly_probes.empty()) throw RunError("polynomial_mode", 0.0, "E ∩ K is empty");
  }

  std::vector<double> gauss_errors;
  for (double k : ks) {
    RatioReport row;
    row.k = k;
    if (need_main) {
      const auto ap = guarded("projection", k, [&] { return project_adaptive(u, q, weight, k, probes, config.basis_policy); });
      const Projection& p = ap.projection;
      row.basis_degree = ap.degree;
      row.gram_condition = p.factor.condition;
      row.effective_rank = p.factor.effective_rank;
      const auto v = residual(u, p, q.nodes);

      if (sc.theorem_1_1 || sc.gaussian_compare) {
        row.sup_err_E = guarded("theorem_1_1", k, [&] { return sup_error_on_E(u, p, zero_set, compact); });
      }
      if (sc.theorem_1_2) row.l2_ratio = guarded("theorem_1_2", k, [&] { return l2_ratio(v, f_nodes, q, weight, k); });
      if (sc.theorem_1_3) {
        row.sup_ratio = guarded("theorem_1_3", k, [&] { return weighted_sup_on_K(v, f_nodes, compact, q, weight, k); });
      }
      if (sc.eq_2_3) {
        guarded("eq_2_3", k, [&] {
          const Complex a = *local_center;
          const auto le = local_estimate_check(residual_at(u, p, a), v, f_nodes, k, a, q, 1);
          row.bm_lhs = le.lhs;
          row.bm_rhs_l2_term = le.rhs_l2;
          row.bm_rhs_f_term = le.rhs_f;
          const auto bm = bm_reconstruct(v, f_nodes, k, a, q);
          double ball_sup = 0.0;
          for (std::size_t i = 0; i < q.size(); ++i) {
            if (k * std::norm(q.nodes[i] - bm.center) < 1.0) ball_sup = std::max(ball_sup, std::abs(v[i]));
          }
          const double err = std::abs(bm.value - residual_at(u, p, bm.center));
          row.bm_relative_error = ball_sup > 0.0 ? err / ball_sup : err;
          return 0;
        });
      }
      if (sc.gaussian_compare) {
        gauss_errors.push_back(guarded("gaussian_compare", k, [&] {
          return gaussian_sup_error(make_gaussian_approximant(u, k), probes);
        }));
      }
    }
    if (sc.theorem_2_1) {
      guarded("theorem_2_1", k, [&] {
        const Weight& w2 = rescaled->weight;
        const auto ap = project_adaptive(u, q, w2, k, probes, config.basis_policy);
        row.agmon_basis_degree = ap.degree;
        const auto v2 = residual(u, ap.projection, q.nodes);
        for (const auto& a : config.agmon_centers) row.agmon_ratios.push_back(agmon_ratio(v2, f_nodes, q, w2, k, a));
        return 0;
      });
    }
    if (sc.polynomial_mode) {
      guarded("polynomial_mode", k, [&] {
        const auto ap = project_adaptive(u, q, *poly_weight, k, poly_probes, config.basis_policy,
                                         BasisKind::polynomials_deg_k);
        rep.polynomial_mode.push_back({k, ap.degree, ap.sup_errors.back()});
        return 0;
      });
    }
    rep.per_k.push_back(std::move(row));
  }

  // Fits and verdicts.
  auto column = [&](auto get) {
    std::vector<double> out;
    for (const auto& r : rep.per_k) out.push_back(get(r));
    return out;
  };
  const Thresholds& th = config.thresholds;
  auto fit_verdict = [&](const std::string& name, const std::vector<double>& errs, bool need_decrease) {
    Verdict vd;
    if (ks.size() < 3) {
      vd.detail = "need at least 3 k values for a rate fit";
      rep.verdicts[name] = vd;
      return;
    }
    if (std::any_of(errs.begin(), errs.end(), [](double e) { return !(e > 0.0); })) {
      vd.detail = "errors at round-off level; no rate to fit";
      rep.verdicts[name] = vd;
      return;
    }
    const RateFit fit = fit_rate(ks, errs);
    rep.fits[name] = fit;
    bool decreasing = true;
    for (std::size_t i = 1; i < errs.size(); ++i) decreasing = decreasing && errs[i] < errs[i - 1];
    vd.pass = fit.slope <= th.slope && fit.r_squared >= th.r_squared && (!need_decrease || decreasing);
    vd.detail = "slope " + fmt(fit.slope) + " (limit " + fmt(th.slope) + "), r^2 " + fmt(fit.r_squared) +
                " (limit " + fmt(th.r_squared) + ")" +
                (need_decrease ? (decreasing ? ", strictly decreasing" : ", NOT strictly decreasing") : "");
    rep.verdicts[name] = vd;
  };

  if (sc.theorem_1_1) fit_verdict("theorem_1_1", column([](const RatioReport& r) { return *r.sup_err_E; }), true);
  if (sc.theorem_1_2) {
    rep.verdicts["theorem_1_2"] =
        spread_verdict(column([](const RatioReport& r) { return r.k * *r.l2_ratio; }), th.spread, "k * l2_ratio");
  }
  if (sc.theorem_1_3) {
    rep.verdicts["theorem_1_3"] =
        spread_verdict(column([](const RatioReport& r) { return r.k * *r.sup_ratio; }), th.spread, "k * sup_ratio");
  }
  if (sc.theorem_2_1) {
    Verdict vd{true, ""};
    for (std::size_t c = 0; c < config.agmon_centers.size(); ++c) {
      const auto scaled = column([&](const RatioReport& r) { return r.k * r.agmon_ratios[c].distance_variant; });
      const Verdict part = spread_verdict(scaled, th.spread, "k * agmon_ratio");
      double worst_gap = 1.0;
      for (const auto& r : rep.per_k) {
        const double g = r.agmon_ratios[c].chi_variant / r.agmon_ratios[c].distance_variant;
        worst_gap = std::max({worst_gap, g, 1.0 / g});
      }
      const bool gap_ok = worst_gap <= std::numbers::e;
      vd.pass = vd.pass && part.pass && gap_ok;
      const Complex a = config.agmon_centers[c];
      vd.detail += (c ? "; " : "") + std::string("a = ") + fmt(a.real()) + (a.imag() < 0 ? "" : "+") + fmt(a.imag()) +
                   "i: " + part.detail + ", chi/distance gap " + fmt(worst_gap) + " (limit e)";
    }
    rep.verdicts["theorem_2_1"] = vd;
  }
  if (sc.eq_2_3) {
    const auto ratio = column([](const RatioReport& r) { return *r.bm_lhs / (*r.bm_rhs_l2_term + *r.bm_rhs_f_term); });
    Verdict vd = spread_verdict(ratio, th.spread, "|v(a)|^2 / (rhs_l2 + rhs_f)");
    // The reconstruction is judged at the sweep's k nearest to 64 (in log k): at larger k the ball
    // holds too few cells for the 1/(z - a) quadrature.
    const auto nearest = std::min_element(rep.per_k.begin(), rep.per_k.end(), [](const auto& x, const auto& y) {
      return std::abs(std::log(x.k / 64.0)) < std::abs(std::log(y.k / 64.0));
    });
    const double err = *nearest->bm_relative_error;
    vd.pass = vd.pass && err <= th.bm_tolerance;
    vd.detail += "; reconstruction error / sup_ball|v| at k = " + fmt(nearest->k) + ": " + fmt(err) + " (limit " +
                 fmt(th.bm_tolerance) + ")";
    rep.verdicts["eq_2_3"] = vd;
  }
  if (sc.gaussian_compare) {
    const auto berg = column([](const RatioReport& r) { return *r.sup_err_E; });
    const auto ref = sup_abs(sample(u.eval, probes));
    rep.model_case = compare_from_tables(ks, berg, gauss_errors, ref);
    const auto& mc = *rep.model_case;
    Verdict vd;
    if (mc.degenerate) {
      vd.detail = "degenerate comparison: Bergman errors at round-off level";
    } else if (ks.size() < 3 || !mc.bergman_slope || !mc.gaussian_slope) {
      vd.detail = "need at least 3 k values with positive errors";
    } else {
      rep.fits["gaussian_compare_bergman"] = fit_rate(ks, berg);
      rep.fits["gaussian_compare_gaussian"] = fit_rate(ks, gauss_errors);
      const double gap = std::abs(*mc.bergman_slope - *mc.gaussian_slope);
      vd.pass = *mc.bergman_slope <= th.slope && *mc.gaussian_slope <= th.slope && gap <= th.slope_gap;
      vd.detail = "bergman slope " + fmt(*mc.bergman_slope) + ", gaussian slope " + fmt(*mc.gaussian_slope) +
                  " (limit " + fmt(th.slope) + "), gap " + fmt(gap) + " (limit " + fmt(th.slope_gap) + ")";
    }
    rep.verdicts["gaussian_compare"] = vd;
  }
  if (sc.polynomial_mode) {
    std::vector<double> errs;
    for (const auto& r : rep.polynomial_mode) errs.push_back(r.sup_err_E);
    fit_verdict("polynomial_mode", errs, false);
  }
  return rep;
}

// ---------------------------------------------------------------- serialization

ordered_json report_to_json(const ExperimentReport& r) {
  ordered_json j;
  j["config"] = config_to_json(r.config);
  j["weight_delta"] = r.weight_delta;
  j["agmon_scale"] = optional_json(r.agmon_scale);
  ordered_json rows = ordered_json::array();
  for (const auto& p : r.per_k) {
    ordered_json row;
    row["k"] = p.k;
    row["basis_degree"] = p.basis_degree;
    row["gram_condition"] = p.gram_condition;
    row["effective_rank"] = p.effective_rank;
    row["sup_err_E"] = optional_json(p.sup_err_E);
    row["l2_ratio"] = optional_json(p.l2_ratio);
    row["sup_ratio"] = optional_json(p.sup_ratio);
    ordered_json ag = ordered_json::array();
    for (const auto& a : p.agmon_ratios) {
      ag.push_back({{"center", complex_json(a.center)},
                    {"distance_variant", a.distance_variant},
                    {"chi_variant", a.chi_variant}});
    }
    row["agmon_ratios"] = ag;
    row["agmon_basis_degree"] = p.agmon_basis_degree ? ordered_json(*p.agmon_basis_degree) : ordered_json(nullptr);
    row["bm_lhs"] = optional_json(p.bm_lhs);
    row["bm_rhs_l2_term"] = optional_json(p.bm_rhs_l2_term);
    row["bm_rhs_f_term"] = optional_json(p.bm_rhs_f_term);
    row["bm_relative_error"] = optional_json(p.bm_relative_error);
    rows.push_back(row);
  }
  j["per_k"] = rows;
  if (r.model_case) {
    ordered_json mc;
    ordered_json t = ordered_json::array();
    for (const auto& row : r.model_case->per_k) {
      t.push_back({{"k", row.k}, {"bergman_err", row.bergman_err}, {"gaussian_err", row.gaussian_err}});
    }
    mc["per_k"] = t;
    mc["bergman_slope"] = optional_json(r.model_case->bergman_slope);
    mc["gaussian_slope"] = optional_json(r.model_case->gaussian_slope);
    mc["degenerate"] = r.model_case->degenerate;
    j["model_case"] = mc;
  } else {
    j["model_case"] = nullptr;
  }
  ordered_json pm = ordered_json::array();
  for (const auto& row : r.polynomial_mode) pm.push_back({{"k", row.k}, {"degree", row.degree}, {"sup_err_E", row.sup_err_E}});
  j["polynomial_mode"] = pm;
  ordered_json fits = ordered_json::object();
  for (const auto& [name, f] : r.fits) {
    fits[name] = {{"slope", f.slope},
                  {"intercept", f.intercept},
                  {"r_squared", f.r_squared},
                  {"k_values", f.k_values},
                  {"errors", f.errors}};
  }
  j["fits"] = fits;
  ordered_json verdicts = ordered_json::object();
  for (const auto& [name, v] : r.verdicts) verdicts[name] = {{"pass", v.pass}, {"detail", v.detail}};
  j["verdicts"] = verdicts;
  return j;
}

ExperimentReport report_from_json(const ordered_json& j) {
  ExperimentReport r;
  r.config = parse_config(j.at("config"));
  r.weight_delta = j.at("weight_delta").get<double>();
  r.agmon_scale = optional_from(j.at("agmon_scale"));
  for (const auto& row : j.at("per_k")) {
    RatioReport p;
    p.k = row.at("k").get<double>();
    p.basis_degree = row.at("basis_degree").get<int>();
    p.gram_condition = row.at("gram_condition").get<double>();
    p.effective_rank = row.at("effective_rank").get<int>();
    p.sup_err_E = optional_from(row.at("sup_err_E"));
    p.l2_ratio = optional_from(row.at("l2_ratio"));
    p.sup_ratio = optional_from(row.at("sup_ratio"));
    for (const auto& a : row.at("agmon_ratios")) {
      p.agmon_ratios.push_back({Complex{a.at("center")[0].get<double>(), a.at("center")[1].get<double>()},
                                a.at("distance_variant").get<double>(), a.at("chi_variant").get<double>()});
    }
    if (!row.at("agmon_basis_degree").is_null()) p.agmon_basis_degree = row.at("agmon_basis_degree").get<int>();
    p.bm_lhs = optional_from(row.at("bm_lhs"));
    p.bm_rhs_l2_term = optional_from(row.at("bm_rhs_l2_term"));
    p.bm_rhs_f_term = optional_from(row.at("bm_rhs_f_term"));
    p.bm_relative_error = optional_from(row.at("bm_relative_error"));
    r.per_k.push_back(std::move(p));
  }
  if (!j.at("model_case").is_null()) {
    const auto& m = j.at("model_case");
    ModelCaseReport mc;
    for (const auto& row : m.at("per_k")) {
      mc.per_k.push_back({row.at("k").get<double>(), row.at("bergman_err").get<double>(), row.at("gaussian_err").get<double>()});
    }
    mc.bergman_slope = optional_from(m.at("bergman_slope"));
    mc.gaussian_slope = optional_from(m.at("gaussian_slope"));
    mc.degenerate = m.at("degenerate").get<bool>();
    r.model_case = mc;
  }
  for (const auto& row : j.at("polynomial_mode")) {
    r.polynomial_mode.push_back({row.at("k").get<double>(), row.at("degree").get<int>(), row.at("sup_err_E").get<double>()});
  }
  for (const auto& [name, f] : j.at("fits").items()) {
    RateFit fit;
    fit.slope = f.at("slope").get<double>();
    fit.intercept = f.at("intercept").get<double>();
    fit.r_squared = f.at("r_squared").get<double>();
    fit.k_values = f.at("k_values").get<std::vector<double>>();
    fit.errors = f.at("errors").get<std::vector<double>>();
    r.fits[name] = fit;
  }
  for (const auto& [name, v] : j.at("verdicts").items()) {
    r.verdicts[name] = Verdict{v.at("pass").get<bool>(), v.at("detail").get<std::string>()};
  }
  return r;
}

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.8e", v);
  return buf;
}

std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::string scaled(double k, const std::optional<double>& v) { return v ? num(k * *v) : std::string(); }

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace

std::string report_csv(const ExperimentReport& r) {
  std::ostringstream out;
  out << "k,degree,cond,sup_err_E,k_l2_ratio,k_sup_ratio,k_agmon_ratio_a1,k_agmon_ratio_a2,bm_lhs,bm_rhs_l2,bm_rhs_f\n";
  for (const auto& p : r.per_k) {
    const bool projected = p.effective_rank > 0;
    auto agmon = [&](std::size_t i) {
      return i < p.agmon_ratios.size() ? num(p.k * p.agmon_ratios[i].distance_variant) : std::string();
    };
    out << num(p.k) << ',' << (projected ? std::to_string(p.basis_degree) : std::string()) << ','
        << (projected ? num(p.gram_condition) : std::string()) << ',' << num(p.sup_err_E) << ','
        << scaled(p.k, p.l2_ratio) << ',' << scaled(p.k, p.sup_ratio) << ',' << agmon(0) << ',' << agmon(1) << ','
        << num(p.bm_lhs) << ',' << num(p.bm_rhs_l2_term) << ',' << num(p.bm_rhs_f_term) << '\n';
  }
  return out.str();
}

std::vector<std::filesystem::path> emit(const ExperimentReport& r, const std::filesystem::path& out_dir) {
  std::vector<std::filesystem::path> written;
  const auto csv_path = out_dir / r.config.csv_path;
  const auto json_path = out_dir / r.config.json_path;
  write_file(csv_path, report_csv(r));
  written.push_back(csv_path);
  write_file(json_path, report_to_json(r).dump(2) + "\n");
  written.push_back(json_path);

  const auto stem = csv_path.parent_path() / csv_path.stem();
  auto plot = [&](const std::string& scenario, const std::string& text) {
    const std::filesystem::path p = stem.string() + "_" + scenario + ".csv";
    write_file(p, text);
    written.push_back(p);
  };
  const auto& sc = r.config.scenarios;
  if (sc.theorem_1_1) {
    std::string t = "k,sup_err_E\n";
    for (const auto& p : r.per_k) t += num(p.k) + "," + num(p.sup_err_E) + "\n";
    plot("theorem_1_1", t);
  }
  if (sc.theorem_1_2) {
    std::string t = "k,k_l2_ratio\n";
    for (const auto& p : r.per_k) t += num(p.k) + "," + scaled(p.k, p.l2_ratio) + "\n";
    plot("theorem_1_2", t);
  }
  if (sc.theorem_1_3) {
    std::string t = "k,k_sup_ratio\n";
    for (const auto& p : r.per_k) t += num(p.k) + "," + scaled(p.k, p.sup_ratio) + "\n";
    plot("theorem_1_3", t);
  }
  if (sc.theorem_2_1) {
    std::string t = "k";
    for (std::size_t i = 0; i < r.config.agmon_centers.size(); ++i) {
      t += ",k_agmon_ratio_a" + std::to_string(i + 1) + ",k_agmon_chi_ratio_a" + std::to_string(i + 1);
    }
    t += "\n";
    for (const auto& p : r.per_k) {
      t += num(p.k);
      for (const auto& a : p.agmon_ratios) t += "," + num(p.k * a.distance_variant) + "," + num(p.k * a.chi_variant);
      t += "\n";
    }
    plot("theorem_2_1", t);
  }
  if (sc.eq_2_3) {
    std::string t = "k,bm_lhs,bm_rhs_l2,bm_rhs_f,bm_relative_error\n";
    for (const auto& p : r.per_k) {
      t += num(p.k) + "," + num(p.bm_lhs) + "," + num(p.bm_rhs_l2_term) + "," + num(p.bm_rhs_f_term) + "," +
           num(p.bm_relative_error) + "\n";
    }
    plot("eq_2_3", t);
  }
  if (sc.gaussian_compare && r.model_case) {
    std::string t = "k,bergman_err,gaussian_err\n";
    for (const auto& row : r.model_case->per_k) t += num(row.k) + "," + num(row.bergman_err) + "," + num(row.gaussian_err) + "\n";
    plot("gaussian_compare", t);
  }
  if (sc.polynomial_mode) {
    std::string t = "k,degree,sup_err_E\n";
    for (const auto& row : r.polynomial_mode) t += num(row.k) + "," + std::to_string(row.degree) + "," + num(row.sup_err_E) + "\n";
    plot("polynomial_mode", t);
  }
  return written;
}

}  // namespace wbergman
