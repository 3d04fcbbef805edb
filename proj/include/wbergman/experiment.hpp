#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "wbergman/bergman.hpp"
#include "wbergman/comparators.hpp"
#include "wbergman/estimates.hpp"
#include "wbergman/geometry.hpp"
#include "wbergman/weights.hpp"

namespace wbergman {

using ordered_json = nlohmann::ordered_json;

struct ScenarioFlags {
  bool theorem_1_1 = true;
  bool theorem_1_2 = true;
  bool theorem_1_3 = true;
  bool theorem_2_1 = true;
  bool eq_2_3 = true;
  bool gaussian_compare = true;
  bool polynomial_mode = true;

  static const std::vector<std::string>& names();
  /// Throws std::out_of_range for an unknown name.
  bool& get(std::string_view name);
  bool get(std::string_view name) const;
  void set_all(bool on);

  bool operator==(const ScenarioFlags&) const = default;
};

struct Thresholds {
  double slope = -0.45;
  double r_squared = 0.9;
  double spread = 5.0;
  double bm_tolerance = 5e-3;
  double slope_gap = 0.3;

  bool operator==(const Thresholds&) const = default;
};

struct ExperimentConfig {
  std::string weight_name = "flat_line";
  WeightParams weight_params;
  Rect domain = unit_square();
  int nx = 256;
  int ny = 256;
  QuadratureRule quadrature = QuadratureRule::end_corrected;
  std::vector<double> k_values{16, 32, 64, 128, 256};
  double margin = 0.25;
  DegreePolicy basis_policy;
  std::string test_function = "standard_bump";
  std::vector<Complex> agmon_centers{Complex{0.0, 0.0}, Complex{0.4, 0.3}};
  int zero_set_samples = 301;
  ScenarioFlags scenarios;
  Thresholds thresholds;
  std::string csv_path = "report.csv";
  std::string json_path = "report.json";

  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses and validates; missing fields take the defaults above. Throws ConfigError
/// naming the offending field.
ExperimentConfig parse_config(const ordered_json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
ordered_json config_to_json(const ExperimentConfig& c);

/// Smallest nx (resp. ny) with grid spacing <= 1 / (4 sqrt(k_max)).
int required_resolution(double half_width, double k_max);

struct Verdict {
  bool pass = false;
  std::string detail;

  bool operator==(const Verdict&) const = default;
};

struct PolynomialModeRow {
  double k = 0.0;
  int degree = 0;
  double sup_err_E = 0.0;

  bool operator==(const PolynomialModeRow&) const = default;
};

struct ExperimentReport {
  ExperimentConfig config;
  double weight_delta = 0.0;
  std::optional<double> agmon_scale;
  std::vector<RatioReport> per_k;
  std::optional<ModelCaseReport> model_case;
  std::vector<PolynomialModeRow> polynomial_mode;
  std::map<std::string, RateFit> fits;
  std::map<std::string, Verdict> verdicts;

  bool operator==(const ExperimentReport&) const = default;
};

/// A module error during a run, tagged with the scenario and k where it happened.
class RunError : public std::runtime_error {
public:
  RunError(std::string scenario, double k, const std::string& what);
  const std::string& scenario() const noexcept { return scenario_; }
  double k() const noexcept { return k_; }

private:
  std::string scenario_;
  double k_;
};

/// Deterministic k-sweep over every enabled scenario, rows in ascending k.
ExperimentReport run(const ExperimentConfig& config);

ordered_json report_to_json(const ExperimentReport& r);
ExperimentReport report_from_json(const ordered_json& j);

/// Fixed column order: k, degree, cond, sup_err_E, k_l2_ratio, k_sup_ratio,
/// k_agmon_ratio_a1, k_agmon_ratio_a2, bm_lhs, bm_rhs_l2, bm_rhs_f.
std::string report_csv(const ExperimentReport& r);

/// Writes the CSV, the JSON report and one plot-data CSV per enabled scenario under `out_dir`
/// (paths in the config are taken relative to it). Returns the written paths.
std::vector<std::filesystem::path> emit(const ExperimentReport& r, const std::filesystem::path& out_dir);

}  // namespace wbergman
