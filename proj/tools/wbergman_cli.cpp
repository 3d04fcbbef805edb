// Command-line runner for the weighted Bergman projection experiments.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wbergman/errors.hpp"
#include "wbergman/experiment.hpp"

namespace {

int do_run(const std::string& config_path, const std::string& out_dir, const std::vector<std::string>& scenarios) {
  auto config = wbergman::load_config(config_path);
  if (!scenarios.empty()) {
    config.scenarios.set_all(false);
    for (const auto& s : scenarios) {
      try {
        config.scenarios.get(s) = true;
      } catch (const std::out_of_range&) {
        std::cerr << "error: unknown scenario '" << s << "'\n";
        return 2;
      }
    }
  }
  const auto report = wbergman::run(config);
  for (const auto& path : wbergman::emit(report, out_dir)) std::cout << "wrote " << path.string() << '\n';
  bool all_pass = true;
  for (const auto& [name, v] : report.verdicts) {
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << '\n';
    all_pass = all_pass && v.pass;
  }
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted Bergman projection experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::string> scenarios;
  auto* run = app.add_subcommand("run", "Run the k-sweep and write the reports");
  run->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out-dir", out_dir, "Directory for the reports");
  run->add_option("--scenario", scenarios, "Run only these scenarios (repeatable)");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a config and print it with defaults filled in");
  validate->add_option("config", validate_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);

  auto* list_weights = app.add_subcommand("list-weights", "List the weight models");
  auto* list_tests = app.add_subcommand("list-test-functions", "List the test functions");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return do_run(config_path, out_dir, scenarios);
    if (*validate) {
      const auto config = wbergman::load_config(validate_path);
      std::cout << wbergman::config_to_json(config).dump(2) << '\n';
      return 0;
    }
    if (*list_weights) {
      for (const auto& n : wbergman::list_weight_models()) std::cout << n << '\n';
      return 0;
    }
    if (*list_tests) {
      for (const auto& n : wbergman::list_test_functions()) std::cout << n << '\n';
      return 0;
    }
  } catch (const wbergman::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const wbergman::RunError& e) {
    std::cerr << "run failed: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
