// wmbridge command-line front end.

#include <iostream>

#include "CLI11.hpp"
#include "wmbridge/errors.hpp"
#include "wmbridge/io.hpp"
#include "wmbridge/scenario.hpp"

namespace {

constexpr int kFail = 1;
constexpr int kError = 2;

int report_exit(const wmb::ComparisonReport& r) {
  std::cout << r.summary();
  return r.pass() ? 0 : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"classical/quantum phase-space bridge runner"};
  app.set_version_flag("--version", wmb::kLibraryVersion);
  app.require_subcommand(1);

  std::string config_path, output, dir_a, dir_b, metrics_path, report_path, run_dir, quantity;

  auto* run = app.add_subcommand("run", "run a scenario config");
  run->add_option("config", config_path, "scenario JSON")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output", output, "override the output directory");

  auto* compare = app.add_subcommand("compare", "compare two run directories");
  compare->add_option("dir_a", dir_a)->required()->check(CLI::ExistingDirectory);
  compare->add_option("dir_b", dir_b)->required()->check(CLI::ExistingDirectory);
  compare->add_option("--metrics", metrics_path, "metric spec JSON")->check(CLI::ExistingFile);
  compare->add_option("--report", report_path, "write the comparison report here");

  auto* exp = app.add_subcommand("export", "write plot-ready CSV for a run quantity");
  exp->add_option("dir", run_dir)->required()->check(CLI::ExistingDirectory);
  exp->add_option("quantity", quantity)->required();

  auto* validate = app.add_subcommand("validate", "check a scenario config without running it");
  validate->add_option("config", config_path, "scenario JSON")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto cfg = wmb::load_config(config_path);
      if (!output.empty()) cfg.output = output;
      const auto result = wmb::run_scenario(cfg);
      std::cout << "run directory: " << result.directory.string() << '\n';
      return report_exit(result.report);
    }
    if (*compare) {
      const auto metrics = metrics_path.empty() ? nlohmann::json::object() : wmb::read_json(metrics_path);
      const auto r = wmb::compare_runs(dir_a, dir_b, metrics);
      if (!report_path.empty()) wmb::write_json(report_path, r.to_json());
      return report_exit(r);
    }
    if (*exp) {
      std::cout << wmb::export_plot_data(run_dir, quantity).string() << '\n';
      return 0;
    }
    if (*validate) {
      const auto cfg = wmb::load_config(config_path);
      std::cout << "valid " << wmb::scenario_name(cfg.scenario) << " config\n";
      return 0;
    }
  } catch (const wmb::SchemaError& e) {
    std::cerr << "schema error " << e.what() << '\n';
    return kError;
  } catch (const wmb::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  } catch (const std::exception& e) {
    std::cerr << "unexpected failure: " << e.what() << '\n';
    return kError;
  }
  return kError;
}
