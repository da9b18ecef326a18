// pcsft: run a named experiment and write its report.
//
//   pcsft <experiment> [--config FILE] [--out DIR] [--seed-override N] [--format json|csv|all]
//   pcsft example-config <experiment>
//
// Exit status: 0 all verdicts pass, 1 some verdict failed, 2 invalid config, 3 I/O error.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pcsft/errors.hpp"
#include "pcsft/experiment.hpp"

namespace {

struct RunOptions {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed_override;
  std::string format = "all";
};

int run(pcsft::ExperimentKind kind, const RunOptions& opt) {
  pcsft::ExperimentConfig cfg = opt.config.empty() ? pcsft::default_config(kind) : pcsft::load_config(opt.config);
  if (cfg.experiment != kind) {
    throw pcsft::ConfigError("experiment: config is for '" + pcsft::to_string(cfg.experiment) +
                                 "' but subcommand is '" + pcsft::to_string(kind) + "'",
                             {"experiment"});
  }
  if (!opt.out.empty()) cfg.output_dir = opt.out;
  if (opt.seed_override) cfg.seeds = {*opt.seed_override};

  const pcsft::Report report = pcsft::run_experiment(cfg);
  if (opt.format == "json" || opt.format == "all") pcsft::emit_report(report, pcsft::ReportFormat::json, cfg.output_dir);
  if (opt.format == "csv" || opt.format == "all") pcsft::emit_report(report, pcsft::ReportFormat::csv, cfg.output_dir);

  for (const auto& v : report.verdicts) {
    std::cout << (v.pass ? "PASS " : "FAIL ") << report.experiment << "/" << v.name << "  measured=" << v.measured
              << " threshold=" << v.threshold << "  (" << v.detail << ")\n";
  }
  if (report.error) std::cerr << "error: " << *report.error << "\n";
  std::cout << "report written to " << cfg.output_dir << "\n";
  return report.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Classical random-field laboratory: covariance, Born statistics, superposition and detection"};
  app.require_subcommand(1);

  RunOptions opt;
  std::optional<pcsft::ExperimentKind> chosen;
  for (const char* name : {"born", "purestate", "superposition", "decoherence", "detection_sweep"}) {
    const auto kind = pcsft::experiment_kind_from_string(name);
    auto* sub = app.add_subcommand(name, "Run the " + std::string(name) + " experiment");
    sub->add_option("--config", opt.config, "Experiment config (JSON, comments allowed); defaults when omitted")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "Output directory (overrides output_dir)");
    sub->add_option("--seed-override", opt.seed_override, "Run a single seed instead of the configured list");
    sub->add_option("--format", opt.format, "Report format")->check(CLI::IsMember({"json", "csv", "all"}));
    sub->callback([&chosen, kind] { chosen = kind; });
  }

  std::string example_name;
  auto* example = app.add_subcommand("example-config", "Print the default config for an experiment");
  example->add_option("experiment", example_name, "Experiment name")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (example->parsed()) {
      const auto cfg = pcsft::default_config(pcsft::experiment_kind_from_string(example_name));
      std::cout << pcsft::config_to_json(cfg).dump(2) << "\n";
      return 0;
    }
    return run(*chosen, opt);
  } catch (const pcsft::ConfigError& e) {
    std::cerr << e.what() << "\n";
    for (const auto& k : e.keys()) std::cerr << "  offending key: " << k << "\n";
    return 2;
  } catch (const pcsft::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 3;
  }
}
