#pragma once

// Named end-to-end experiments, their configuration files and reports.
//
// Configs are JSON (comments allowed) with strict key checking. Every pass/fail
// verdict reads its threshold from AcceptanceTolerances; the acceptance suite
// uses the same struct, so there are no thresholds anywhere else.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pcsft/field_spec.hpp"
#include "pcsft/linops.hpp"
#include "pcsft/serialize.hpp"

namespace pcsft {

enum class ExperimentKind { born, purestate, superposition, decoherence, detection_sweep };

std::string to_string(ExperimentKind kind);
/// Throws ConfigError for an unknown name.
ExperimentKind experiment_kind_from_string(const std::string& name);

struct AcceptanceTolerances {
  double born_abs = 0.01;               // |p_measured - <e_k|rho|e_k>|
  double identity_abs = 1e-12;          // detection probs vs Born probs of the same empirical state
  double covariance_frobenius = 0.05;   // |rho_hat - rho|_F and |B_hat - B|_F
  double leakage = 1e-24;               // energy fraction outside L_psi (round-off level)
  double rank_one = 0.02;               // lambda2/lambda1 for sampled common-driver fields
  double converse_rank_one = 0.01;      // rank-one gate of the converse check
  double min_correlation = 0.99;        // |cor| required of rank-one fields
  double covariance_rel = 0.02;         // sigma_12 relative error
  double decay_abs = 0.03;              // |cor| and |rho_km| after phase noise vs exp(-gamma) law
  double max_final_coincidence = 0.01;  // coincidence fraction at the largest threshold
  double min_pass_fraction = 0.95;      // share of seeds that must pass (19/20)
  double majority_fraction = 0.5;      // share of seeds for majority checks (strictly more than)
  double symmetry_se = 3.0;             // binomial standard errors for label symmetry

  friend bool operator==(const AcceptanceTolerances&, const AcceptanceTolerances&) = default;
};

struct DetectorSettings {
  double kappa = 0.1;
  std::size_t max_steps = 100000;
  double dt = 1.0;

  friend bool operator==(const DetectorSettings&, const DetectorSettings&) = default;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::born;
  int dim = 2;
  std::optional<FieldSpec> field;
  std::optional<CMatrix> basis;  // measurement basis columns; standard basis when absent
  std::size_t n_samples = 100000;
  std::size_t n_trials = 10000;
  std::vector<std::uint64_t> seeds;
  std::vector<double> gammas;
  std::vector<double> threshold_multiples;
  DetectorSettings detector;
  AcceptanceTolerances tolerances;
  std::string output_dir = "out";

  OrthonormalBasis measurement_basis() const;
};

/// Twenty seeds, 1..20.
std::vector<std::uint64_t> default_seeds();

/// Parses and validates; throws ConfigError naming every offending key.
ExperimentConfig parse_config(const Json& j);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical encoding; parse_config(config_to_json(c)) reproduces c.
Json config_to_json(const ExperimentConfig& cfg);
bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

/// A ready-to-run config for each experiment with the documented defaults.
ExperimentConfig default_config(ExperimentKind kind);

struct Verdict {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

/// A table written as one CSV file.
struct PlotTable {
  std::string name;  // file stem
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

struct Report {
  std::string experiment;
  std::string config_digest;
  Json config;
  Json per_seed = Json::array();
  Json aggregate = Json::object();
  std::vector<Verdict> verdicts;
  std::vector<PlotTable> plots;
  std::optional<std::string> error;
  Json timings = Json::object();

  bool all_pass() const;
  /// Every field except timings; identical configs give identical results.
  Json results_json() const;
  Json to_json() const;
};

/// Runs the named pipeline. A failure inside the pipeline yields a partial
/// report whose `error` is set and whose verdicts include a failing "runtime".
Report run_experiment(const ExperimentConfig& cfg);

enum class ReportFormat { json, csv };

/// Writes report.json (json) or one <plot>.csv per table (csv) into dir and
/// returns the written paths. Throws IoError if a file cannot be written.
std::vector<std::filesystem::path> emit_report(const Report& report, ReportFormat format,
                                               const std::filesystem::path& dir);

/// In-memory renderings used by emit_report.
std::string render_report_json(const Report& report);
std::string render_csv(const PlotTable& table);

}  // namespace pcsft
