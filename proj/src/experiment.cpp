#include "pcsft/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "pcsft/detect.hpp"
#include "pcsft/errors.hpp"
#include "pcsft/fieldsim.hpp"
#include "pcsft/onticmap.hpp"
#include "pcsft/superpos.hpp"

namespace pcsft {

// ===========================================================================
// Configuration

namespace {

constexpr int kMaxDim = 256;
constexpr std::size_t kMaxSamples = 100'000'000;

const std::vector<std::pair<ExperimentKind, std::string>>& kind_names() {
  static const std::vector<std::pair<ExperimentKind, std::string>> names = {
      {ExperimentKind::born, "born"},
      {ExperimentKind::purestate, "purestate"},
      {ExperimentKind::superposition, "superposition"},
      {ExperimentKind::decoherence, "decoherence"},
      {ExperimentKind::detection_sweep, "detection_sweep"},
  };
  return names;
}

// Collects every validation problem before failing.
class Problems {
 public:
  void add(const std::string& key, const std::string& message) {
    keys_.push_back(key);
    messages_.push_back(key + ": " + message);
  }
  void absorb(const ConfigError& e) {
    for (const auto& k : e.keys()) keys_.push_back(k);
    messages_.emplace_back(e.what());
  }
  void throw_if_any() const {
    if (keys_.empty()) return;
    std::string msg = "invalid config:";
    for (const auto& m : messages_) msg += "\n  " + m;
    throw ConfigError(msg, keys_);
  }

 private:
  std::vector<std::string> keys_;
  std::vector<std::string> messages_;
};

std::vector<std::string> allowed_keys(ExperimentKind kind) {
  std::vector<std::string> keys = {"experiment", "dim", "field", "seeds", "tolerances", "output_dir"};
  switch (kind) {
    case ExperimentKind::born:
      keys.insert(keys.end(), {"n_samples", "basis"});
      break;
    case ExperimentKind::purestate:
    case ExperimentKind::superposition:
      keys.emplace_back("n_samples");
      break;
    case ExperimentKind::decoherence:
      keys.insert(keys.end(), {"n_samples", "gammas"});
      break;
    case ExperimentKind::detection_sweep:
      keys.insert(keys.end(), {"n_trials", "threshold_multiples", "detector", "basis"});
      break;
  }
  return keys;
}

Json tolerances_to_json(const AcceptanceTolerances& t) {
  return Json{{"born_abs", t.born_abs},
              {"identity_abs", t.identity_abs},
              {"covariance_frobenius", t.covariance_frobenius},
              {"leakage", t.leakage},
              {"rank_one", t.rank_one},
              {"converse_rank_one", t.converse_rank_one},
              {"min_correlation", t.min_correlation},
              {"covariance_rel", t.covariance_rel},
              {"decay_abs", t.decay_abs},
              {"max_final_coincidence", t.max_final_coincidence},
              {"min_pass_fraction", t.min_pass_fraction},
              {"majority_fraction", t.majority_fraction},
              {"symmetry_se", t.symmetry_se}};
}

void parse_tolerances(const Json& j, AcceptanceTolerances& t, Problems& problems) {
  const Json defaults = tolerances_to_json(t);
  std::vector<std::string> allowed;
  for (const auto& [k, v] : defaults.items()) allowed.push_back(k);
  try {
    require_known_keys(j, allowed, "tolerances");
  } catch (const ConfigError& e) {
    problems.absorb(e);
    return;
  }
  auto read = [&](const char* key, double& slot, bool fraction) {
    if (!j.contains(key)) return;
    const Json& v = j.at(key);
    const std::string path = std::string("tolerances.") + key;
    if (!v.is_number()) return problems.add(path, "expected a number");
    const double x = v.get<double>();
    if (!(x >= 0.0) || !std::isfinite(x)) return problems.add(path, "must be a finite number >= 0");
    if (fraction && x > 1.0) return problems.add(path, "must be in [0, 1]");
    slot = x;
  };
  read("born_abs", t.born_abs, false);
  read("identity_abs", t.identity_abs, false);
  read("covariance_frobenius", t.covariance_frobenius, false);
  read("leakage", t.leakage, false);
  read("rank_one", t.rank_one, false);
  read("converse_rank_one", t.converse_rank_one, false);
  read("min_correlation", t.min_correlation, true);
  read("covariance_rel", t.covariance_rel, false);
  read("decay_abs", t.decay_abs, false);
  read("max_final_coincidence", t.max_final_coincidence, true);
  read("min_pass_fraction", t.min_pass_fraction, true);
  read("majority_fraction", t.majority_fraction, true);
  read("symmetry_se", t.symmetry_se, false);
}

std::optional<std::size_t> read_count(const Json& j, const char* key, std::size_t lo, std::size_t hi,
                                      Problems& problems) {
  const Json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(lo) ||
      v.get<long long>() > static_cast<long long>(hi)) {
    problems.add(key, "expected an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return std::nullopt;
  }
  return static_cast<std::size_t>(v.get<long long>());
}

std::optional<std::vector<double>> read_reals(const Json& j, const char* key, bool strictly_positive,
                                              Problems& problems) {
  const Json& v = j.at(key);
  if (!v.is_array() || v.empty()) {
    problems.add(key, "expected a non-empty array of numbers");
    return std::nullopt;
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string path = std::string(key) + "[" + std::to_string(i) + "]";
    if (!v[i].is_number()) {
      problems.add(path, "expected a number");
      return std::nullopt;
    }
    const double x = v[i].get<double>();
    if (!std::isfinite(x) || x < 0.0 || (strictly_positive && x == 0.0)) {
      problems.add(path, strictly_positive ? "must be > 0" : "must be >= 0");
      return std::nullopt;
    }
    out.push_back(x);
  }
  return out;
}

bool field_kind_ok(ExperimentKind kind, const FieldSpec& field) {
  switch (kind) {
    case ExperimentKind::purestate:
      return std::holds_alternative<PureSpec>(field.kind());
    case ExperimentKind::superposition:
    case ExperimentKind::decoherence:
      return std::holds_alternative<SuperpositionSpec>(field.kind());
    default:
      return true;
  }
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kind_names()) {
    if (k == kind) return name;
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (const auto& [k, n] : kind_names()) {
    if (n == name) return k;
  }
  throw ConfigError("experiment: unknown experiment '" + name + "'", {"experiment"});
}

std::vector<std::uint64_t> default_seeds() {
  std::vector<std::uint64_t> s(20);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = i + 1;
  return s;
}

OrthonormalBasis ExperimentConfig::measurement_basis() const {
  return basis ? OrthonormalBasis::from_columns(*basis) : OrthonormalBasis::standard(dim);
}

ExperimentConfig parse_config(const Json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object", {"<root>"});
  if (!j.contains("experiment") || !j.at("experiment").is_string()) {
    throw ConfigError("experiment: missing or not a string", {"experiment"});
  }
  ExperimentConfig cfg;
  cfg.experiment = experiment_kind_from_string(j.at("experiment").get<std::string>());
  cfg.seeds = default_seeds();

  Problems problems;
  {
    const auto allowed = allowed_keys(cfg.experiment);
    for (const auto& [key, value] : j.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        problems.add(key, "unknown key for experiment '" + to_string(cfg.experiment) + "'");
      }
    }
  }

  if (!j.contains("dim")) {
    problems.add("dim", "missing required key");
  } else if (auto d = read_count(j, "dim", 1, kMaxDim, problems)) {
    cfg.dim = static_cast<int>(*d);
  }

  if (!j.contains("field")) {
    problems.add("field", "missing required key");
  } else {
    try {
      cfg.field = field_spec_from_json(j.at("field"), "field");
      if (cfg.field->dim() != cfg.dim) problems.add("field", "dimension differs from dim");
      if (!field_kind_ok(cfg.experiment, *cfg.field)) {
        problems.add("field.kind", "kind '" + cfg.field->kind_name() + "' not usable for experiment '" +
                                       to_string(cfg.experiment) + "'");
      }
    } catch (const ConfigError& e) {
      problems.absorb(e);
    }
  }

  if (j.contains("basis")) {
    try {
      CMatrix b = matrix_from_json(j.at("basis"), "basis");
      OrthonormalBasis::from_columns(b);
      if (b.rows() != cfg.dim) {
        problems.add("basis", "dimension differs from dim");
      } else {
        cfg.basis = std::move(b);
      }
    } catch (const ConfigError& e) {
      problems.absorb(e);
    } catch (const InvalidInput& e) {
      problems.add("basis", e.what());
    }
  }

  if (j.contains("n_samples")) {
    if (auto n = read_count(j, "n_samples", 1, kMaxSamples, problems)) cfg.n_samples = *n;
  }
  if (j.contains("n_trials")) {
    if (auto n = read_count(j, "n_trials", 1, kMaxSamples, problems)) cfg.n_trials = *n;
  }

  if (j.contains("seeds")) {
    const Json& s = j.at("seeds");
    if (!s.is_array() || s.empty()) {
      problems.add("seeds", "expected a non-empty array of non-negative integers");
    } else {
      cfg.seeds.clear();
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s[i].is_number_unsigned()) {
          problems.add("seeds[" + std::to_string(i) + "]", "expected a non-negative integer");
        } else {
          cfg.seeds.push_back(s[i].get<std::uint64_t>());
        }
      }
    }
  }

  if (cfg.experiment == ExperimentKind::decoherence) {
    if (!j.contains("gammas")) {
      problems.add("gammas", "missing required key");
    } else if (auto g = read_reals(j, "gammas", false, problems)) {
      cfg.gammas = std::move(*g);
    }
  }

  if (cfg.experiment == ExperimentKind::detection_sweep) {
    if (!j.contains("threshold_multiples")) {
      problems.add("threshold_multiples", "missing required key");
    } else if (auto m = read_reals(j, "threshold_multiples", true, problems)) {
      cfg.threshold_multiples = std::move(*m);
    }
    if (j.contains("detector")) {
      const Json& d = j.at("detector");
      try {
        require_known_keys(d, {"kappa", "max_steps", "dt"}, "detector");
        if (d.contains("kappa")) {
          if (!d.at("kappa").is_number() || !(d.at("kappa").get<double>() >= 0.0)) {
            problems.add("detector.kappa", "must be a number >= 0");
          } else {
            cfg.detector.kappa = d.at("kappa").get<double>();
          }
        }
        if (d.contains("dt")) {
          if (!d.at("dt").is_number() || !(d.at("dt").get<double>() > 0.0)) {
            problems.add("detector.dt", "must be a number > 0");
          } else {
            cfg.detector.dt = d.at("dt").get<double>();
          }
        }
        if (d.contains("max_steps")) {
          const Json& m = d.at("max_steps");
          if (!m.is_number_integer() || m.get<long long>() < 1) {
            problems.add("detector.max_steps", "must be an integer >= 1");
          } else {
            cfg.detector.max_steps = static_cast<std::size_t>(m.get<long long>());
          }
        }
      } catch (const ConfigError& e) {
        problems.absorb(e);
      }
    }
  }

  if (j.contains("tolerances")) parse_tolerances(j.at("tolerances"), cfg.tolerances, problems);

  if (j.contains("output_dir")) {
    if (!j.at("output_dir").is_string() || j.at("output_dir").get<std::string>().empty()) {
      problems.add("output_dir", "expected a non-empty string");
    } else {
      cfg.output_dir = j.at("output_dir").get<std::string>();
    }
  }

  problems.throw_if_any();
  return cfg;
}

ExperimentConfig parse_config_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what(), {"<root>"});
  }
  return parse_config(j);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

Json config_to_json(const ExperimentConfig& cfg) {
  Json j{{"experiment", to_string(cfg.experiment)}, {"dim", cfg.dim}};
  if (cfg.field) j["field"] = to_json(*cfg.field);
  if (cfg.basis) j["basis"] = matrix_to_json(*cfg.basis);
  switch (cfg.experiment) {
    case ExperimentKind::detection_sweep:
      j["n_trials"] = cfg.n_trials;
      j["threshold_multiples"] = cfg.threshold_multiples;
      j["detector"] = Json{{"kappa", cfg.detector.kappa}, {"max_steps", cfg.detector.max_steps}, {"dt", cfg.detector.dt}};
      break;
    case ExperimentKind::decoherence:
      j["n_samples"] = cfg.n_samples;
      j["gammas"] = cfg.gammas;
      break;
    default:
      j["n_samples"] = cfg.n_samples;
      break;
  }
  j["seeds"] = cfg.seeds;
  j["tolerances"] = tolerances_to_json(cfg.tolerances);
  j["output_dir"] = cfg.output_dir;
  return j;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) { return config_to_json(a) == config_to_json(b); }

ExperimentConfig default_config(ExperimentKind kind) {
  const double h = 1.0 / std::sqrt(2.0);
  ExperimentConfig cfg;
  cfg.experiment = kind;
  cfg.dim = 2;
  cfg.seeds = default_seeds();
  const SuperpositionSpec symmetric{CVector::Constant(2, Complex(h, 0.0)), 1.0, OrthonormalBasis::standard(2)};
  switch (kind) {
    case ExperimentKind::born:
      cfg.field = FieldSpec::gaussian(HermitianOperator::diagonal({1.0, 3.0}));
      break;
    case ExperimentKind::purestate:
      cfg.field = FieldSpec::pure(StateVector{Complex(0.6, 0.0), Complex(0.0, 0.8)}, 1.0);
      break;
    case ExperimentKind::superposition:
      cfg.field = FieldSpec::superposition(symmetric);
      break;
    case ExperimentKind::decoherence:
      cfg.field = FieldSpec::superposition(symmetric);
      cfg.gammas = {0.0, 0.25, 0.5, 1.0, 2.0};
      break;
    case ExperimentKind::detection_sweep:
      cfg.field = FieldSpec::superposition(symmetric);
      cfg.threshold_multiples = {5.0, 10.0, 20.0, 40.0};
      break;
  }
  return cfg;
}

// ===========================================================================
// Pipelines

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  return worst;
}

Verdict fraction_verdict(const std::string& name, std::size_t passed, std::size_t total, double required,
                         const std::string& detail) {
  const double frac = total == 0 ? 0.0 : static_cast<double>(passed) / static_cast<double>(total);
  return Verdict{name, frac >= required, frac, required, detail};
}

/// Minimum |cor| over defined off-diagonal pairs; +inf when none are defined.
double min_offdiag_correlation(const CorrelationMatrix& cor) {
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < cor.dim(); ++k) {
    for (int m = k + 1; m < cor.dim(); ++m) {
      if (cor.is_defined(k, m)) worst = std::min(worst, std::abs(cor.values(k, m)));
    }
  }
  return worst;
}

Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

// --- born -----------------------------------------------------------------

void run_born(const ExperimentConfig& cfg, Report& report) {
  const FieldSpec& field = *cfg.field;
  const OrthonormalBasis basis = cfg.measurement_basis();
  const EpistemicImage truth = to_epistemic(field.analytic_covariance());
  const std::vector<double> p_true = born_probabilities(truth.rho, basis);
  const auto& tol = cfg.tolerances;

  std::size_t born_ok = 0, cov_ok = 0;
  double worst_identity = 0.0;
  std::vector<double> mean_det(p_true.size(), 0.0), mean_energy(p_true.size(), 0.0);
  for (std::uint64_t seed : cfg.seeds) {
    const auto t0 = Clock::now();
    const FieldEnsemble ens = sample_field(field, cfg.n_samples, seed);
    const EnsembleStats stats = ensemble_stats(ens);
    const EpistemicImage image = to_epistemic(stats.covariance);
    const std::vector<double> p_det = ensemble_detection_probs(ens, basis);
    const std::vector<double> p_born = born_probabilities(image.rho, basis);
    std::vector<double> p_energy(p_true.size());
    for (int k = 0; k < basis.dim(); ++k) {
      p_energy[static_cast<std::size_t>(k)] = energy_along(ens, basis.vector(k)) / stats.dispersion;
    }
    const double identity_gap = std::max(max_abs_diff(p_det, p_born), max_abs_diff(p_energy, p_born));
    const double born_error = std::max(max_abs_diff(p_det, p_true), max_abs_diff(p_born, p_true));
    const double rho_error = frobenius_distance(image.rho.op(), truth.rho.op());
    worst_identity = std::max(worst_identity, identity_gap);
    if (born_error <= tol.born_abs) ++born_ok;
    if (rho_error <= tol.covariance_frobenius) ++cov_ok;
    for (std::size_t k = 0; k < p_true.size(); ++k) {
      mean_det[k] += p_det[k] / static_cast<double>(cfg.seeds.size());
      mean_energy[k] += p_energy[k] / static_cast<double>(cfg.seeds.size());
    }
    report.per_seed.push_back(Json{{"seed", seed},
                                   {"detection_probs", p_det},
                                   {"born_probs", p_born},
                                   {"energy_along_probs", p_energy},
                                   {"identity_gap", identity_gap},
                                   {"born_error", born_error},
                                   {"rho_frobenius_error", rho_error},
                                   {"dispersion", stats.dispersion},
                                   {"epistemic_image", to_json(image)}});
    report.timings["seed_" + std::to_string(seed) + "_ms"] = elapsed_ms(t0);
  }
  const std::size_t n = cfg.seeds.size();
  report.aggregate = Json{{"analytic_probs", p_true},
                          {"mean_detection_probs", mean_det},
                          {"mean_energy_along_probs", mean_energy},
                          {"max_identity_gap", worst_identity},
                          {"seeds_within_born_tolerance", born_ok},
                          {"seeds_within_covariance_tolerance", cov_ok}};
  report.verdicts.push_back(Verdict{"born_identity", worst_identity <= tol.identity_abs, worst_identity,
                                    tol.identity_abs, "detection probs == Born probs of the empirical state"});
  report.verdicts.push_back(
      fraction_verdict("born_rule", born_ok, n, tol.min_pass_fraction, "share of seeds within born_abs of analytic"));
  report.verdicts.push_back(fraction_verdict("covariance_roundtrip", cov_ok, n, tol.min_pass_fraction,
                                             "share of seeds with |rho_hat - rho|_F <= covariance_frobenius"));

  PlotTable table{"born", {"channel", "analytic", "detection", "energy_along"}, {}};
  for (std::size_t k = 0; k < p_true.size(); ++k) {
    table.rows.push_back({static_cast<double>(k + 1), p_true[k], mean_det[k], mean_energy[k]});
  }
  report.plots.push_back(std::move(table));
}

// --- purestate ----------------------------------------------------------------

void run_purestate(const ExperimentConfig& cfg, Report& report) {
  const FieldSpec& field = *cfg.field;
  const auto& pure = std::get<PureSpec>(field.kind());
  const CVector psi = pure.psi.normalized().amplitudes();
  const OrthonormalBasis standard = OrthonormalBasis::standard(cfg.dim);
  const auto& tol = cfg.tolerances;

  double worst_leak = 0.0;
  double worst_converse = std::numeric_limits<double>::infinity();
  std::size_t rank_one_cases = 0, converse_failures = 0;
  PlotTable table{"purestate", {"seed", "leakage", "min_cor_rank_one", "rank_one_cases"}, {}};

  for (std::uint64_t seed : cfg.seeds) {
    const auto t0 = Clock::now();
    const FieldEnsemble ens = sample_field(field, cfg.n_samples, seed);

    // Forward direction: every sample lies on L_psi.
    double leak = 0.0;
    for (Eigen::Index i = 0; i < ens.samples().cols(); ++i) {
      const CVector phi = ens.samples().col(i);
      const double energy = total_energy(phi);
      if (energy == 0.0) continue;
      const CVector outside = phi - psi * psi.dot(phi);
      leak = std::max(leak, total_energy(outside) / energy);
    }
    worst_leak = std::max(worst_leak, leak);

    // Converse direction: among rank-one and mixed candidates, anything that
    // passes the rank-one gate must be maximally correlated.
    const ComponentSignals signals = decompose(ens, standard);
    struct Candidate {
      std::string label;
      ComponentSignals signals;
    };
    std::vector<Candidate> candidates;
    candidates.push_back({"pure", signals});
    candidates.push_back({"phase_noise_1e-6", decohere(signals, 1e-6, derive_seed(seed, 1))});
    candidates.push_back({"phase_noise_0.5", decohere(signals, 0.5, derive_seed(seed, 2))});
    candidates.push_back({"phase_noise_2", decohere(signals, 2.0, derive_seed(seed, 3))});
    const FieldEnsemble mixed = sample_gaussian_field(
        HermitianOperator::identity(cfg.dim).scaled(pure.sigma2 / cfg.dim), cfg.n_samples, derive_seed(seed, 4));
    candidates.push_back({"gaussian_isotropic", decompose(mixed, standard)});

    Json cases = Json::array();
    double seed_min_cor = std::numeric_limits<double>::infinity();
    std::size_t seed_rank_one = 0;
    for (const auto& c : candidates) {
      const HermitianOperator cov = ensemble_stats(c.signals.to_ensemble()).covariance;
      const RankOneResult r1 = rank_one_check(cov, tol.converse_rank_one);
      const double min_cor = min_offdiag_correlation(correlation_matrix(c.signals));
      if (r1.is_rank_one) {
        ++seed_rank_one;
        seed_min_cor = std::min(seed_min_cor, min_cor);
        if (std::isfinite(min_cor) && min_cor < tol.min_correlation) ++converse_failures;
      }
      cases.push_back(Json{{"candidate", c.label},
                           {"eigen_ratio", r1.ratio},
                           {"rank_one", r1.is_rank_one},
                           {"min_abs_correlation", finite_or_null(min_cor)}});
    }
    rank_one_cases += seed_rank_one;
    worst_converse = std::min(worst_converse, seed_min_cor);
    report.per_seed.push_back(Json{{"seed", seed}, {"max_leakage_fraction", leak}, {"converse", std::move(cases)}});
    table.rows.push_back({static_cast<double>(seed), leak, std::isfinite(seed_min_cor) ? seed_min_cor : 1.0,
                          static_cast<double>(seed_rank_one)});
    report.timings["seed_" + std::to_string(seed) + "_ms"] = elapsed_ms(t0);
  }

  report.aggregate = Json{{"max_leakage_fraction", worst_leak},
                          {"rank_one_cases", rank_one_cases},
                          {"converse_failures", converse_failures},
                          {"min_abs_correlation_rank_one", finite_or_null(worst_converse)}};
  report.verdicts.push_back(Verdict{"pure_support_forward", worst_leak <= tol.leakage, worst_leak, tol.leakage,
                                    "largest energy fraction outside L_psi"});
  report.verdicts.push_back(Verdict{"pure_support_converse", converse_failures == 0 && rank_one_cases > 0,
                                    std::isfinite(worst_converse) ? worst_converse : 1.0, tol.min_correlation,
                                    "min |cor| over ensembles passing the rank-one gate"});
  report.plots.push_back(std::move(table));
}

// --- superposition --------------------------------------------------------------

void run_superposition(const ExperimentConfig& cfg, Report& report) {
  const auto& spec = std::get<SuperpositionSpec>(cfg.field->kind());
  const HermitianOperator analytic = cfg.field->analytic_covariance();
  const CMatrix& v = spec.basis.matrix();
  const CMatrix analytic_components = v.adjoint() * analytic.matrix() * v;
  const auto& tol = cfg.tolerances;

  std::size_t cov_ok = 0, rank_ok = 0, cor_ok = 0, sigma_ok = 0;
  PlotTable table{"superposition", {"seed", "covariance_frobenius", "eigen_ratio", "min_abs_correlation", "sigma_rel"}, {}};
  for (std::uint64_t seed : cfg.seeds) {
    const auto t0 = Clock::now();
    const SuperpositionDraw draw = superpose_max_correlated(spec, cfg.n_samples, seed);
    const HermitianOperator cov = ensemble_stats(draw.ensemble).covariance;
    const double frob = frobenius_distance(cov, analytic);
    const RankOneResult r1 = rank_one_check(cov, tol.rank_one);
    const CorrelationMatrix cor = correlation_matrix(draw.signals);
    const double min_cor = min_offdiag_correlation(cor);

    // sigma_km against c_k conj(c_m) * driver_sigma2, in the construction basis.
    const CMatrix components = v.adjoint() * cov.matrix() * v;
    double sigma_rel = 0.0;
    for (Eigen::Index k = 0; k < components.rows(); ++k) {
      for (Eigen::Index m = k + 1; m < components.cols(); ++m) {
        const double ref = std::abs(analytic_components(k, m));
        if (ref > 0.0) sigma_rel = std::max(sigma_rel, std::abs(components(k, m) - analytic_components(k, m)) / ref);
      }
    }

    cov_ok += frob <= tol.covariance_frobenius;
    rank_ok += r1.is_rank_one;
    cor_ok += !(min_cor < tol.min_correlation);
    sigma_ok += sigma_rel <= tol.covariance_rel;
    report.per_seed.push_back(Json{{"seed", seed},
                                   {"covariance", to_json(cov)},
                                   {"covariance_frobenius_error", frob},
                                   {"eigen_ratio", r1.ratio},
                                   {"psi_hat", vector_to_json(r1.psi_hat.amplitudes())},
                                   {"correlation", to_json(cor)},
                                   {"min_abs_correlation", finite_or_null(min_cor)},
                                   {"sigma_rel_error", sigma_rel}});
    table.rows.push_back({static_cast<double>(seed), frob, r1.ratio, std::isfinite(min_cor) ? min_cor : 1.0, sigma_rel});
    report.timings["seed_" + std::to_string(seed) + "_ms"] = elapsed_ms(t0);
  }

  // Unit total dispersion with a unit driver maps exactly onto the pure state pi_psi.
  double bridge = 0.0;
  const double norm2 = spec.coefficients.squaredNorm();
  const bool bridge_applies = std::abs(norm2 - 1.0) <= 1e-12 && spec.driver_sigma2 == 1.0;
  if (bridge_applies) {
    bridge = frobenius_distance(to_epistemic(analytic).rho.op(), make_projector(spec.state()));
  }
  const RankOneResult analytic_r1 = rank_one_check(analytic, kRankOneTolAnalytic);

  const std::size_t n = cfg.seeds.size();
  report.aggregate = Json{{"analytic_covariance", to_json(analytic)},
                          {"analytic_eigen_ratio", analytic_r1.ratio},
                          {"normalization_bridge_applies", bridge_applies},
                          {"normalization_bridge_error", bridge},
                          {"seeds_covariance_ok", cov_ok},
                          {"seeds_rank_one", rank_ok},
                          {"seeds_correlation_ok", cor_ok},
                          {"seeds_sigma_ok", sigma_ok}};
  report.verdicts.push_back(fraction_verdict("covariance", cov_ok, n, tol.min_pass_fraction,
                                             "share of seeds with |B_hat - B|_F <= covariance_frobenius"));
  report.verdicts.push_back(
      fraction_verdict("rank_one", rank_ok, n, tol.min_pass_fraction, "share of seeds with lambda2/lambda1 <= rank_one"));
  report.verdicts.push_back(fraction_verdict("max_correlation", cor_ok, n, tol.min_pass_fraction,
                                             "share of seeds with every |cor| >= min_correlation"));
  report.verdicts.push_back(fraction_verdict("sigma_factorization", sigma_ok, n, tol.min_pass_fraction,
                                             "share of seeds with sigma_km within covariance_rel of c_k conj(c_m)"));
  report.verdicts.push_back(Verdict{"analytic_rank_one", analytic_r1.is_rank_one, analytic_r1.ratio,
                                    kRankOneTolAnalytic, "common-driver covariance has lambda2 == 0"});
  if (bridge_applies) {
    report.verdicts.push_back(
        Verdict{"normalization_bridge", bridge <= 1e-12, bridge, 1e-12, "J(analytic covariance) == pi_psi"});
  }
  report.plots.push_back(std::move(table));
}

// --- decoherence ----------------------------------------------------------------

void run_decoherence(const ExperimentConfig& cfg, Report& report) {
  const auto& spec = std::get<SuperpositionSpec>(cfg.field->kind());
  const CMatrix& v = spec.basis.matrix();
  const auto& tol = cfg.tolerances;
  const std::size_t ng = cfg.gammas.size();

  double worst_cor = 0.0, worst_off = 0.0;
  bool zero_identity = true;
  std::vector<double> mean_cor(ng, 0.0), mean_off(ng, 0.0), mean_factor(ng, 0.0);

  for (std::uint64_t seed : cfg.seeds) {
    const auto t0 = Clock::now();
    const SuperpositionDraw draw = superpose_max_correlated(spec, cfg.n_samples, seed);
    const CorrelationMatrix cor0 = correlation_matrix(draw.signals);
    const CMatrix off0 = v.adjoint() * to_epistemic(ensemble_stats(draw.ensemble).covariance).rho.matrix() * v;

    Json rows = Json::array();
    for (std::size_t g = 0; g < ng; ++g) {
      const double gamma = cfg.gammas[g];
      const double law = std::exp(-gamma);
      const ComponentSignals dec = decohere(draw.signals, gamma, derive_seed(seed, 1 + g));
      const CorrelationMatrix cor = correlation_matrix(dec);
      const CMatrix off = v.adjoint() * to_epistemic(ensemble_stats(dec.to_ensemble()).covariance).rho.matrix() * v;

      double err_cor = 0.0, err_off = 0.0;
      double factor = std::numeric_limits<double>::quiet_NaN();
      for (int k = 0; k < cor.dim(); ++k) {
        for (int m = k + 1; m < cor.dim(); ++m) {
          if (!cor.is_defined(k, m) || !cor0.is_defined(k, m)) continue;
          const double before = std::abs(cor0.values(k, m));
          const double after = std::abs(cor.values(k, m));
          if (std::isnan(factor)) factor = after / before;
          err_cor = std::max(err_cor, std::abs(after - law * before));
          err_off = std::max(err_off, std::abs(std::abs(off(k, m)) - law * std::abs(off0(k, m))));
        }
      }
      if (gamma == 0.0 && !(factor == 1.0)) zero_identity = false;
      worst_cor = std::max(worst_cor, err_cor);
      worst_off = std::max(worst_off, err_off);
      const double w = 1.0 / static_cast<double>(cfg.seeds.size());
      mean_cor[g] += w * (cor.dim() > 1 && cor.is_defined(0, 1) ? std::abs(cor.values(0, 1)) : 0.0);
      mean_off[g] += w * (off.rows() > 1 ? std::abs(off(0, 1)) : 0.0);
      mean_factor[g] += w * (std::isnan(factor) ? 0.0 : factor);
      rows.push_back(Json{{"gamma", gamma},
                          {"expected_factor", law},
                          {"measured_factor", finite_or_null(factor)},
                          {"correlation_error", err_cor},
                          {"epistemic_offdiag_error", err_off}});
    }
    report.per_seed.push_back(Json{{"seed", seed}, {"gammas", std::move(rows)}});
    report.timings["seed_" + std::to_string(seed) + "_ms"] = elapsed_ms(t0);
  }

  PlotTable table{"decoherence", {"gamma", "expected", "mean_abs_cor", "mean_abs_rho_offdiag", "mean_factor"}, {}};
  for (std::size_t g = 0; g < ng; ++g) {
    table.rows.push_back({cfg.gammas[g], std::exp(-cfg.gammas[g]), mean_cor[g], mean_off[g], mean_factor[g]});
  }
  report.aggregate = Json{{"max_correlation_error", worst_cor},
                          {"max_epistemic_offdiag_error", worst_off},
                          {"mean_measured_factor", mean_factor}};
  report.verdicts.push_back(Verdict{"correlation_decay", worst_cor <= tol.decay_abs, worst_cor, tol.decay_abs,
                                    "| |cor| - exp(-gamma)|cor_before| | over all seeds, gammas and pairs"});
  report.verdicts.push_back(Verdict{"epistemic_decay", worst_off <= tol.decay_abs, worst_off, tol.decay_abs,
                                    "| |rho_km| - exp(-gamma)|rho_km before| | in the construction basis"});
  if (std::find(cfg.gammas.begin(), cfg.gammas.end(), 0.0) != cfg.gammas.end()) {
    report.verdicts.push_back(Verdict{"zero_noise_identity", zero_identity, zero_identity ? 1.0 : 0.0, 1.0,
                                      "decay factor at gamma = 0 is exactly 1"});
  }
  report.plots.push_back(std::move(table));
}

// --- detection_sweep --------------------------------------------------------------

bool non_increasing(const std::vector<double>& xs) {
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (xs[i] > xs[i - 1]) return false;
  }
  return true;
}

void run_detection_sweep(const ExperimentConfig& cfg, Report& report) {
  const FieldSpec& field = *cfg.field;
  DetectorConfig det{cfg.measurement_basis(), 1.0, cfg.detector.kappa, cfg.detector.max_steps, cfg.detector.dt};
  const auto& tol = cfg.tolerances;
  const std::size_t nm = cfg.threshold_multiples.size();
  const int channels = field.dim();
  const double w = 1.0 / static_cast<double>(cfg.seeds.size());

  bool partition = true;
  std::size_t coinc_monotone = 0, g2_monotone = 0;
  std::vector<std::vector<double>> mean_freq(nm, std::vector<double>(static_cast<std::size_t>(channels), 0.0));
  std::vector<double> mean_coinc(nm, 0.0), mean_noclick(nm, 0.0), mean_g2(nm, 0.0);
  std::vector<std::size_t> g2_count(nm, 0);
  std::vector<double> thresholds(nm, 0.0);

  for (std::uint64_t seed : cfg.seeds) {
    const auto t0 = Clock::now();
    const auto sweep = threshold_sweep(field, det, cfg.threshold_multiples, cfg.n_trials, seed);
    std::vector<double> coinc, g2s;
    bool g2_defined = channels >= 2;
    Json points = Json::array();
    for (std::size_t i = 0; i < nm; ++i) {
      const auto& s = sweep[i].stats;
      thresholds[i] = sweep[i].threshold;
      partition = partition && s.partition_holds();
      coinc.push_back(s.coincidence_fraction());
      double g2 = std::numeric_limits<double>::quiet_NaN();
      if (channels >= 2) {
        try {
          g2 = g2_zero(s, 0, 1);
        } catch (const UndefinedG2Error&) {
          g2_defined = false;
        }
      }
      g2s.push_back(g2);
      const auto f = s.frequencies();
      for (int k = 0; k < channels; ++k) mean_freq[i][static_cast<std::size_t>(k)] += w * f[static_cast<std::size_t>(k)];
      mean_coinc[i] += w * s.coincidence_fraction();
      mean_noclick[i] += w * s.no_click_fraction();
      if (std::isfinite(g2)) {
        mean_g2[i] += g2;
        ++g2_count[i];
      }
      points.push_back(Json{{"multiple", sweep[i].multiple},
                            {"threshold", sweep[i].threshold},
                            {"stats", to_json(s)},
                            {"g2_01", finite_or_null(g2)}});
    }
    const bool cm = non_increasing(coinc);
    const bool gm = g2_defined && non_increasing(g2s);
    coinc_monotone += cm;
    g2_monotone += gm;
    report.per_seed.push_back(Json{{"seed", seed},
                                   {"points", std::move(points)},
                                   {"coincidence_non_increasing", cm},
                                   {"g2_non_increasing", gm}});
    report.timings["seed_" + std::to_string(seed) + "_ms"] = elapsed_ms(t0);
  }

  PlotTable table{"detection_sweep", {"threshold"}, {}};
  for (int k = 1; k <= channels; ++k) table.header.push_back("freq_" + std::to_string(k));
  table.header.insert(table.header.end(), {"coincidence", "g2", "noclick"});
  Json g2_means = Json::array();
  for (std::size_t i = 0; i < nm; ++i) {
    std::vector<double> row{thresholds[i]};
    row.insert(row.end(), mean_freq[i].begin(), mean_freq[i].end());
    const double g2 = g2_count[i] ? mean_g2[i] / static_cast<double>(g2_count[i]) : std::numeric_limits<double>::quiet_NaN();
    g2_means.push_back(finite_or_null(g2));
    row.insert(row.end(), {mean_coinc[i], g2, mean_noclick[i]});
    table.rows.push_back(std::move(row));
  }

  const std::size_t n = cfg.seeds.size();
  const double final_coinc = nm ? mean_coinc.back() : 0.0;
  report.aggregate = Json{{"thresholds", thresholds},
                          {"mean_coincidence_fraction", mean_coinc},
                          {"mean_g2_01", g2_means},
                          {"mean_no_click_fraction", mean_noclick},
                          {"seeds_coincidence_non_increasing", coinc_monotone},
                          {"seeds_g2_non_increasing", g2_monotone}};
  report.verdicts.push_back(
      Verdict{"partition", partition, partition ? 1.0 : 0.0, 1.0, "every trial is single, coincidence or no-click"});
  const double cf = static_cast<double>(coinc_monotone) / static_cast<double>(n);
  const double gf = static_cast<double>(g2_monotone) / static_cast<double>(n);
  report.verdicts.push_back(Verdict{"coincidence_monotone", cf > tol.majority_fraction, cf, tol.majority_fraction,
                                    "share of seeds with non-increasing coincidence fraction"});
  if (channels >= 2) {
    report.verdicts.push_back(Verdict{"g2_monotone", gf > tol.majority_fraction, gf, tol.majority_fraction,
                                      "share of seeds with non-increasing g2(0) for channels 1,2"});
  }
  report.verdicts.push_back(Verdict{"final_coincidence", final_coinc < tol.max_final_coincidence, final_coinc,
                                    tol.max_final_coincidence, "mean coincidence fraction at the largest threshold"});
  report.plots.push_back(std::move(table));
}

std::string hex_digest(const Json& j) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
  return buf;
}

}  // namespace

Report run_experiment(const ExperimentConfig& cfg) {
  Report report;
  report.experiment = to_string(cfg.experiment);
  report.config = config_to_json(cfg);
  report.config_digest = hex_digest(report.config);
  const auto t0 = Clock::now();
  try {
    if (!cfg.field) throw InvalidInput("config has no field");
    switch (cfg.experiment) {
      case ExperimentKind::born:
        run_born(cfg, report);
        break;
      case ExperimentKind::purestate:
        run_purestate(cfg, report);
        break;
      case ExperimentKind::superposition:
        run_superposition(cfg, report);
        break;
      case ExperimentKind::decoherence:
        run_decoherence(cfg, report);
        break;
      case ExperimentKind::detection_sweep:
        run_detection_sweep(cfg, report);
        break;
    }
  } catch (const std::exception& e) {
    report.error = e.what();
    report.verdicts.push_back(Verdict{"runtime", false, 0.0, 0.0, e.what()});
  }
  report.timings["total_ms"] = elapsed_ms(t0);
  return report;
}

}  // namespace pcsft
