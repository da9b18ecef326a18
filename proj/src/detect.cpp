#include "pcsft/detect.hpp"

#include <cmath>
#include <sstream>

#include "pcsft/errors.hpp"

namespace pcsft {

namespace {
// Separates trial substreams from the sample-chunk substreams of the same seed.
constexpr std::uint64_t kTrialStreamTag = 0x7D3E7EC7ULL;
}  // namespace

std::vector<double> ensemble_detection_probs(const FieldEnsemble& ensemble, const OrthonormalBasis& basis) {
  if (basis.dim() != ensemble.dim()) throw InvalidInput("ensemble_detection_probs: dimension mismatch");
  const CMatrix components = basis.matrix().adjoint() * ensemble.samples();
  std::vector<double> energy(static_cast<std::size_t>(basis.dim()), 0.0);
  double total = 0.0;
  for (Eigen::Index i = 0; i < components.cols(); ++i) {
    for (Eigen::Index k = 0; k < components.rows(); ++k) energy[static_cast<std::size_t>(k)] += std::norm(components(k, i));
    total += total_energy(ensemble.samples().col(i));
  }
  if (!(total > 0.0)) throw ZeroFieldError("ensemble_detection_probs: ensemble carries no energy");
  for (double& e : energy) e /= total;
  return energy;
}

void DetectorConfig::validate() const {
  std::ostringstream os;
  if (!(threshold > 0.0) || !std::isfinite(threshold)) os << " threshold must be > 0;";
  if (!(background_kappa >= 0.0) || !std::isfinite(background_kappa)) os << " background_kappa must be >= 0;";
  if (max_steps < 1) os << " max_steps must be >= 1;";
  if (!(dt > 0.0) || !std::isfinite(dt)) os << " dt must be > 0;";
  if (!os.str().empty()) throw InvalidInput("DetectorConfig:" + os.str());
}

double mean_step_channel_energy(const FieldSpec& spec, const DetectorConfig& cfg) {
  const double d = spec.dim();
  return cfg.dt * (spec.analytic_covariance().trace() + d * cfg.background_kappa) / d;
}

// ---------------------------------------------------------------------------
// DetectionStats

DetectionStats::DetectionStats(int channels)
    : clicks_per_channel(static_cast<std::size_t>(channels), 0),
      crossings_per_channel(static_cast<std::size_t>(channels), 0),
      joint_crossings(static_cast<std::size_t>(channels * channels), 0) {}

std::uint64_t DetectionStats::single_clicks() const {
  std::uint64_t s = 0;
  for (auto c : clicks_per_channel) s += c;
  return s;
}

std::vector<double> DetectionStats::frequencies() const {
  std::vector<double> f(clicks_per_channel.size(), 0.0);
  const std::uint64_t clicking = clicking_trials();
  if (clicking == 0) return f;
  for (std::size_t k = 0; k < f.size(); ++k) {
    f[k] = static_cast<double>(clicks_per_channel[k]) / static_cast<double>(clicking);
  }
  return f;
}

double DetectionStats::coincidence_fraction() const {
  return trials == 0 ? 0.0 : static_cast<double>(coincidences) / static_cast<double>(trials);
}

double DetectionStats::no_click_fraction() const {
  return trials == 0 ? 0.0 : static_cast<double>(no_click_trials) / static_cast<double>(trials);
}

bool DetectionStats::partition_holds() const { return single_clicks() + coincidences + no_click_trials == trials; }

void DetectionStats::record(std::span<const int> crossed) {
  const int n = channels();
  for (int k : crossed) {
    if (k < 0 || k >= n) throw InvalidInput("DetectionStats::record: channel out of range");
  }
  ++trials;
  if (crossed.empty()) {
    ++no_click_trials;
    return;
  }
  if (crossed.size() == 1) {
    ++clicks_per_channel[static_cast<std::size_t>(crossed[0])];
  } else {
    ++coincidences;
  }
  for (int k : crossed) {
    ++crossings_per_channel[static_cast<std::size_t>(k)];
    for (int m : crossed) ++joint_crossings[static_cast<std::size_t>(k * n + m)];
  }
}

void DetectionStats::merge(const DetectionStats& other) {
  if (other.channels() != channels()) throw InvalidInput("DetectionStats::merge: channel count mismatch");
  trials += other.trials;
  coincidences += other.coincidences;
  no_click_trials += other.no_click_trials;
  for (std::size_t k = 0; k < clicks_per_channel.size(); ++k) {
    clicks_per_channel[k] += other.clicks_per_channel[k];
    crossings_per_channel[k] += other.crossings_per_channel[k];
  }
  for (std::size_t i = 0; i < joint_crossings.size(); ++i) joint_crossings[i] += other.joint_crossings[i];
}

// ---------------------------------------------------------------------------
// Race model

DetectionStats run_threshold_trials(const FieldSpec& spec, const DetectorConfig& cfg, std::size_t n_trials,
                                    std::uint64_t seed) {
  cfg.validate();
  if (spec.dim() != cfg.basis.dim()) throw InvalidInput("run_threshold_trials: spec dimension != basis dimension");
  if (n_trials == 0) throw InvalidInput("run_threshold_trials: n_trials must be positive");

  const int dim = spec.dim();
  const FieldSampler sampler(spec);
  const CMatrix basis_adj = cfg.basis.matrix().adjoint();
  const std::uint64_t trial_seed = derive_seed(seed, kTrialStreamTag);

  const std::size_t chunks = (n_trials + kTrialChunk - 1) / kTrialChunk;
  std::vector<DetectionStats> partial(chunks, DetectionStats(dim));
  parallel_for_chunks(chunks, [&](std::size_t c) {
    DetectionStats& stats = partial[c];
    CVector phi(dim);
    CVector amp(dim);
    RVector accumulated(dim);
    std::vector<int> crossed;
    crossed.reserve(static_cast<std::size_t>(dim));
    const std::size_t end = std::min(n_trials, (c + 1) * kTrialChunk);
    for (std::size_t t = c * kTrialChunk; t < end; ++t) {
      GaussianSource src(trial_seed, t);
      accumulated.setZero();
      crossed.clear();
      for (std::size_t step = 0; step < cfg.max_steps && crossed.empty(); ++step) {
        sampler.draw(src, phi);
        for (int k = 0; k < dim; ++k) {
          Complex acc = 0.0;
          for (int j = 0; j < dim; ++j) acc += basis_adj(k, j) * phi(j);
          amp(k) = acc;
        }
        for (int k = 0; k < dim; ++k) {
          Complex a = amp(k);
          if (cfg.background_kappa > 0.0) a += src.circular(cfg.background_kappa);
          accumulated(k) += cfg.dt * std::norm(a);
        }
        for (int k = 0; k < dim; ++k) {
          if (accumulated(k) >= cfg.threshold) crossed.push_back(k);
        }
      }
      stats.record(crossed);
    }
  });

  DetectionStats total(dim);
  for (const auto& p : partial) total.merge(p);
  return total;
}

double g2_zero(const DetectionStats& stats, int k, int m) {
  const int n = stats.channels();
  if (k < 0 || m < 0 || k >= n || m >= n || k == m) throw InvalidInput("g2_zero: need two distinct valid channels");
  const auto ck = stats.crossings_per_channel[static_cast<std::size_t>(k)];
  const auto cm = stats.crossings_per_channel[static_cast<std::size_t>(m)];
  if (stats.trials == 0 || ck == 0 || cm == 0) {
    std::ostringstream os;
    os << "g2_zero: channel " << (ck == 0 ? k : m) << " never crossed; g2 is undefined";
    throw UndefinedG2Error(os.str());
  }
  const double trials = static_cast<double>(stats.trials);
  const double joint = static_cast<double>(stats.joint_crossings[static_cast<std::size_t>(k * n + m)]) / trials;
  return joint / ((static_cast<double>(ck) / trials) * (static_cast<double>(cm) / trials));
}

std::vector<SweepPoint> threshold_sweep(const FieldSpec& spec, const DetectorConfig& cfg,
                                        std::span<const double> multiples, std::size_t n_trials,
                                        std::uint64_t seed) {
  const double unit = mean_step_channel_energy(spec, cfg);
  std::vector<SweepPoint> out;
  out.reserve(multiples.size());
  for (double multiple : multiples) {
    DetectorConfig at = cfg;
    at.threshold = multiple * unit;
    out.push_back(SweepPoint{multiple, at.threshold, run_threshold_trials(spec, at, n_trials, seed)});
  }
  return out;
}

}  // namespace pcsft
