#pragma once

// Detection layer: Born-rule channel probabilities from ensemble energies, and
// a first-passage race between threshold detectors that turns a continuous
// field into discrete clicks.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pcsft/field_spec.hpp"
#include "pcsft/fieldsim.hpp"
#include "pcsft/linops.hpp"

namespace pcsft {

/// p(k) = sum_i |<e_k|phi_i>|^2 / sum_i |phi_i|^2. Throws ZeroFieldError if the
/// ensemble carries no energy.
std::vector<double> ensemble_detection_probs(const FieldEnsemble& ensemble, const OrthonormalBasis& basis);

/// One detector per basis channel. Each step every channel k accumulates
///   A_k += dt * |<e_k|phi(t)> + n_k(t)|^2,  n_k(t) ~ CN(0, background_kappa)
/// until some A_k reaches `threshold`.
struct DetectorConfig {
  OrthonormalBasis basis;
  double threshold = 1.0;
  double background_kappa = 0.0;
  std::size_t max_steps = 100000;
  double dt = 1.0;

  /// Throws InvalidInput for threshold <= 0, kappa < 0, max_steps == 0 or dt <= 0.
  void validate() const;
};

/// Expected energy one channel collects per step, averaged over channels:
/// dt * (Tr B + dim * kappa) / dim. Thresholds are quoted in multiples of this.
double mean_step_channel_energy(const FieldSpec& spec, const DetectorConfig& cfg);

/// Trial outcomes. Every trial is exactly one of: a single click, a
/// coincidence (two or more channels crossed on the same step) or no click.
struct DetectionStats {
  std::uint64_t trials = 0;
  std::vector<std::uint64_t> clicks_per_channel;     // single clicks
  std::uint64_t coincidences = 0;
  std::uint64_t no_click_trials = 0;
  std::vector<std::uint64_t> crossings_per_channel;  // trials where channel k crossed, single or coincident
  std::vector<std::uint64_t> joint_crossings;        // row-major dim x dim: trials where k and m crossed together

  explicit DetectionStats(int channels = 0);

  int channels() const { return static_cast<int>(clicks_per_channel.size()); }
  std::uint64_t single_clicks() const;
  std::uint64_t clicking_trials() const { return trials - no_click_trials; }

  /// clicks_k / clicking trials. No-click trials are excluded, so the
  /// frequencies sum to single / (single + coincidences) <= 1.
  std::vector<double> frequencies() const;
  double coincidence_fraction() const;
  double no_click_fraction() const;

  /// singles + coincidences + no-clicks == trials.
  bool partition_holds() const;

  /// Records one trial; `crossed` lists the channels over threshold on the deciding step.
  void record(std::span<const int> crossed);
  void merge(const DetectionStats& other);

  friend bool operator==(const DetectionStats&, const DetectionStats&) = default;
};

/// Runs n_trials independent races. Trial t draws its field stream from
/// substream t of `seed`, so results are identical for any worker count and a
/// given trial sees the same field path at every threshold.
DetectionStats run_threshold_trials(const FieldSpec& spec, const DetectorConfig& cfg, std::size_t n_trials,
                                    std::uint64_t seed);

/// g2(0) = P(k and m both cross) / (P(k crosses) P(m crosses)), from per-trial
/// indicator counts. Throws UndefinedG2Error if either marginal is zero and
/// InvalidInput for k == m or an out-of-range channel.
double g2_zero(const DetectionStats& stats, int k, int m);

struct SweepPoint {
  double multiple;   // threshold / mean_step_channel_energy
  double threshold;
  DetectionStats stats;
};

/// run_threshold_trials at threshold = multiple * mean_step_channel_energy for
/// each multiple, all with the same seed. cfg.threshold is ignored.
std::vector<SweepPoint> threshold_sweep(const FieldSpec& spec, const DetectorConfig& cfg,
                                        std::span<const double> multiples, std::size_t n_trials,
                                        std::uint64_t seed);

}  // namespace pcsft
