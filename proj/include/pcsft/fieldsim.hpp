#pragma once

// Ensembles of classical random fields: generation, moment estimation and the
// energy functionals (total energy, energy along a direction, grid energy density).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "pcsft/field_spec.hpp"
#include "pcsft/linops.hpp"

namespace pcsft {

/// N samples phi_i in C^dim, stored as the columns of a dim x N matrix.
///
/// Generated ensembles remember their (spec, seed); regenerating with the same
/// (spec, seed, N) yields bit-identical samples.
class FieldEnsemble {
 public:
  FieldEnsemble(std::optional<FieldSpec> spec, std::uint64_t seed, CMatrix samples);

  /// Hand-built ensemble with no generating spec (seed 0).
  static FieldEnsemble from_samples(CMatrix samples);

  int dim() const { return static_cast<int>(samples_.rows()); }
  std::size_t size() const { return static_cast<std::size_t>(samples_.cols()); }
  std::uint64_t seed() const { return seed_; }
  const std::optional<FieldSpec>& spec() const { return spec_; }
  const CMatrix& samples() const { return samples_; }

 private:
  std::optional<FieldSpec> spec_;
  std::uint64_t seed_;
  CMatrix samples_;
};

struct EnsembleStats {
  CVector mean;
  HermitianOperator covariance;  // (1/N) sum phi phi^dagger, no mean subtraction
  double dispersion;             // (1/N) sum |phi|^2 == covariance.trace() bitwise
};

/// Draws n samples of any FieldSpec. Chunk c of kSampleChunk samples uses substream (seed, c).
FieldEnsemble sample_field(const FieldSpec& spec, std::size_t n, std::uint64_t seed);

/// phi = B^{1/2} z with z circular standard normal, so E[phi phi^dagger] = B and E[phi phi^T] = 0.
/// Throws NotPsdError for non-PSD B.
FieldEnsemble sample_gaussian_field(const HermitianOperator& covariance, std::size_t n, std::uint64_t seed);

/// phi = xi * psi/|psi| with xi ~ CN(0, sigma2). Throws InvalidInput for psi == 0 or sigma2 <= 0.
FieldEnsemble sample_pure_field(const StateVector& psi, double sigma2, std::size_t n, std::uint64_t seed);

/// Zero-mean moment estimates. Throws InvalidInput for an empty ensemble.
EnsembleStats ensemble_stats(const FieldEnsemble& ensemble);

/// (1/N) sum |<phi_i|e>|^2. `direction` must have unit norm within 1e-9.
double energy_along(const FieldEnsemble& ensemble, const StateVector& direction);

/// |phi|^2.
double total_energy(const CVector& phi);

/// Pointwise energy density of a field sampled on a uniform 1-D grid.
struct GridDensity {
  std::vector<double> density;  // |phi(x_i)|^2
  double dx;

  /// sum_i density_i * dx.
  double integral() const;
};

/// Throws InvalidInput for dx <= 0.
GridDensity energy_density(const CVector& phi, double dx);

}  // namespace pcsft
