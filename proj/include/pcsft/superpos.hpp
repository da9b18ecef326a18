#pragma once

// Superposition as maximal correlation: component signals driven by a common
// scalar, correlation estimates, rank-one detection and decoherence by
// per-component phase noise.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pcsft/field_spec.hpp"
#include "pcsft/fieldsim.hpp"
#include "pcsft/linops.hpp"

namespace pcsft {

/// Per-sample component values xi_k(omega) = <e_k|phi(omega)> in a fixed basis.
/// Column i holds sample i.
struct ComponentSignals {
  OrthonormalBasis basis;
  CMatrix xi;

  std::size_t size() const { return static_cast<std::size_t>(xi.cols()); }
  int dim() const { return basis.dim(); }
  /// sum_k xi_k |e_k> for every sample.
  CMatrix reconstruct() const { return basis.matrix() * xi; }
  /// Wraps the reconstructed fields as a spec-less ensemble.
  FieldEnsemble to_ensemble() const;
};

/// Components of each sample of `ensemble` in `basis`.
ComponentSignals decompose(const FieldEnsemble& ensemble, const OrthonormalBasis& basis);

struct SuperpositionDraw {
  FieldEnsemble ensemble;
  ComponentSignals signals;
};

/// xi_k = c_k * eta with one common eta ~ CN(0, driver_sigma2) per sample.
/// Throws InvalidInput for an invalid spec (e.g. all-zero coefficients).
SuperpositionDraw superpose_max_correlated(const SuperpositionSpec& spec, std::size_t n, std::uint64_t seed);

/// Pairwise complex correlation coefficients sigma_km / (sigma_k sigma_m)
/// with sigma_km = (1/N) sum xi_k conj(xi_m).
struct CorrelationMatrix {
  CMatrix values;
  std::vector<bool> defined;  // row-major; false where a component has zero variance

  int dim() const { return static_cast<int>(values.rows()); }
  bool is_defined(int k, int m) const { return defined[static_cast<std::size_t>(k * dim() + m)]; }
};

/// Entries involving a zero-variance component are flagged undefined and set to zero.
/// The diagonal of every defined component is exactly 1.
CorrelationMatrix correlation_matrix(const ComponentSignals& signals);

struct RankOneResult {
  bool is_rank_one;
  StateVector psi_hat;  // top eigenvector, phase-fixed
  double lambda1;
  double ratio;  // lambda2 / lambda1 (0 in dimension 1)
};

/// Decides whether B is (numerically) a multiple of a projector: lambda2/lambda1 <= tol.
/// Throws ZeroFieldError when Tr B <= tol_trace.
RankOneResult rank_one_check(const HermitianOperator& covariance, double tol);

inline constexpr double kRankOneTolSampled = 0.02;
inline constexpr double kRankOneTolAnalytic = 1e-10;

/// Multiplies each xi_k(omega) by exp(i theta_k(omega)), theta ~ N(0, gamma)
/// independent per component and sample. Expected cross-correlations shrink by
/// exp(-gamma); per-sample component energies are untouched. gamma == 0 returns
/// the input unchanged. Throws InvalidInput for gamma < 0.
ComponentSignals decohere(const ComponentSignals& signals, double gamma, std::uint64_t seed);

enum class Coupling { independent, common_driver };

/// Pointwise sum phi_a + phi_b.
///
/// independent: the two fields come from unrelated substreams, so covariances add.
/// common_driver: both fields must be rank one (pure or superposition); they
/// share one scalar driver eta and the sum is eta * (v_a + v_b), again rank one.
/// Throws InvalidInput on dimension mismatch, on a non-rank-one operand under
/// common_driver, or if the common-driver sum vanishes.
FieldEnsemble superpose_fields(const FieldSpec& a, const FieldSpec& b, Coupling coupling, std::size_t n,
                               std::uint64_t seed);

}  // namespace pcsft
