#include "pcsft/superpos.hpp"

#include <cmath>

#include "pcsft/errors.hpp"

namespace pcsft {

FieldEnsemble ComponentSignals::to_ensemble() const { return FieldEnsemble::from_samples(reconstruct()); }

ComponentSignals decompose(const FieldEnsemble& ensemble, const OrthonormalBasis& basis) {
  if (basis.dim() != ensemble.dim()) throw InvalidInput("decompose: basis dimension != ensemble dimension");
  return ComponentSignals{basis, basis.matrix().adjoint() * ensemble.samples()};
}

SuperpositionDraw superpose_max_correlated(const SuperpositionSpec& spec, std::size_t n, std::uint64_t seed) {
  FieldEnsemble ensemble = sample_field(FieldSpec::superposition(spec), n, seed);
  ComponentSignals signals = decompose(ensemble, spec.basis);
  return SuperpositionDraw{std::move(ensemble), std::move(signals)};
}

CorrelationMatrix correlation_matrix(const ComponentSignals& signals) {
  const int dim = signals.dim();
  if (signals.size() == 0) throw InvalidInput("correlation_matrix: no samples");
  const CMatrix moments = signals.xi * signals.xi.adjoint() / static_cast<double>(signals.size());

  RVector sd(dim);
  double largest = 0.0;
  for (int k = 0; k < dim; ++k) largest = std::max(largest, moments(k, k).real());
  std::vector<bool> alive(static_cast<std::size_t>(dim));
  for (int k = 0; k < dim; ++k) {
    const double var = moments(k, k).real();
    alive[static_cast<std::size_t>(k)] = var > 0.0 && var > 1e-24 * largest;
    sd(k) = std::sqrt(var);
  }

  CorrelationMatrix out{CMatrix::Zero(dim, dim), std::vector<bool>(static_cast<std::size_t>(dim * dim), false)};
  for (int k = 0; k < dim; ++k) {
    for (int m = 0; m < dim; ++m) {
      if (!alive[static_cast<std::size_t>(k)] || !alive[static_cast<std::size_t>(m)]) continue;
      out.defined[static_cast<std::size_t>(k * dim + m)] = true;
      out.values(k, m) = (k == m) ? Complex(1.0, 0.0) : moments(k, m) / (sd(k) * sd(m));
    }
  }
  return out;
}

RankOneResult rank_one_check(const HermitianOperator& covariance, double tol) {
  if (!(covariance.trace() > kTolTrace)) throw ZeroFieldError("rank_one_check: zero field");
  const EigenDecomposition eig = hermitian_eig(covariance);
  const double l1 = eig.values(0);
  const double l2 = eig.values.size() > 1 ? std::max(eig.values(1), 0.0) : 0.0;
  const double ratio = l2 / l1;
  return RankOneResult{ratio <= tol, StateVector(CVector(eig.vectors.col(0))), l1, ratio};
}

ComponentSignals decohere(const ComponentSignals& signals, double gamma, std::uint64_t seed) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw InvalidInput("decohere: gamma must be >= 0");
  ComponentSignals out = signals;
  if (gamma == 0.0) return out;
  const std::size_t n = out.size();
  const std::size_t chunks = (n + kSampleChunk - 1) / kSampleChunk;
  parallel_for_chunks(chunks, [&](std::size_t c) {
    const auto begin = static_cast<Eigen::Index>(c * kSampleChunk);
    const auto count = static_cast<Eigen::Index>(std::min(kSampleChunk, n - c * kSampleChunk));
    GaussianSource src(seed, c);
    apply_phase_noise(src, gamma, out.xi.middleCols(begin, count));
  });
  return out;
}

FieldEnsemble superpose_fields(const FieldSpec& a, const FieldSpec& b, Coupling coupling, std::size_t n,
                               std::uint64_t seed) {
  if (a.dim() != b.dim()) throw InvalidInput("superpose_fields: dimension mismatch");
  if (coupling == Coupling::common_driver) {
    if (!a.is_rank_one() || !b.is_rank_one()) {
      throw InvalidInput("superpose_fields: common_driver needs rank-one (pure or superposition) fields");
    }
    CVector v = a.rank_one_amplitude() + b.rank_one_amplitude();
    if (v.cwiseAbs().maxCoeff() == 0.0) throw InvalidInput("superpose_fields: common-driver sum is the zero field");
    // eta * (v_a + v_b) is exactly the superposition with coefficients v in the
    // standard basis and a unit-variance driver.
    SuperpositionSpec sum{std::move(v), 1.0, OrthonormalBasis::standard(a.dim())};
    return sample_field(FieldSpec::superposition(std::move(sum)), n, seed);
  }
  const FieldEnsemble ea = sample_field(a, n, derive_seed(seed, 0xA));
  const FieldEnsemble eb = sample_field(b, n, derive_seed(seed, 0xB));
  return FieldEnsemble(std::nullopt, seed, ea.samples() + eb.samples());
}

}  // namespace pcsft
