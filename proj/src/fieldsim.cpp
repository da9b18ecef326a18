#include "pcsft/fieldsim.hpp"

#include <cmath>
#include <sstream>

#include "pcsft/errors.hpp"

namespace pcsft {

FieldEnsemble::FieldEnsemble(std::optional<FieldSpec> spec, std::uint64_t seed, CMatrix samples)
    : spec_(std::move(spec)), seed_(seed), samples_(std::move(samples)) {
  if (samples_.rows() < 1) throw InvalidInput("FieldEnsemble: dimension must be >= 1");
  if (spec_ && spec_->dim() != samples_.rows()) throw InvalidInput("FieldEnsemble: sample length != spec dimension");
}

FieldEnsemble FieldEnsemble::from_samples(CMatrix samples) {
  return FieldEnsemble(std::nullopt, 0, std::move(samples));
}

FieldEnsemble sample_field(const FieldSpec& spec, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidInput("sample_field: n must be positive");
  const FieldSampler sampler(spec);
  CMatrix samples(spec.dim(), static_cast<Eigen::Index>(n));
  const std::size_t chunks = (n + kSampleChunk - 1) / kSampleChunk;
  parallel_for_chunks(chunks, [&](std::size_t c) {
    const std::size_t begin = c * kSampleChunk;
    const std::size_t count = std::min(kSampleChunk, n - begin);
    GaussianSource src(seed, c);
    sampler.draw_block(src, samples.middleCols(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(count)));
  });
  return FieldEnsemble(spec, seed, std::move(samples));
}

FieldEnsemble sample_gaussian_field(const HermitianOperator& covariance, std::size_t n, std::uint64_t seed) {
  return sample_field(FieldSpec::gaussian(covariance), n, seed);
}

FieldEnsemble sample_pure_field(const StateVector& psi, double sigma2, std::size_t n, std::uint64_t seed) {
  return sample_field(FieldSpec::pure(psi, sigma2), n, seed);
}

EnsembleStats ensemble_stats(const FieldEnsemble& ensemble) {
  const std::size_t n = ensemble.size();
  if (n == 0) throw InvalidInput("ensemble_stats: empty ensemble");
  const int dim = ensemble.dim();
  const CMatrix& samples = ensemble.samples();

  // Per-chunk partial sums merged in chunk order: the result does not depend
  // on the worker count.
  const std::size_t chunks = (n + kSampleChunk - 1) / kSampleChunk;
  std::vector<CVector> sums(chunks);
  std::vector<CMatrix> outer(chunks);
  parallel_for_chunks(chunks, [&](std::size_t c) {
    const auto begin = static_cast<Eigen::Index>(c * kSampleChunk);
    const auto count = static_cast<Eigen::Index>(std::min(kSampleChunk, n - c * kSampleChunk));
    const auto block = samples.middleCols(begin, count);
    sums[c] = block.rowwise().sum();
    outer[c] = block * block.adjoint();
  });
  CVector mean = CVector::Zero(dim);
  CMatrix cov = CMatrix::Zero(dim, dim);
  for (std::size_t c = 0; c < chunks; ++c) {
    mean += sums[c];
    cov += outer[c];
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  mean *= inv_n;
  cov *= inv_n;
  for (int i = 0; i < dim; ++i) {
    cov(i, i) = Complex(cov(i, i).real(), 0.0);
    for (int j = i + 1; j < dim; ++j) cov(j, i) = std::conj(cov(i, j));
  }
  HermitianOperator covariance(std::move(cov));
  const double dispersion = covariance.trace();
  return EnsembleStats{std::move(mean), std::move(covariance), dispersion};
}

double energy_along(const FieldEnsemble& ensemble, const StateVector& direction) {
  if (direction.dim() != ensemble.dim()) throw InvalidInput("energy_along: dimension mismatch");
  if (std::abs(direction.norm() - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "energy_along: direction must be normalized (|e| = " << direction.norm() << ")";
    throw InvalidInput(os.str());
  }
  if (ensemble.size() == 0) throw InvalidInput("energy_along: empty ensemble");
  // <phi_i|e> for every sample at once.
  const CVector overlaps = ensemble.samples().adjoint() * direction.amplitudes();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < overlaps.size(); ++i) sum += std::norm(overlaps(i));
  return sum / static_cast<double>(ensemble.size());
}

double total_energy(const CVector& phi) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < phi.size(); ++i) sum += std::norm(phi(i));
  return sum;
}

double GridDensity::integral() const {
  double sum = 0.0;
  for (double d : density) sum += d * dx;
  return sum;
}

GridDensity energy_density(const CVector& phi, double dx) {
  if (!(dx > 0.0) || !std::isfinite(dx)) throw InvalidInput("energy_density: dx must be > 0");
  GridDensity g{std::vector<double>(static_cast<std::size_t>(phi.size())), dx};
  for (Eigen::Index i = 0; i < phi.size(); ++i) g.density[static_cast<std::size_t>(i)] = std::norm(phi(i));
  return g;
}

}  // namespace pcsft
