#include "pcsft/onticmap.hpp"

#include <cmath>
#include <sstream>

#include "pcsft/errors.hpp"

namespace pcsft {

namespace {

CMatrix normalized_covariance(const HermitianOperator& b, double tol) {
  const double tr = b.trace();
  if (!(tr > tol)) {
    std::ostringstream os;
    os << "zero field: trace " << tr << " <= " << tol << ", no epistemic image";
    throw ZeroFieldError(os.str());
  }
  return b.matrix() / tr;
}

}  // namespace

EpistemicImage to_epistemic(const HermitianOperator& covariance, double tol) {
  const CMatrix rho = normalized_covariance(covariance, tol);
  const DensityCheck check = is_density(rho, kTolHerm);
  if (!check.psd) throw NotPsdError("to_epistemic: covariance is not PSD (" + check.describe() + ")");
  return EpistemicImage{DensityState::from_operator(HermitianOperator(rho)), covariance.trace()};
}

HermitianOperator from_epistemic(const DensityState& rho, double sigma2) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw InvalidInput("from_epistemic: sigma2 must be > 0");
  return rho.op().scaled(sigma2);
}

std::vector<double> born_probabilities(const DensityState& rho, const OrthonormalBasis& basis, double tol) {
  if (basis.dim() != rho.dim()) throw InvalidInput("born_probabilities: basis dimension != state dimension");
  const CMatrix& v = basis.matrix();
  std::vector<double> p(static_cast<std::size_t>(basis.dim()));
  double total = 0.0;
  bool clamped = false;
  for (int k = 0; k < basis.dim(); ++k) {
    const double pk = (v.col(k).adjoint() * rho.matrix() * v.col(k))(0, 0).real();
    if (pk < -tol) {
      std::ostringstream os;
      os << "born_probabilities: negative probability " << pk << " for channel " << k;
      throw InvalidInput(os.str());
    }
    clamped = clamped || pk < 0.0;
    p[static_cast<std::size_t>(k)] = pk < 0.0 ? 0.0 : pk;
    total += p[static_cast<std::size_t>(k)];
  }
  if (clamped) {
    for (double& pk : p) pk /= total;
  }
  return p;
}

bool equivalent(const HermitianOperator& b1, const HermitianOperator& b2, double tol) {
  if (b1.dim() != b2.dim()) throw InvalidInput("equivalent: dimension mismatch");
  const CMatrix r1 = normalized_covariance(b1, kTolTrace);
  const CMatrix r2 = normalized_covariance(b2, kTolTrace);
  return (r1 - r2).norm() <= tol;
}

}  // namespace pcsft
