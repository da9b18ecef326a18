#pragma once

// The correspondence between covariance operators of random fields (ontic
// states) and density operators (epistemic states): rho = B / Tr B.

#include <vector>

#include "pcsft/linops.hpp"

namespace pcsft {

/// A density operator together with the energy scale it was normalized by.
/// sigma2 * rho reconstructs the originating covariance.
struct EpistemicImage {
  DensityState rho;
  double sigma2;  // Tr B, the average total field energy
};

/// rho = B / Tr B, sigma2 = Tr B. Throws ZeroFieldError when Tr B <= tol and
/// NotPsdError when B is not PSD.
EpistemicImage to_epistemic(const HermitianOperator& covariance, double tol = kTolTrace);

/// sigma2 * rho, the covariance of the energy-sigma2 member of rho's preimage
/// family. Throws InvalidInput for sigma2 <= 0.
HermitianOperator from_epistemic(const DensityState& rho, double sigma2);

/// p(k) = <e_k|rho|e_k>. Values in [-tol, 0) are clamped to zero and the
/// vector renormalized; anything more negative is rejected as InvalidInput.
std::vector<double> born_probabilities(const DensityState& rho, const OrthonormalBasis& basis, double tol = 1e-9);

/// Whether two fields map to the same epistemic state:
/// |B1/Tr B1 - B2/Tr B2|_F <= tol. Throws ZeroFieldError for a zero-trace operand.
bool equivalent(const HermitianOperator& b1, const HermitianOperator& b2, double tol = 1e-9);

}  // namespace pcsft
