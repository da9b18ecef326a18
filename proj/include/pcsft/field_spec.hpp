#pragma once

// Generative descriptions of zero-mean random fields on C^dim, and the
// per-sample draw routine shared by every generator in the library.

#include <cstdint>
#include <memory>
#include <string>
#include <variant>

#include "pcsft/linops.hpp"
#include "pcsft/rng.hpp"

namespace pcsft {

class FieldSpec;

/// phi ~ N(0, B), circularly symmetric.
struct GaussianSpec {
  HermitianOperator covariance;
};

/// phi = xi * psi/|psi| with scalar xi ~ CN(0, sigma2).
struct PureSpec {
  StateVector psi;
  double sigma2;
};

/// Component signals xi_k = c_k * eta driven by one scalar eta ~ CN(0, driver_sigma2);
/// phi = sum_k xi_k |e_k>. The moduli |c_k| play the role of the component
/// standard deviations sigma_k.
struct SuperpositionSpec {
  CVector coefficients;
  double driver_sigma2 = 1.0;
  OrthonormalBasis basis;

  /// Throws InvalidInput for a dimension mismatch, all-zero coefficients or driver_sigma2 <= 0.
  void validate() const;
  /// sum_k c_k |e_k>.
  StateVector state() const;
};

/// The inner field with independent N(0, gamma) phase noise applied to each
/// component in the inner field's construction basis.
struct DecoheredSpec {
  std::shared_ptr<const FieldSpec> inner;
  double gamma;
};

class FieldSpec {
 public:
  using Kind = std::variant<GaussianSpec, PureSpec, SuperpositionSpec, DecoheredSpec>;

  /// Throws NotPsdError if B has an eigenvalue below -tol_psd.
  static FieldSpec gaussian(HermitianOperator covariance);
  /// Throws InvalidInput for psi == 0 or sigma2 <= 0.
  static FieldSpec pure(StateVector psi, double sigma2);
  static FieldSpec superposition(SuperpositionSpec spec);
  /// Throws InvalidInput for gamma < 0.
  static FieldSpec decohered(FieldSpec inner, double gamma);

  int dim() const;
  const Kind& kind() const { return kind_; }
  std::string kind_name() const;

  /// Exact covariance E[phi phi^dagger] implied by the description.
  HermitianOperator analytic_covariance() const;

  /// Basis in which component signals are defined: the superposition basis,
  /// the inner basis for decohered fields, the standard basis otherwise.
  OrthonormalBasis construction_basis() const;

  /// True when every draw lies on one fixed line, phi = eta * v.
  bool is_rank_one() const;
  /// The direction v scaled so that phi = eta * v with eta ~ CN(0, 1).
  /// Throws InvalidInput unless is_rank_one().
  CVector rank_one_amplitude() const;

 private:
  explicit FieldSpec(Kind kind) : kind_(std::move(kind)) {}
  Kind kind_;
};

/// Precomputed draw routine for one FieldSpec. Immutable and shareable across threads.
class FieldSampler {
 public:
  explicit FieldSampler(const FieldSpec& spec);

  int dim() const { return dim_; }

  /// One field sample.
  void draw(GaussianSource& src, Eigen::Ref<CVector> out) const;
  /// Fills every column of `out` with consecutive draws.
  void draw_block(GaussianSource& src, Eigen::Ref<CMatrix> out) const;

 private:
  int dim_;
  std::variant<CMatrix, CVector> linear_;  // psd sqrt of B, or the rank-one amplitude
  std::shared_ptr<const FieldSampler> inner_;
  CMatrix basis_;
  double gamma_ = 0.0;
};

/// Multiplies each entry of `components` by exp(i*theta), theta ~ N(0, gamma)
/// drawn independently per entry in column-major order.
void apply_phase_noise(GaussianSource& src, double gamma, Eigen::Ref<CMatrix> components);

}  // namespace pcsft
