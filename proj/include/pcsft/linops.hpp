#pragma once

// Dense complex Hermitian operator algebra.
//
// Everything in this header is value-typed and immutable after construction;
// the free functions are pure and may be called concurrently.

#include <complex>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pcsft {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kTolHerm = 1e-9;
inline constexpr double kTolTrace = 1e-9;
inline constexpr double kTolPsd = 1e-9;

/// A finite complex vector. Normalization is checked where it matters, never assumed.
class StateVector {
 public:
  explicit StateVector(CVector amplitudes);
  StateVector(std::initializer_list<Complex> amplitudes);

  /// The k-th standard basis vector e_k of C^dim.
  static StateVector unit(int dim, int k);

  int dim() const { return static_cast<int>(amplitudes_.size()); }
  const CVector& amplitudes() const { return amplitudes_; }
  Complex operator[](int k) const { return amplitudes_(k); }

  double norm() const { return amplitudes_.norm(); }
  /// Throws InvalidInput for the zero vector.
  StateVector normalized() const;

 private:
  CVector amplitudes_;
};

/// Square complex matrix equal to its conjugate transpose within tol_herm.
///
/// Entries are stored exactly as supplied (no symmetrization) so that
/// serialization round-trips bit-for-bit.
class HermitianOperator {
 public:
  explicit HermitianOperator(CMatrix entries, double tol_herm = kTolHerm);

  static HermitianOperator zero(int dim);
  static HermitianOperator identity(int dim);
  static HermitianOperator diagonal(std::span<const double> values);
  static HermitianOperator diagonal(std::initializer_list<double> values);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const CMatrix& matrix() const { return entries_; }
  Complex operator()(int i, int j) const { return entries_(i, j); }

  /// Sum of the real diagonal in index order. Every trace in the library goes
  /// through here so that identities such as dispersion == trace hold bitwise.
  double trace() const;

  HermitianOperator scaled(double factor) const;
  HermitianOperator operator+(const HermitianOperator& other) const;

  friend bool operator==(const HermitianOperator& a, const HermitianOperator& b) {
    return a.entries_ == b.entries_;
  }

 private:
  CMatrix entries_;
};

/// Outcome of the density-operator test, with the measured quantities.
struct DensityCheck {
  bool ok = false;
  bool square = false;
  bool hermitian = false;
  bool psd = false;
  bool unit_trace = false;
  double hermitian_defect = 0.0;  // max |a_ij - conj(a_ji)|
  double min_eigenvalue = 0.0;    // of the Hermitian part
  double trace = 0.0;

  /// Human-readable list of the failed properties ("" when ok).
  std::string describe() const;
};

DensityCheck is_density(const CMatrix& op, double tol = kTolHerm);
DensityCheck is_density(const HermitianOperator& op, double tol = kTolHerm);

/// Validated quantum state: Hermitian, PSD and unit trace.
class DensityState {
 public:
  /// Throws InvalidInput (with the failed properties) if op is not a density operator.
  static DensityState from_operator(const HermitianOperator& op, double tol = kTolHerm);

  int dim() const { return op_.dim(); }
  const HermitianOperator& op() const { return op_; }
  const CMatrix& matrix() const { return op_.matrix(); }

 private:
  explicit DensityState(HermitianOperator op) : op_(std::move(op)) {}
  HermitianOperator op_;
};

/// Eigenpairs sorted by descending eigenvalue. Each column of `vectors` is
/// phase-fixed so its first significant component is real and nonnegative;
/// ties in eigenvalue are broken lexicographically on the phase-fixed vectors.
struct EigenDecomposition {
  RVector values;
  CMatrix vectors;
};

EigenDecomposition hermitian_eig(const HermitianOperator& op);
/// Throws InvalidInput when `op` is not Hermitian within tol_herm.
EigenDecomposition hermitian_eig(const CMatrix& op, double tol_herm = kTolHerm);

/// |psi><psi|. Idempotent when psi is normalized. Throws InvalidInput for psi == 0.
HermitianOperator make_projector(const StateVector& psi);

/// The PSD square root S with S*S == op. Eigenvalues in [-tol_psd, 0) are
/// clamped to zero; anything below -tol_psd raises NotPsdError.
HermitianOperator psd_sqrt(const HermitianOperator& op, double tol_psd = kTolPsd);

/// Frobenius norm of a - b. Throws InvalidInput on dimension mismatch.
double frobenius_distance(const HermitianOperator& a, const HermitianOperator& b);

/// Multiplies v by the unit phase that makes its first significant component
/// real and nonnegative. The zero vector is returned unchanged.
CVector phase_fixed(const CVector& v);

/// Complete orthonormal basis of C^dim, stored as the columns of a unitary matrix.
class OrthonormalBasis {
 public:
  /// Throws InvalidInput if the vectors are not orthonormal and complete within tol.
  explicit OrthonormalBasis(const std::vector<StateVector>& vectors, double tol = 1e-9);
  static OrthonormalBasis from_columns(CMatrix columns, double tol = 1e-9);
  static OrthonormalBasis standard(int dim);

  int dim() const { return static_cast<int>(columns_.rows()); }
  const CMatrix& matrix() const { return columns_; }
  StateVector vector(int k) const { return StateVector(CVector(columns_.col(k))); }

  /// Relabels channels: new channel k is old channel order[k].
  OrthonormalBasis permuted(std::span<const int> order) const;

  friend bool operator==(const OrthonormalBasis& a, const OrthonormalBasis& b) {
    return a.columns_ == b.columns_;
  }

 private:
  explicit OrthonormalBasis(CMatrix columns) : columns_(std::move(columns)) {}
  CMatrix columns_;
};

}  // namespace pcsft
