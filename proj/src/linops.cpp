#include "pcsft/linops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "pcsft/errors.hpp"

namespace pcsft {

namespace {

double hermitian_defect(const CMatrix& m) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i; j < m.cols(); ++j) {
      worst = std::max(worst, std::abs(m(i, j) - std::conj(m(j, i))));
    }
  }
  return worst;
}

CMatrix hermitian_part(const CMatrix& m) { return (m + m.adjoint()) * 0.5; }

// Lexicographic "greater than" on (re, im) of each component, used only to
// order eigenvectors that share an eigenvalue.
bool lex_greater(const CVector& a, const CVector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i).real() != b(i).real()) return a(i).real() > b(i).real();
    if (a(i).imag() != b(i).imag()) return a(i).imag() > b(i).imag();
  }
  return false;
}

}  // namespace

// ---------------------------------------------------------------------------
// StateVector

StateVector::StateVector(CVector amplitudes) : amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() < 1) throw InvalidInput("StateVector: dimension must be >= 1");
  if (!amplitudes_.allFinite()) throw InvalidInput("StateVector: non-finite amplitude");
}

StateVector::StateVector(std::initializer_list<Complex> amplitudes)
    : StateVector(CVector(Eigen::Map<const CVector>(amplitudes.begin(),
                                                    static_cast<Eigen::Index>(amplitudes.size())))) {}

StateVector StateVector::unit(int dim, int k) {
  if (dim < 1 || k < 0 || k >= dim) throw InvalidInput("StateVector::unit: index out of range");
  CVector v = CVector::Zero(dim);
  v(k) = 1.0;
  return StateVector(std::move(v));
}

StateVector StateVector::normalized() const {
  const double n = norm();
  if (n == 0.0) throw InvalidInput("StateVector::normalized: zero vector");
  return StateVector(CVector(amplitudes_ / n));
}

// ---------------------------------------------------------------------------
// HermitianOperator

HermitianOperator::HermitianOperator(CMatrix entries, double tol_herm) : entries_(std::move(entries)) {
  if (entries_.rows() < 1 || entries_.rows() != entries_.cols()) {
    throw InvalidInput("HermitianOperator: matrix must be square with dim >= 1");
  }
  if (!entries_.allFinite()) throw InvalidInput("HermitianOperator: non-finite entry");
  const double defect = hermitian_defect(entries_);
  if (defect > tol_herm) {
    std::ostringstream os;
    os << "HermitianOperator: not Hermitian (defect " << defect << " > " << tol_herm << ")";
    throw InvalidInput(os.str());
  }
}

HermitianOperator HermitianOperator::zero(int dim) {
  if (dim < 1) throw InvalidInput("HermitianOperator::zero: dim must be >= 1");
  return HermitianOperator(CMatrix::Zero(dim, dim));
}

HermitianOperator HermitianOperator::identity(int dim) {
  if (dim < 1) throw InvalidInput("HermitianOperator::identity: dim must be >= 1");
  return HermitianOperator(CMatrix::Identity(dim, dim));
}

HermitianOperator HermitianOperator::diagonal(std::span<const double> values) {
  if (values.empty()) throw InvalidInput("HermitianOperator::diagonal: empty");
  const auto n = static_cast<Eigen::Index>(values.size());
  CMatrix m = CMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) m(i, i) = values[static_cast<std::size_t>(i)];
  return HermitianOperator(std::move(m));
}

HermitianOperator HermitianOperator::diagonal(std::initializer_list<double> values) {
  return diagonal(std::span<const double>(values.begin(), values.size()));
}

double HermitianOperator::trace() const {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < entries_.rows(); ++i) sum += entries_(i, i).real();
  return sum;
}

HermitianOperator HermitianOperator::scaled(double factor) const {
  return HermitianOperator(CMatrix(entries_ * factor));
}

HermitianOperator HermitianOperator::operator+(const HermitianOperator& other) const {
  if (other.dim() != dim()) throw InvalidInput("HermitianOperator::operator+: dimension mismatch");
  return HermitianOperator(CMatrix(entries_ + other.entries_));
}

// ---------------------------------------------------------------------------
// Density operators

std::string DensityCheck::describe() const {
  if (ok) return "";
  std::ostringstream os;
  const char* sep = "";
  if (!square) {
    os << "not square";
    return os.str();
  }
  if (!hermitian) {
    os << sep << "not Hermitian (defect " << hermitian_defect << ")";
    sep = "; ";
  }
  if (!psd) {
    os << sep << "not PSD (min eigenvalue " << min_eigenvalue << ")";
    sep = "; ";
  }
  if (!unit_trace) os << sep << "trace " << trace << " != 1";
  return os.str();
}

DensityCheck is_density(const CMatrix& op, double tol) {
  DensityCheck c;
  c.square = op.rows() >= 1 && op.rows() == op.cols();
  if (!c.square || !op.allFinite()) return c;
  c.hermitian_defect = hermitian_defect(op);
  c.hermitian = c.hermitian_defect <= tol;
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(op), Eigen::EigenvaluesOnly);
  c.min_eigenvalue = solver.eigenvalues().minCoeff();
  c.psd = c.min_eigenvalue >= -tol;
  for (Eigen::Index i = 0; i < op.rows(); ++i) c.trace += op(i, i).real();
  c.unit_trace = std::abs(c.trace - 1.0) <= tol;
  c.ok = c.hermitian && c.psd && c.unit_trace;
  return c;
}

DensityCheck is_density(const HermitianOperator& op, double tol) { return is_density(op.matrix(), tol); }

DensityState DensityState::from_operator(const HermitianOperator& op, double tol) {
  const DensityCheck check = is_density(op, tol);
  if (!check.ok) throw InvalidInput("DensityState: " + check.describe());
  return DensityState(op);
}

// ---------------------------------------------------------------------------
// Spectral operations

CVector phase_fixed(const CVector& v) {
  const double scale = v.cwiseAbs().maxCoeff();
  if (scale == 0.0) return v;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v(i));
    if (mag > 1e-8 * scale) {
      CVector out = v * (std::conj(v(i)) / mag);
      out(i) = Complex(mag, 0.0);
      return out;
    }
  }
  return v;
}

EigenDecomposition hermitian_eig(const CMatrix& op, double tol_herm) {
  if (op.rows() < 1 || op.rows() != op.cols()) throw InvalidInput("hermitian_eig: matrix must be square");
  if (hermitian_defect(op) > tol_herm) throw InvalidInput("hermitian_eig: matrix is not Hermitian");

  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(op));
  if (solver.info() != Eigen::Success) throw InvalidInput("hermitian_eig: eigensolver did not converge");

  const Eigen::Index n = op.rows();
  std::vector<CVector> vecs(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) vecs[static_cast<std::size_t>(k)] = phase_fixed(solver.eigenvectors().col(k));
  const RVector& vals = solver.eigenvalues();

  const double tie = 1e-12 * std::max(1.0, vals.cwiseAbs().maxCoeff());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (std::abs(vals(a) - vals(b)) > tie) return vals(a) > vals(b);
    return lex_greater(vecs[static_cast<std::size_t>(a)], vecs[static_cast<std::size_t>(b)]);
  });

  EigenDecomposition out{RVector(n), CMatrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.values(k) = vals(src);
    out.vectors.col(k) = vecs[static_cast<std::size_t>(src)];
  }
  return out;
}

EigenDecomposition hermitian_eig(const HermitianOperator& op) { return hermitian_eig(op.matrix(), kTolHerm); }

HermitianOperator make_projector(const StateVector& psi) {
  if (psi.norm() == 0.0) throw InvalidInput("make_projector: zero vector");
  const CVector& v = psi.amplitudes();
  CMatrix p = v * v.adjoint();
  // Outer products are Hermitian analytically; make the stored diagonal exactly real.
  for (Eigen::Index i = 0; i < p.rows(); ++i) p(i, i) = std::norm(v(i));
  return HermitianOperator(std::move(p));
}

HermitianOperator psd_sqrt(const HermitianOperator& op, double tol_psd) {
  const EigenDecomposition eig = hermitian_eig(op);
  const double smallest = eig.values.minCoeff();
  if (smallest < -tol_psd) {
    std::ostringstream os;
    os << "psd_sqrt: eigenvalue " << smallest << " below -" << tol_psd;
    throw NotPsdError(os.str());
  }
  const RVector roots = eig.values.cwiseMax(0.0).cwiseSqrt();
  CMatrix s = eig.vectors * roots.asDiagonal() * eig.vectors.adjoint();
  return HermitianOperator(hermitian_part(s));
}

double frobenius_distance(const HermitianOperator& a, const HermitianOperator& b) {
  if (a.dim() != b.dim()) throw InvalidInput("frobenius_distance: dimension mismatch");
  return (a.matrix() - b.matrix()).norm();
}

// ---------------------------------------------------------------------------
// OrthonormalBasis

namespace {

CMatrix stack_columns(const std::vector<StateVector>& vectors) {
  if (vectors.empty()) throw InvalidInput("OrthonormalBasis: no vectors");
  const int dim = vectors.front().dim();
  CMatrix m(dim, static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    if (vectors[k].dim() != dim) throw InvalidInput("OrthonormalBasis: vectors differ in dimension");
    m.col(static_cast<Eigen::Index>(k)) = vectors[k].amplitudes();
  }
  return m;
}

void check_unitary(const CMatrix& m, double tol) {
  if (m.rows() < 1 || m.rows() != m.cols()) {
    throw InvalidInput("OrthonormalBasis: need exactly dim vectors of dimension dim (complete basis)");
  }
  const double err = (m.adjoint() * m - CMatrix::Identity(m.rows(), m.rows())).cwiseAbs().maxCoeff();
  if (!(err <= tol)) {
    std::ostringstream os;
    os << "OrthonormalBasis: vectors are not orthonormal (max |<e_i|e_j> - delta_ij| = " << err << ")";
    throw InvalidInput(os.str());
  }
}

}  // namespace

OrthonormalBasis::OrthonormalBasis(const std::vector<StateVector>& vectors, double tol)
    : columns_(stack_columns(vectors)) {
  check_unitary(columns_, tol);
}

OrthonormalBasis OrthonormalBasis::from_columns(CMatrix columns, double tol) {
  check_unitary(columns, tol);
  return OrthonormalBasis(std::move(columns));
}

OrthonormalBasis OrthonormalBasis::standard(int dim) {
  if (dim < 1) throw InvalidInput("OrthonormalBasis::standard: dim must be >= 1");
  return OrthonormalBasis(CMatrix(CMatrix::Identity(dim, dim)));
}

OrthonormalBasis OrthonormalBasis::permuted(std::span<const int> order) const {
  if (static_cast<int>(order.size()) != dim()) throw InvalidInput("OrthonormalBasis::permuted: wrong length");
  std::vector<bool> seen(order.size(), false);
  CMatrix m(dim(), dim());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const int src = order[k];
    if (src < 0 || src >= dim() || seen[static_cast<std::size_t>(src)]) {
      throw InvalidInput("OrthonormalBasis::permuted: not a permutation");
    }
    seen[static_cast<std::size_t>(src)] = true;
    m.col(static_cast<Eigen::Index>(k)) = columns_.col(src);
  }
  return OrthonormalBasis(std::move(m));
}

}  // namespace pcsft
