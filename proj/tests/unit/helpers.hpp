#pragma once

#include <cmath>
#include <random>

#include "pcsft/linops.hpp"

namespace testutil {

using pcsft::CMatrix;
using pcsft::Complex;
using pcsft::CVector;

inline CMatrix random_matrix(std::mt19937_64& g, int n) {
  std::normal_distribution<double> nd;
  CMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = Complex(nd(g), nd(g));
  return m;
}

inline CVector random_vector(std::mt19937_64& g, int n) {
  std::normal_distribution<double> nd;
  CVector v(n);
  for (int i = 0; i < n; ++i) v(i) = Complex(nd(g), nd(g));
  return v;
}

// A A^dagger, exactly Hermitian.
inline CMatrix random_psd(std::mt19937_64& g, int n, int rank) {
  CMatrix a = CMatrix::Zero(n, n);
  CMatrix x = random_matrix(g, n);
  for (int r = 0; r < rank; ++r) a += x.col(r) * x.col(r).adjoint();
  for (int i = 0; i < n; ++i) {
    a(i, i) = a(i, i).real();
    for (int j = i + 1; j < n; ++j) a(j, i) = std::conj(a(i, j));
  }
  return a;
}

inline double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

// Unitary from Gram-Schmidt on random columns.
inline CMatrix random_unitary(std::mt19937_64& g, int n) {
  CMatrix q = random_matrix(g, n);
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < k; ++j) q.col(k) -= (q.col(j).adjoint() * q.col(k))(0, 0) * q.col(j);
    q.col(k) /= q.col(k).norm();
  }
  return q;
}

}  // namespace testutil
