#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "pcsft/errors.hpp"
#include "pcsft/linops.hpp"

using namespace pcsft;
using namespace testutil;

namespace {

// Closed-form eigenvalues of [[a, b], [conj(b), d]], descending.
std::pair<double, double> eig2(double a, double d, Complex b) {
  const double m = 0.5 * (a + d);
  const double r = std::sqrt(0.25 * (a - d) * (a - d) + std::norm(b));
  return {m + r, m - r};
}

}  // namespace

TEST_CASE("hermitian operator validation") {
  CMatrix m(2, 2);
  m << 1.0, Complex(0, 1), Complex(0, -1), 2.0;
  CHECK_NOTHROW(HermitianOperator{m});

  CMatrix bad = m;
  bad(0, 1) = Complex(0, 2);
  CHECK_THROWS_AS(HermitianOperator{bad}, InvalidInput);

  CHECK_THROWS_AS(HermitianOperator{CMatrix(2, 3)}, InvalidInput);

  CMatrix nan = m;
  nan(0, 0) = std::nan("");
  CHECK_THROWS_AS(HermitianOperator{nan}, InvalidInput);

  CHECK(HermitianOperator::identity(3).trace() == 3.0);
  CHECK(HermitianOperator::diagonal({1.0, 3.0}).trace() == 4.0);
}

TEST_CASE("is_density reports each failed property") {
  CMatrix rho(2, 2);
  rho << 0.5, 0.5, 0.5, 0.5;
  CHECK(is_density(rho).ok);

  CMatrix nonherm = rho;
  nonherm(0, 1) = 0.7;
  auto c = is_density(nonherm);
  CHECK_FALSE(c.ok);
  CHECK_FALSE(c.hermitian);
  CHECK(c.hermitian_defect == doctest::Approx(0.2));

  CMatrix neg(2, 2);
  neg << 1.5, 0.0, 0.0, -0.5;
  c = is_density(neg);
  CHECK_FALSE(c.psd);
  CHECK(c.unit_trace);
  CHECK(c.min_eigenvalue == doctest::Approx(-0.5));
  CHECK(c.describe().find("PSD") != std::string::npos);

  CMatrix big = CMatrix::Identity(2, 2);
  c = is_density(big);
  CHECK_FALSE(c.unit_trace);
  CHECK(c.psd);

  CHECK_THROWS_AS(DensityState::from_operator(HermitianOperator(big)), InvalidInput);
}

TEST_CASE("hermitian_eig matches the closed-form 2x2 solution") {
  std::mt19937_64 g(11);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int t = 0; t < 200; ++t) {
    const double a = u(g), d = u(g);
    const Complex b(u(g), u(g));
    CMatrix m(2, 2);
    m << a, b, std::conj(b), d;
    const auto eig = hermitian_eig(HermitianOperator(m));
    const auto [l1, l2] = eig2(a, d, b);
    CHECK(eig.values(0) == doctest::Approx(l1).epsilon(1e-12));
    CHECK(eig.values(1) == doctest::Approx(l2).epsilon(1e-12));
    CHECK(eig.values(0) >= eig.values(1));
  }
}

TEST_CASE("hermitian_eig reconstructs and is phase-fixed") {
  std::mt19937_64 g(12);
  for (int n : {1, 2, 3, 5, 8, 16, 32}) {
    const CMatrix m = random_psd(g, n, n) - CMatrix::Identity(n, n) * 0.5 * n;
    const auto eig = hermitian_eig(HermitianOperator(m));
    const CMatrix v = eig.vectors;
    const CMatrix back = v * eig.values.cast<Complex>().asDiagonal() * v.adjoint();
    CHECK(max_abs(back - m) <= 1e-10 * std::max(1.0, max_abs(m)));
    CHECK(max_abs(v.adjoint() * v - CMatrix::Identity(n, n)) <= 1e-10);
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < n; ++i) {
        if (std::abs(v(i, k)) > 1e-8 * v.col(k).cwiseAbs().maxCoeff()) {
          CHECK(v(i, k).imag() == 0.0);
          CHECK(v(i, k).real() >= 0.0);
          break;
        }
      }
    }
  }
}

TEST_CASE("hermitian_eig is deterministic on degenerate spectra") {
  const auto a = hermitian_eig(HermitianOperator::identity(4));
  const auto b = hermitian_eig(HermitianOperator::identity(4));
  CHECK(a.vectors == b.vectors);
  CHECK(a.values == b.values);
  CHECK_THROWS_AS(hermitian_eig(CMatrix(CMatrix::Random(3, 3))), InvalidInput);
}

TEST_CASE("projectors are idempotent rank-one unit-trace operators") {
  std::mt19937_64 g(13);
  for (int n : {1, 2, 4, 7, 16}) {
    for (int t = 0; t < 10; ++t) {
      const StateVector psi = StateVector(random_vector(g, n)).normalized();
      const CMatrix p = make_projector(psi).matrix();
      CHECK(max_abs(p * p - p) <= 1e-12);
      CHECK(std::abs(p.trace().real() - 1.0) <= 1e-12);
      CHECK(max_abs(p - p.adjoint()) == 0.0);
      const auto eig = hermitian_eig(HermitianOperator(p));
      if (n > 1) CHECK(std::abs(eig.values(1)) <= 1e-12);
    }
  }
  CHECK_THROWS_AS(make_projector(StateVector(CVector::Zero(2))), InvalidInput);
}

TEST_CASE("psd_sqrt squares back to the operator up to dim 64") {
  std::mt19937_64 g(14);
  for (int n : {1, 2, 3, 8, 17, 32, 64}) {
    for (int rank : {1, n / 2 + 1, n}) {
      const CMatrix b = random_psd(g, n, rank);
      const CMatrix s = psd_sqrt(HermitianOperator(b)).matrix();
      CHECK(max_abs(s * s - b) <= 1e-8 * std::max(1.0, max_abs(b)));
      CHECK(is_density(CMatrix(s / s.trace().real())).psd);
    }
  }
}

TEST_CASE("psd_sqrt of a diagonal is the elementwise root") {
  const CMatrix s = psd_sqrt(HermitianOperator::diagonal({4.0, 9.0, 0.0})).matrix();
  CHECK(s(0, 0).real() == doctest::Approx(2.0));
  CHECK(s(1, 1).real() == doctest::Approx(3.0));
  CHECK(std::abs(s(2, 2)) <= 1e-15);
}

TEST_CASE("psd_sqrt clamps round-off negatives and rejects real ones") {
  CHECK_NOTHROW(psd_sqrt(HermitianOperator::diagonal({1.0, -1e-12})));
  CHECK_THROWS_AS(psd_sqrt(HermitianOperator::diagonal({1.0, -1e-3})), NotPsdError);
}

TEST_CASE("orthonormal basis checks") {
  const double r = 1.0 / std::sqrt(2.0);
  CHECK_NOTHROW(OrthonormalBasis(std::vector<StateVector>{StateVector{r, r}, StateVector{r, -r}}));
  CHECK_THROWS_AS(OrthonormalBasis(std::vector<StateVector>{StateVector{1.0, 0.0}, StateVector{r, r}}), InvalidInput);
  CHECK_THROWS_AS(OrthonormalBasis(std::vector<StateVector>{StateVector{1.0, 0.0}}), InvalidInput);

  std::mt19937_64 g(15);
  const CMatrix u = random_unitary(g, 5);
  const auto basis = OrthonormalBasis::from_columns(u);
  const int order[] = {4, 3, 2, 1, 0};
  const auto p = basis.permuted(order);
  CHECK(p.matrix().col(0) == u.col(4));
  CHECK(p.permuted(order) == basis);
}

TEST_CASE("frobenius distance") {
  CHECK(frobenius_distance(HermitianOperator::identity(2), HermitianOperator::zero(2)) ==
        doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(frobenius_distance(HermitianOperator::identity(2), HermitianOperator::identity(3)), InvalidInput);
}

TEST_CASE("state vector basics") {
  CHECK_THROWS_AS(StateVector(CVector::Zero(3)).normalized(), InvalidInput);
  const auto e = StateVector::unit(3, 1);
  CHECK(e[1] == Complex(1.0));
  CHECK(e.norm() == 1.0);
  CHECK(StateVector{3.0, Complex(0, 4)}.normalized()[1] == Complex(0, 0.8));
}
