#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "pcsft/errors.hpp"
#include "pcsft/onticmap.hpp"

using namespace pcsft;
using namespace testutil;

TEST_CASE("to_epistemic normalizes by the trace") {
  const auto img = to_epistemic(HermitianOperator::diagonal({1.0, 3.0}));
  CHECK(img.sigma2 == 4.0);
  CHECK(img.rho.matrix()(0, 0).real() == 0.25);
  CHECK(img.rho.matrix()(1, 1).real() == 0.75);
  CHECK(is_density(img.rho.op()).ok);
}

TEST_CASE("to_epistemic rejects zero and non-PSD covariances") {
  CHECK_THROWS_AS(to_epistemic(HermitianOperator::zero(2)), ZeroFieldError);
  CHECK_THROWS_AS(to_epistemic(HermitianOperator::diagonal({1e-12, 0.0})), ZeroFieldError);
  CHECK_THROWS_AS(to_epistemic(HermitianOperator::diagonal({2.0, -1.0})), NotPsdError);
}

TEST_CASE("the map forgets the energy scale") {
  std::mt19937_64 g(41);
  for (int t = 0; t < 50; ++t) {
    const HermitianOperator b(random_psd(g, 4, 1 + t % 4));
    const CMatrix rho = to_epistemic(b).rho.matrix();
    // power-of-two scale factors are exact in binary floating point
    CHECK(to_epistemic(b.scaled(4.0)).rho.matrix() == rho);
    CHECK(max_abs(to_epistemic(b.scaled(3.7)).rho.matrix() - rho) <= 1e-15);
    CHECK(equivalent(b, b.scaled(3.7)));
  }
}

TEST_CASE("from_epistemic inverts to_epistemic") {
  std::mt19937_64 g(42);
  const HermitianOperator b(random_psd(g, 3, 2));
  const auto img = to_epistemic(b);
  CHECK(max_abs(from_epistemic(img.rho, img.sigma2).matrix() - b.matrix()) <= 1e-12 * max_abs(b.matrix()));
  CHECK_THROWS_AS(from_epistemic(img.rho, 0.0), InvalidInput);
}

TEST_CASE("born probabilities") {
  CMatrix m(2, 2);
  m << 0.5, 0.5, 0.5, 0.5;
  const auto rho = DensityState::from_operator(HermitianOperator(m));
  auto p = born_probabilities(rho, OrthonormalBasis::standard(2));
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(0.5));

  const double r = 1.0 / std::sqrt(2.0);
  const OrthonormalBasis plus_minus(std::vector<StateVector>{StateVector{r, r}, StateVector{r, -r}});
  p = born_probabilities(rho, plus_minus);
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(p[1] == doctest::Approx(0.0).epsilon(1e-15));

  std::mt19937_64 g(43);
  for (int t = 0; t < 30; ++t) {
    const int n = 2 + t % 6;
    const auto rr = to_epistemic(HermitianOperator(random_psd(g, n, 1 + t % n))).rho;
    const CMatrix u = random_unitary(g, n);
    const auto q = born_probabilities(rr, OrthonormalBasis::from_columns(u));
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
      CHECK(q[k] >= 0.0);
      const Complex oracle = (u.col(k).adjoint() * rr.matrix() * u.col(k))(0, 0);
      CHECK(q[k] == doctest::Approx(oracle.real()).epsilon(1e-12));
      sum += q[k];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("equivalence classes") {
  CHECK(equivalent(HermitianOperator::diagonal({1.0, 3.0}), HermitianOperator::diagonal({0.5, 1.5})));
  CHECK_FALSE(equivalent(HermitianOperator::diagonal({1.0, 3.0}), HermitianOperator::diagonal({1.0, 1.0})));
  CHECK_THROWS_AS(equivalent(HermitianOperator::zero(2), HermitianOperator::identity(2)), ZeroFieldError);
}
