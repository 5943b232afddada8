#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "core/error.hpp"
#include "core/rng.hpp"
#include "core/suitability.hpp"
#include "core/synthetic.hpp"

using namespace factorlens;

namespace {

const Matrix kFour = Matrix::from_rows({{1, .6, .3, .2}, {.6, 1, .4, .1}, {.3, .4, 1, .5}, {.2, .1, .5, 1}});

SymMatrix permuted(const Matrix& m, const std::vector<std::size_t>& perm) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(perm[i], perm[j]);
  return SymMatrix(out);
}

SymMatrix two_by_two(double r) { return SymMatrix(Matrix::from_rows({{1, r}, {r, 1}})); }

}  // namespace

TEST_CASE("KMO of any 2x2 correlation is one half") {
  for (double r : {-0.95, -0.3, 0.01, 0.5, 0.8, 0.999}) {
    CAPTURE(r);
    CHECK(std::abs(kmo(two_by_two(r)) - 0.5) <= 1e-10);
  }
}

TEST_CASE("KMO and Bartlett of a fixed 4x4 matrix") {
  // numpy: partial correlations from inv(R); chi2 from det(R); scipy chi2.sf
  const SymMatrix r(kFour);
  CHECK(kmo(r) == doctest::Approx(0.5507324259201895).epsilon(1e-12));
  const auto b = bartlett_sphericity(r, 50);
  CHECK(b.chi2 == doctest::Approx(44.76383811670654).epsilon(1e-12));
  CHECK(b.df == 6);
  CHECK(b.p_value == doctest::Approx(5.214107909749297e-08).epsilon(1e-9));
}

TEST_CASE("Bartlett for p=2, n=100, r=0.5") {
  const auto b = bartlett_sphericity(two_by_two(0.5), 100);
  const double chi2 = -(100 - 1 - 9.0 / 6.0) * std::log(0.75);
  CHECK(b.chi2 == doctest::Approx(chi2).epsilon(1e-13));
  CHECK(b.chi2 == doctest::Approx(28.049).epsilon(1e-5));
  CHECK(b.df == 1);
  CHECK(b.p_value == doctest::Approx(std::erfc(std::sqrt(chi2 / 2))).epsilon(1e-10));
}

TEST_CASE("identity correlation") {
  const SymMatrix id = SymMatrix::identity(8);
  const auto b = bartlett_sphericity(id, 100);
  CHECK(b.chi2 == 0.0);
  CHECK(b.p_value == 1.0);
  CHECK(b.df == 28);
  CHECK_THROWS_WITH_AS(kmo(id), "degenerate: no correlations", NumericalError);
}

TEST_CASE("statistics are invariant to variable order") {
  const SymMatrix r(kFour);
  const std::vector<std::size_t> perms[] = {{3, 2, 1, 0}, {1, 3, 0, 2}, {2, 0, 3, 1}};
  for (const auto& perm : perms) {
    const SymMatrix q = permuted(kFour, perm);
    CHECK(kmo(q) == doctest::Approx(kmo(r)).epsilon(1e-13));
    CHECK(bartlett_sphericity(q, 40).chi2 == doctest::Approx(bartlett_sphericity(r, 40).chi2).epsilon(1e-12));
  }
}

TEST_CASE("chi-square grows with the sample size") {
  const SymMatrix r(kFour);
  double last = 0.0;
  for (std::size_t n = 5; n <= 1000; n += 15) {
    const auto b = bartlett_sphericity(r, n);
    CHECK(b.chi2 > last);
    last = b.chi2;
  }
}

TEST_CASE("Bartlett needs more observations than variables") {
  CHECK_THROWS_AS(bartlett_sphericity(SymMatrix(kFour), 4), ValidationError);
}

TEST_CASE("KMO stays within the unit interval") {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix x = make_one_factor_data(60, 5, rng.uniform(0.1, 0.9), rng.next_u64());
    const SymMatrix r = correlation_matrix(DataMatrix(x, {"a", "b", "c", "d", "e"}));
    const double v = kmo(r);
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("strong one-factor data is highly factorable") {
  const Matrix x = make_one_factor_data(500, 8, 0.9, 2017);
  const SymMatrix r = correlation_matrix(DataMatrix(x, {"a", "b", "c", "d", "e", "f", "g", "h"}));
  const auto rep = assess_suitability(r, 500);
  CHECK(rep.kmo > 0.85);
  CHECK(rep.bartlett.p_value < 1e-6);
  CHECK(rep.bartlett.df == 28);
  CHECK(rep.passed());
}

TEST_CASE("verdict thresholds") {
  const SymMatrix r(kFour);
  const auto strict = assess_suitability(r, 50, {.kmo_min = 0.6, .alpha = 0.05});
  CHECK_FALSE(strict.kmo_pass);
  CHECK(strict.bartlett_pass);
  CHECK_FALSE(strict.passed());
  const auto loose = assess_suitability(r, 50, {.kmo_min = 0.5, .alpha = 0.05});
  CHECK(loose.passed());
  const auto tiny = assess_suitability(r, 5, {.kmo_min = 0.5, .alpha = 0.05});
  CHECK_FALSE(tiny.bartlett_pass);
}
