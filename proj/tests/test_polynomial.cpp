#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <complex>
#include <vector>

#include "sle0/polynomial.hpp"

#include "oracles.hpp"

using namespace sle0;
using Catch::Approx;

TEST_CASE("eval: Horner at complex and real points") {
  const Polynomial p({1.0, 0.0, 1.0});  // z^2 + 1
  CHECK(std::abs(p.eval(Cplx(0.0, 1.0))) == Approx(0.0).margin(1e-15));

  const Polynomial cubic({0.0, -3.0, 0.0, 1.0});  // z^3 - 3z
  CHECK(cubic.eval(2.0) == Approx(2.0));

  const Polynomial one({1.0});
  CHECK(one.eval(Cplx(5.0, 5.0)) == Cplx(1.0, 0.0));
}

TEST_CASE("derivative: coefficient-wise, degree drops") {
  CHECK(Polynomial({1.0, 0.0, 1.0}).derivative().coeffs() == std::vector<double>{0.0, 2.0});
  CHECK(Polynomial({0.0, -3.0, 0.0, 1.0}).derivative().coeffs() ==
        std::vector<double>{-3.0, 0.0, 3.0});
  CHECK(Polynomial({7.0}).derivative().is_zero());
}

TEST_CASE("derivative is linear") {
  oracle::Rng rng(11);
  auto int_poly = [&](int degree) {
    std::vector<double> c(static_cast<std::size_t>(degree) + 1);
    for (auto& v : c) v = double(int(rng.next_u64() % 19)) - 9.0;
    if (c.back() == 0.0) c.back() = 1.0;
    return Polynomial(std::move(c));
  };
  for (int trial = 0; trial < 50; ++trial) {
    // integer data: every intermediate is exact, so linearity is exact
    const auto pi = int_poly(1 + int(rng.next_u64() % 6));
    const auto qi = int_poly(1 + int(rng.next_u64() % 6));
    const double a = double(int(rng.next_u64() % 9)) - 4.0;
    const double b = double(int(rng.next_u64() % 9)) - 4.0;
    const Polynomial lhs = (a * pi + b * qi).derivative();
    const Polynomial rhs = a * pi.derivative() + b * qi.derivative();
    REQUIRE((lhs - rhs).max_abs_coeff() == 0.0);
    // generic real data: equal to machine rounding
    const auto p = oracle::random_poly(rng, 1 + int(rng.next_u64() % 6));
    const auto q = oracle::random_poly(rng, 1 + int(rng.next_u64() % 6));
    const double ag = rng.uniform(-2.0, 2.0), bg = rng.uniform(-2.0, 2.0);
    const Polynomial lg = (ag * p + bg * q).derivative();
    const Polynomial rg = ag * p.derivative() + bg * q.derivative();
    REQUIRE((lg - rg).max_abs_coeff() <
            1e-14 * std::max(1.0, std::max(lg.max_abs_coeff(), rg.max_abs_coeff())));
  }
}

TEST_CASE("from_roots: real and conjugate inputs") {
  CHECK(from_roots({Cplx(-1, 0), Cplx(1, 0)}).coeffs() == std::vector<double>{-1.0, 0.0, 1.0});
  CHECK(from_roots({Cplx(0, 1), Cplx(0, -1)}).coeffs() == std::vector<double>{1.0, 0.0, 1.0});

  // expand {-3, 0, 1, 2} by oracle multiplication: z^4 - 7z^2 + 6z
  const Polynomial p = from_roots_real({-3.0, 0.0, 1.0, 2.0});
  const Polynomial expect = oracle::expand_roots({-3.0, 0.0, 1.0, 2.0});
  CHECK((p - expect).max_abs_coeff() < 1e-12 * expect.max_abs_coeff());
  CHECK(p.coeffs() == std::vector<double>{0.0, 6.0, -7.0, 0.0, 1.0});
}

TEST_CASE("from_roots rejects non-conjugate-closed input") {
  CHECK_THROWS_AS(from_roots({Cplx(0, 1), Cplx(0.5, -1)}), NonRealCoefficients);
  CHECK_THROWS_AS(from_roots({Cplx(1, 0.5)}), NonRealCoefficients);
}

TEST_CASE("roots: named examples") {
  auto r = roots(Polynomial({-1.0, 0.0, 1.0}));
  REQUIRE(r.size() == 2);
  CHECK(r[0] == Cplx(-1.0, 0.0));
  CHECK(r[1] == Cplx(1.0, 0.0));

  r = roots(Polynomial({1.0, 0.0, 1.0}));
  REQUIRE(r.size() == 2);
  CHECK(std::abs(r[0] - Cplx(0, -1)) < 1e-12);
  CHECK(std::abs(r[1] - Cplx(0, 1)) < 1e-12);

  r = roots(Polynomial({0.0, 6.0, -7.0, 0.0, 1.0}));
  REQUIRE(r.size() == 4);
  const std::vector<double> expect{-3.0, 0.0, 1.0, 2.0};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(std::abs(r[i].imag()) < 1e-10);
    CHECK(r[i].real() == Approx(expect[i]).margin(1e-9));
  }
}

TEST_CASE("roots rejects constants") {
  CHECK_THROWS_AS(roots(Polynomial({3.0})), DegreeZero);
}

TEST_CASE("roots/from_roots round trip on random conjugation-closed sets") {
  oracle::Rng rng(23);
  for (int trial = 0; trial < 60; ++trial) {
    const auto want = oracle::random_conj_closed_roots(rng, 1 + int(rng.next_u64() % 8), 1e-6);
    const Polynomial p = from_roots(want);
    auto got = roots(p);
    REQUIRE(got.size() == want.size());
    auto sorted_want = want;
    std::sort(sorted_want.begin(), sorted_want.end(), oracle::by_re_im);
    for (std::size_t i = 0; i < got.size(); ++i)
      REQUIRE(std::abs(got[i] - sorted_want[i]) < 1e-9);
    // residual bound scaled as in the contract
    const double scale = p.max_abs_coeff();
    for (Cplx root : sorted_want) {
      const double bound =
          1e-9 * scale * std::pow(std::max(1.0, std::abs(root)), p.degree());
      REQUIRE(std::abs(p.eval(root)) <= bound);
    }
  }
}

TEST_CASE("double roots cluster within the multiplicity radius") {
  // (z^2)^2-style: double root at 0 next to simple roots
  const Polynomial p = from_roots({Cplx(0, 0), Cplx(0, 0), Cplx(2, 0), Cplx(-2, 0)});
  const auto r = roots(p);
  const auto clusters = cluster_points(r, 1e-7);
  int doubles = 0;
  for (const auto& [center, count] : clusters) {
    if (count == 2) {
      ++doubles;
      CHECK(std::abs(center) < 1e-7);
    }
  }
  CHECK(doubles == 1);
}
