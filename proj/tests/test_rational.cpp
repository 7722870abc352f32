#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sle0/pole_solver.hpp"
#include "sle0/rational.hpp"

#include "oracles.hpp"

using namespace sle0;
using Catch::Approx;

namespace {

RationalMap circle_map() {
  return build_from_poles(Configuration({-1.0, 1.0}), {Cplx(0.0, 0.0)});
}

}  // namespace

TEST_CASE("build_from_poles: circle example gives z + 1/z") {
  const RationalMap R = circle_map();
  // A_1 = (0+1)(0-1) = -1, so R(z) = z + 1/z -> P = z^2 + 1, Q = z
  CHECK(R.P().coeffs() == std::vector<double>{1.0, 0.0, 1.0});
  CHECK(R.Q().coeffs() == std::vector<double>{0.0, 1.0});
  CHECK(std::abs(R.eval(Cplx(2.0, 0.0)) - Cplx(2.5, 0.0)) < 1e-14);
}

TEST_CASE("build_from_poles: neighbor example matches (z^3-3)/(3z^2-7) up to affine") {
  const Configuration cfg({-3.0, 0.0, 1.0, 2.0});
  const double a = std::sqrt(7.0 / 3.0);
  const RationalMap R = build_from_poles(cfg, {Cplx(-a, 0.0), Cplx(a, 0.0)});
  // compare as equivalence classes: same Wronskian roots and same poles
  const auto wroots = roots(R.wronskian());
  REQUIRE(wroots.size() == 4);
  const std::vector<double> expect{-3.0, 0.0, 1.0, 2.0};
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(std::abs(wroots[i] - Cplx(expect[i], 0.0)) < 1e-8);
  REQUIRE(R.poles().size() == 2);
  CHECK(std::abs(R.poles()[0] - Cplx(-a, 0.0)) < 1e-9);
  CHECK(std::abs(R.poles()[1] - Cplx(a, 0.0)) < 1e-9);
  // value agreement with the printed form after normalizing the constant:
  // both derivatives must match exactly as rational functions
  const Cplx z(0.3, 0.7);
  const Cplx lhs = R.wronskian().eval(z) / (R.Q().eval(z) * R.Q().eval(z));
  const Cplx rhs = from_roots_real(expect).eval(z) /
                   (Polynomial({-7.0 / 3.0, 0.0, 1.0}).eval(z) * Polynomial({-7.0 / 3.0, 0.0, 1.0}).eval(z));
  CHECK(std::abs(lhs - rhs) < 1e-9);
}

TEST_CASE("build_from_poles: translation covariance") {
  const double h = 0.37;
  const RationalMap R = build_from_poles(Configuration({-1.0 + h, 1.0 + h}), {Cplx(h, 0.0)});
  // R(z) = (z-h) + 1/(z-h) + const; check via derivative which kills the constant
  const Cplx z(1.9, 0.4);
  const RationalMap R0 = circle_map();
  const Cplx d0 = R0.wronskian().eval(z - h) / (R0.Q().eval(z - h) * R0.Q().eval(z - h));
  const Cplx dh = R.wronskian().eval(z) / (R.Q().eval(z) * R.Q().eval(z));
  CHECK(std::abs(d0 - dh) < 1e-12);
}

TEST_CASE("build_from_poles rejects bad inputs") {
  const Configuration cfg({-1.0, 1.0});
  CHECK_THROWS_AS(build_from_poles(cfg, {Cplx(0.5, 0.0)}), StationaryViolated);
  CHECK_THROWS_AS(build_from_poles(cfg, {Cplx(1.0, 0.0)}), NonGeneric);
  CHECK_THROWS_AS(build_from_poles(cfg, {Cplx(1.0 + 5e-7, 0.0)}), NonGeneric);
}

TEST_CASE("wronskian examples") {
  CHECK((circle_map().wronskian() - Polynomial({-1.0, 0.0, 1.0})).max_abs_coeff() < 1e-12);

  // polynomial case: W reduces to P'
  const RationalMap H = RationalMap::polynomial_map(Polynomial({0.0, -3.0, 0.0, 1.0}));
  CHECK((H.wronskian() - Polynomial({-3.0, 0.0, 3.0})).max_abs_coeff() < 1e-12);
  CHECK(H.pole_deficient());
  CHECK(H.criticals() == std::vector<double>{-1.0, 1.0});

  // neighbor Wronskian has roots at the criticals with positive leading coeff
  const Configuration cfg({-3.0, 0.0, 1.0, 2.0});
  const double a = std::sqrt(7.0 / 3.0);
  const Polynomial w = build_from_poles(cfg, {Cplx(-a, 0.0), Cplx(a, 0.0)}).wronskian();
  CHECK(w.leading() > 0.0);
  CHECK(w.degree() == 4);
  for (double xc : cfg.x) CHECK(std::abs(w.eval(xc)) < 1e-9 * w.max_abs_coeff());
}

TEST_CASE("genericity") {
  const auto rep = circle_map().genericity();
  CHECK(rep.generic);
  CHECK(rep.min_distance == Approx(1.0));
  CHECK(rep.all_simple);

  // zeta = 1e-9: still generic by the set-intersection definition
  const RationalMap R = build_from_poles(Configuration({-1.0 + 1e-9, 1.0 + 1e-9}), {Cplx(1e-9, 0.0)});
  const auto rep2 = R.genericity();
  CHECK(rep2.generic);
  CHECK(rep2.min_distance == Approx(1.0).epsilon(1e-6));
}

TEST_CASE("rainbow canonical map is non-generic with a double pole") {
  // (z^3 + 7z - 3)/z^2 via the solver path (build_from_poles requires generic)
  const Configuration cfg({-3.0, 0.0, 1.0, 2.0});
  auto sol = refine_solution(cfg, Polynomial({-3.0, 7.1, 0.0, 1.0}), Polynomial({0.01, 0.02, 1.0}));
  REQUIRE(sol.has_value());
  REQUIRE_FALSE(sol->poles.generic);
  const RationalMap R = RationalMap::from_PQ(sol->P, sol->Q, cfg);
  const auto rep = R.genericity();
  CHECK_FALSE(rep.generic);
  CHECK_FALSE(rep.all_simple);
  CHECK(rep.min_distance < 1e-6);
}

TEST_CASE("locus polynomial h") {
  const RationalMap R = circle_map();
  // unit circle point
  CHECK(std::abs(R.locus_poly_eval(0.6, 0.8)) < 1e-12);
  // the real axis is always in the locus
  oracle::Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const double x = rng.uniform(-10.0, 10.0);
    CHECK(R.locus_poly_eval(x, 0.0) == 0.0);
  }
  // hyperbola y^2 = 3(x^2-1) for the polynomial map z^3 - 3z
  const RationalMap H = RationalMap::polynomial_map(Polynomial({0.0, -3.0, 0.0, 1.0}));
  CHECK(std::abs(H.locus_poly_eval(2.0, 3.0)) < 1e-9);
}

TEST_CASE("h vanishes identically on the real axis for random maps") {
  oracle::Rng rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const auto cfg = oracle::random_config(rng, 1 + int(rng.next_u64() % 2));
    const auto res = solve_all(cfg, {.seed = std::uint64_t(trial * 100 + 1), .retry_budget = 400, .classify = false});
    for (const auto& sol : res.solutions) {
      const RationalMap R = RationalMap::from_PQ(sol.P, sol.Q, cfg);
      for (int i = 0; i < 10; ++i)
        CHECK(R.locus_poly_eval(rng.uniform(-8.0, 8.0), 0.0) == 0.0);
    }
  }
}

TEST_CASE("canonical factorization: R' * Q^2 = W coefficient-wise") {
  oracle::Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const auto cfg = oracle::random_config(rng, 1 + int(rng.next_u64() % 3));
    const auto res = solve_all(cfg, {.seed = std::uint64_t(trial + 7), .retry_budget = 400, .classify = false});
    for (const auto& sol : res.solutions) {
      const RationalMap R = RationalMap::from_PQ(sol.P, sol.Q, cfg);
      const Polynomial W = from_roots_real(cfg.x);
      const Polynomial diff = R.wronskian() - W;
      CHECK(diff.max_abs_coeff() < 1e-8 * W.max_abs_coeff());
      // centroid relation
      double zsum = 0.0;
      for (Cplx zk : R.poles()) zsum += zk.real();
      CHECK(std::abs(zsum / cfg.n() - cfg.mean()) < 1e-9 * std::max(1.0, std::abs(cfg.mean())));
    }
  }
}

TEST_CASE("genericity <=> all poles simple on 1000 random valid configurations") {
  oracle::Rng rng(13);
  int configs = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto cfg = oracle::random_config(rng, 1 + int(rng.next_u64() % 3));
    const auto res = solve_all(cfg, {.seed = std::uint64_t(trial + 3), .retry_budget = 400, .classify = false});
    for (const auto& sol : res.solutions) {
      const auto rep = RationalMap::from_PQ(sol.P, sol.Q, cfg).genericity();
      REQUIRE(rep.generic == rep.all_simple);
    }
    ++configs;
  }
  CHECK(configs == 1000);
}

TEST_CASE("json round trip") {
  const RationalMap R = circle_map();
  const auto j = to_json(R);
  Polynomial P, Q;
  rational_from_json(j, P, Q);
  CHECK(P.coeffs() == R.P().coeffs());
  CHECK(Q.coeffs() == R.Q().coeffs());
}
