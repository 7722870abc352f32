#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "sle0/pole_solver.hpp"

#include "oracles.hpp"

using namespace sle0;
using Catch::Approx;

TEST_CASE("stationary_residual basics") {
  const Configuration cfg({-1.0, 1.0});
  auto f = stationary_residual(cfg, {Cplx(0.0, 0.0)});
  REQUIRE(f.size() == 1);
  CHECK(std::abs(f[0]) < 1e-15);

  f = stationary_residual(cfg, {Cplx(0.5, 0.0)});
  CHECK(f[0].real() == Approx(-4.0 / 3.0));

  const Configuration table({-3.0, 0.0, 1.0, 2.0});
  const double a = std::sqrt(7.0 / 3.0);
  f = stationary_residual(table, {Cplx(-a, 0.0), Cplx(a, 0.0)});
  CHECK(max_abs(f) < 1e-12);

  CHECK_THROWS_AS(stationary_residual(cfg, {Cplx(1.0, 0.0)}), CoincidentPoints);
  CHECK_THROWS_AS(stationary_residual(table, {Cplx(0.3, 0.0), Cplx(0.3, 1e-12)}),
                  CoincidentPoints);
}

TEST_CASE("solve_all: circle") {
  const auto res = solve_all(Configuration({-1.0, 1.0}));
  REQUIRE(res.solutions.size() == 1);
  CHECK(std::abs(res.solutions[0].poles.zeta[0]) < 1e-12);
  CHECK(res.patterns[0] == LinkPattern({{1, 2}}));
}

TEST_CASE("solve_all: table configuration has neighbor and rainbow") {
  const Configuration cfg({-3.0, 0.0, 1.0, 2.0});
  const auto res = solve_all(cfg);
  REQUIRE(res.solutions.size() == 2);
  const double a = std::sqrt(7.0 / 3.0);

  int found_neighbor = 0, found_rainbow = 0;
  for (std::size_t i = 0; i < res.solutions.size(); ++i) {
    const auto& z = res.solutions[i].poles.zeta;
    if (res.patterns[i] == LinkPattern({{1, 2}, {3, 4}})) {
      ++found_neighbor;
      CHECK(std::abs(z[0] - Cplx(-a, 0.0)) < 1e-9);
      CHECK(std::abs(z[1] - Cplx(a, 0.0)) < 1e-9);
      CHECK(res.solutions[i].poles.generic);
    } else if (res.patterns[i] == LinkPattern({{1, 4}, {2, 3}})) {
      ++found_rainbow;
      // double pole at 0: clustered
      const auto clusters = cluster_points(z, 1e-7);
      REQUIRE(clusters.size() == 1);
      CHECK(clusters[0].second == 2);
      CHECK(std::abs(clusters[0].first) < 1e-7);
      CHECK_FALSE(res.solutions[i].poles.generic);
    }
  }
  CHECK(found_neighbor == 1);
  CHECK(found_rainbow == 1);
}

TEST_CASE("solve_all: n=3 finds all five patterns") {
  const Configuration cfg({-5.0, -3.0, -1.0, 1.0, 3.0, 5.0});
  const auto res = solve_all(cfg);
  REQUIRE(res.solutions.size() == 5);
  std::set<LinkPattern> pats(res.patterns.begin(), res.patterns.end());
  CHECK(pats.size() == 5);
  for (const auto& p : pats) CHECK(is_noncrossing(p));
  for (const auto& s : res.solutions)
    if (s.poles.generic) CHECK(s.poles.residual < 1e-8);
}

TEST_CASE("every solution satisfies centroid and residual bounds") {
  oracle::Rng rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + int(rng.next_u64() % 3);
    const auto cfg = oracle::random_config(rng, n);
    const auto res = solve_all(cfg, {.seed = std::uint64_t(trial), .retry_budget = 400, .classify = false});
    REQUIRE(res.solutions.size() == catalan(n));
    for (const auto& s : res.solutions) {
      Cplx zsum = 0.0;
      for (Cplx z : s.poles.zeta) zsum += z;
      CHECK(std::abs(zsum / double(n) - cfg.mean()) < 1e-9 * std::max(1.0, cfg.diameter()));
      if (s.poles.generic) CHECK(s.poles.residual < 1e-8);
    }
  }
}

TEST_CASE("n=2 closed form matches the solver") {
  oracle::Rng rng(59);
  for (int trial = 0; trial < 50; ++trial) {
    const auto cfg = oracle::random_config(rng, 2);
    const auto res = solve_all(cfg, {.seed = std::uint64_t(trial)});
    REQUIRE(res.solutions.size() == 2);
    for (int sign : {+1, -1}) {
      const PoleSet cf = poles_n2_closed_form(cfg, sign);
      const LinkPattern expect = pattern_n2(sign);
      bool matched = false;
      for (std::size_t i = 0; i < res.solutions.size(); ++i) {
        if (res.patterns[i] == expect) {
          matched = true;
          REQUIRE(res.solutions[i].poles.zeta.size() == 2);
          for (int k = 0; k < 2; ++k)
            CHECK(std::abs(res.solutions[i].poles.zeta[k] - cf.zeta[k]) < 1e-8);
        }
      }
      CHECK(matched);
    }
  }
}

TEST_CASE("closed form at the table configuration") {
  const Configuration cfg({-3.0, 0.0, 1.0, 2.0});
  const double a = std::sqrt(7.0 / 3.0);
  const PoleSet plus = poles_n2_closed_form(cfg, +1);
  CHECK(std::abs(plus.zeta[0] - Cplx(-a, 0.0)) < 1e-12);
  CHECK(std::abs(plus.zeta[1] - Cplx(a, 0.0)) < 1e-12);
  CHECK(plus.residual < 1e-10);
  const PoleSet minus = poles_n2_closed_form(cfg, -1);
  CHECK(std::abs(minus.zeta[0]) < 1e-12);
  CHECK(std::abs(minus.zeta[1]) < 1e-12);

  // conjugation-closed pair with small residual on a symmetric configuration
  const Configuration sym({-2.0, -1.0, 1.0, 2.0});
  const PoleSet psym = poles_n2_closed_form(sym, -1);
  CHECK(psym.zeta[0] == std::conj(psym.zeta[1]));
  CHECK(psym.zeta[0].imag() != 0.0);
  CHECK(psym.residual < 1e-10);
}

TEST_CASE("solve_pattern picks the requested class") {
  const Configuration cfg({-3.0, 0.0, 1.0, 2.0});
  const auto nb = solve_pattern(cfg, LinkPattern({{1, 2}, {3, 4}}));
  CHECK(std::abs(nb.poles.zeta[1] - Cplx(std::sqrt(7.0 / 3.0), 0.0)) < 1e-9);
  const auto rb = solve_pattern(cfg, LinkPattern({{1, 4}, {2, 3}}));
  CHECK(std::abs(rb.poles.zeta[0]) < 1e-7);
  CHECK_THROWS_AS(solve_pattern(cfg, LinkPattern({{1, 3}, {2, 4}})), InvalidInput);
}

TEST_CASE("classify_pattern on known pole sets") {
  const Configuration cfg({-3.0, 0.0, 1.0, 2.0});
  const double a = std::sqrt(7.0 / 3.0);
  CHECK(classify_pattern(cfg, {Cplx(-a, 0.0), Cplx(a, 0.0)}) == LinkPattern({{1, 2}, {3, 4}}));
  CHECK(classify_pattern(cfg, {Cplx(0.0, 0.0), Cplx(0.0, 0.0)}) == LinkPattern({{1, 4}, {2, 3}}));
  CHECK(classify_pattern(Configuration({-1.0, 1.0}), {Cplx(0.0, 0.0)}) == LinkPattern({{1, 2}}));
}

TEST_CASE("translation and dilation covariance of the pole functions") {
  oracle::Rng rng(101);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 1 + int(rng.next_u64() % 2);
    const auto cfg = oracle::random_config(rng, n);
    const auto base = solve_all(cfg, {.seed = std::uint64_t(trial)});
    const double h = rng.uniform(-3.0, 3.0);
    const double r = rng.uniform(0.3, 2.5);
    const auto shifted = solve_all(cfg.translated(h), {.seed = std::uint64_t(trial + 1000)});
    const auto scaled = solve_all(cfg.scaled(r), {.seed = std::uint64_t(trial + 2000)});
    REQUIRE(shifted.solutions.size() == base.solutions.size());
    REQUIRE(scaled.solutions.size() == base.solutions.size());
    for (std::size_t i = 0; i < base.solutions.size(); ++i) {
      // match by pattern label
      for (std::size_t j = 0; j < shifted.solutions.size(); ++j) {
        if (shifted.patterns[j] == base.patterns[i])
          for (std::size_t k = 0; k < base.solutions[i].poles.zeta.size(); ++k)
            CHECK(std::abs(shifted.solutions[j].poles.zeta[k] -
                           (base.solutions[i].poles.zeta[k] + h)) < 1e-8);
      }
      for (std::size_t j = 0; j < scaled.solutions.size(); ++j) {
        if (scaled.patterns[j] == base.patterns[i])
          for (std::size_t k = 0; k < base.solutions[i].poles.zeta.size(); ++k)
            CHECK(std::abs(scaled.solutions[j].poles.zeta[k] -
                           r * base.solutions[i].poles.zeta[k]) < 1e-8 * std::max(1.0, r));
      }
    }
  }
}

TEST_CASE("warm refine tracks a moving configuration") {
  const Configuration cfg({-3.0, 0.0, 1.0, 2.0});
  const auto nb = solve_pattern(cfg, LinkPattern({{1, 2}, {3, 4}}));
  Polynomial P = nb.P, Q = nb.Q;
  std::vector<double> xs = cfg.x;
  for (int step = 0; step < 40; ++step) {
    xs[1] += 0.01;
    auto sol = refine_solution(Configuration(xs), P, Q);
    REQUIRE(sol.has_value());
    P = sol->P;
    Q = sol->Q;
    CHECK(sol->poles.residual < 1e-8);
  }
}
