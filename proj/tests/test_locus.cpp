#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sle0/locus.hpp"
#include "sle0/pole_solver.hpp"

#include "oracles.hpp"

using namespace sle0;
using Catch::Approx;

namespace {

const Configuration kTable({-3.0, 0.0, 1.0, 2.0});

RationalMap map_for(const Configuration& cfg, const LinkPattern& alpha) {
  const auto sol = solve_pattern(cfg, alpha);
  return RationalMap::from_PQ(sol.P, sol.Q, cfg);
}

}  // namespace

TEST_CASE("circle: one curve on the unit semicircle") {
  const RationalMap R = build_from_poles(Configuration({-1.0, 1.0}), {Cplx(0.0, 0.0)});
  const LocusGraph g = trace(R);
  REQUIRE(g.curves.size() == 1);
  REQUIRE_FALSE(g.has_unbounded);
  double worst = 0.0;
  for (Cplx p : g.curves[0].points) worst = std::max(worst, std::abs(std::abs(p) - 1.0));
  CHECK(worst < 1e-6);
  CHECK(classify(g) == LinkPattern({{1, 2}}));
}

TEST_CASE("hyperbola: two unbounded branches on y^2 = 3(x^2-1)") {
  const RationalMap R = RationalMap::polynomial_map(Polynomial({0.0, -3.0, 0.0, 1.0}));
  TraceOptions opt;
  opt.bbox = Box{-5.0, 5.0, 0.0, 5.0};
  const LocusGraph g = trace(R, opt);
  REQUIRE(g.curves.size() == 2);
  CHECK(g.has_unbounded);
  for (const auto& c : g.curves) {
    CHECK_FALSE(c.bounded());
    for (Cplx p : c.points)
      if (p.imag() > 0.0)
        CHECK(std::abs(p.imag() * p.imag() - 3.0 * (p.real() * p.real() - 1.0)) < 1e-6);
  }
  CHECK_THROWS_AS(classify(g), UnboundedBranch);
}

TEST_CASE("neighbor locus matches the printed closed form") {
  const RationalMap R = map_for(kTable, LinkPattern({{1, 2}, {3, 4}}));
  TraceOptions opt;
  opt.step = 5e-4 * 5.0;
  const LocusGraph g = trace(R, opt);
  REQUIRE(g.curves.size() == 2);
  CHECK(classify(g) == LinkPattern({{1, 2}, {3, 4}}));

  // ordinates at sampled abscissae, linear interpolation on the polyline
  for (const auto& c : g.curves) {
    for (std::size_t i = 0; i + 1 < c.points.size(); ++i) {
      const Cplx p = c.points[i];
      if (p.imag() < 0.05) continue;
      const auto y = closed_form_locus_n2(kTable, LinkPattern({{1, 2}, {3, 4}}), p.real());
      REQUIRE(y.size() == 1);
      CHECK(std::abs(p.imag() - y[0]) < 1e-5);
    }
  }
}

TEST_CASE("rainbow locus: outer and inner branch, double pole on the inner") {
  const RationalMap R = map_for(kTable, LinkPattern({{1, 4}, {2, 3}}));
  TraceOptions opt;
  opt.step = 5e-4 * 5.0;
  const LocusGraph g = trace(R, opt);
  REQUIRE(g.curves.size() == 2);
  CHECK(classify(g) == LinkPattern({{1, 4}, {2, 3}}));

  const LinkPattern rb({{1, 4}, {2, 3}});
  for (const auto& c : g.curves) {
    const bool outer = std::min(c.start_index, c.end_index) == 1;
    for (std::size_t i = 0; i + 1 < c.points.size(); ++i) {
      const Cplx p = c.points[i];
      if (p.imag() < 0.05) continue;
      const auto ys = closed_form_locus_n2(kTable, rb, p.real());
      const double expect = outer ? ys[0] : ys.at(1);
      CHECK(std::abs(p.imag() - expect) < 1e-5);
    }
  }
  // outer curve passes through (0, sqrt 7)
  for (const auto& c : g.curves) {
    if (std::min(c.start_index, c.end_index) != 1) continue;
    double best = 1e300;
    for (Cplx p : c.points) best = std::min(best, std::abs(p - Cplx(0.0, std::sqrt(7.0))));
    CHECK(best < 2e-3);
  }
}

TEST_CASE("closed-form locus oracle values") {
  const LinkPattern nb({{1, 2}, {3, 4}});
  const LinkPattern rb({{1, 4}, {2, 3}});
  CHECK(closed_form_locus_n2(kTable, nb, -3.0)[0] == Approx(0.0).margin(1e-12));
  CHECK(closed_form_locus_n2(kTable, rb, 0.0)[0] == Approx(std::sqrt(7.0)).margin(1e-12));
  // regression pin: evaluate the printed neighbor formula at x = 1.5
  CHECK(closed_form_locus_n2(kTable, nb, 1.5)[0] == Approx(0.4884861307245254).margin(1e-12));
  CHECK_THROWS_AS(closed_form_locus_n2(kTable, nb, 0.5), OutOfRange);
  CHECK_THROWS_AS(closed_form_locus_n2(Configuration({-1.0, 0.0, 1.0, 2.0}), nb, 1.5),
                  OutOfRange);
}

TEST_CASE("vertex residuals, simplicity, endpoint bookkeeping on 50 random solutions") {
  oracle::Rng rng(171);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + int(rng.next_u64() % 3);
    const auto cfg = oracle::random_config(rng, n);
    const auto res = solve_all(cfg, {.seed = std::uint64_t(trial), .classify = false});
    for (const auto& sol : res.solutions) {
      const RationalMap R = RationalMap::from_PQ(sol.P, sol.Q, cfg);
      TraceOptions fine;  // sagitta well under the 1e-5 pole-on-curve bound
      fine.step = 2e-4 * cfg.diameter();
      const LocusGraph g = trace(R, fine);
      REQUIRE(static_cast<int>(g.curves.size()) == n);
      std::vector<int> used;
      for (const auto& c : g.curves) {
        REQUIRE(c.bounded());
        used.push_back(c.start_index);
        used.push_back(c.end_index);
        // endpoints at their criticals
        CHECK(std::abs(c.points.front() -
                       Cplx(cfg.x[static_cast<std::size_t>(c.start_index - 1)], 0.0)) < 1e-6);
        CHECK(std::abs(c.points.back() -
                       Cplx(cfg.x[static_cast<std::size_t>(c.end_index - 1)], 0.0)) < 1e-6);
        for (Cplx p : c.points) {
          const double scale = std::max(R.locus_scale(p.real(), p.imag()),
                                        1e-6 * R.locus_scale(cfg.x[0], 0.1));
          CHECK(std::abs(R.locus_poly_eval(p.real(), p.imag())) < 1e-6 * scale);
        }
      }
      std::sort(used.begin(), used.end());
      for (int j = 0; j < 2 * n; ++j) REQUIRE(used[static_cast<std::size_t>(j)] == j + 1);
      CHECK(is_noncrossing(classify(g)));

      // poles of R in H lie on some traced curve
      for (Cplx zk : R.poles()) {
        if (zk.imag() < 1e-6) continue;
        double best = 1e300;
        for (const auto& c : g.curves)
          best = std::min(best, oracle::point_polyline_dist(zk, c.points));
        CHECK(best < 1e-5);
      }
    }
  }
}

TEST_CASE("classify rejects a crossing endpoint graph") {
  LocusGraph bad;
  Curve a, b;
  a.start_index = 1;
  a.end_index = 3;
  a.points = {Cplx(-3, 0), Cplx(-1, 1), Cplx(1, 0)};
  b.start_index = 2;
  b.end_index = 4;
  b.points = {Cplx(0, 0), Cplx(1, 1), Cplx(2, 0)};
  bad.curves = {a, b};
  CHECK_THROWS_AS(classify(bad), CrossingPattern);

  LocusGraph dup;
  b.start_index = 1;
  dup.curves = {a, b};
  CHECK_THROWS_AS(classify(dup), TraceFailed);
}

TEST_CASE("curves are mutually non-crossing polylines") {
  const RationalMap R = map_for(kTable, LinkPattern({{1, 4}, {2, 3}}));
  const LocusGraph g = trace(R);
  REQUIRE(g.curves.size() == 2);
  // min distance between the two rainbow curves stays positive
  double best = 1e300;
  for (std::size_t i = 0; i < g.curves[0].points.size(); i += 5)
    best = std::min(best, oracle::point_polyline_dist(g.curves[0].points[i], g.curves[1].points));
  CHECK(best > 1e-3);
}
