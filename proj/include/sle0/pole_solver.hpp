#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include "sle0/configuration.hpp"
#include "sle0/detail/linalg.hpp"
#include "sle0/detail/rng.hpp"
#include "sle0/errors.hpp"
#include "sle0/link_pattern.hpp"
#include "sle0/locus.hpp"
#include "sle0/polynomial.hpp"
#include "sle0/rational.hpp"
#include "sle0/threading.hpp"

namespace sle0 {

/// Conjugation-closed multiset of n poles with diagnostics.
struct PoleSet {
  std::vector<Cplx> zeta;   // sorted by (re, im)
  double residual = 0.0;    // max |F_k| if generic, else coefficient residual
  bool generic = true;
};

struct PoleSolution {
  PoleSet poles;
  Polynomial P, Q;  // canonical pair realizing the solution
};

namespace detail {

// The solver works on u = (p_0..p_{n-1}, q_0..q_{n-1}) with
// P = z^{n+1} + 0 z^n + sum p_i z^i and Q = z^n + sum q_i z^i.
// Equations: coefficients 0..2n-1 of P'Q - PQ' - W, W = prod(z - x_j).
// Double poles are regular points of this system, unlike the zeta-space
// stationary equations.

inline void build_pq(const std::vector<double>& u, int n, Polynomial& P, Polynomial& Q) {
  std::vector<double> pc(static_cast<std::size_t>(n) + 2, 0.0);
  std::vector<double> qc(static_cast<std::size_t>(n) + 1, 0.0);
  for (int i = 0; i < n; ++i) pc[i] = u[i];
  pc[static_cast<std::size_t>(n) + 1] = 1.0;
  for (int i = 0; i < n; ++i) qc[i] = u[static_cast<std::size_t>(n) + i];
  qc[static_cast<std::size_t>(n)] = 1.0;
  P = Polynomial(std::move(pc));
  Q = Polynomial(std::move(qc));
}

inline std::vector<double> wronskian_residual(const std::vector<double>& u, int n,
                                              const Polynomial& W) {
  Polynomial P, Q;
  build_pq(u, n, P, Q);
  const Polynomial F = P.derivative() * Q - P * Q.derivative() - W;
  std::vector<double> r(static_cast<std::size_t>(2 * n));
  for (int i = 0; i < 2 * n; ++i) r[static_cast<std::size_t>(i)] = F[static_cast<std::size_t>(i)];
  return r;
}

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline Mat wronskian_jacobian(const std::vector<double>& u, int n) {
  Polynomial P, Q;
  build_pq(u, n, P, Q);
  Mat J(static_cast<std::size_t>(2 * n), static_cast<std::size_t>(2 * n));
  for (int i = 0; i < n; ++i) {
    // d/dp_i: (z^i)' Q - z^i Q'
    std::vector<double> zi(static_cast<std::size_t>(i) + 1, 0.0);
    zi.back() = 1.0;
    const Polynomial col = Polynomial(zi).derivative() * Q - Polynomial(zi) * Q.derivative();
    for (int r = 0; r < 2 * n; ++r) J(static_cast<std::size_t>(r), static_cast<std::size_t>(i)) = col[static_cast<std::size_t>(r)];
  }
  for (int i = 0; i < n; ++i) {
    // d/dq_i: P' z^i - P (z^i)'
    std::vector<double> zi(static_cast<std::size_t>(i) + 1, 0.0);
    zi.back() = 1.0;
    const Polynomial col = P.derivative() * Polynomial(zi) - P * Polynomial(zi).derivative();
    for (int r = 0; r < 2 * n; ++r) J(static_cast<std::size_t>(r), static_cast<std::size_t>(n + i)) = col[static_cast<std::size_t>(r)];
  }
  return J;
}

// Damped Newton with backtracking; converges to machine precision (two
// extra full steps after the tolerance is met, so double poles cluster
// within ~1e-8 after root extraction).
inline bool newton_wronskian(std::vector<double>& u, int n, const Polynomial& W,
                             int max_iters = 100) {
  const double scale = std::max(1.0, W.max_abs_coeff());
  const double tol = 1e-12 * scale;
  for (int it = 0; it < max_iters; ++it) {
    std::vector<double> F = wronskian_residual(u, n, W);
    const double fn = max_abs(F);
    if (fn < tol) {
      for (int polish = 0; polish < 2; ++polish) {
        std::vector<double> step;
        if (!lu_solve(wronskian_jacobian(u, n), wronskian_residual(u, n, W), step)) break;
        for (int i = 0; i < 2 * n; ++i) u[static_cast<std::size_t>(i)] -= step[static_cast<std::size_t>(i)];
      }
      return true;
    }
    std::vector<double> step;
    if (!lu_solve(wronskian_jacobian(u, n), F, step)) return false;
    double lam = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 12; ++bt) {
      std::vector<double> cand = u;
      for (int i = 0; i < 2 * n; ++i) cand[static_cast<std::size_t>(i)] -= lam * step[static_cast<std::size_t>(i)];
      const double fc = max_abs(wronskian_residual(cand, n, W));
      if (fc < fn * (1.0 - 0.25 * lam) || fc < tol) {
        u = std::move(cand);
        accepted = true;
        break;
      }
      lam *= 0.5;
    }
    if (!accepted)
      for (int i = 0; i < 2 * n; ++i) u[static_cast<std::size_t>(i)] -= lam * step[static_cast<std::size_t>(i)];
  }
  return max_abs(wronskian_residual(u, n, W)) < 1e-12 * std::max(1.0, W.max_abs_coeff());
}

// Seed from prescribed pole positions: Q from the poles, P by linear least
// squares (the residual is linear in P for fixed Q).
inline std::vector<double> seed_from_poles(const std::vector<Cplx>& poles, int n,
                                           const Polynomial& W) {
  const Polynomial Q = from_roots(poles);
  std::vector<double> pfix(static_cast<std::size_t>(n) + 2, 0.0);
  pfix.back() = 1.0;
  const Polynomial Pfix(pfix);
  const Polynomial r0 = Pfix.derivative() * Q - Pfix * Q.derivative() - W;
  Mat M(static_cast<std::size_t>(2 * n), static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    std::vector<double> zi(static_cast<std::size_t>(i) + 1, 0.0);
    zi.back() = 1.0;
    const Polynomial col = Polynomial(zi).derivative() * Q - Polynomial(zi) * Q.derivative();
    for (int r = 0; r < 2 * n; ++r) M(static_cast<std::size_t>(r), static_cast<std::size_t>(i)) = col[static_cast<std::size_t>(r)];
  }
  std::vector<double> rhs(static_cast<std::size_t>(2 * n));
  for (int r = 0; r < 2 * n; ++r) rhs[static_cast<std::size_t>(r)] = -r0[static_cast<std::size_t>(r)];
  std::vector<double> p;
  if (!lstsq(M, rhs, p)) p.assign(static_cast<std::size_t>(n), 0.0);
  std::vector<double> u(static_cast<std::size_t>(2 * n), 0.0);
  for (int i = 0; i < n; ++i) u[static_cast<std::size_t>(i)] = p[static_cast<std::size_t>(i)];
  for (int i = 0; i < n; ++i) u[static_cast<std::size_t>(n + i)] = Q[static_cast<std::size_t>(i)];
  return u;
}

inline std::vector<Cplx> sorted_poles(const Polynomial& Q) {
  std::vector<Cplx> z = roots(Q);
  std::sort(z.begin(), z.end(), [](Cplx a, Cplx b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return z;
}

// multiset equality by greedy nearest matching; sorting by (re, im) is not
// stable for poles sharing a real part up to rounding
inline bool same_pole_set(const std::vector<Cplx>& a, const std::vector<Cplx>& b,
                          double tol = 1e-6) {
  if (a.size() != b.size()) return false;
  std::vector<bool> used(b.size(), false);
  for (const Cplx& p : a) {
    bool found = false;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (!used[j] && std::abs(p - b[j]) <= tol) {
        used[j] = true;
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace detail

/// Refine a canonical (P, Q) pair at a (possibly moved) configuration.
/// Warm starts track a solution branch smoothly, including through
/// double-pole states.
inline std::optional<PoleSolution> refine_solution(const Configuration& cfg,
                                                   const Polynomial& P0, const Polynomial& Q0,
                                                   int max_iters = 60) {
  const int n = cfg.n();
  const Polynomial W = from_roots_real(cfg.x);
  std::vector<double> u(static_cast<std::size_t>(2 * n), 0.0);
  // strip P0's z^n coefficient into the translation gauge
  const double pn = P0[static_cast<std::size_t>(n)];
  for (int i = 0; i < n; ++i) u[static_cast<std::size_t>(i)] = P0[static_cast<std::size_t>(i)] - pn * Q0[static_cast<std::size_t>(i)];
  for (int i = 0; i < n; ++i) u[static_cast<std::size_t>(n + i)] = Q0[static_cast<std::size_t>(i)];
  if (!detail::newton_wronskian(u, n, W, max_iters)) return std::nullopt;

  PoleSolution sol;
  detail::build_pq(u, n, sol.P, sol.Q);
  sol.poles.zeta = polish_stationary(cfg, detail::sorted_poles(sol.Q));
  double mind = std::numeric_limits<double>::infinity();
  for (Cplx zk : sol.poles.zeta)
    for (double xj : cfg.x) mind = std::min(mind, std::abs(zk - xj));
  sol.poles.generic = mind > 1e-6;
  if (sol.poles.generic) {
    sol.poles.residual = max_abs(stationary_residual(cfg, sol.poles.zeta));
  } else {
    sol.poles.residual =
        detail::max_abs(detail::wronskian_residual(u, n, W)) / std::max(1.0, W.max_abs_coeff());
  }
  return sol;
}

struct SolveOptions {
  std::uint64_t seed = 0;
  int retry_budget = 400;  // random restarts after the pattern seeds
  bool classify = true;    // label solutions by tracing the locus
};

struct SolveResult {
  std::vector<PoleSolution> solutions;           // sorted by pattern (if classified)
  std::vector<LinkPattern> patterns;             // parallel to solutions
  bool complete = false;                         // found exactly C_n distinct solutions
};

/// Pattern label for a pole set: rebuild the canonical pair and read the
/// pairing off the traced real locus. Works for non-generic (double-pole)
/// sets as well.
inline LinkPattern classify_pattern(const Configuration& cfg, const std::vector<Cplx>& zeta);

namespace detail {

inline SolveResult solve_all_impl(const Configuration& cfg, const SolveOptions& opt) {
  const int n = cfg.n();
  const Polynomial W = from_roots_real(cfg.x);
  const auto patterns = enumerate_noncrossing(n);
  const std::size_t want = patterns.size();
  const double diam = cfg.diameter();

  SolveResult out;
  auto try_accept = [&](const std::vector<double>& u_seed) -> bool {
    std::vector<double> u = u_seed;
    if (!newton_wronskian(u, n, W)) return false;
    Polynomial P, Q;
    build_pq(u, n, P, Q);
    std::vector<Cplx> z = sorted_poles(Q);
    for (const auto& s : out.solutions)
      if (same_pole_set(s.poles.zeta, z)) return false;
    PoleSolution sol;
    sol.P = std::move(P);
    sol.Q = std::move(Q);
    sol.poles.zeta = polish_stationary(cfg, std::move(z));
    double mind = std::numeric_limits<double>::infinity();
    for (Cplx zk : sol.poles.zeta)
      for (double xj : cfg.x) mind = std::min(mind, std::abs(zk - xj));
    sol.poles.generic = mind > 1e-6;
    sol.poles.residual = sol.poles.generic
                             ? sle0::max_abs(stationary_residual(cfg, sol.poles.zeta))
                             : max_abs(wronskian_residual(u, n, W)) / std::max(1.0, W.max_abs_coeff());
    out.solutions.push_back(std::move(sol));
    return true;
  };

  // deterministic first pass: midpoint seeds, one per pattern, in parallel
  std::vector<std::vector<double>> seeds(want);
  parallel_for(want, [&](std::size_t i) {
    std::vector<Cplx> mids;
    for (auto [a, b] : patterns[i].pairs)
      mids.emplace_back(0.5 * (cfg.x[static_cast<std::size_t>(a - 1)] + cfg.x[static_cast<std::size_t>(b - 1)]), 0.0);
    seeds[i] = seed_from_poles(mids, n, W);
  });
  for (const auto& s : seeds) try_accept(s);

  // random restarts around perturbed midpoints until C_n found
  int round = 0;
  while (out.solutions.size() < want && round < opt.retry_budget) {
    Rng rng(mix_seed(opt.seed, static_cast<std::uint64_t>(round) + 1));
    const auto& pat = patterns[rng.next_u64() % want];
    std::vector<Cplx> mids;
    for (auto [a, b] : pat.pairs) {
      const double m = 0.5 * (cfg.x[static_cast<std::size_t>(a - 1)] + cfg.x[static_cast<std::size_t>(b - 1)]);
      mids.emplace_back(m + rng.centered(0.2 * diam), 0.0);
    }
    try_accept(seed_from_poles(mids, n, W));
    ++round;
  }
  out.complete = out.solutions.size() == want;
  return out;
}

}  // namespace detail

struct IncompleteEnumeration : Error {
  IncompleteEnumeration(std::string msg, SolveResult partial)
      : Error(std::move(msg)), partial(std::move(partial)) {}
  SolveResult partial;
};

/// All C_n pole configurations for cfg, each labeled by its link pattern
/// (via locus tracing). Deterministic for a fixed seed. Throws
/// IncompleteEnumeration (with the partial result) if the budget is
/// exhausted early.
inline SolveResult solve_all(const Configuration& cfg, const SolveOptions& opt = {}) {
  SolveResult res = detail::solve_all_impl(cfg, opt);
  if (!res.complete)
    throw IncompleteEnumeration("solve_all: found " + std::to_string(res.solutions.size()) +
                                    " of " + std::to_string(catalan(cfg.n())) + " solutions",
                                std::move(res));
  if (opt.classify) {
    res.patterns.resize(res.solutions.size());
    std::vector<int> order(res.solutions.size());
    parallel_for(res.solutions.size(), [&](std::size_t i) {
      res.patterns[i] = classify_pattern(cfg, res.solutions[i].poles.zeta);
    });
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return res.patterns[static_cast<std::size_t>(a)] < res.patterns[static_cast<std::size_t>(b)];
    });
    SolveResult sorted;
    sorted.complete = res.complete;
    for (int idx : order) {
      sorted.solutions.push_back(std::move(res.solutions[static_cast<std::size_t>(idx)]));
      sorted.patterns.push_back(std::move(res.patterns[static_cast<std::size_t>(idx)]));
    }
    res = std::move(sorted);
  }
  return res;
}

/// The unique pole set whose traced locus realizes `alpha`.
inline PoleSolution solve_pattern(const Configuration& cfg, const LinkPattern& alpha,
                                  const SolveOptions& opt = {}) {
  if (!is_noncrossing(alpha)) throw InvalidInput("solve_pattern: pattern must be non-crossing");
  SolveOptions o = opt;
  o.classify = true;
  const SolveResult res = solve_all(cfg, o);
  for (std::size_t i = 0; i < res.solutions.size(); ++i)
    if (res.patterns[i] == alpha) return res.solutions[i];
  throw PatternNotFound("solve_pattern: no solution realizes pattern " + alpha.str());
}

/// Closed-form n=2 poles: zeta_{1,2}^± = (s1 ∓ w)/4,
/// w = sqrt(s1^2 - (8/3) s2 ± (8/3) sqrt(S)), S = s2^2 - 3 s1 s3 + 12 s4.
/// sign=+1 realizes the neighbor pattern {{1,2},{3,4}}, sign=-1 the rainbow
/// {{1,4},{2,3}} (convention fixed empirically against compute_U on solved
/// poles; see tests).
inline PoleSet poles_n2_closed_form(const Configuration& cfg, int sign) {
  if (cfg.n() != 2) throw InvalidInput("poles_n2_closed_form: requires n = 2");
  const auto e = elementary_symmetric(cfg.x, 4);
  const double s1 = e[1], s2 = e[2], s3 = e[3], s4 = e[4];
  const double S = s2 * s2 - 3.0 * s1 * s3 + 12.0 * s4;
  const Cplx inner = Cplx(s1 * s1 - (8.0 / 3.0) * s2 + sign * (8.0 / 3.0) * std::sqrt(S), 0.0);
  const Cplx w = std::sqrt(inner);
  PoleSet ps;
  ps.zeta = {0.25 * (Cplx(s1, 0.0) - w), 0.25 * (Cplx(s1, 0.0) + w)};
  std::sort(ps.zeta.begin(), ps.zeta.end(), [](Cplx a, Cplx b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  double mind = std::numeric_limits<double>::infinity();
  for (Cplx zk : ps.zeta)
    for (double xj : cfg.x) mind = std::min(mind, std::abs(zk - xj));
  ps.generic = mind > 1e-6;
  ps.residual = ps.generic ? max_abs(stationary_residual(cfg, ps.zeta)) : 0.0;
  return ps;
}

inline LinkPattern pattern_n2(int sign) {
  return sign > 0 ? LinkPattern({{1, 2}, {3, 4}}) : LinkPattern({{1, 4}, {2, 3}});
}

inline LinkPattern classify_pattern(const Configuration& cfg, const std::vector<Cplx>& zeta) {
  const int n = cfg.n();
  if (static_cast<int>(zeta.size()) != n)
    throw InvalidInput("classify_pattern: need n poles");
  const Polynomial W = from_roots_real(cfg.x);
  double sep = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k)
    for (int l = k + 1; l < n; ++l)
      sep = std::min(sep, std::abs(zeta[static_cast<std::size_t>(k)] - zeta[static_cast<std::size_t>(l)]));
  std::vector<double> u;
  if (sep > 1e-6) {
    // stationary simple poles admit the exact partial-fraction numerator
    // P = z Q - sum_k A_k prod_{l != k} (z - zeta_l); the least-squares seed
    // can be symmetry-degenerate and send Newton to another basin
    const Polynomial Q = from_roots(zeta);
    std::vector<Cplx> num(static_cast<std::size_t>(n) + 2, 0.0);
    for (int i = 0; i <= Q.degree(); ++i) num[static_cast<std::size_t>(i) + 1] = Q[static_cast<std::size_t>(i)];
    for (int k = 0; k < n; ++k) {
      Cplx A = 1.0;
      for (double xj : cfg.x) A *= zeta[static_cast<std::size_t>(k)] - xj;
      std::vector<Cplx> part{1.0};
      for (int l = 0; l < n; ++l) {
        if (l == k) continue;
        A /= (zeta[static_cast<std::size_t>(k)] - zeta[static_cast<std::size_t>(l)]) *
             (zeta[static_cast<std::size_t>(k)] - zeta[static_cast<std::size_t>(l)]);
        std::vector<Cplx> next(part.size() + 1, 0.0);
        for (std::size_t i = 0; i < part.size(); ++i) {
          next[i] += part[i] * (-zeta[static_cast<std::size_t>(l)]);
          next[i + 1] += part[i];
        }
        part = std::move(next);
      }
      for (std::size_t i = 0; i < part.size(); ++i) num[i] -= A * part[i];
    }
    u.assign(static_cast<std::size_t>(2 * n), 0.0);
    const double pn = num[static_cast<std::size_t>(n)].real();
    for (int i = 0; i < n; ++i)
      u[static_cast<std::size_t>(i)] =
          num[static_cast<std::size_t>(i)].real() - pn * Q[static_cast<std::size_t>(i)];
    for (int i = 0; i < n; ++i) u[static_cast<std::size_t>(n + i)] = Q[static_cast<std::size_t>(i)];
  } else {
    u = detail::seed_from_poles(zeta, n, W);
  }
  if (!detail::newton_wronskian(u, n, W))
    throw TraceFailed("classify_pattern: could not rebuild canonical map from poles");
  Polynomial P, Q;
  detail::build_pq(u, n, P, Q);
  if (!detail::same_pole_set(detail::sorted_poles(Q),
                             [&] {
                               auto v = zeta;
                               std::sort(v.begin(), v.end(), [](Cplx a, Cplx b) {
                                 if (a.real() != b.real()) return a.real() < b.real();
                                 return a.imag() < b.imag();
                               });
                               return v;
                             }(),
                             1e-5))
    throw TraceFailed("classify_pattern: pole set is not stationary for this configuration");
  const RationalMap R = RationalMap::from_PQ(P, Q, cfg);
  const LocusGraph g = trace(R);
  return classify(g);
}

}  // namespace sle0
