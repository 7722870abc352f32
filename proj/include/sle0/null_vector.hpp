#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "sle0/configuration.hpp"
#include "sle0/errors.hpp"
#include "sle0/pole_solver.hpp"
#include "sle0/polynomial.hpp"

namespace sle0 {

/// U_j = sum_{k != j} 2/(x_j - x_k) + sum_k 4/(zeta_k - x_j).
/// Requires a generic pole set (pole-critical distance > 1e-6); imaginary
/// parts from conjugate pole pairs cancel and are dropped.
inline std::vector<double> compute_U(const Configuration& cfg, const std::vector<Cplx>& zeta) {
  for (Cplx zk : zeta)
    for (double xj : cfg.x)
      if (std::abs(zk - xj) <= 1e-6)
        throw NonGeneric("compute_U: pole within 1e-6 of a critical point");
  const int m = cfg.size();
  std::vector<double> U(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    Cplx s = 0.0;
    for (int k = 0; k < m; ++k)
      if (k != j) s += 2.0 / (cfg.x[static_cast<std::size_t>(j)] - cfg.x[static_cast<std::size_t>(k)]);
    for (Cplx zk : zeta) s += 4.0 / (zk - cfg.x[static_cast<std::size_t>(j)]);
    if (std::abs(s.imag()) > 1e-10 * std::max(1.0, std::abs(s.real())))
      throw NonRealCoefficients("compute_U: imaginary residue did not cancel");
    U[static_cast<std::size_t>(j)] = s.real();
  }
  return U;
}

/// Same U through the zeros of P instead of the poles: since R'(x_j) = 0,
/// sum_k 1/(zeta_k - x_j) = sum_m 1/(eta_m - x_j) over the n+1 roots of P.
/// The zeros stay away from the critical points when a pole collides with
/// one, so this is the removable extension of U to non-generic
/// configurations, valid for every n.
inline std::vector<double> compute_U_from_zeros(const Configuration& cfg, const Polynomial& P) {
  const std::vector<Cplx> eta = roots(P);
  const int m = cfg.size();
  std::vector<double> U(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    Cplx s = 0.0;
    for (int k = 0; k < m; ++k)
      if (k != j) s += 2.0 / (cfg.x[static_cast<std::size_t>(j)] - cfg.x[static_cast<std::size_t>(k)]);
    for (Cplx e : eta) s += 4.0 / (e - cfg.x[static_cast<std::size_t>(j)]);
    U[static_cast<std::size_t>(j)] = s.real();
  }
  return U;
}

/// n=2 closed form: U_j^± = -sum_{k != j} 2/(x_j - x_k) ∓ 4 sqrt(S) /
/// prod_{k != j}(x_j - x_k). sign=+1 pairs with the neighbor pattern,
/// sign=-1 with the rainbow (same convention as poles_n2_closed_form).
inline std::vector<double> compute_U_n2_closed_form(const Configuration& cfg, int sign) {
  if (cfg.n() != 2) throw InvalidInput("compute_U_n2_closed_form: requires n = 2");
  const auto e = elementary_symmetric(cfg.x, 4);
  const double S = e[2] * e[2] - 3.0 * e[1] * e[3] + 12.0 * e[4];
  std::vector<double> U(4);
  for (int j = 0; j < 4; ++j) {
    double t = 0.0, prod = 1.0;
    for (int k = 0; k < 4; ++k) {
      if (k == j) continue;
      t -= 2.0 / (cfg.x[static_cast<std::size_t>(j)] - cfg.x[static_cast<std::size_t>(k)]);
      prod *= cfg.x[static_cast<std::size_t>(j)] - cfg.x[static_cast<std::size_t>(k)];
    }
    U[static_cast<std::size_t>(j)] = t - sign * 4.0 * std::sqrt(std::max(0.0, S)) / prod;
  }
  return U;
}

/// Richardson-style extrapolation of U at a non-generic configuration:
/// nudge the offending coordinate by h in {1e-3, 5e-4, 2.5e-4} (scaled by
/// the configuration diameter), re-solve the pattern's poles, and Aitken-
/// extrapolate h -> 0.
inline std::vector<double> compute_U_extrapolated(const Configuration& cfg,
                                                  const Polynomial& P0, const Polynomial& Q0) {
  // locate the coordinate nearest a pole
  const std::vector<Cplx> zeta = roots(Q0);
  int jbad = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j < cfg.size(); ++j)
    for (Cplx zk : zeta) {
      const double d = std::abs(zk - cfg.x[static_cast<std::size_t>(j)]);
      if (d < best) {
        best = d;
        jbad = j;
      }
    }
  const double unit = cfg.diameter();
  const double steps[3] = {1e-3 * unit, 5e-4 * unit, 2.5e-4 * unit};
  std::vector<std::vector<double>> Uh;
  for (double h : steps) {
    std::vector<double> xs = cfg.x;
    xs[static_cast<std::size_t>(jbad)] += h;
    const Configuration pert(xs);
    auto sol = refine_solution(pert, P0, Q0);
    if (!sol || !sol->poles.generic)
      throw NonGeneric("compute_U_extrapolated: perturbed configuration still non-generic");
    Uh.push_back(compute_U(pert, sol->poles.zeta));
  }
  std::vector<double> U(Uh[0].size());
  for (std::size_t j = 0; j < U.size(); ++j) {
    const double u1 = Uh[0][j], u2 = Uh[1][j], u3 = Uh[2][j];
    const double den = u1 - 2.0 * u2 + u3;
    U[j] = std::abs(den) > 1e-14 * (std::abs(u1) + 1.0) ? (u1 * u3 - u2 * u2) / den : u3;
  }
  return U;
}

/// log Z_alpha as a sum of log-moduli; Z itself is strictly positive so the
/// phases cancel by the conjugate-pair structure.
inline double compute_logZ(const Configuration& cfg, const std::vector<Cplx>& zeta) {
  for (Cplx zk : zeta)
    for (double xj : cfg.x)
      if (std::abs(zk - xj) <= 1e-6)
        throw NonGeneric("compute_logZ: pole within 1e-6 of a critical point");
  double v = 0.0;
  const int m = cfg.size();
  for (int j = 0; j < m; ++j)
    for (int k = j + 1; k < m; ++k)
      v += 2.0 * std::log(std::abs(cfg.x[static_cast<std::size_t>(j)] - cfg.x[static_cast<std::size_t>(k)]));
  for (std::size_t l = 0; l < zeta.size(); ++l)
    for (std::size_t mm = l + 1; mm < zeta.size(); ++mm)
      v += 8.0 * std::log(std::abs(zeta[l] - zeta[mm]));
  for (int k = 0; k < m; ++k)
    for (Cplx zl : zeta)
      v -= 4.0 * std::log(std::abs(cfg.x[static_cast<std::size_t>(k)] - zl));
  return v;
}

inline double compute_Z(const Configuration& cfg, const std::vector<Cplx>& zeta) {
  return std::exp(compute_logZ(cfg, zeta));
}

/// Left-hand side of the null vector equations,
/// (1/2) U_j^2 + sum_{k != j} 2 U_k/(x_k - x_j) - sum_{k != j} 6/(x_k - x_j)^2.
inline std::vector<double> nv_residual(const Configuration& cfg, const std::vector<double>& U) {
  const int m = cfg.size();
  std::vector<double> r(static_cast<std::size_t>(m), 0.0);
  for (int j = 0; j < m; ++j) {
    double v = 0.5 * U[static_cast<std::size_t>(j)] * U[static_cast<std::size_t>(j)];
    for (int k = 0; k < m; ++k) {
      if (k == j) continue;
      const double d = cfg.x[static_cast<std::size_t>(k)] - cfg.x[static_cast<std::size_t>(j)];
      v += 2.0 / d * U[static_cast<std::size_t>(k)] - 6.0 / (d * d);
    }
    r[static_cast<std::size_t>(j)] = v;
  }
  return r;
}

/// Conformal Ward identity residuals:
/// (sum U_j, sum x_j U_j + 6n, sum x_j^2 U_j + 6 sum x_j).
inline std::array<double, 3> cwi_residual(const Configuration& cfg, const std::vector<double>& U) {
  double r0 = 0.0, r1 = 0.0, r2 = 0.0, sx = 0.0;
  for (int j = 0; j < cfg.size(); ++j) {
    const double x = cfg.x[static_cast<std::size_t>(j)], u = U[static_cast<std::size_t>(j)];
    r0 += u;
    r1 += x * u;
    r2 += x * x * u;
    sx += x;
  }
  return {r0, r1 + 6.0 * cfg.n(), r2 + 6.0 * sx};
}

/// F0(z) = (1-z)^8 / ((z+1)(z-1/2)(z-2) + (1-z+z^2)^{3/2})^4 on (0,1).
inline double F0(double z) {
  if (!(z > 0.0 && z < 1.0)) throw OutOfRange("F0: argument must lie in (0,1)");
  const double q = 1.0 - z + z * z;
  const double den = (z + 1.0) * (z - 0.5) * (z - 2.0) + q * std::sqrt(q);
  const double num = std::pow(1.0 - z, 8);
  return num / std::pow(den, 4);
}

inline double cross_ratio(const Configuration& cfg) {
  if (cfg.size() != 4) throw InvalidInput("cross_ratio: requires 4 points");
  const double x1 = cfg.x[0], x2 = cfg.x[1], x3 = cfg.x[2], x4 = cfg.x[3];
  return (x2 - x1) * (x4 - x3) / ((x4 - x2) * (x3 - x1));
}

/// Cross-ratio form of Z^± (defined up to one pattern-independent
/// multiplicative constant; the verified contract is ratio constancy
/// against compute_Z).
inline double Z_n2_crossratio(const Configuration& cfg, int sign) {
  const double z = cross_ratio(cfg);
  const double x1 = cfg.x[0], x2 = cfg.x[1], x3 = cfg.x[2], x4 = cfg.x[3];
  if (sign > 0)
    return (1.0 - z) * (1.0 - z) / (std::pow(x1 - x2, 6) * std::pow(x3 - x4, 6)) * F0(1.0 - z);
  return z * z / (std::pow(x1 - x4, 6) * std::pow(x2 - x3, 6)) * F0(z);
}

/// Central-difference gradient of log Z, re-solving the poles at each
/// perturbed configuration by warm-started Newton.
inline std::vector<double> grad_logZ_fd(const Configuration& cfg, const PoleSolution& base,
                                        double step = 1e-5) {
  std::vector<double> g(static_cast<std::size_t>(cfg.size()));
  for (int j = 0; j < cfg.size(); ++j) {
    double v[2];
    for (int s = 0; s < 2; ++s) {
      std::vector<double> xs = cfg.x;
      xs[static_cast<std::size_t>(j)] += (s == 0 ? step : -step);
      const Configuration pert(xs);
      auto sol = refine_solution(pert, base.P, base.Q);
      if (!sol) throw Error("grad_logZ_fd: warm re-solve failed");
      v[s] = compute_logZ(pert, sol->poles.zeta);
    }
    g[static_cast<std::size_t>(j)] = (v[0] - v[1]) / (2.0 * step);
  }
  return g;
}

}  // namespace sle0
