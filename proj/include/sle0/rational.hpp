#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "json.hpp"
#include "sle0/configuration.hpp"
#include "sle0/detail/linalg.hpp"
#include "sle0/errors.hpp"
#include "sle0/polynomial.hpp"

namespace sle0 {

/// F_k = sum_j 1/(zeta_k - x_j) - sum_{l != k} 2/(zeta_k - zeta_l).
/// Requires all pairwise distances > 1e-10.
inline std::vector<Cplx> stationary_residual(const Configuration& cfg,
                                             const std::vector<Cplx>& zeta) {
  for (std::size_t k = 0; k < zeta.size(); ++k) {
    for (std::size_t l = k + 1; l < zeta.size(); ++l)
      if (std::abs(zeta[k] - zeta[l]) < 1e-10)
        throw CoincidentPoints("stationary_residual: poles coincide");
    for (double xj : cfg.x)
      if (std::abs(zeta[k] - xj) < 1e-10)
        throw CoincidentPoints("stationary_residual: pole meets critical point");
  }
  std::vector<Cplx> f(zeta.size(), 0.0);
  for (std::size_t k = 0; k < zeta.size(); ++k) {
    for (double xj : cfg.x) f[k] += 1.0 / (zeta[k] - xj);
    for (std::size_t l = 0; l < zeta.size(); ++l)
      if (l != k) f[k] -= 2.0 / (zeta[k] - zeta[l]);
  }
  return f;
}

inline double max_abs(const std::vector<Cplx>& v) {
  double m = 0.0;
  for (Cplx c : v) m = std::max(m, std::abs(c));
  return m;
}

/// Newton-polish a well-separated pole set directly against the stationary
/// system. Root extraction from Q leaves ~1e-9 of conditioning error; this
/// squeezes the residual back to machine precision so the null-vector and
/// Ward identities evaluate cleanly. No-op when poles sit too close to each
/// other or to the critical points for the system to be regular.
inline std::vector<Cplx> polish_stationary(const Configuration& cfg, std::vector<Cplx> zeta) {
  // regular whenever the poles are simple and off the criticals; the root
  // splitting error ~ eps/sep keeps us inside the Newton basin down to
  // separations near the genericity threshold
  const double safe = std::max(3e-6, 1e-6 * cfg.diameter());
  for (std::size_t k = 0; k < zeta.size(); ++k) {
    for (std::size_t l = k + 1; l < zeta.size(); ++l)
      if (std::abs(zeta[k] - zeta[l]) < safe) return zeta;
    for (double xj : cfg.x)
      if (std::abs(zeta[k] - xj) < safe) return zeta;
  }
  const std::size_t n = zeta.size();
  for (int it = 0; it < 4; ++it) {
    const std::vector<Cplx> f = stationary_residual(cfg, zeta);
    if (max_abs(f) < 1e-14) break;
    detail::CMat J(n);
    for (std::size_t k = 0; k < n; ++k) {
      Cplx diag = 0.0;
      for (double xj : cfg.x) diag -= 1.0 / ((zeta[k] - xj) * (zeta[k] - xj));
      for (std::size_t l = 0; l < n; ++l) {
        if (l == k) continue;
        const Cplx d2 = (zeta[k] - zeta[l]) * (zeta[k] - zeta[l]);
        diag += 2.0 / d2;
        J(k, l) = -2.0 / d2;
      }
      J(k, k) = diag;
    }
    std::vector<Cplx> step;
    if (!detail::lu_solve_complex(J, f, step)) return zeta;
    for (std::size_t k = 0; k < n; ++k) zeta[k] -= step[k];
  }
  std::vector<Cplx> canon;
  if (detail::conj_pairing(zeta, canon, 1e-6)) zeta = std::move(canon);
  std::sort(zeta.begin(), zeta.end(), [](Cplx a, Cplx b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return zeta;
}

struct GenericityReport {
  bool generic = false;
  double min_distance = 0.0;  // min over pairs |x_j - zeta_k|
  bool all_simple = false;    // no pole cluster of size > 1 (radius 1e-7)
};

/// Real rational map R = P/Q. Canonical case: deg P = n+1, Q monic of
/// degree n, normalized so R(z) = z + o(1) at infinity. The polynomial case
/// Q = const (pole_deficient) is admitted for locus tracing only.
class RationalMap {
 public:
  /// Canonical map from solver coefficients. P need not be pre-normalized;
  /// the additive constant is fixed here via R(z) = z + o(1).
  static RationalMap from_PQ(Polynomial P, Polynomial Q, const Configuration& cfg) {
    RationalMap r;
    const int n = cfg.n();
    if (Q.degree() != n || std::abs(Q.leading() - 1.0) > 1e-9)
      throw InvalidInput("rational: Q must be monic of degree n");
    if (P.degree() != n + 1) throw InvalidInput("rational: deg P must be n+1");
    // post-translation: R -> R - c with c = p_n/p_{n+1} - q_{n-1}
    const double lead = P[static_cast<std::size_t>(n) + 1];
    P = (1.0 / lead) * P;
    const double c = P[static_cast<std::size_t>(n)] - Q[static_cast<std::size_t>(n) - 1];
    P = P - c * Q;
    r.P_ = std::move(P);
    r.Q_ = std::move(Q);
    r.n_ = n;
    r.criticals_ = cfg.x;
    r.poles_ = roots(r.Q_);
    r.check_wronskian();
    return r;
  }

  /// Polynomial map (no finite poles); locus tracing only.
  static RationalMap polynomial_map(Polynomial P) {
    RationalMap r;
    r.P_ = std::move(P);
    r.Q_ = Polynomial::constant(1.0);
    r.pole_deficient_ = true;
    const Polynomial w = r.P_.derivative();
    for (Cplx root : roots(w)) {
      if (std::abs(root.imag()) > 1e-9)
        throw InvalidInput("rational: polynomial map has non-real critical points");
      r.criticals_.push_back(root.real());
    }
    std::sort(r.criticals_.begin(), r.criticals_.end());
    r.n_ = static_cast<int>(r.criticals_.size()) / 2;
    return r;
  }

  const Polynomial& P() const { return P_; }
  const Polynomial& Q() const { return Q_; }
  int n() const { return n_; }
  bool pole_deficient() const { return pole_deficient_; }
  const std::vector<double>& criticals() const { return criticals_; }
  const std::vector<Cplx>& poles() const { return poles_; }

  Cplx eval(Cplx z) const { return P_.eval(z) / Q_.eval(z); }

  Polynomial wronskian() const { return P_.derivative() * Q_ - P_ * Q_.derivative(); }

  /// h(x, y) = Im(P(z) conj(Q(z))), z = x + iy. Vanishes exactly on the
  /// real locus and is smooth through the poles.
  double locus_poly_eval(double x, double y) const {
    const Cplx z(x, y);
    return std::imag(P_.eval(z) * std::conj(Q_.eval(z)));
  }
  double locus_scale(double x, double y) const {
    const Cplx z(x, y);
    return std::abs(P_.eval(z)) * std::abs(Q_.eval(z));
  }
  // gradient of h; hx = Im(A + B), hy = Re(A - B) with A = P' conj(Q), B = P conj(Q')
  void locus_gradient(double x, double y, double& hx, double& hy) const {
    const Cplx z(x, y);
    const Cplx A = P_.derivative().eval(z) * std::conj(Q_.eval(z));
    const Cplx B = P_.eval(z) * std::conj(Q_.derivative().eval(z));
    hx = std::imag(A + B);
    hy = std::real(A - B);
  }

  GenericityReport genericity() const {
    GenericityReport rep;
    double mind = std::numeric_limits<double>::infinity();
    for (double xj : criticals_)
      for (Cplx zk : poles_) mind = std::min(mind, std::abs(zk - xj));
    if (poles_.empty()) mind = std::numeric_limits<double>::infinity();
    rep.min_distance = mind;
    rep.generic = mind > 1e-6;
    rep.all_simple = true;
    for (const auto& [center, count] : cluster_points(poles_))
      if (count > 1) rep.all_simple = false;
    return rep;
  }

 private:
  void check_wronskian() const {
    const Polynomial w = wronskian();
    const Polynomial target = from_roots_real(criticals_);
    const Polynomial diff = w - target;
    if (diff.max_abs_coeff() > 1e-9 * std::max(1.0, target.max_abs_coeff()))
      throw InvalidInput("rational: Wronskian does not match critical points");
  }

  Polynomial P_, Q_{Polynomial::constant(1.0)};
  int n_ = 0;
  bool pole_deficient_ = false;
  std::vector<double> criticals_;
  std::vector<Cplx> poles_;
};

/// R(z) = z - sum_k A_k / (z - zeta_k) cleared to canonical P/Q form,
/// with A_k = prod_j (zeta_k - x_j) / prod_{l != k} (zeta_k - zeta_l)^2.
inline RationalMap build_from_poles(const Configuration& cfg, const std::vector<Cplx>& zeta) {
  const int n = cfg.n();
  if (static_cast<int>(zeta.size()) != n)
    throw InvalidInput("build_from_poles: need n poles");
  double mind = std::numeric_limits<double>::infinity();
  for (Cplx zk : zeta)
    for (double xj : cfg.x) mind = std::min(mind, std::abs(zk - xj));
  if (mind < 1e-6) throw NonGeneric("build_from_poles: pole within 1e-6 of a critical point");
  if (max_abs(stationary_residual(cfg, zeta)) >= 1e-8)
    throw StationaryViolated("build_from_poles: stationary relation violated");

  std::vector<Cplx> A(zeta.size());
  for (std::size_t k = 0; k < zeta.size(); ++k) {
    Cplx num = 1.0, den = 1.0;
    for (double xj : cfg.x) num *= zeta[k] - xj;
    for (std::size_t l = 0; l < zeta.size(); ++l)
      if (l != k) den *= (zeta[k] - zeta[l]) * (zeta[k] - zeta[l]);
    A[k] = num / den;
  }

  // P = z Q - sum_k A_k prod_{l != k} (z - zeta_l), computed in complex then
  // verified real
  const Polynomial Q = from_roots(zeta);
  std::vector<Cplx> num(static_cast<std::size_t>(n) + 2, 0.0);
  for (std::size_t i = 0; i <= static_cast<std::size_t>(Q.degree()); ++i)
    num[i + 1] = Q[i];
  for (std::size_t k = 0; k < zeta.size(); ++k) {
    std::vector<Cplx> part{1.0};
    for (std::size_t l = 0; l < zeta.size(); ++l) {
      if (l == k) continue;
      std::vector<Cplx> next(part.size() + 1, 0.0);
      for (std::size_t i = 0; i < part.size(); ++i) {
        next[i] += part[i] * (-zeta[l]);
        next[i + 1] += part[i];
      }
      part = std::move(next);
    }
    for (std::size_t i = 0; i < part.size(); ++i) num[i] -= A[k] * part[i];
  }
  double scale = 0.0;
  for (Cplx v : num) scale = std::max(scale, std::abs(v));
  std::vector<double> pc(num.size());
  for (std::size_t i = 0; i < num.size(); ++i) {
    if (std::abs(num[i].imag()) > 1e-9 * std::max(1.0, scale))
      throw NonRealCoefficients("build_from_poles: imaginary residue in P");
    pc[i] = num[i].real();
  }
  return RationalMap::from_PQ(Polynomial(std::move(pc)), Q, cfg);
}

inline nlohmann::json to_json(const RationalMap& r) {
  return nlohmann::json{{"P", r.P().coeffs()}, {"Q", r.Q().coeffs()}};
}

inline void rational_from_json(const nlohmann::json& j, Polynomial& P, Polynomial& Q) {
  P = Polynomial(j.at("P").get<std::vector<double>>());
  Q = Polynomial(j.at("Q").get<std::vector<double>>());
}

}  // namespace sle0
