#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "sle0/errors.hpp"

namespace sle0 {

using Cplx = std::complex<double>;

/// Real polynomial, coefficients stored ascending. The zero polynomial is
/// the single coefficient {0}.
class Polynomial {
 public:
  Polynomial() : c_{0.0} {}
  explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) {
    if (c_.empty()) c_ = {0.0};
    normalize();
  }
  static Polynomial constant(double v) { return Polynomial({v}); }
  static Polynomial identity() { return Polynomial({0.0, 1.0}); }

  const std::vector<double>& coeffs() const { return c_; }
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.size() == 1 && c_[0] == 0.0; }
  double leading() const { return c_.back(); }
  double operator[](std::size_t i) const { return i < c_.size() ? c_[i] : 0.0; }

  double max_abs_coeff() const {
    double m = 0.0;
    for (double v : c_) m = std::max(m, std::abs(v));
    return m;
  }

  Cplx eval(Cplx z) const {
    Cplx acc = 0.0;
    for (std::size_t i = c_.size(); i-- > 0;) acc = acc * z + c_[i];
    return acc;
  }
  double eval(double x) const {
    double acc = 0.0;
    for (std::size_t i = c_.size(); i-- > 0;) acc = acc * x + c_[i];
    return acc;
  }

  Polynomial derivative() const {
    if (c_.size() <= 1) return Polynomial();
    std::vector<double> d(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = static_cast<double>(i) * c_[i];
    return Polynomial(std::move(d));
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<double> out(std::max(a.c_.size(), b.c_.size()), 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i) out[i] += a.c_[i];
    for (std::size_t i = 0; i < b.c_.size(); ++i) out[i] += b.c_[i];
    return Polynomial(std::move(out));
  }
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) {
    std::vector<double> out(std::max(a.c_.size(), b.c_.size()), 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i) out[i] += a.c_[i];
    for (std::size_t i = 0; i < b.c_.size(); ++i) out[i] -= b.c_[i];
    return Polynomial(std::move(out));
  }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return Polynomial();
    std::vector<double> out(a.c_.size() + b.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) out[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(out));
  }
  friend Polynomial operator*(double s, const Polynomial& p) {
    std::vector<double> out = p.c_;
    for (double& v : out) v *= s;
    return Polynomial(std::move(out));
  }

 private:
  // trailing coefficients below 1e-14 * max|c| are numerical zeros;
  // trimming them keeps degrees exact under round trips
  void normalize() {
    const double tol = 1e-14 * max_abs_coeff();
    while (c_.size() > 1 && std::abs(c_.back()) <= tol) c_.pop_back();
    if (c_.size() == 1 && std::abs(c_[0]) <= tol) c_[0] = 0.0;
  }

  std::vector<double> c_;
};

namespace detail {

inline bool conj_pairing(std::vector<Cplx> pts, std::vector<Cplx>& canon, double tol_scale) {
  // Greedily match points into conjugate pairs (reals match themselves).
  // On success `canon` holds the symmetrized multiset.
  canon.clear();
  std::vector<bool> used(pts.size(), false);
  std::sort(pts.begin(), pts.end(), [](Cplx a, Cplx b) {
    return std::abs(a.imag()) > std::abs(b.imag());
  });
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    const Cplx a = pts[i];
    const double tol = tol_scale * (1.0 + std::abs(a));
    if (std::abs(a.imag()) <= tol) {
      canon.emplace_back(a.real(), 0.0);
      continue;
    }
    std::size_t best = pts.size();
    double bd = tol;
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(std::conj(a) - pts[j]);
      if (d <= bd) {
        bd = d;
        best = j;
      }
    }
    if (best == pts.size()) return false;
    used[best] = true;
    const Cplx m = 0.5 * (a + std::conj(pts[best]));
    canon.push_back(m);
    canon.push_back(std::conj(m));
  }
  return true;
}

}  // namespace detail

/// Monic real polynomial with the given roots. Roots must be closed under
/// conjugation (pairing tolerance 1e-12).
inline Polynomial from_roots(const std::vector<Cplx>& roots) {
  std::vector<Cplx> canon;
  if (!detail::conj_pairing(roots, canon, 1e-12))
    throw NonRealCoefficients("from_roots: roots are not conjugation-closed");
  std::vector<Cplx> acc{1.0};
  for (Cplx r : roots) {
    std::vector<Cplx> next(acc.size() + 1, 0.0);
    for (std::size_t i = 0; i < acc.size(); ++i) {
      next[i] += acc[i] * (-r);
      next[i + 1] += acc[i];
    }
    acc = std::move(next);
  }
  double scale = 0.0;
  for (Cplx v : acc) scale = std::max(scale, std::abs(v));
  std::vector<double> out(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) {
    if (std::abs(acc[i].imag()) > 1e-12 * std::max(1.0, scale))
      throw NonRealCoefficients("from_roots: imaginary residue in coefficients");
    out[i] = acc[i].real();
  }
  return Polynomial(std::move(out));
}

inline Polynomial from_roots_real(const std::vector<double>& roots) {
  std::vector<Cplx> c(roots.begin(), roots.end());
  return from_roots(c);
}

/// All complex roots with multiplicity, by Aberth-Ehrlich simultaneous
/// iteration plus Newton polishing. Output is conjugation-symmetrized and
/// sorted by (re, im).
inline std::vector<Cplx> roots(const Polynomial& p) {
  if (p.degree() < 1) throw DegreeZero("roots: polynomial has degree < 1");
  const auto& c = p.coeffs();
  const int deg = p.degree();

  if (deg == 1) return {Cplx(-c[0] / c[1], 0.0)};

  const Polynomial dp = p.derivative();
  std::vector<Cplx> z(deg);

  if (deg == 2) {
    // stable quadratic formula
    const double a = c[2], b = c[1], c0 = c[0];
    const double disc = b * b - 4.0 * a * c0;
    if (disc >= 0.0) {
      const double s = std::sqrt(disc);
      const double q = -0.5 * (b + (b >= 0.0 ? s : -s));
      Cplx r1(q / a, 0.0);
      Cplx r2(std::abs(q) > 0.0 ? c0 / q : -b / a - q / a, 0.0);
      z = {r1, r2};
    } else {
      const double re = -b / (2.0 * a), im = std::sqrt(-disc) / (2.0 * a);
      z = {Cplx(re, im), Cplx(re, -im)};
    }
  } else {
    // initial ring around the root centroid
    const double center = -c[deg - 1] / (static_cast<double>(deg) * c[deg]);
    double radius = 0.0;
    for (int i = 0; i < deg; ++i) radius = std::max(radius, std::abs(c[i] / c[deg]));
    radius = 1.0 + radius;
    for (int k = 0; k < deg; ++k) {
      const double th = 6.283185307179586 * k / deg + 0.4;
      z[k] = center + radius * Cplx(std::cos(th), std::sin(th));
    }
    const double cmax = p.max_abs_coeff();
    for (int iter = 0; iter < 400; ++iter) {
      double worst = 0.0;
      for (int k = 0; k < deg; ++k) {
        const Cplx pv = p.eval(z[k]);
        const Cplx dv = dp.eval(z[k]);
        if (pv == Cplx(0.0)) continue;
        Cplx w = (dv != Cplx(0.0)) ? pv / dv : Cplx(1e-3, 1e-3);
        Cplx s = 0.0;
        for (int j = 0; j < deg; ++j)
          if (j != k) s += 1.0 / (z[k] - z[j]);
        const Cplx denom = 1.0 - w * s;
        Cplx step = (std::abs(denom) > 1e-300) ? w / denom : w;
        z[k] -= step;
        worst = std::max(worst, std::abs(step) / (1.0 + std::abs(z[k])));
      }
      if (worst < 1e-15) break;
    }
  }

  // Newton polish in extended precision; the 80-bit evaluation lowers the
  // residual floor enough that downstream identities hold to ~1e-12
  {
    const auto& dc = dp.coeffs();
    auto eval_l = [](const std::vector<double>& c, std::complex<long double> w) {
      std::complex<long double> acc = 0.0L;
      for (std::size_t i = c.size(); i-- > 0;) acc = acc * w + static_cast<long double>(c[i]);
      return acc;
    };
    for (int k = 0; k < deg; ++k) {
      std::complex<long double> w(z[k].real(), z[k].imag());
      for (int it = 0; it < 20; ++it) {
        const auto pv = eval_l(c, w);
        const auto dv = eval_l(dc, w);
        if (std::abs(dv) < 1e-300L) break;
        const auto step = pv / dv;
        w -= step;
        if (std::abs(step) < 1e-17L * (1.0L + std::abs(w))) break;
      }
      z[k] = Cplx(static_cast<double>(w.real()), static_cast<double>(w.imag()));
    }
  }

  std::vector<Cplx> canon;
  if (!detail::conj_pairing(z, canon, 1e-6)) canon = z;  // keep raw on pathological input
  std::sort(canon.begin(), canon.end(), [](Cplx a, Cplx b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return canon;
}

/// Group points into clusters of radius `radius`; returns (center, count)
/// pairs. A count > 1 declares a multiple root.
inline std::vector<std::pair<Cplx, int>> cluster_points(const std::vector<Cplx>& pts,
                                                        double radius = 1e-7) {
  std::vector<std::pair<Cplx, int>> out;
  std::vector<bool> used(pts.size(), false);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (used[i]) continue;
    Cplx sum = pts[i];
    int cnt = 1;
    used[i] = true;
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (!used[j] && std::abs(pts[j] - pts[i]) <= radius) {
        sum += pts[j];
        ++cnt;
        used[j] = true;
      }
    }
    out.emplace_back(sum / static_cast<double>(cnt), cnt);
  }
  return out;
}

}  // namespace sle0
