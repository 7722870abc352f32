#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "sle0/errors.hpp"
#include "sle0/link_pattern.hpp"
#include "sle0/rational.hpp"
#include "sle0/threading.hpp"

namespace sle0 {

struct Box {
  double x0, x1, y0, y1;
  bool contains(Cplx z) const {
    return z.real() >= x0 && z.real() <= x1 && z.imag() >= y0 && z.imag() <= y1;
  }
};

/// One traced branch of the real locus in the closed upper half plane.
/// Endpoint indices are 1-based critical-point indices; kInfinity marks a
/// branch that left the bounding box.
struct Curve {
  static constexpr int kInfinity = -1;
  std::vector<Cplx> points;
  int start_index = 0;
  int end_index = 0;
  bool bounded() const { return start_index != kInfinity && end_index != kInfinity; }
};

struct LocusGraph {
  std::vector<Curve> curves;
  bool has_unbounded = false;
};

struct TraceOptions {
  double step = 0.0;             // absolute step; 0 = 1e-3 * diameter
  std::optional<Box> bbox;       // default: criticals padded by 0.6/1.2 diam
  std::size_t max_vertices = 400000;
};

namespace detail {

inline double point_segment_dist(Cplx p, Cplx a, Cplx b) {
  const Cplx ab = b - a;
  const double len2 = std::norm(ab);
  if (len2 == 0.0) return std::abs(p - a);
  double t = ((p.real() - a.real()) * ab.real() + (p.imag() - a.imag()) * ab.imag()) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return std::abs(p - (a + t * ab));
}

inline double point_polyline_dist(Cplx p, const std::vector<Cplx>& poly) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < poly.size(); ++i)
    best = std::min(best, point_segment_dist(p, poly[i], poly[i + 1]));
  return best;
}

// directed Hausdorff on a subsample; enough to recognize the same branch
// traced from both ends
inline double coarse_hausdorff(const std::vector<Cplx>& a, const std::vector<Cplx>& b,
                               std::size_t stride = 16) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); i += stride)
    worst = std::max(worst, point_polyline_dist(a[i], b));
  worst = std::max(worst, point_polyline_dist(a.back(), b));
  return worst;
}

// Newton correction onto h = 0 along the gradient; false if |h| cannot be
// brought below tol * local scale.
inline bool correct_onto_locus(const RationalMap& R, Cplx& z, double scale_floor) {
  for (int it = 0; it < 10; ++it) {
    const double h = R.locus_poly_eval(z.real(), z.imag());
    const double scale = std::max(R.locus_scale(z.real(), z.imag()), scale_floor);
    if (std::abs(h) <= 1e-10 * scale) return true;
    double hx, hy;
    R.locus_gradient(z.real(), z.imag(), hx, hy);
    const double g2 = hx * hx + hy * hy;
    if (g2 < 1e-300) return false;
    z -= Cplx(h * hx / g2, h * hy / g2);
  }
  const double h = R.locus_poly_eval(z.real(), z.imag());
  const double scale = std::max(R.locus_scale(z.real(), z.imag()), scale_floor);
  return std::abs(h) <= 1e-10 * scale;
}

inline Curve trace_from(const RationalMap& R, int j, double step, const Box& box,
                        std::size_t max_vertices) {
  const auto& xs = R.criticals();
  const double xj = xs[static_cast<std::size_t>(j)];
  // floor for the |P Q| scale so the corrector tolerance stays meaningful
  // as the curve passes through zeros of P or Q
  double scale_ref = 0.0;
  for (double xc : xs) scale_ref = std::max(scale_ref, R.locus_scale(xc, step));
  const double scale_floor = 1e-6 * scale_ref;

  Curve c;
  c.start_index = j + 1;
  c.points.push_back(Cplx(xj, 0.0));

  // the H branch of h = 0 leaves a simple critical point vertically
  Cplx z(xj, step);
  if (!correct_onto_locus(R, z, scale_floor))
    throw TraceFailed("trace: corrector failed at launch from x_" + std::to_string(j + 1));
  c.points.push_back(z);
  Cplx dir(0.0, 1.0);
  double arclen = step;

  while (true) {
    if (c.points.size() > max_vertices)
      throw TraceFailed("trace: vertex budget exhausted (branch may be pathological)");

    double hx, hy;
    R.locus_gradient(z.real(), z.imag(), hx, hy);
    const double gn = std::hypot(hx, hy);
    if (gn < 1e-300) throw TraceFailed("trace: vanishing gradient on branch interior");
    Cplx tangent(-hy / gn, hx / gn);
    if (tangent.real() * dir.real() + tangent.imag() * dir.imag() < 0.0) tangent = -tangent;

    // predictor with step halving when the corrector struggles
    double h = step;
    Cplx znew;
    bool ok = false;
    for (int attempt = 0; attempt < 8; ++attempt) {
      znew = z + h * tangent;
      if (correct_onto_locus(R, znew, scale_floor) && std::abs(znew - z) < 4.0 * h) {
        ok = true;
        break;
      }
      h *= 0.5;
    }
    if (!ok) throw TraceFailed("trace: corrector diverged");

    dir = (znew - z) / std::abs(znew - z);
    arclen += std::abs(znew - z);
    z = znew;
    c.points.push_back(z);

    if (!box.contains(z)) {
      c.end_index = Curve::kInfinity;
      return c;
    }
    if (z.imag() < step && arclen > 3.0 * step) {
      // the locus meets R only at critical points; snap or fail
      int nearest = -1;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < xs.size(); ++k) {
        const double d = std::abs(z - Cplx(xs[k], 0.0));
        if (d < best) {
          best = d;
          nearest = static_cast<int>(k);
        }
      }
      if (best <= 10.0 * step) {
        c.points.push_back(Cplx(xs[static_cast<std::size_t>(nearest)], 0.0));
        c.end_index = nearest + 1;
        return c;
      }
      if (z.imag() < step / 10.0)
        throw TraceFailed("trace: branch met the real line away from the critical points");
    }
  }
}

}  // namespace detail

/// Trace Γ(R) ∩ H as polylines from critical point to critical point.
/// Bounded branches are traced from both ends and deduplicated; branches
/// that leave the box are kept with an Infinity end marker.
inline LocusGraph trace(const RationalMap& R, const TraceOptions& opt = {}) {
  const auto& xs = R.criticals();
  if (xs.size() < 2) throw InvalidInput("trace: need at least two critical points");
  const double diam = xs.back() - xs.front();
  const double step = opt.step > 0.0 ? opt.step : 1e-3 * diam;
  Box box = opt.bbox.value_or(
      Box{xs.front() - 0.6 * diam, xs.back() + 0.6 * diam, 0.0, 1.2 * diam});
  box.y0 = std::min(box.y0, 0.0);

  std::vector<Curve> raw(xs.size());
  parallel_for(xs.size(), [&](std::size_t j) {
    raw[j] = detail::trace_from(R, static_cast<int>(j), step, box, opt.max_vertices);
  });

  LocusGraph g;
  std::map<std::pair<int, int>, std::vector<Curve>> by_pair;
  for (auto& c : raw) {
    if (!c.bounded()) {
      g.has_unbounded = true;
      g.curves.push_back(std::move(c));
      continue;
    }
    auto key = std::minmax(c.start_index, c.end_index);
    by_pair[{key.first, key.second}].push_back(std::move(c));
  }
  for (auto& [key, group] : by_pair) {
    // both-end traces of one branch must agree
    if (group.size() == 2) {
      auto rev = group[1].points;
      std::reverse(rev.begin(), rev.end());
      const double d = std::max(detail::coarse_hausdorff(group[0].points, rev),
                                detail::coarse_hausdorff(rev, group[0].points));
      if (d > 10.0 * step)
        throw TraceFailed("trace: branches from " + std::to_string(key.first) + " and " +
                          std::to_string(key.second) + " disagree");
    }
    g.curves.push_back(std::move(group[0]));
  }
  std::sort(g.curves.begin(), g.curves.end(), [](const Curve& a, const Curve& b) {
    return std::min(a.start_index, a.end_index) < std::min(b.start_index, b.end_index);
  });
  return g;
}

/// Pairing of curve endpoints. All curves must be bounded; the result must
/// be non-crossing (anything else indicates a trace error).
inline LinkPattern classify(const LocusGraph& g) {
  if (g.has_unbounded) throw UnboundedBranch("classify: locus has unbounded branches");
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> used;
  for (const auto& c : g.curves) {
    pairs.emplace_back(c.start_index, c.end_index);
    used.push_back(c.start_index);
    used.push_back(c.end_index);
  }
  std::sort(used.begin(), used.end());
  for (std::size_t i = 0; i + 1 < used.size(); ++i)
    if (used[i] == used[i + 1])
      throw TraceFailed("classify: critical index " + std::to_string(used[i]) + " used twice");
  LinkPattern a(std::move(pairs));
  if (!is_noncrossing(a)) throw CrossingPattern("classify: traced pattern crosses");
  return a;
}

/// Printed closed forms for the two n=2 loci at the standard configuration
/// x = (-3, 0, 1, 2); test oracle only. Returns the ordinates above the
/// abscissa, outer branch first.
inline std::vector<double> closed_form_locus_n2(const Configuration& cfg,
                                                const LinkPattern& pattern, double x) {
  const std::vector<double> std_x{-3.0, 0.0, 1.0, 2.0};
  if (cfg.x.size() != 4)
    throw OutOfRange("closed_form_locus_n2: standard configuration only");
  for (int i = 0; i < 4; ++i)
    if (std::abs(cfg.x[static_cast<std::size_t>(i)] - std_x[static_cast<std::size_t>(i)]) > 1e-12)
      throw OutOfRange("closed_form_locus_n2: standard configuration only");

  if (pattern == LinkPattern({{1, 2}, {3, 4}})) {
    if (!((x >= -3.0 && x <= 0.0) || (x >= 1.0 && x <= 2.0)))
      throw OutOfRange("closed_form_locus_n2: neighbor abscissa outside [-3,0] u [1,2]");
    const double inner = 49.0 + 24.0 * x * (-9.0 + 14.0 * x);
    const double v = (-7.0 - 6.0 * x * x + std::sqrt(std::max(0.0, inner))) / 6.0;
    return {std::sqrt(std::max(0.0, v))};
  }
  if (pattern == LinkPattern({{1, 4}, {2, 3}})) {
    if (!(x >= -3.0 && x <= 2.0))
      throw OutOfRange("closed_form_locus_n2: rainbow abscissa outside [-3,2]");
    std::vector<double> out;
    const double s = std::sqrt(49.0 - 24.0 * x);
    out.push_back(std::sqrt(std::max(0.0, -x * x + 0.5 * (7.0 + s))));
    if (x >= 0.0 && x <= 1.0) out.push_back(std::sqrt(std::max(0.0, -x * x + 0.5 * (7.0 - s))));
    return out;
  }
  throw OutOfRange("closed_form_locus_n2: unknown pattern");
}

}  // namespace sle0
