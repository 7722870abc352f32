#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "sle0/configuration.hpp"
#include "sle0/errors.hpp"
#include "sle0/link_pattern.hpp"
#include "sle0/null_vector.hpp"
#include "sle0/pole_solver.hpp"
#include "sle0/polynomial.hpp"

namespace sle0 {

/// Non-negative piecewise-constant growth speeds nu_j(t).
class SpeedSchedule {
 public:
  static SpeedSchedule uniform(double c, int m) {
    SpeedSchedule s;
    s.breaks_ = {0.0};
    s.values_ = {std::vector<double>(static_cast<std::size_t>(m), c)};
    s.validate();
    return s;
  }
  static SpeedSchedule per_index(std::vector<double> nu) {
    SpeedSchedule s;
    s.breaks_ = {0.0};
    s.values_ = {std::move(nu)};
    s.validate();
    return s;
  }
  /// values[i] applies on [breaks[i], breaks[i+1]); the last runs to +inf.
  static SpeedSchedule piecewise(std::vector<double> breaks,
                                 std::vector<std::vector<double>> values) {
    SpeedSchedule s;
    s.breaks_ = std::move(breaks);
    s.values_ = std::move(values);
    if (s.breaks_.size() != s.values_.size() || s.breaks_.empty() || s.breaks_[0] != 0.0)
      throw InvalidInput("schedule: breaks must start at 0 and match values");
    for (std::size_t i = 1; i < s.breaks_.size(); ++i)
      if (!(s.breaks_[i] > s.breaks_[i - 1]))
        throw InvalidInput("schedule: breaks must increase");
    s.validate();
    return s;
  }

  const std::vector<double>& at(double t) const {
    std::size_t i = 0;
    while (i + 1 < breaks_.size() && t >= breaks_[i + 1]) ++i;
    return values_[i];
  }
  int size() const { return static_cast<int>(values_[0].size()); }

 private:
  void validate() const {
    for (const auto& v : values_) {
      if (v.size() != values_[0].size()) throw InvalidInput("schedule: ragged values");
      for (double nu : v)
        if (!(nu >= 0.0)) throw InvalidInput("schedule: speeds must be non-negative");
    }
  }
  std::vector<double> breaks_;
  std::vector<std::vector<double>> values_;
};

struct TrackedPoint {
  Cplx z0;        // initial position in H
  Cplx gz;        // g_t(z0)
  Cplx gprime;    // g_t'(z0)
  bool alive = true;
};

enum class FlowPhase { Running, StoppedTau };

struct FlowDeriv {
  std::vector<double> dx;
  std::vector<Cplx> dxi;
  std::vector<Cplx> dgz, dgprime;
};

/// Loewner system right-hand side in pushed-pole form (the driving-point
/// interactions use the evolved pole images xi directly):
///   xdot_j   = nu_j [ sum_{k != j} 2/(x_j-x_k) + sum_k 4/(xi_k-x_j) ]
///              + sum_{k != j} 2 nu_k/(x_j-x_k)
///   xidot_k  = sum_j 2 nu_j/(xi_k-x_j)
///   gdot     = sum_j 2 nu_j/(g-x_j),   g'dot = -g' sum_j 2 nu_j/(g-x_j)^2.
inline FlowDeriv flow_rhs(const std::vector<double>& x, const std::vector<Cplx>& xi,
                          const std::vector<TrackedPoint>& tracked,
                          const std::vector<double>& nu) {
  const int m = static_cast<int>(x.size());
  FlowDeriv d;
  d.dx.assign(static_cast<std::size_t>(m), 0.0);
  for (int j = 0; j < m; ++j) {
    Cplx inter = 0.0;
    double loewner = 0.0;
    for (int k = 0; k < m; ++k) {
      if (k == j) continue;
      inter += 2.0 / (x[static_cast<std::size_t>(j)] - x[static_cast<std::size_t>(k)]);
      loewner += 2.0 * nu[static_cast<std::size_t>(k)] /
                 (x[static_cast<std::size_t>(j)] - x[static_cast<std::size_t>(k)]);
    }
    for (Cplx zk : xi) inter += 4.0 / (zk - x[static_cast<std::size_t>(j)]);
    d.dx[static_cast<std::size_t>(j)] = nu[static_cast<std::size_t>(j)] * inter.real() + loewner;
  }
  d.dxi.assign(xi.size(), 0.0);
  for (std::size_t k = 0; k < xi.size(); ++k)
    for (int j = 0; j < m; ++j)
      d.dxi[k] += 2.0 * nu[static_cast<std::size_t>(j)] / (xi[k] - x[static_cast<std::size_t>(j)]);
  d.dgz.assign(tracked.size(), 0.0);
  d.dgprime.assign(tracked.size(), 0.0);
  for (std::size_t i = 0; i < tracked.size(); ++i) {
    if (!tracked[i].alive) continue;
    Cplx s = 0.0, s2 = 0.0;
    for (int j = 0; j < m; ++j) {
      const Cplx dz = tracked[i].gz - x[static_cast<std::size_t>(j)];
      s += 2.0 * nu[static_cast<std::size_t>(j)] / dz;
      s2 += 2.0 * nu[static_cast<std::size_t>(j)] / (dz * dz);
    }
    d.dgz[i] = s;
    d.dgprime[i] = -tracked[i].gprime * s2;
  }
  return d;
}

/// Calogero-Moser right-hand sides (the nu = 1/4 reduction):
///   xdot_j = sum_{k != j} 1/(x_j-x_k) - sum_k 1/(x_j-zeta_k)
///   zetadot_k = -sum_{l != k} 1/(zeta_k-zeta_l) + sum_j 1/(zeta_k-x_j).
inline std::pair<std::vector<double>, std::vector<Cplx>> calogero_moser_rhs(
    const std::vector<double>& x, const std::vector<Cplx>& zeta) {
  const int m = static_cast<int>(x.size());
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b)
      if (std::abs(x[static_cast<std::size_t>(a)] - x[static_cast<std::size_t>(b)]) < 1e-10)
        throw CoincidentPoints("calogero_moser_rhs: critical points coincide");
  for (std::size_t k = 0; k < zeta.size(); ++k) {
    for (std::size_t l = k + 1; l < zeta.size(); ++l)
      if (std::abs(zeta[k] - zeta[l]) < 1e-10)
        throw CoincidentPoints("calogero_moser_rhs: poles coincide");
    for (int j = 0; j < m; ++j)
      if (std::abs(zeta[k] - x[static_cast<std::size_t>(j)]) < 1e-10)
        throw CoincidentPoints("calogero_moser_rhs: pole meets critical point");
  }
  std::vector<double> dx(static_cast<std::size_t>(m), 0.0);
  for (int j = 0; j < m; ++j) {
    Cplx v = 0.0;
    for (int k = 0; k < m; ++k)
      if (k != j) v += 1.0 / (x[static_cast<std::size_t>(j)] - x[static_cast<std::size_t>(k)]);
    for (Cplx zk : zeta) v -= 1.0 / (x[static_cast<std::size_t>(j)] - zk);
    dx[static_cast<std::size_t>(j)] = v.real();
  }
  std::vector<Cplx> dz(zeta.size(), 0.0);
  for (std::size_t k = 0; k < zeta.size(); ++k) {
    for (std::size_t l = 0; l < zeta.size(); ++l)
      if (l != k) dz[k] -= 1.0 / (zeta[k] - zeta[l]);
    for (int j = 0; j < m; ++j) dz[k] += 1.0 / (zeta[k] - x[static_cast<std::size_t>(j)]);
  }
  return {std::move(dx), std::move(dz)};
}

/// Argument of the integral of motion N_t: M_t = g' prod(g-x_j) /
/// prod(g-xi_k)^2. Constant in t and equal to R'(z0).
inline Cplx motion_integral(const std::vector<double>& x, const std::vector<Cplx>& xi, Cplx gz,
                            Cplx gprime) {
  Cplx num = gprime, den = 1.0;
  for (double xj : x) num *= gz - xj;
  for (Cplx zk : xi) den *= (gz - zk) * (gz - zk);
  return num / den;
}

struct LoewnerSample {
  double t = 0.0;
  std::vector<double> x;
  std::vector<Cplx> xi;
  std::vector<Cplx> tips;
  std::vector<bool> tip_stale;
  std::vector<TrackedPoint> tracked;
  std::vector<double> s;             // elementary symmetric e1..e4 of x
  double max_drift = 0.0;            // max_i |M_t(z_i) - R'(z_i)| / |R'(z_i)|
  double stationary_residual = 0.0;  // residual of the stationary relation at time t
};

/// M_t for one tracked point of a sample; throws once the point has been
/// absorbed by the hull.
inline Cplx integral_of_motion(const LoewnerSample& s, std::size_t tracked_index) {
  const TrackedPoint& p = s.tracked.at(tracked_index);
  if (!p.alive) throw DeadPoint("integral_of_motion: tracked point was absorbed");
  return motion_integral(s.x, s.xi, p.gz, p.gprime);
}

struct LoewnerTrajectory {
  std::vector<LoewnerSample> samples;
  FlowPhase phase = FlowPhase::Running;
  int tau0_count = 0;
  double tau = std::numeric_limits<double>::quiet_NaN();  // set when phase == StoppedTau
  Polynomial P0, Q0;  // initial canonical pair (tips and M_t reference)
  std::vector<Cplx> initial_poles;

  Cplx initial_R_prime(Cplx z) const {
    Cplx num = 1.0;
    for (double xj : samples.front().x) num *= z - xj;
    const Cplx q = Q0.eval(z);
    return num / (q * q);
  }
};

struct StepSizeUnderflowError : StepSizeUnderflow {
  StepSizeUnderflowError(std::string msg, LoewnerTrajectory partial)
      : StepSizeUnderflow(std::move(msg)), partial(std::move(partial)) {}
  LoewnerTrajectory partial;
};

enum class DriveMode {
  PushedPoles,  // interactions through the evolved pole images xi(t)
  ResolvedU     // re-solve the pole functions at x(t) each derivative call
};

struct EvolveOptions {
  double T = 1.0;
  double dt = 1e-4;
  std::optional<SpeedSchedule> nu;           // default: uniform 1/4
  std::vector<Cplx> tracked;
  DriveMode mode = DriveMode::PushedPoles;
  int sample_every = 1;
  double collision_stop = 1e-6;              // tau detection gap
  double pole_hit = 1e-6;                    // tau0 detection gap
  double tip_stale_window = 1e-4;            // time window around tau0 events
};

namespace detail {

inline double min_gap_xx(const std::vector<double>& x) {
  double g = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < x.size(); ++a)
    for (std::size_t b = a + 1; b < x.size(); ++b) g = std::min(g, std::abs(x[a] - x[b]));
  return g;
}

inline double min_gap_xxi(const std::vector<double>& x, const std::vector<Cplx>& xi) {
  double g = std::numeric_limits<double>::infinity();
  for (Cplx zk : xi)
    for (double xj : x) g = std::min(g, std::abs(zk - xj));
  return g;
}

// match new pole positions to the previous ordering (labels stay continuous)
inline std::vector<Cplx> match_order(const std::vector<Cplx>& prev, std::vector<Cplx> next) {
  std::vector<Cplx> out(prev.size());
  std::vector<bool> used(next.size(), false);
  for (std::size_t i = 0; i < prev.size(); ++i) {
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < next.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(next[j] - prev[i]);
      if (d < bd) {
        bd = d;
        best = j;
      }
    }
    used[best] = true;
    out[i] = next[best];
  }
  return out;
}

// tip of curve j: the root of P0 - c Q0 in closed H nearest the previous tip
inline std::optional<Cplx> tip_root(const Polynomial& P0, const Polynomial& Q0, double c,
                                    Cplx prev, double max_jump) {
  const Polynomial eq = P0 - c * Q0;
  if (eq.degree() < 1) return std::nullopt;
  std::vector<Cplx> cand;
  for (Cplx r : roots(eq))
    if (r.imag() >= -1e-8) cand.push_back(r);
  if (cand.empty()) throw NoHalfPlaneRoot("tip_solve: no root in the closed half-plane");
  Cplx best = cand[0];
  for (Cplx r : cand)
    if (std::abs(r - prev) < std::abs(best - prev)) best = r;
  if (std::abs(best - prev) > max_jump) return std::nullopt;  // keep previous, flag stale
  if (best.imag() < 0.0) best = Cplx(best.real(), 0.0);
  return best;
}

}  // namespace detail

/// Integrate the Loewner system for a known pole solution. RK4 with step
/// halving near driving collisions; stops at tau (driving gap < 1e-6) and
/// continues through tau0 events (pole meets driving point), counting them.
/// Near tau0 the poles are maintained by warm-started re-solve of the
/// coefficient system (regular there) instead of the singular xi-ODE, and
/// the drive uses U evaluated through the zeros of P; both switches follow
/// the pushforward identity xi_k(t) = zeta_k(x(t)).
inline LoewnerTrajectory evolve(const Configuration& cfg, const PoleSolution& sol,
                                const EvolveOptions& opt = {}) {
  const int n = cfg.n();
  const int m = cfg.size();
  if (!(opt.T > 0.0) || !(opt.dt > 0.0)) throw InvalidInput("evolve: T and dt must be positive");
  const SpeedSchedule nu = opt.nu.value_or(SpeedSchedule::uniform(0.25, m));
  if (nu.size() != m) throw InvalidInput("evolve: schedule size must be 2n");
  const double diam = cfg.diameter();

  LoewnerTrajectory traj;
  {
    // canonical normalization R = z + o(1) fixes the tip equation constant
    RationalMap R0 = RationalMap::from_PQ(sol.P, sol.Q, cfg);
    traj.P0 = R0.P();
    traj.Q0 = R0.Q();
    traj.initial_poles = R0.poles();
  }

  std::vector<double> x = cfg.x;
  std::vector<Cplx> xi = traj.initial_poles;
  Polynomial Pcur = traj.P0, Qcur = traj.Q0;
  std::vector<TrackedPoint> tracked;
  for (Cplx z0 : opt.tracked) {
    if (!(z0.imag() > 0.0)) throw InvalidInput("evolve: tracked points must lie in H");
    tracked.push_back({z0, z0, Cplx(1.0, 0.0), true});
  }
  std::vector<Cplx> tips(static_cast<std::size_t>(m));
  std::vector<bool> tip_stale(static_cast<std::size_t>(m), false);
  for (int j = 0; j < m; ++j) tips[static_cast<std::size_t>(j)] = Cplx(x[static_cast<std::size_t>(j)], 0.0);
  std::vector<Cplx> Rp0(tracked.size());
  for (std::size_t i = 0; i < tracked.size(); ++i) {
    Cplx num = 1.0;
    for (double xj : x) num *= tracked[i].z0 - xj;
    const Cplx q = traj.Q0.eval(tracked[i].z0);
    Rp0[i] = num / (q * q);
  }

  double t = 0.0;
  int tau0_count = 0;
  bool near_pole_event = detail::min_gap_xxi(x, xi) < opt.pole_hit;
  if (near_pole_event) ++tau0_count;
  double last_event_time = near_pole_event ? 0.0 : -std::numeric_limits<double>::infinity();
  const double resolve_enter = 0.016 * diam;
  const double resolve_exit = 0.032 * diam;
  bool resolving = detail::min_gap_xxi(x, xi) < resolve_enter;

  // warm refinement of (P, Q) at a possibly substage configuration
  auto refined_at = [&](const std::vector<double>& xs, Polynomial& P, Polynomial& Q) -> bool {
    std::vector<double> xs_sorted = xs;
    std::sort(xs_sorted.begin(), xs_sorted.end());
    auto s = refine_solution(Configuration(xs_sorted), P, Q, 30);
    if (!s) return false;
    P = s->P;
    Q = s->Q;
    return true;
  };

  auto derivs = [&](const std::vector<double>& xa, const std::vector<Cplx>& xia,
                    const std::vector<TrackedPoint>& tra, double ta) -> FlowDeriv {
    const std::vector<double>& nuv = nu.at(ta);
    if (!resolving && opt.mode == DriveMode::PushedPoles) return flow_rhs(xa, xia, tra, nuv);
    // resolved drive: U from the refreshed canonical pair at xa
    Polynomial P = Pcur, Q = Qcur;
    const bool fresh = refined_at(xa, P, Q);
    std::vector<double> xs = xa;
    std::sort(xs.begin(), xs.end());
    const std::vector<double> U = compute_U_from_zeros(Configuration(xs), fresh ? P : Pcur);
    FlowDeriv d = flow_rhs(xa, xia, tra, nuv);
    for (int j = 0; j < m; ++j) {
      double loewner = 0.0;
      for (int k = 0; k < m; ++k)
        if (k != j)
          loewner += 2.0 * nuv[static_cast<std::size_t>(k)] /
                     (xa[static_cast<std::size_t>(j)] - xa[static_cast<std::size_t>(k)]);
      d.dx[static_cast<std::size_t>(j)] =
          nuv[static_cast<std::size_t>(j)] * U[static_cast<std::size_t>(j)] + loewner;
    }
    if (resolving)
      std::fill(d.dxi.begin(), d.dxi.end(), Cplx(0.0, 0.0));  // poles re-solved post-step
    return d;
  };

  auto record_sample = [&]() {
    LoewnerSample s;
    s.t = t;
    s.x = x;
    s.xi = xi;
    s.tips = tips;
    s.tip_stale = tip_stale;
    s.tracked = tracked;
    const auto e = elementary_symmetric(x, std::min(4, m));
    s.s.assign(e.begin() + 1, e.end());
    double drift = 0.0;
    for (std::size_t i = 0; i < tracked.size(); ++i) {
      if (!tracked[i].alive) continue;
      const Cplx Mt = motion_integral(x, xi, tracked[i].gz, tracked[i].gprime);
      drift = std::max(drift, std::abs(Mt - Rp0[i]) / std::abs(Rp0[i]));
    }
    s.max_drift = drift;
    if (detail::min_gap_xxi(x, xi) > 1e-5) {
      std::vector<double> xs = x;
      std::sort(xs.begin(), xs.end());
      try {
        s.stationary_residual = max_abs(stationary_residual(Configuration(xs), xi));
      } catch (const CoincidentPoints&) {
        s.stationary_residual = std::numeric_limits<double>::quiet_NaN();
      }
    }
    traj.samples.push_back(std::move(s));
  };

  record_sample();

  long step_index = 0;
  while (t < opt.T - 1e-12 * std::max(1.0, opt.T)) {
    const double gap_xx = detail::min_gap_xx(x);
    if (gap_xx < opt.collision_stop) {
      traj.phase = FlowPhase::StoppedTau;
      traj.tau = t;
      break;
    }
    const double gap_xxi = detail::min_gap_xxi(x, xi);
    resolving = resolving ? (gap_xxi < resolve_exit) : (gap_xxi < resolve_enter);

    // tau0 events: a pole (conjugate pair merging onto R) meets a driving point
    if (gap_xxi < opt.pole_hit) {
      if (!near_pole_event) {
        ++tau0_count;
        near_pole_event = true;
        last_event_time = t;
      }
    } else if (gap_xxi > 10.0 * opt.pole_hit) {
      near_pole_event = false;
    }

    FlowDeriv k1 = derivs(x, xi, tracked, t);
    double speed = 0.0;
    for (double v : k1.dx) speed = std::max(speed, std::abs(v));
    double h = std::min(opt.dt, opt.T - t);
    // startup ramp: tips move like sqrt(t), so early steps shrink
    // proportionally to t to keep the tip polyline resolved
    if (t < 20.0 * opt.dt) h = std::min(h, std::max(0.05 * t, opt.dt / 1024.0));
    while (h * speed > 0.03 * gap_xx && h > 1e-12) h *= 0.5;
    if (h <= 1e-12) {
      // the collision rule drove the step to the floor: that is tau for
      // all practical purposes (gap ~ sqrt(remaining time))
      if (gap_xx < 1e-3 * diam) {
        traj.phase = FlowPhase::StoppedTau;
        traj.tau = t;
        break;
      }
      throw StepSizeUnderflowError("evolve: step underflow at t = " + std::to_string(t),
                                   std::move(traj));
    }

    auto advance = [&](const std::vector<double>& xa, const std::vector<Cplx>& xia,
                       const std::vector<TrackedPoint>& tra, const FlowDeriv& d, double w,
                       std::vector<double>& xo, std::vector<Cplx>& xio,
                       std::vector<TrackedPoint>& tro) {
      xo = xa;
      xio = xia;
      tro = tra;
      for (int j = 0; j < m; ++j) xo[static_cast<std::size_t>(j)] += w * d.dx[static_cast<std::size_t>(j)];
      for (std::size_t k = 0; k < xio.size(); ++k) xio[k] += w * d.dxi[k];
      for (std::size_t i = 0; i < tro.size(); ++i) {
        if (!tro[i].alive) continue;
        tro[i].gz += w * d.dgz[i];
        tro[i].gprime += w * d.dgprime[i];
      }
    };

    std::vector<double> x2, x3, x4;
    std::vector<Cplx> xi2, xi3, xi4;
    std::vector<TrackedPoint> tr2, tr3, tr4;
    advance(x, xi, tracked, k1, 0.5 * h, x2, xi2, tr2);
    FlowDeriv k2 = derivs(x2, xi2, tr2, t + 0.5 * h);
    advance(x, xi, tracked, k2, 0.5 * h, x3, xi3, tr3);
    FlowDeriv k3 = derivs(x3, xi3, tr3, t + 0.5 * h);
    advance(x, xi, tracked, k3, h, x4, xi4, tr4);
    FlowDeriv k4 = derivs(x4, xi4, tr4, t + h);

    for (int j = 0; j < m; ++j) {
      const std::size_t js = static_cast<std::size_t>(j);
      x[js] += h / 6.0 * (k1.dx[js] + 2.0 * k2.dx[js] + 2.0 * k3.dx[js] + k4.dx[js]);
    }
    for (std::size_t k = 0; k < xi.size(); ++k)
      xi[k] += h / 6.0 * (k1.dxi[k] + 2.0 * k2.dxi[k] + 2.0 * k3.dxi[k] + k4.dxi[k]);
    for (std::size_t i = 0; i < tracked.size(); ++i) {
      if (!tracked[i].alive) continue;
      tracked[i].gz += h / 6.0 * (k1.dgz[i] + 2.0 * k2.dgz[i] + 2.0 * k3.dgz[i] + k4.dgz[i]);
      tracked[i].gprime +=
          h / 6.0 * (k1.dgprime[i] + 2.0 * k2.dgprime[i] + 2.0 * k3.dgprime[i] + k4.dgprime[i]);
      double dmin = std::numeric_limits<double>::infinity();
      for (double xj : x) dmin = std::min(dmin, std::abs(tracked[i].gz - xj));
      if (dmin < 1e-6 * diam || tracked[i].gz.imag() < 0.0) tracked[i].alive = false;
    }
    t += h;

    // keep the coefficient track warm; within the resolve window it defines xi
    if (resolving || opt.mode == DriveMode::ResolvedU) {
      if (refined_at(x, Pcur, Qcur) && resolving)
        xi = detail::match_order(xi, roots(Qcur));
    }

    // tips: stale inside the tau0 window and while a pole sits on a
    // driving point; otherwise track the nearest half-plane root
    const double tip_gap = detail::min_gap_xxi(x, xi);
    const bool in_stale_window =
        (t - last_event_time) < opt.tip_stale_window || tip_gap < 2e-4 * diam;
    const std::vector<double>& nu_now = nu.at(t);
    for (int j = 0; j < m; ++j) {
      const std::size_t js = static_cast<std::size_t>(j);
      // a curve with zero speed does not grow: f_t(x_j(t)) is constant, so
      // the tip stays put (and sidesteps the near-double tip root)
      if (nu_now[js] == 0.0) continue;
      if (in_stale_window) {
        tip_stale[js] = true;
        continue;
      }
      std::vector<Cplx> A(xi.size());
      bool ok = true;
      for (std::size_t k = 0; k < xi.size() && ok; ++k) {
        Cplx num = 1.0, den = 1.0;
        for (double xj : x) num *= xi[k] - xj;
        for (std::size_t l = 0; l < xi.size(); ++l)
          if (l != k) den *= (xi[k] - xi[l]) * (xi[k] - xi[l]);
        if (std::abs(den) < 1e-300) ok = false;
        else A[k] = num / den;
      }
      if (!ok) {
        tip_stale[js] = true;
        continue;
      }
      Cplx c = x[js];
      for (std::size_t k = 0; k < xi.size(); ++k) c -= A[k] / (x[js] - xi[k]);
      const double max_jump = std::max(1e-2 * diam, 40.0 * h * (speed + 1.0));
      auto root = detail::tip_root(traj.P0, traj.Q0, c.real(), tips[js],
                                   tip_stale[js] ? 0.25 * diam : max_jump);
      if (root) {
        tips[js] = *root;
        tip_stale[js] = false;
      } else {
        tip_stale[js] = true;
      }
    }

    ++step_index;
    if (step_index % std::max(1, opt.sample_every) == 0 || t >= opt.T) record_sample();
  }

  if (traj.phase == FlowPhase::StoppedTau &&
      (traj.samples.empty() || traj.samples.back().t < t))
    record_sample();
  traj.tau0_count = tau0_count;
  return traj;
}

/// Solve the pattern's poles, then integrate.
inline LoewnerTrajectory evolve(const Configuration& cfg, const LinkPattern& alpha,
                                const EvolveOptions& opt = {}) {
  return evolve(cfg, solve_pattern(cfg, alpha), opt);
}

}  // namespace sle0
