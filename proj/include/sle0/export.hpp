#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "json.hpp"
#include "sle0/link_pattern.hpp"
#include "sle0/locus.hpp"
#include "sle0/loewner.hpp"
#include "sle0/pole_solver.hpp"

namespace sle0 {

using nlohmann::json;

// ---------------------------------------------------------------- JSON out

namespace detail {
inline double unsign_zero(double v) { return v == 0.0 ? 0.0 : v; }
}  // namespace detail

inline json poles_to_json(const Configuration& cfg, const SolveResult& res) {
  json out;
  out["x"] = cfg.x;
  out["solutions"] = json::array();
  for (std::size_t i = 0; i < res.solutions.size(); ++i) {
    json sol;
    json zeta = json::array();
    for (Cplx z : res.solutions[i].poles.zeta)
      zeta.push_back({detail::unsign_zero(z.real()), detail::unsign_zero(z.imag())});
    sol["zeta"] = std::move(zeta);
    json pat = json::array();
    if (i < res.patterns.size())
      for (auto [a, b] : res.patterns[i].pairs) pat.push_back({a, b});
    sol["pattern"] = std::move(pat);
    sol["residual"] = res.solutions[i].poles.residual;
    out["solutions"].push_back(std::move(sol));
  }
  return out;
}

inline json nullvec_to_json(const std::vector<double>& U, double logZ,
                            const std::vector<double>& nv, const std::array<double, 3>& cwi) {
  return json{{"U", U},
              {"Z_log", logZ},
              {"nv_residual", nv},
              {"cwi_residual", std::vector<double>{cwi[0], cwi[1], cwi[2]}}};
}

inline json evolve_diagnostics_to_json(const LoewnerTrajectory& traj) {
  json out;
  out["status"] = traj.phase == FlowPhase::StoppedTau ? "stopped_tau" : "running";
  out["tau0_count"] = traj.tau0_count;
  if (traj.phase == FlowPhase::StoppedTau) out["tau"] = traj.tau;
  double max_drift = 0.0;
  json samples = json::array();
  for (const auto& s : traj.samples) {
    max_drift = std::max(max_drift, s.max_drift);
    samples.push_back(json{{"t", s.t}, {"drift", s.max_drift}, {"s", s.s}});
  }
  out["max_drift"] = max_drift;
  out["samples"] = std::move(samples);
  return out;
}

// ------------------------------------------------------- schema validators

inline bool validate_poles_json(const json& j) {
  if (!j.is_object() || !j.contains("x") || !j.contains("solutions")) return false;
  if (!j["x"].is_array() || !j["solutions"].is_array()) return false;
  for (const auto& v : j["x"])
    if (!v.is_number()) return false;
  for (const auto& sol : j["solutions"]) {
    if (!sol.is_object() || !sol.contains("zeta") || !sol.contains("pattern") ||
        !sol.contains("residual"))
      return false;
    if (!sol["zeta"].is_array() || !sol["pattern"].is_array() || !sol["residual"].is_number())
      return false;
    for (const auto& z : sol["zeta"])
      if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number()) return false;
    for (const auto& p : sol["pattern"])
      if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() ||
          !p[1].is_number_integer())
        return false;
  }
  return true;
}

inline bool validate_nullvec_json(const json& j) {
  if (!j.is_object()) return false;
  for (const char* key : {"U", "Z_log", "nv_residual", "cwi_residual"})
    if (!j.contains(key)) return false;
  if (!j["U"].is_array() || !j["nv_residual"].is_array() || !j["cwi_residual"].is_array() ||
      !j["Z_log"].is_number())
    return false;
  return j["cwi_residual"].size() == 3;
}

inline bool validate_evolve_json(const json& j) {
  if (!j.is_object() || !j.contains("status") || !j.contains("tau0_count") ||
      !j.contains("samples") || !j.contains("max_drift"))
    return false;
  if (!j["samples"].is_array()) return false;
  for (const auto& s : j["samples"])
    if (!s.is_object() || !s.contains("t") || !s.contains("drift") || !s.contains("s"))
      return false;
  return true;
}

inline bool validate_verify_json(const json& j) {
  if (!j.is_object() || !j.contains("checks") || !j.contains("all_pass")) return false;
  if (!j["checks"].is_array() || !j["all_pass"].is_boolean()) return false;
  for (const auto& c : j["checks"]) {
    if (!c.is_object() || !c.contains("name") || !c.contains("pass") || !c.contains("value") ||
        !c.contains("tol"))
      return false;
    if (!c["name"].is_string() || !c["pass"].is_boolean()) return false;
  }
  return true;
}

// ------------------------------------------------------------------ CSV

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/// One row per (sample, object): t, kind(x|xi|tip|tracked), index, re, im.
inline std::string trajectory_csv(const LoewnerTrajectory& traj) {
  std::string out = "t,kind,index,re,im\n";
  for (const auto& s : traj.samples) {
    const std::string ts = detail::fmt_double(s.t);
    for (std::size_t j = 0; j < s.x.size(); ++j)
      out += ts + ",x," + std::to_string(j + 1) + "," + detail::fmt_double(s.x[j]) + ",0\n";
    for (std::size_t k = 0; k < s.xi.size(); ++k)
      out += ts + ",xi," + std::to_string(k + 1) + "," + detail::fmt_double(s.xi[k].real()) +
             "," + detail::fmt_double(s.xi[k].imag()) + "\n";
    for (std::size_t j = 0; j < s.tips.size(); ++j)
      out += ts + ",tip," + std::to_string(j + 1) + "," + detail::fmt_double(s.tips[j].real()) +
             "," + detail::fmt_double(s.tips[j].imag()) + "\n";
    for (std::size_t i = 0; i < s.tracked.size(); ++i)
      out += ts + ",tracked," + std::to_string(i + 1) + "," +
             detail::fmt_double(s.tracked[i].gz.real()) + "," +
             detail::fmt_double(s.tracked[i].gz.imag()) + "\n";
  }
  return out;
}

/// curve_id, re, im rows.
inline std::string locus_csv(const LocusGraph& g) {
  std::string out = "curve_id,re,im\n";
  for (std::size_t c = 0; c < g.curves.size(); ++c)
    for (Cplx p : g.curves[c].points)
      out += std::to_string(c + 1) + "," + detail::fmt_double(p.real()) + "," +
             detail::fmt_double(p.imag()) + "\n";
  return out;
}

// ------------------------------------------------------------------ SVG

struct SvgLayer {
  std::vector<std::vector<Cplx>> polylines;
  std::string color = "#1f6fb2";
};

/// Curves stroked per layer, poles as crosses, criticals as dots; fixed
/// viewBox from the bounding box of all content padded by 10%.
inline std::string render_svg(const std::vector<SvgLayer>& layers,
                              const std::vector<double>& criticals,
                              const std::vector<Cplx>& poles) {
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  auto grow = [&](double px, double py) {
    x0 = std::min(x0, px);
    x1 = std::max(x1, px);
    y0 = std::min(y0, py);
    y1 = std::max(y1, py);
  };
  for (const auto& layer : layers)
    for (const auto& poly : layer.polylines)
      for (Cplx p : poly) grow(p.real(), p.imag());
  for (double xc : criticals) grow(xc, 0.0);
  for (Cplx p : poles) grow(p.real(), p.imag());
  if (x0 > x1) {
    x0 = y0 = -1.0;
    x1 = y1 = 1.0;
  }
  const double pad = 0.1 * std::max(x1 - x0, y1 - y0) + 1e-9;
  x0 -= pad;
  x1 += pad;
  y0 -= pad;
  y1 += pad;
  const double w = x1 - x0, h = y1 - y0;
  const double sw = 0.004 * std::max(w, h);

  // flip y so H points up
  auto X = [&](double v) { return detail::fmt_double(v); };
  auto Y = [&](double v) { return detail::fmt_double(y1 + y0 - v); };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" + X(x0) + " " +
                    X(y0) + " " + X(w) + " " + X(h) + "\">\n";
  svg += "<line x1=\"" + X(x0) + "\" y1=\"" + Y(0) + "\" x2=\"" + X(x1) + "\" y2=\"" + Y(0) +
         "\" stroke=\"#999\" stroke-width=\"" + X(0.5 * sw) + "\"/>\n";
  for (const auto& layer : layers) {
    for (const auto& poly : layer.polylines) {
      if (poly.empty()) continue;
      svg += "<polyline fill=\"none\" stroke=\"" + layer.color + "\" stroke-width=\"" + X(sw) +
             "\" points=\"";
      for (Cplx p : poly) svg += X(p.real()) + "," + Y(p.imag()) + " ";
      svg += "\"/>\n";
    }
  }
  for (Cplx p : poles) {
    const double r = 1.6 * sw;
    svg += "<path d=\"M " + X(p.real() - r) + " " + Y(p.imag() - r) + " L " + X(p.real() + r) +
           " " + Y(p.imag() + r) + " M " + X(p.real() - r) + " " + Y(p.imag() + r) + " L " +
           X(p.real() + r) + " " + Y(p.imag() - r) + "\" stroke=\"#c23b21\" stroke-width=\"" +
           X(sw) + "\"/>\n";
  }
  for (double xc : criticals)
    svg += "<circle cx=\"" + X(xc) + "\" cy=\"" + Y(0) + "\" r=\"" + X(1.4 * sw) +
           "\" fill=\"#222\"/>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace sle0
