// sle0: poles / nullvec / locus / evolve / verify for multiple SLE(0) data.
// Exit codes: 0 ok, 1 input error, 2 incomplete enumeration, 3 integration
// failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sle0/sle0.hpp"

using namespace sle0;
using nlohmann::json;

namespace {

struct JobConfig {
  std::vector<double> x;
  std::string pattern = "all";
  json nu;  // number | array | {breaks, values}
  double T = 0.2;
  double dt = 1e-4;
  std::vector<Cplx> tracked;
  std::uint64_t seed = 0;
  int budget = 400;
  int sample_every = 1;
  double step = 0.0;
  std::vector<double> poly;  // ascending coefficients: trace a polynomial map
  std::vector<double> bbox;  // x0,x1,y0,y1
  std::string out;           // output file prefix; empty = stdout (json only)
  bool want_csv = false, want_json = true, want_svg = false;
};

std::vector<double> parse_reals(const std::string& s, const char* field) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stod(tok));
    } catch (...) {
      throw InvalidInput(std::string(field) + ": expected comma-separated reals");
    }
  }
  if (out.empty()) throw InvalidInput(std::string(field) + ": empty list");
  return out;
}

std::vector<Cplx> parse_points(const std::string& s) {
  // "re,im;re,im;..."
  std::vector<Cplx> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ';')) {
    const auto parts = parse_reals(tok, "tracked");
    if (parts.size() != 2) throw InvalidInput("tracked: each point must be re,im");
    out.emplace_back(parts[0], parts[1]);
  }
  return out;
}

void merge_config_file(JobConfig& job, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw InvalidInput(std::string("config: parse error: ") + e.what());
  }
  if (j.contains("x")) job.x = j["x"].get<std::vector<double>>();
  if (j.contains("pattern")) {
    if (j["pattern"].is_string())
      job.pattern = j["pattern"].get<std::string>();
    else {
      std::string s;
      for (const auto& p : j["pattern"]) {
        if (!s.empty()) s += ",";
        s += std::to_string(p[0].get<int>()) + "-" + std::to_string(p[1].get<int>());
      }
      job.pattern = s;
    }
  }
  if (j.contains("nu")) job.nu = j["nu"];
  if (j.contains("T")) job.T = j["T"].get<double>();
  if (j.contains("dt")) job.dt = j["dt"].get<double>();
  if (j.contains("tracked"))
    for (const auto& p : j["tracked"]) job.tracked.emplace_back(p[0].get<double>(), p[1].get<double>());
  if (j.contains("seed")) job.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("budget")) job.budget = j["budget"].get<int>();
  if (j.contains("sample_every")) job.sample_every = j["sample_every"].get<int>();
  if (j.contains("step")) job.step = j["step"].get<double>();
  if (j.contains("bbox")) job.bbox = j["bbox"].get<std::vector<double>>();
  if (j.contains("poly")) job.poly = j["poly"].get<std::vector<double>>();
  if (j.contains("out")) job.out = j["out"].get<std::string>();
  if (j.contains("outputs")) {
    const auto& o = j["outputs"];
    if (o.contains("csv")) job.want_csv = o["csv"].get<bool>();
    if (o.contains("json")) job.want_json = o["json"].get<bool>();
    if (o.contains("svg")) job.want_svg = o["svg"].get<bool>();
  }
}

Configuration make_config(const JobConfig& job) {
  if (job.x.empty()) throw InvalidInput("x: required (use --x or --config)");
  if (job.x.size() % 2 != 0) throw InvalidInput("x: need an even number of points");
  for (std::size_t i = 1; i < job.x.size(); ++i)
    if (!(job.x[i] > job.x[i - 1])) throw InvalidInput("x must be strictly increasing");
  return Configuration(job.x);
}

SpeedSchedule make_schedule(const JobConfig& job, int m) {
  if (job.nu.is_null()) return SpeedSchedule::uniform(0.25, m);
  if (job.nu.is_number()) return SpeedSchedule::uniform(job.nu.get<double>(), m);
  if (job.nu.is_array()) {
    auto v = job.nu.get<std::vector<double>>();
    if (static_cast<int>(v.size()) == 1) return SpeedSchedule::uniform(v[0], m);
    if (static_cast<int>(v.size()) != m) throw InvalidInput("nu: need 1 or 2n values");
    return SpeedSchedule::per_index(std::move(v));
  }
  if (job.nu.is_object() && job.nu.contains("breaks") && job.nu.contains("values"))
    return SpeedSchedule::piecewise(job.nu["breaks"].get<std::vector<double>>(),
                                    job.nu["values"].get<std::vector<std::vector<double>>>());
  throw InvalidInput("nu: expected a number, a 2n-list, or {breaks, values}");
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path);
  out << content;
}

void emit_json(const JobConfig& job, const json& j, const std::string& suffix) {
  const std::string text = j.dump(2) + "\n";
  if (job.out.empty())
    std::cout << text;
  else
    write_file(job.out + suffix, text);
}

// ------------------------------------------------------------------ poles

int cmd_poles(const JobConfig& job) {
  const Configuration cfg = make_config(job);
  SolveOptions opt;
  opt.seed = job.seed;
  opt.retry_budget = job.budget;
  SolveResult res;
  bool complete = true;
  try {
    res = solve_all(cfg, opt);
  } catch (IncompleteEnumeration& e) {
    res = std::move(e.partial);
    complete = false;
  }
  json out = poles_to_json(cfg, res);
  if (!validate_poles_json(out)) throw Error("internal: poles JSON failed schema validation");
  emit_json(job, out, ".json");
  return complete ? 0 : 2;
}

// ---------------------------------------------------------------- nullvec

int cmd_nullvec(const JobConfig& job) {
  const Configuration cfg = make_config(job);
  if (job.pattern == "all") throw InvalidInput("pattern: nullvec needs an explicit pattern");
  const LinkPattern alpha = parse_pattern(job.pattern);
  SolveOptions opt;
  opt.seed = job.seed;
  opt.retry_budget = job.budget;
  const PoleSolution sol = solve_pattern(cfg, alpha, opt);
  const std::vector<double> U = sol.poles.generic ? compute_U(cfg, sol.poles.zeta)
                                                  : compute_U_from_zeros(cfg, sol.P);
  double logZ = std::numeric_limits<double>::quiet_NaN();
  if (sol.poles.generic) logZ = compute_logZ(cfg, sol.poles.zeta);
  json out = nullvec_to_json(U, logZ, nv_residual(cfg, U), cwi_residual(cfg, U));
  if (!validate_nullvec_json(out)) throw Error("internal: nullvec JSON failed schema validation");
  emit_json(job, out, ".json");
  return 0;
}

// ------------------------------------------------------------------ locus

int cmd_locus(const JobConfig& job) {
  RationalMap R = [&] {
    // a raw polynomial traces the pole-deficient case (no finite poles)
    if (!job.poly.empty()) return RationalMap::polynomial_map(Polynomial(job.poly));
    const Configuration cfg = make_config(job);
    if (job.pattern == "all") throw InvalidInput("pattern: locus needs an explicit pattern");
    SolveOptions opt;
    opt.seed = job.seed;
    opt.retry_budget = job.budget;
    const PoleSolution sol = solve_pattern(cfg, parse_pattern(job.pattern), opt);
    return RationalMap::from_PQ(sol.P, sol.Q, cfg);
  }();
  TraceOptions topt;
  if (job.step > 0.0) topt.step = job.step;
  if (!job.bbox.empty()) {
    if (job.bbox.size() != 4) throw InvalidInput("bbox: need x0,x1,y0,y1");
    topt.bbox = Box{job.bbox[0], job.bbox[1], job.bbox[2], job.bbox[3]};
  }
  const LocusGraph g = trace(R, topt);

  write_file((job.out.empty() ? std::string("locus") : job.out) + ".csv", locus_csv(g));
  if (job.want_svg) {
    SvgLayer layer;
    for (const auto& c : g.curves) layer.polylines.push_back(c.points);
    write_file((job.out.empty() ? std::string("locus") : job.out) + ".svg",
               render_svg({layer}, R.criticals(), R.poles()));
  }
  json out;
  out["curves"] = json::array();
  for (const auto& c : g.curves)
    out["curves"].push_back(json{{"start", c.start_index},
                                 {"end", c.end_index},
                                 {"vertices", c.points.size()}});
  out["unbounded"] = g.has_unbounded;
  if (!g.has_unbounded) {
    json pat = json::array();
    for (auto [a, b] : classify(g).pairs) pat.push_back({a, b});
    out["pattern"] = std::move(pat);
  }
  if (job.want_json) emit_json(job, out, ".json");
  return 0;
}

// ----------------------------------------------------------------- evolve

int cmd_evolve(const JobConfig& job) {
  const Configuration cfg = make_config(job);
  if (job.pattern == "all") throw InvalidInput("pattern: evolve needs an explicit pattern");
  const LinkPattern alpha = parse_pattern(job.pattern);
  SolveOptions sopt;
  sopt.seed = job.seed;
  sopt.retry_budget = job.budget;
  const PoleSolution sol = solve_pattern(cfg, alpha, sopt);

  EvolveOptions eopt;
  eopt.T = job.T;
  eopt.dt = job.dt;
  eopt.nu = make_schedule(job, cfg.size());
  eopt.tracked = job.tracked;
  eopt.sample_every = job.sample_every;
  LoewnerTrajectory traj;
  int code = 0;
  try {
    traj = evolve(cfg, sol, eopt);
  } catch (StepSizeUnderflowError& e) {
    traj = std::move(e.partial);
    std::cerr << "integration failure: " << e.what() << "; last good time "
              << (traj.samples.empty() ? 0.0 : traj.samples.back().t) << "\n";
    code = 3;
  }

  const std::string prefix = job.out.empty() ? "evolve" : job.out;
  if (job.want_csv || code == 0) write_file(prefix + "_traj.csv", trajectory_csv(traj));
  json diag = evolve_diagnostics_to_json(traj);
  if (!validate_evolve_json(diag)) throw Error("internal: evolve JSON failed schema validation");
  if (job.out.empty())
    std::cout << diag.dump(2) << "\n";
  else
    write_file(prefix + "_diag.json", diag.dump(2) + "\n");

  if (job.want_svg) {
    // tips overlaid on the traced initial locus
    SvgLayer locus_layer, tip_layer;
    tip_layer.color = "#c2691f";
    const RationalMap R = RationalMap::from_PQ(sol.P, sol.Q, cfg);
    TraceOptions topt;
    if (job.step > 0.0) topt.step = job.step;
    for (const auto& c : trace(R, topt).curves) locus_layer.polylines.push_back(c.points);
    std::vector<std::vector<Cplx>> tip_paths(static_cast<std::size_t>(cfg.size()));
    for (const auto& s : traj.samples)
      for (std::size_t j = 0; j < s.tips.size(); ++j) tip_paths[j].push_back(s.tips[j]);
    for (auto& p : tip_paths) tip_layer.polylines.push_back(std::move(p));
    write_file(prefix + ".svg",
               render_svg({locus_layer, tip_layer}, R.criticals(), R.poles()));
  }
  return code;
}

// ----------------------------------------------------------------- verify

struct Check {
  std::string name;
  bool pass;
  double value;
  double tol;
};

int cmd_verify(const JobConfig& job) {
  const Configuration cfg = make_config(job);
  const int n = cfg.n();
  std::vector<Check> checks;
  auto push = [&](const std::string& name, double value, double tol) {
    checks.push_back({name, value < tol, value, tol});
  };

  SolveOptions sopt;
  sopt.seed = job.seed;
  sopt.retry_budget = job.budget;
  SolveResult res;
  bool complete = true;
  try {
    res = solve_all(cfg, sopt);
  } catch (IncompleteEnumeration& e) {
    res = std::move(e.partial);
    complete = false;
  }
  checks.push_back({"enumeration_complete_Cn",
                    complete && res.solutions.size() == catalan(n),
                    static_cast<double>(res.solutions.size()), static_cast<double>(catalan(n))});
  {
    std::set<std::string> labels;
    for (const auto& p : res.patterns) labels.insert(p.str());
    checks.push_back({"patterns_distinct_noncrossing", labels.size() == res.patterns.size(),
                      static_cast<double>(labels.size()),
                      static_cast<double>(res.patterns.size())});
  }

  for (std::size_t i = 0; i < res.solutions.size(); ++i) {
    const auto& sol = res.solutions[i];
    const std::string tag = "sol" + std::to_string(i) + "_";
    if (sol.poles.generic) push(tag + "stationary", sol.poles.residual, 1e-8);
    Cplx zsum = 0.0;
    for (Cplx z : sol.poles.zeta) zsum += z;
    push(tag + "centroid", std::abs(zsum / double(n) - cfg.mean()), 1e-9);

    const std::vector<double> U = sol.poles.generic ? compute_U(cfg, sol.poles.zeta)
                                                    : compute_U_from_zeros(cfg, sol.P);
    double nv = 0.0;
    for (double v : nv_residual(cfg, U)) nv = std::max(nv, std::abs(v));
    push(tag + "null_vector", nv, 1e-9);
    double cw = 0.0;
    for (double v : cwi_residual(cfg, U)) cw = std::max(cw, std::abs(v));
    push(tag + "ward_identities", cw, 1e-9);

    if (sol.poles.generic) {
      const auto g = grad_logZ_fd(cfg, sol, 1e-5);
      double ge = 0.0;
      for (std::size_t j = 0; j < g.size(); ++j) ge = std::max(ge, std::abs(g[j] - U[j]));
      push(tag + "gradient_identity", ge, 2e-6);
    }

    const RationalMap R = RationalMap::from_PQ(sol.P, sol.Q, cfg);
    const LocusGraph graph = trace(R);
    const LinkPattern traced = classify(graph);
    checks.push_back({tag + "locus_pattern_matches", traced == res.patterns[i], 0.0, 1.0});

    // nu = 1/4 rhs equals the Calogero-Moser system
    if (sol.poles.generic) {
      const auto flow = flow_rhs(cfg.x, sol.poles.zeta, {},
                                 std::vector<double>(static_cast<std::size_t>(2 * n), 0.25));
      const auto [cmx, cmz] = calogero_moser_rhs(cfg.x, sol.poles.zeta);
      double diff = 0.0;
      for (int j = 0; j < 2 * n; ++j)
        diff = std::max(diff, std::abs(flow.dx[static_cast<std::size_t>(j)] -
                                       cmx[static_cast<std::size_t>(j)]));
      for (int k = 0; k < n; ++k)
        diff = std::max(diff, std::abs(flow.dxi[static_cast<std::size_t>(k)] -
                                       cmz[static_cast<std::size_t>(k)]));
      push(tag + "calogero_moser", diff, 1e-12);
    }

    // short conservation + pushforward run
    EvolveOptions eopt;
    const double scale = cfg.diameter();
    eopt.T = 0.01 * scale * scale;
    eopt.dt = eopt.T / 2000.0;
    eopt.tracked = {Cplx(cfg.mean(), 0.5 * scale), Cplx(cfg.mean() + 0.25 * scale, 0.75 * scale)};
    const auto traj = evolve(cfg, sol, eopt);
    // invariants are measured up to 0.99 of the observed end time; the
    // final approach to tau is dominated by the collision singularity
    const double t_cut = 0.99 * traj.samples.back().t;
    double drift = 0.0, stat = 0.0;
    for (const auto& s : traj.samples) {
      if (s.t > t_cut) break;
      drift = std::max(drift, s.max_drift);
      stat = std::max(stat, s.stationary_residual);
    }
    push(tag + "conservation", drift, 1e-6);
    push(tag + "stationary_along_flow", stat, 1e-6);

    Polynomial P = sol.P, Q = sol.Q;
    double push_err = 0.0;
    for (std::size_t si = traj.samples.size() / 10; si < traj.samples.size();
         si += std::max<std::size_t>(1, traj.samples.size() / 10)) {
      const auto& s = traj.samples[si];
      auto re = refine_solution(Configuration(s.x), P, Q);
      if (!re) continue;
      P = re->P;
      Q = re->Q;
      for (Cplx z : s.xi) {
        double best = 1e300;
        for (Cplx w : re->poles.zeta) best = std::min(best, std::abs(w - z));
        push_err = std::max(push_err, best);
      }
    }
    push(tag + "pushforward_vs_resolve", push_err, 1e-6);
  }

  json out;
  out["x"] = cfg.x;
  out["checks"] = json::array();
  bool all = true;
  for (const auto& c : checks) {
    all = all && c.pass;
    out["checks"].push_back(
        json{{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"tol", c.tol}});
  }
  out["all_pass"] = all;
  if (!validate_verify_json(out)) throw Error("internal: verify JSON failed schema validation");
  emit_json(job, out, ".json");
  return all ? 0 : 1;
}

// flag values that were actually provided; applied after the config file so
// flags win
struct FlagOverrides {
  std::string xs, config_path, pattern, nu, tracked, bbox, poly;
  std::optional<double> T, dt, step;
  std::optional<std::uint64_t> seed;
  std::optional<int> budget, sample_every;
  std::optional<std::string> out;
  bool svg = false, csv = false;
};

void add_common(CLI::App* cmd, FlagOverrides& f) {
  cmd->add_option("--x", f.xs, "critical points, comma separated, strictly increasing");
  cmd->add_option("--config", f.config_path, "JSON job file; flags override its fields");
  cmd->add_option("--seed", f.seed, "RNG seed for multi-start solves");
  cmd->add_option("--out", f.out, "output file prefix (default: JSON to stdout)");
  cmd->add_option("--budget", f.budget, "multi-start retry budget");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multiple SLE(0): poles, null-vector solutions, loci, Loewner flow"};
  app.require_subcommand(1);

  FlagOverrides f;

  auto* poles = app.add_subcommand("poles", "solve the stationary relation for all patterns");
  add_common(poles, f);

  auto* nullvec = app.add_subcommand("nullvec", "U, log Z and residuals for one pattern");
  add_common(nullvec, f);
  nullvec->add_option("--pattern", f.pattern, "link pattern, e.g. 1-2,3-4");

  auto* locus = app.add_subcommand("locus", "trace the real locus");
  add_common(locus, f);
  locus->add_option("--pattern", f.pattern, "link pattern, e.g. 1-2,3-4");
  locus->add_option("--step", f.step, "trace step (absolute)");
  locus->add_option("--poly", f.poly, "ascending coefficients: trace this polynomial map");
  locus->add_option("--bbox", f.bbox, "x0,x1,y0,y1");
  locus->add_flag("--svg", f.svg, "write an SVG rendering");
  locus->add_flag("--csv", f.csv, "write polyline CSV");

  auto* evolve_cmd = app.add_subcommand("evolve", "integrate the Loewner system");
  add_common(evolve_cmd, f);
  evolve_cmd->add_option("--pattern", f.pattern, "link pattern, e.g. 1-2,3-4");
  evolve_cmd->add_option("--nu", f.nu, "speed: constant or 2n comma-separated values");
  evolve_cmd->add_option("--T", f.T, "final capacity time");
  evolve_cmd->add_option("--dt", f.dt, "base step");
  evolve_cmd->add_option("--tracked", f.tracked, "interior points re,im;re,im;...");
  evolve_cmd->add_option("--sample-every", f.sample_every, "record every k-th step");
  evolve_cmd->add_flag("--svg", f.svg, "overlay tips on the traced locus");
  evolve_cmd->add_flag("--csv", f.csv, "write trajectory CSV");

  auto* verify = app.add_subcommand("verify", "run the invariant suite on a configuration");
  add_common(verify, f);
  verify->add_option("--pattern", f.pattern, "'all' (default) or explicit");

  CLI11_PARSE(app, argc, argv);

  JobConfig job;
  try {
    if (!f.config_path.empty()) merge_config_file(job, f.config_path);
    if (!f.xs.empty()) job.x = parse_reals(f.xs, "x");
    if (!f.pattern.empty()) job.pattern = f.pattern;
    if (!f.nu.empty()) {
      const auto vals = parse_reals(f.nu, "nu");
      job.nu = vals.size() == 1 ? json(vals[0]) : json(vals);
    }
    if (!f.tracked.empty()) job.tracked = parse_points(f.tracked);
    if (!f.bbox.empty()) job.bbox = parse_reals(f.bbox, "bbox");
    if (!f.poly.empty()) job.poly = parse_reals(f.poly, "poly");
    if (f.T) job.T = *f.T;
    if (f.dt) job.dt = *f.dt;
    if (f.step) job.step = *f.step;
    if (f.seed) job.seed = *f.seed;
    if (f.budget) job.budget = *f.budget;
    if (f.sample_every) job.sample_every = *f.sample_every;
    if (f.out) job.out = *f.out;
    if (f.svg) job.want_svg = true;
    if (f.csv) job.want_csv = true;

    if (poles->parsed()) return cmd_poles(job);
    if (nullvec->parsed()) return cmd_nullvec(job);
    if (locus->parsed()) return cmd_locus(job);
    if (evolve_cmd->parsed()) return cmd_evolve(job);
    if (verify->parsed()) return cmd_verify(job);
  } catch (const InvalidInput& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const IncompleteEnumeration& e) {
    std::cerr << "incomplete enumeration: " << e.what() << "\n";
    return 2;
  } catch (const StepSizeUnderflow& e) {
    std::cerr << "integration failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
