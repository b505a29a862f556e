#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "contourlab/error.hpp"
#include "contourlab/melnikov.hpp"
#include "contourlab/parallel.hpp"
#include "internal.hpp"

namespace contourlab::cli {

namespace {

// Collects named outputs; writes them under --out or, without it, to stdout.
class Sink {
 public:
  Sink(std::string dir, std::ostream& out) : dir_(std::move(dir)), out_(out) {}

  void emit(const std::string& name, const std::string& content) { files_.emplace_back(name, content); }
  void emit(const std::string& name, const io::json& j) { emit(name, j.dump(2) + "\n"); }

  void flush() {
    if (dir_.empty()) {
      for (const auto& [name, content] : files_) {
        if (files_.size() > 1) out_ << "# " << name << '\n';
        out_ << content;
      }
      return;
    }
    std::filesystem::create_directories(dir_);
    for (const auto& [name, content] : files_) {
      std::ofstream f(std::filesystem::path(dir_) / name, std::ios::binary);
      if (!f) throw ContourError(ErrorCode::InvalidArgument, "cannot write " + name + " under " + dir_);
      f << content;
    }
  }

 private:
  std::string dir_;
  std::ostream& out_;
  std::vector<std::pair<std::string, std::string>> files_;
};

struct Common {
  std::string spec_path;
  std::string out_dir;
  std::uint64_t seed = 42;
  std::map<std::string, double> tol_flags;
};

ProblemSpec load(const Common& c) {
  if (c.spec_path.empty()) throw ContourError(ErrorCode::InvalidArgument, "--spec is required");
  ProblemSpec s = load_spec(c.spec_path);
  for (const auto& [k, v] : c.tol_flags) s.tol.set(k, v);
  return s;
}

std::vector<std::string> cplx_cells(cplx z) { return {io::fmt(z.real()), io::fmt(z.imag())}; }

int cmd_critical(const ProblemSpec& spec, Sink& sink) {
  if (spec.H.degree() < 1) throw ContourError(ErrorCode::InvalidArgument, "constant H has no critical points");
  sink.emit("critical.json", io::to_json(critical_data(spec.H)));
  return 0;
}

int cmd_sweep(const ProblemSpec& spec, std::string loop_name, const io::json& grid_override, Sink& sink) {
  const io::json sw = spec.doc.value("sweep", io::json::object());
  if (loop_name.empty()) loop_name = sw.value("loop", "");
  if (loop_name.empty()) throw ContourError(ErrorCode::InvalidArgument, "sweep needs a loop (--loop or sweep.loop)");
  const io::json grid_json = grid_override.is_null() ? sw.value("h", io::json()) : grid_override;
  if (grid_json.is_null()) throw ContourError(ErrorCode::InvalidArgument, "sweep needs an h grid (sweep.h)");
  const std::vector<cplx> grid = grid_from_json(grid_json);

  const Fibration fib(spec.H);
  const FiberControls fc = spec.tol.fiber_controls();
  const Coefficients co = spec.coefficients();
  const double tol_res = spec.tol["resonance"];
  std::map<std::string, FiberLoop> cache;
  const FiberLoop start = build_loop(spec, loop_name, cache);

  // Transport is a chain along the grid; the functionals are independent.
  std::vector<FiberLoop> loops(grid.size());
  std::vector<std::string> errors(grid.size());
  FiberLoop current = start;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    try {
      if (current.h() != grid[k])
        current = transport_loop(fib, current, BasePath::segment(current.h(), grid[k], fc.base_step), fc);
      loops[k] = current;
    } catch (const ContourError& e) {
      errors[k] = e.what();
      // Restart from the recipe's loop for the remaining points.
      current = start;
    }
  }
  std::vector<LoopFunctionals> f(grid.size());
  std::vector<std::string> status(grid.size(), "ok");
  std::vector<double> gap(grid.size(), NAN);
  parallel_for(grid.size(), [&](std::size_t k) {
    if (!errors[k].empty()) {
      status[k] = "error";
      return;
    }
    try {
      const LoopQuadrature quad(fib, loops[k]);
      const LoopIntegrals li = loop_integrals(quad, co);
      gap[k] = resonance_gap(li.I);
      if (gap[k] <= tol_res) {
        f[k] = {li.T, li.I, li.theta_plus, li.theta_minus, li.phi, cplx(NAN, NAN), INFINITY, true};
        status[k] = "resonant";
        return;
      }
      f[k] = loop_functionals(quad, co, tol_res);
      if (f[k].near_resonant) status[k] = "near_resonant";
    } catch (const ContourError& e) {
      errors[k] = e.what();
      status[k] = "error";
    }
  });

  std::ostringstream csv;
  io::write_row(csv, {"h_re", "h_im", "T_re", "T_im", "I_re", "I_im", "theta_plus_re", "theta_plus_im",
                      "theta_minus_re", "theta_minus_im", "phi_re", "phi_im", "psi_re", "psi_im",
                      "resonance_gap", "status", "error"});
  std::size_t failed = 0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    std::vector<std::string> row = cplx_cells(grid[k]);
    if (status[k] == "error") {
      ++failed;
      row.insert(row.end(), 13, "nan");
    } else {
      for (cplx z : {f[k].T, f[k].I, f[k].theta_plus, f[k].theta_minus, f[k].phi, f[k].psi}) {
        auto c = cplx_cells(z);
        row.insert(row.end(), c.begin(), c.end());
      }
      row.push_back(io::fmt(gap[k]));
    }
    row.push_back(status[k]);
    std::string err = errors[k];
    for (char& ch : err)
      if (ch == ',' || ch == '\n') ch = ';';
    row.push_back(err);
    io::write_row(csv, row);
  }
  sink.emit("sweep.csv", csv.str());
  return failed == grid.size() ? 1 : 0;
}

int cmd_monodromy(const ProblemSpec& spec, Sink& sink) {
  const Fibration fib(spec.H);
  const FrameSetup setup = spec.frame_setup();
  const Coefficients co = spec.coefficients();
  const double tol_res = spec.tol["resonance"];
  const io::json m = spec.doc.value("monodromy", io::json::object());
  const std::vector<double> radii = m.value("radii", std::vector<double>{0.5});

  const Frame f = build_frame(fib, setup);
  io::json report = {{"h0", setup.h0},
                     {"crit_value", io::to_json(setup.crit_value)},
                     {"meeting_distance", f.meeting_distance},
                     {"loop_sizes", {{"gamma", f.gamma.size()}, {"delta", f.delta.size()},
                                     {"commutator", f.commutator.size()}}}};
  bool ok = true;
  io::json turns = io::json::array();
  for (double r : radii) {
    const FrameTurn t = turn_frame(fib, f, setup.crit_value, r, co, setup.controls);
    const MonellReport mr = monell_residual(t, tol_res);
    const XiReport xr = xi_invariance(t, setup.h0, setup.crit_value, tol_res);
    io::json res = {{"picard_lefschetz", distance(t.gamma_after, t.gamma_before * t.delta_before)},
                    {"delta_unchanged", distance(t.delta_after, t.delta_before)},
                    {"commutator_unchanged", distance(t.comm_after, t.comm_before)},
                    {"monell", mr.residual},
                    {"mid_identity", mr.mid_identity},
                    {"xi", xr.difference}};
    for (const auto& [k, v] : res.items())
      ok = ok && v.get<double>() <= (k == "monell" || k == "xi" ? spec.tol["monell"] : spec.tol["monodromy"]);
    io::json drift = io::json::object();
    for (const auto& [k, v] : t.drift) drift[k] = v;
    turns.push_back({{"radius", r},
                     {"residuals", res},
                     {"base_drift", drift},
                     {"rho_gamma", io::to_json(t.gamma_before)},
                     {"rho_delta", io::to_json(t.delta_before)},
                     {"rho_gamma_after", io::to_json(t.gamma_after)},
                     {"psi_gamma_after", io::to_json(t.psi_gamma_after)},
                     {"monell_lhs", io::to_json(mr.lhs)},
                     {"monell_rhs", io::to_json(mr.rhs)},
                     {"xi_before", io::to_json(xr.before)},
                     {"xi_after", io::to_json(xr.after)}});
  }
  report["turns"] = turns;

  if (m.contains("rank")) {
    const io::json& rk = m["rank"];
    std::vector<double> hs;
    for (cplx h : grid_from_json(rk.at("h"))) hs.push_back(h.real());
    const int iters = rk.value("iterations", 8);
    const RankReport rr = rk.value("reduced", false)
                              ? rank_growth_reduced(fib, setup, hs, iters, co, spec.tol["rank"])
                              : rank_growth(fib, setup, hs, iters, co, spec.tol["rank"]);
    std::ostringstream csv;
    std::vector<std::string> head = {"i", "rank"};
    for (const auto& [thr, v] : rr.sensitivity) head.push_back("rank_at_" + io::fmt(thr));
    io::write_row(csv, head);
    for (std::size_t i = 0; i < rr.ranks.size(); ++i) {
      std::vector<std::string> row = {std::to_string(i), std::to_string(rr.ranks[i])};
      for (const auto& [thr, v] : rr.sensitivity) row.push_back(std::to_string(v[i]));
      io::write_row(csv, row);
    }
    sink.emit("rank.csv", csv.str());
    report["rank"] = {{"ranks", rr.ranks}, {"strictly_increasing", rr.strictly_increasing}};
    ok = ok && rr.strictly_increasing;
  }
  report["pass"] = ok;
  sink.emit("monodromy.json", report);
  return ok ? 0 : 1;
}

Section section_from(const io::json& block) {
  Section s;
  if (block.contains("section")) {
    const auto& j = block["section"];
    s.px = j.value("px", s.px);
    s.py = j.value("py", s.py);
    s.nx = j.value("nx", s.nx);
    s.ny = j.value("ny", s.ny);
  }
  return s;
}

std::vector<double> real_grid(const io::json& j) {
  std::vector<double> out;
  for (cplx z : grid_from_json(j)) {
    if (z.imag() != 0.0) throw ContourError(ErrorCode::InvalidArgument, "real grid expected");
    out.push_back(z.real());
  }
  return out;
}

int cmd_melnikov(const ProblemSpec& spec, Sink& sink) {
  const io::json m = spec.doc.value("melnikov", io::json::object());
  const std::vector<double> hs = real_grid(m.value("h", io::json::array({0.0})));
  const std::vector<double> eps = m.contains("eps") ? real_grid(m["eps"]) : default_eps_grid();
  const Section sec = section_from(m);
  const FlowControls fc = spec.tol.flow_controls();

  io::json report;
  int code = 0;
  std::vector<ReturnSample> samples;
  try {
    MelnikovExpansion e = melnikov_expansion(spec.H, spec.P, spec.Q, hs, eps, sec, fc);
    samples = e.samples;
    report = io::to_json(e);
  } catch (const ContourError& e) {
    if (e.code() != ErrorCode::AllOrdersVanish) throw;
    report = {{"k", 0}, {"h", hs}, {"Mk", io::json::array()}, {"error", e.what()}};
    code = 1;
    samples.resize(hs.size() * eps.size());
    parallel_for(samples.size(), [&](std::size_t i) {
      samples[i] = poincare_return(spec.H, spec.P, spec.Q, hs[i / eps.size()], eps[i % eps.size()], sec, 1, fc);
    });
  }
  std::ostringstream csv;
  io::write_row(csv, {"h", "eps", "delta_h", "crossings"});
  for (const auto& s : samples)
    io::write_row(csv, {io::fmt(s.h), io::fmt(s.eps), io::fmt(s.delta_h), std::to_string(s.crossings)});
  sink.emit("melnikov_sweep.csv", csv.str());
  sink.emit("melnikov.json", report);
  return code;
}

int cmd_simulate3d(const ProblemSpec& spec, Sink& sink) {
  const io::json m = spec.doc.value("simulate3d", io::json::object());
  const double h = m.value("h", 0.0);
  const std::vector<double> eps =
      m.contains("eps") ? real_grid(m["eps"]) : std::vector<double>{1e-3, 5e-4, 2.5e-4};
  const int n_points = m.value("n_points", 400);
  const Section sec = section_from(m);
  const Fibration fib(spec.H);
  const auto st = section_start(spec.H, sec, h);
  const FiberLoop oval = trace_real_oval(fib, h, st[0], st[1], n_points, spec.tol.fiber_controls());
  const PontryaginMelnikov pm = pontryagin_melnikov(spec.system(0.0), oval);

  std::vector<Simulation3D> sims(eps.size());
  parallel_for(eps.size(), [&](std::size_t k) {
    sims[k] = simulate_3d_return(spec.system(eps[k]), h, sec, spec.tol.flow_controls(), n_points);
  });
  io::json runs = io::json::array();
  double C = 0.0;
  for (std::size_t k = 0; k < eps.size(); ++k) {
    const double dev = sims[k].delta_h / eps[k] - pm.direct.real();
    C = std::max(C, std::abs(dev) / eps[k]);
    runs.push_back({{"eps", eps[k]},
                    {"delta_h", sims[k].delta_h},
                    {"delta_h_over_eps", sims[k].delta_h / eps[k]},
                    {"deviation", dev},
                    {"tracking", sims[k].tracking},
                    {"tracking_constant", sims[k].tracking / (eps[k] * eps[k])},
                    {"period", sims[k].period}});
    std::ostringstream csv;
    io::write_row(csv, {"t", "x", "y", "z", "H"});
    for (const auto& p : sims[k].profile)
      io::write_row(csv, {io::fmt(p.t), io::fmt(p.x), io::fmt(p.y), io::fmt(p.z), io::fmt(p.H)});
    sink.emit("simulate3d_" + std::to_string(k) + ".csv", csv.str());
  }
  io::json report = {{"h", h},
                     {"system", io::to_json(spec.system(0.0))},
                     {"J", {{"direct", io::to_json(pm.direct)},
                            {"abelian", io::to_json(pm.abelian)},
                            {"psi", io::to_json(pm.psi)},
                            {"decomposed", io::to_json(pm.decomposed())},
                            {"scale", pm.scale},
                            {"route_gap", pm.route_gap()}}},
                     {"runs", runs},
                     {"convergence_constant", C}};
  sink.emit("simulate3d.json", report);
  return 0;
}

int cmd_verify(const ProblemSpec& spec, const std::string& suite, std::uint64_t seed, Sink& sink) {
  if (!known_suite(suite)) throw ContourError(ErrorCode::InvalidArgument, "unknown suite '" + suite + "'");
  const std::vector<Check> checks = verify_suite(spec, suite, seed);
  bool ok = !checks.empty();
  io::json arr = io::json::array();
  for (const auto& c : checks) {
    ok = ok && c.pass;
    io::json j = {{"name", c.name}, {"residual", c.residual}, {"tol", c.tol}, {"pass", c.pass}};
    if (!c.note.empty()) j["note"] = c.note;
    arr.push_back(j);
  }
  sink.emit("verify.json", io::json{{"suite", suite}, {"seed", seed}, {"checks", arr}, {"pass", ok}});
  return ok ? 0 : 1;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"contour integrals, monodromy and Melnikov functions on level curves of polynomials"};
  app.require_subcommand(1);
  Common common;
  std::string loop_name, suite = "all";
  double h_from = NAN, h_to = NAN;
  int h_n = 0;

  const Tolerances defaults;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--spec", common.spec_path, "problem spec (JSON)")->required();
    sub->add_option("--out", common.out_dir, "output directory (default: stdout)");
    sub->add_option("--seed", common.seed, "seed for random suites")->capture_default_str();
    for (const auto& [name, v] : defaults.values) {
      std::ostringstream dflt;
      dflt << v;
      sub->add_option_function<double>(
             "--tol-" + name, [&common, key = name](double x) { common.tol_flags[key] = x; },
             "tolerance '" + name + "' (default " + dflt.str() + ")")
          ->check(CLI::PositiveNumber);
    }
  };
  CLI::App* critical = app.add_subcommand("critical", "critical points and values of H");
  CLI::App* sweep = app.add_subcommand("sweep", "loop functionals over an h grid");
  CLI::App* mono = app.add_subcommand("monodromy", "transport around a critical value and its identities");
  CLI::App* mel = app.add_subcommand("melnikov", "Poincare returns and the Melnikov expansion");
  CLI::App* sim = app.add_subcommand("simulate3d", "3D simulation against the Pontryagin-Melnikov integral");
  CLI::App* ver = app.add_subcommand("verify", "identity suites with pass/fail report");
  for (CLI::App* s : {critical, sweep, mono, mel, sim, ver}) add_common(s);
  sweep->add_option("--loop", loop_name, "loop name from the spec file");
  sweep->add_option("--h-from", h_from, "grid start (overrides sweep.h)");
  sweep->add_option("--h-to", h_to, "grid end");
  sweep->add_option("--h-n", h_n, "grid size");
  ver->add_option("--suite", suite, "group, psi, monodromy, melnikov, normalvar or all")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    const ProblemSpec spec = load(common);
    Sink sink(common.out_dir, out);
    int code = 0;
    if (critical->parsed()) {
      code = cmd_critical(spec, sink);
    } else if (sweep->parsed()) {
      io::json grid;
      if (h_n > 0) {
        if (std::isnan(h_from) || std::isnan(h_to))
          throw ContourError(ErrorCode::InvalidArgument, "--h-n needs --h-from and --h-to");
        grid = {{"from", h_from}, {"to", h_to}, {"n", h_n}};
      }
      code = cmd_sweep(spec, loop_name, grid, sink);
    } else if (mono->parsed()) {
      code = cmd_monodromy(spec, sink);
    } else if (mel->parsed()) {
      code = cmd_melnikov(spec, sink);
    } else if (sim->parsed()) {
      code = cmd_simulate3d(spec, sink);
    } else {
      code = cmd_verify(spec, suite, common.seed, sink);
    }
    sink.flush();
    return code;
  } catch (const ContourError& e) {
    err << "error: " << e.what() << '\n';
    if (e.code() == ErrorCode::InvalidArgument) {
      err << app.help();
      return 2;
    }
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace contourlab::cli
