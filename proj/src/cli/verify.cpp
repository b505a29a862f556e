#include <algorithm>
#include <cmath>
#include <random>

#include "contourlab/error.hpp"
#include "contourlab/melnikov.hpp"
#include "contourlab/monodromy.hpp"
#include "contourlab/normal_var.hpp"
#include "contourlab/parallel.hpp"
#include "contourlab/tri_group.hpp"
#include "internal.hpp"

namespace contourlab::cli {

namespace {

Check check(std::string name, double residual, double tol, std::string note = {}) {
  return {std::move(name), residual, tol, std::isfinite(residual) && residual <= tol, std::move(note)};
}

double rel(const Eigen::Matrix3cd& x, const Eigen::Matrix3cd& y) {
  return (x - y).norm() / std::max(1.0, y.norm());
}

std::vector<Check> group_suite(const ProblemSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto draw = [&] {
    while (true) {
      TriMatrix w{cplx(2.0 * u(rng), 3.0 * u(rng)), cplx(u(rng), u(rng)), cplx(u(rng), u(rng)),
                  cplx(u(rng), u(rng))};
      if (resonance_gap(w.I) > 1e-3) return w;
    }
  };
  double mul = 0, inv = 0, com = 0, def = 0, mid = 0;
  int pairs = 0;
  while (pairs < 100) {
    const TriMatrix w1 = draw(), w2 = draw();
    if (resonance_gap(w1.I + w2.I) <= 1e-3) continue;
    ++pairs;
    const Eigen::Matrix3cd d1 = w1.dense(), d2 = w2.dense();
    mul = std::max(mul, rel((w1 * w2).dense(), d1 * d2));
    inv = std::max(inv, rel(inverse(w1).dense(), d1.inverse()));
    com = std::max(com, rel(commutator(w1, w2).dense(), d1 * d2 * d1.inverse() * d2.inverse()));
    // psi from its definition as an entry of a quadratic expression in W.
    const cplx s = std::exp(0.5 * w1.I);
    const Eigen::Matrix3cd id = Eigen::Matrix3cd::Identity();
    const Eigen::Matrix3cd q = (d1 - s * id) * (d1 - id / s) / (std::exp(-w1.I) - 1.0);
    def = std::max(def, std::abs(psi(w1) - q(0, 2)) / std::max(1.0, std::abs(q(0, 2))));
    const MidResidual m = mid_identity_residual(w1, w2);
    mid = std::max(mid, std::abs(m.residual) / std::max(1.0, m.scale));
  }
  const double tol = spec.tol["group"];
  return {check("group.multiply", mul, tol), check("group.inverse", inv, tol),
          check("group.commutator", com, tol), check("group.psi_definition", def, tol),
          check("group.mid_identity", mid, tol)};
}

std::vector<Check> psi_suite(const ProblemSpec& spec, std::uint64_t seed) {
  const Fibration fib(spec.H);
  const FiberControls c = spec.tol.fiber_controls();
  const Coefficients co = spec.coefficients();
  const Frame f = build_frame(fib, spec.frame_setup());
  const FiberLoop gi = invert_loop(f.gamma), di = invert_loop(f.delta);
  std::vector<FiberLoop> base = {f.gamma, f.delta, gi, di,
                                 compose_loops(compose_loops(f.gamma, f.delta, c), gi, c),
                                 compose_loops(compose_loops(f.delta, f.gamma, c), di, c)};
  std::vector<TriMatrix> rb(base.size());
  parallel_for(base.size(), [&](std::size_t k) { rb[k] = rho(fib, base[k], co); });

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, base.size() - 1);
  std::vector<std::pair<std::size_t, std::size_t>> pairs(20);
  for (auto& p : pairs) p = {pick(rng), pick(rng)};
  std::vector<double> hom(pairs.size()), psi_gap(pairs.size());
  const double tol_res = spec.tol["resonance"];
  parallel_for(pairs.size(), [&](std::size_t k) {
    const auto [i, j] = pairs[k];
    const FiberLoop l = compose_loops(base[i], base[j], c);
    const LoopQuadrature quad(fib, l);
    const TriMatrix r = rho(quad, co);
    hom[k] = distance(r, rb[i] * rb[j]);
    if (resonance_gap(r.I) > tol_res) {
      const cplx d = psi_direct(quad, co, tol_res);
      psi_gap[k] = std::abs(d - psi(r, tol_res)) / std::abs(d);
    }
  });
  return {check("psi.homomorphism", *std::max_element(hom.begin(), hom.end()), spec.tol["homomorphism"]),
          check("psi.direct_vs_rho", *std::max_element(psi_gap.begin(), psi_gap.end()), spec.tol["psi"])};
}

std::vector<double> radii(const ProblemSpec& spec) {
  std::vector<double> r = {0.5};
  if (spec.doc.contains("monodromy") && spec.doc["monodromy"].contains("radii"))
    r = spec.doc["monodromy"]["radii"].get<std::vector<double>>();
  return r;
}

std::vector<Check> monodromy_suite(const ProblemSpec& spec) {
  const Fibration fib(spec.H);
  const FrameSetup setup = spec.frame_setup();
  const Coefficients co = spec.coefficients();
  const Frame f = build_frame(fib, setup);
  std::vector<Check> out;
  for (double r : radii(spec)) {
    const FrameTurn t = turn_frame(fib, f, setup.crit_value, r, co, setup.controls);
    const std::string tag = "monodromy[r=" + io::fmt(r) + "].";
    const double tol = spec.tol["monodromy"], tol_m = spec.tol["monell"];
    out.push_back(check(tag + "picard_lefschetz", distance(t.gamma_after, t.gamma_before * t.delta_before), tol));
    out.push_back(check(tag + "delta_unchanged", distance(t.delta_after, t.delta_before), tol));
    out.push_back(check(tag + "commutator_unchanged", distance(t.comm_after, t.comm_before), tol));
    const MonellReport m = monell_residual(t, spec.tol["resonance"]);
    out.push_back(check(tag + "monell", m.residual, tol_m));
    out.push_back(check(tag + "xi", xi_invariance(t, setup.h0, setup.crit_value, spec.tol["resonance"]).difference,
                        tol_m));
  }
  return out;
}

double section_h(const ProblemSpec& spec, const char* section, double fallback) {
  if (spec.doc.contains(section) && spec.doc[section].contains("h")) {
    const auto& h = spec.doc[section]["h"];
    if (h.is_number()) return h.get<double>();
    if (h.is_array() && !h.empty() && h[0].is_number()) return h[0].get<double>();
  }
  return fallback;
}

Section section_of(const ProblemSpec& spec, const char* key) {
  Section s;
  if (spec.doc.contains(key) && spec.doc[key].contains("section")) {
    const auto& j = spec.doc[key]["section"];
    s.px = j.value("px", s.px);
    s.py = j.value("py", s.py);
    s.nx = j.value("nx", s.nx);
    s.ny = j.value("ny", s.ny);
  }
  return s;
}

std::vector<Check> melnikov_suite(const ProblemSpec& spec) {
  const Fibration fib(spec.H);
  const FlowControls fc = spec.tol.flow_controls();
  const Section sec = section_of(spec, "melnikov");
  const double h = section_h(spec, "melnikov", 0.0);
  const Poly y = Poly::y();
  const auto st = section_start(spec.H, sec, h);
  const FiberLoop oval = trace_real_oval(fib, h, st[0], st[1], 400, spec.tol.fiber_controls());
  const double abel = abelian_integral(fib, oval, y, Poly{}).real();

  const double eps = 1e-4;
  std::vector<double> dh(3);
  // y dH + dx: exact at first order, nonzero at second.
  const Poly Q2 = Poly::constant(1.0) + y * spec.H.partial_x(), P2 = -(y * spec.H.partial_y());
  parallel_for(3, [&](std::size_t k) {
    if (k == 0) dh[0] = poincare_return(spec.H, Poly{}, Poly{}, h, 0.0, sec, 1, fc).delta_h;
    if (k == 1) dh[1] = poincare_return(spec.H, Poly{}, y, h, eps, sec, 1, fc).delta_h;
    if (k == 2) dh[2] = poincare_return(spec.H, P2, Q2, h, 1e-3, sec, 1, fc).delta_h;
  });
  const double dh_half = poincare_return(spec.H, P2, Q2, h, 5e-4, sec, 1, fc).delta_h;
  const double slope = std::log(std::abs(dh[2] / dh_half)) / std::log(2.0);
  return {check("melnikov.eps0_drift", std::abs(dh[0]), 10.0 * fc.rel_tol),
          check("melnikov.first_order", std::abs(dh[1] / eps - abel) / std::abs(abel), spec.tol["melnikov"]),
          check("melnikov.exact_form_slope", std::abs(slope - 2.0) / 2.0, 0.1)};
}

std::vector<Check> normalvar_suite(const ProblemSpec& spec) {
  const Fibration fib(spec.H);
  const Section sec = section_of(spec, "simulate3d");
  const double h = section_h(spec, "simulate3d", 0.0);
  const auto st = section_start(spec.H, sec, h);
  const FiberLoop oval = trace_real_oval(fib, h, st[0], st[1], 400, spec.tol.fiber_controls());
  const PontryaginMelnikov pm = pontryagin_melnikov(spec.system(0.0), oval);
  const std::vector<double> eps = {1e-3, 5e-4, 2.5e-4};
  std::vector<Simulation3D> sims(eps.size());
  parallel_for(eps.size(), [&](std::size_t k) {
    sims[k] = simulate_3d_return(spec.system(eps[k]), h, sec, spec.tol.flow_controls());
  });
  double C = 0.0, track = 0.0;
  for (std::size_t k = 0; k < eps.size(); ++k) {
    C = std::max(C, std::abs(sims[k].delta_h / eps[k] - pm.direct.real()) / eps[k]);
    track = std::max(track, sims[k].tracking / (eps[k] * eps[k]));
  }
  const Simulation3D still = simulate_3d_return(spec.system(0.0), h, sec, spec.tol.flow_controls());
  double z0 = 0.0;
  for (const auto& s : still.profile) z0 = std::max(z0, std::abs(s.z));
  // C and the tracking constant only need to be finite; 1e6 stands for "finite".
  return {check("normalvar.route_gap", pm.route_gap(), spec.tol["route"]),
          check("normalvar.convergence_constant", C, 1e6, "|dH/eps - J| <= C eps"),
          check("normalvar.tracking_constant", track, 1e6, "max|z - eps g| <= C eps^2"),
          check("normalvar.invariant_plane", z0, 0.0)};
}

}  // namespace

bool known_suite(const std::string& s) {
  return s == "group" || s == "psi" || s == "monodromy" || s == "melnikov" || s == "normalvar" || s == "all";
}

std::vector<Check> verify_suite(const ProblemSpec& spec, const std::string& suite, std::uint64_t seed) {
  if (!known_suite(suite)) throw ContourError(ErrorCode::InvalidArgument, "unknown suite '" + suite + "'");
  std::vector<Check> out;
  auto add = [&](std::vector<Check> v) { out.insert(out.end(), v.begin(), v.end()); };
  auto run = [&](const std::string& name, auto&& fn) {
    if (suite != name && suite != "all") return;
    try {
      add(fn());
    } catch (const ContourError& e) {
      out.push_back({name, NAN, 0.0, false, e.what()});
    }
  };
  run("group", [&] { return group_suite(spec, seed); });
  run("psi", [&] { return psi_suite(spec, seed); });
  run("monodromy", [&] { return monodromy_suite(spec); });
  run("melnikov", [&] { return melnikov_suite(spec); });
  run("normalvar", [&] { return normalvar_suite(spec); });
  return out;
}

std::vector<cplx> grid_from_json(const io::json& j) {
  std::vector<cplx> out;
  if (j.is_array()) {
    for (const auto& v : j) out.push_back(io::cplx_from_json(v));
  } else if (j.is_object()) {
    const cplx a = io::cplx_from_json(j.at("from")), b = io::cplx_from_json(j.at("to"));
    const int n = j.at("n").get<int>();
    if (n < 1) throw ContourError(ErrorCode::InvalidArgument, "grid needs n >= 1");
    for (int k = 0; k < n; ++k) out.push_back(n == 1 ? a : a + (b - a) * (double(k) / (n - 1)));
  } else {
    throw ContourError(ErrorCode::InvalidArgument, "grid must be a list or {from, to, n}");
  }
  if (out.empty()) throw ContourError(ErrorCode::InvalidArgument, "empty grid");
  return out;
}

}  // namespace contourlab::cli
