#include <fstream>
#include <sstream>

#include "contourlab/cli.hpp"
#include "contourlab/error.hpp"

namespace contourlab::cli {

Tolerances::Tolerances() {
  values = {
      {"resonance", 1e-8},    // e^I = 1 test
      {"fiber", 1e-10},       // |H - h| at loop samples
      {"base", 1e-9},         // base points coincide
      {"rank", 1e-8},         // relative SVD threshold
      {"abs", 1e-12},         // integrator absolute tolerance
      {"rel", 1e-11},         // integrator relative tolerance
      {"event", 1e-12},       // section crossing position
      {"group", 1e-11},       // exact TriMatrix algebra
      {"homomorphism", 1e-7}, // rho(g d) vs rho(g) rho(d)
      {"psi", 1e-6},          // psi_direct vs psi(rho)
      {"monodromy", 1e-6},    // Picard-Lefschetz images
      {"monell", 1e-5},       // monodromy formula and xi
      {"melnikov", 1e-3},     // first-order Melnikov vs Abelian integral
      {"route", 1e-6},        // J decomposition routes
  };
}

double Tolerances::operator[](const std::string& name) const {
  auto it = values.find(name);
  if (it == values.end()) throw ContourError(ErrorCode::InvalidArgument, "unknown tolerance '" + name + "'");
  return it->second;
}

void Tolerances::set(const std::string& name, double v) {
  if (!values.count(name)) throw ContourError(ErrorCode::InvalidArgument, "unknown tolerance '" + name + "'");
  if (!(v > 0.0)) throw ContourError(ErrorCode::InvalidArgument, "tolerance '" + name + "' must be positive");
  values[name] = v;
}

FiberControls Tolerances::fiber_controls() const {
  FiberControls c;
  c.tol_fiber = (*this)["fiber"];
  c.tol_base = (*this)["base"];
  return c;
}

FlowControls Tolerances::flow_controls() const {
  FlowControls c;
  c.abs_tol = (*this)["abs"];
  c.rel_tol = (*this)["rel"];
  c.event_tol = (*this)["event"];
  return c;
}

System3D ProblemSpec::system(double eps) const {
  System3D s;
  s.H = H;
  s.R = R;
  s.S = S;
  s.A = A;
  s.b = b;
  s.P = P;
  s.Q = Q;
  s.eps = eps;
  if (doc.contains("simulate3d")) s.hyp_margin = doc["simulate3d"].value("hyp_margin", s.hyp_margin);
  return s;
}

namespace {

Point2 point_from_json(const io::json& j) {
  if (!j.is_array() || j.size() != 2) throw ContourError(ErrorCode::InvalidArgument, "expected a point [x, y]");
  return {io::cplx_from_json(j[0]), io::cplx_from_json(j[1])};
}

double real_from_json(const io::json& j, const char* what) {
  if (!j.is_number()) throw ContourError(ErrorCode::InvalidArgument, std::string(what) + " must be a real number");
  return j.get<double>();
}

}  // namespace

FrameSetup ProblemSpec::frame_setup() const {
  FrameSetup s;
  s.controls = tol.fiber_controls();
  if (!doc.contains("monodromy")) return s;
  const auto& m = doc["monodromy"];
  if (m.contains("crit")) s.crit = point_from_json(m["crit"]);
  if (m.contains("crit_value")) s.crit_value = io::cplx_from_json(m["crit_value"]);
  if (m.contains("h0")) s.h0 = real_from_json(m["h0"], "monodromy.h0");
  if (m.contains("hint")) {
    s.base_hint_x = real_from_json(m["hint"].at(0), "monodromy.hint");
    s.base_hint_y = real_from_json(m["hint"].at(1), "monodromy.hint");
  }
  s.start_offset = m.value("start_offset", s.start_offset);
  s.n_points = m.value("n_points", s.n_points);
  return s;
}

ProblemSpec parse_spec(const io::json& doc) {
  if (!doc.is_object() || !doc.contains("H"))
    throw ContourError(ErrorCode::InvalidArgument, "spec must be a JSON object with at least \"H\"");
  ProblemSpec s;
  s.doc = doc;
  s.H = io::poly_from_json(doc["H"]);
  auto poly_or = [&](const char* key, Poly fallback) {
    return doc.contains(key) ? io::poly_from_json(doc[key]) : fallback;
  };
  s.A = poly_or("A", Poly::constant(1.0));
  s.b = poly_or("b", Poly::constant(1.0));
  s.p = poly_or("p", Poly::x());
  s.P = poly_or("P", Poly{});
  s.Q = poly_or("Q", Poly{});
  s.R = poly_or("R", Poly{});
  s.S = poly_or("S", Poly::constant(1.0));
  if (doc.contains("loops")) {
    if (!doc["loops"].is_object()) throw ContourError(ErrorCode::InvalidArgument, "\"loops\" must be an object");
    s.loops = doc["loops"];
  }
  if (doc.contains("tolerances"))
    for (const auto& [k, v] : doc["tolerances"].items()) s.tol.set(k, real_from_json(v, "tolerance"));
  return s;
}

ProblemSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ContourError(ErrorCode::InvalidArgument, "cannot read spec file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  if (ss.str().find_first_not_of(" \t\r\n") == std::string::npos)
    throw ContourError(ErrorCode::InvalidArgument, "spec file '" + path + "' is empty");
  io::json doc;
  try {
    doc = io::json::parse(ss.str());
  } catch (const io::json::exception& e) {
    throw ContourError(ErrorCode::InvalidArgument, std::string("spec is not valid JSON: ") + e.what());
  }
  return parse_spec(doc);
}

namespace {

FiberLoop build_impl(const ProblemSpec& spec, const std::string& name, std::map<std::string, FiberLoop>& cache,
                     std::vector<std::string>& stack) {
  if (auto it = cache.find(name); it != cache.end()) return it->second;
  if (!spec.loops.contains(name)) throw ContourError(ErrorCode::InvalidArgument, "loop '" + name + "' is not defined");
  for (const auto& s : stack)
    if (s == name) throw ContourError(ErrorCode::InvalidArgument, "loop '" + name + "' refers to itself");
  stack.push_back(name);
  auto dep = [&](const io::json& r, const char* key) {
    if (!r.contains(key) || !r[key].is_string())
      throw ContourError(ErrorCode::InvalidArgument, "loop '" + name + "' needs \"" + key + "\"");
    return build_impl(spec, r[key].get<std::string>(), cache, stack);
  };

  const io::json& r = spec.loops[name];
  const std::string recipe = r.value("recipe", "");
  const Fibration fib(spec.H);
  const FiberControls c = spec.tol.fiber_controls();
  FiberLoop out;
  if (recipe == "real_oval") {
    const double h = real_from_json(r.at("h"), "real_oval.h");
    const io::json hint = r.value("hint", io::json::array({-2.0, 0.0}));
    out = trace_real_oval(fib, h, hint.at(0).get<double>(), hint.at(1).get<double>(), r.value("n_points", 400), c);
  } else if (recipe == "vanishing_cycle") {
    const Point2 crit = point_from_json(r.at("crit"));
    const cplx cv = io::cplx_from_json(r.at("crit_value"));
    const cplx h = io::cplx_from_json(r.at("h"));
    const double offset = r.value("start_offset", 0.0);
    if (offset > 0.0) {
      const cplx h_start = cv + offset * (h - cv) / std::abs(h - cv);
      out = vanishing_cycle(fib, crit, cv, h_start, r.value("n_points", 64), c);
      out = transport_loop(fib, out, BasePath::segment(h_start, h, c.base_step), c);
    } else {
      out = vanishing_cycle(fib, crit, cv, h, r.value("n_points", 64), c);
    }
  } else if (recipe == "frame") {
    FrameSetup s = spec.frame_setup();
    if (r.contains("h0")) s.h0 = real_from_json(r["h0"], "frame.h0");
    Frame f = build_frame(fib, s);
    const std::string part = r.value("part", "gamma");
    if (part == "gamma")
      out = f.gamma;
    else if (part == "delta")
      out = f.delta;
    else if (part == "commutator")
      out = f.commutator;
    else
      throw ContourError(ErrorCode::InvalidArgument, "frame part must be gamma, delta or commutator");
  } else if (recipe == "transport") {
    FiberLoop src = dep(r, "loop");
    if (r.contains("to")) {
      out = transport_loop(fib, src, BasePath::segment(src.h(), io::cplx_from_json(r["to"]), c.base_step), c);
    } else if (r.contains("around")) {
      const auto& a = r["around"];
      out = monodromy_image(fib, src, io::cplx_from_json(a.at("center")), a.at("radius").get<double>(),
                            a.value("turns", 1), c)
                .loop;
    } else if (r.contains("path")) {
      out = transport_loop(fib, src, io::path_from_json(r["path"]), c);
    } else {
      throw ContourError(ErrorCode::InvalidArgument, "transport '" + name + "' needs \"to\", \"around\" or \"path\"");
    }
  } else if (recipe == "compose") {
    FiberLoop first = dep(r, "first");
    out = compose_loops(first, dep(r, "second"), c);
  } else if (recipe == "invert") {
    out = invert_loop(dep(r, "loop"));
  } else if (recipe == "rebase") {
    FiberLoop src = dep(r, "loop");
    FiberLoop onto = dep(r, "onto");
    out = rebase_loop(fib, src, fiber_chord(fib, onto.base(), src.base(), src.h(), c), c);
  } else {
    throw ContourError(ErrorCode::InvalidArgument, "loop '" + name + "' has unknown recipe '" + recipe + "'");
  }
  stack.pop_back();
  cache[name] = out;
  return out;
}

}  // namespace

FiberLoop build_loop(const ProblemSpec& spec, const std::string& name, std::map<std::string, FiberLoop>& cache) {
  std::vector<std::string> stack;
  return build_impl(spec, name, cache, stack);
}

}  // namespace contourlab::cli
