#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "contourlab/error.hpp"
#include "contourlab/fiber.hpp"
#include "contourlab/ham_time.hpp"
#include "contourlab/melnikov.hpp"
#include "contourlab/monodromy.hpp"
#include "contourlab/normal_var.hpp"
#include "contourlab/poly.hpp"
#include "contourlab/tri_group.hpp"

namespace py = pybind11;
using namespace py::literals;
using namespace contourlab;

namespace {

using PointTuple = std::pair<cplx, cplx>;

PointTuple to_tuple(Point2 p) { return {p.x, p.y}; }
Point2 to_point(const PointTuple& p) { return {p.first, p.second}; }

// (n, 2) complex array of loop samples.
py::array_t<cplx> points_array(const FiberLoop& l) {
  py::array_t<cplx> out({static_cast<py::ssize_t>(l.size()), py::ssize_t{2}});
  auto v = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < l.size(); ++i) {
    v(i, 0) = l.points()[i].x;
    v(i, 1) = l.points()[i].y;
  }
  return out;
}

FiberLoop loop_from_array(cplx h, const py::array_t<cplx, py::array::c_style | py::array::forcecast>& a,
                          double tol_fiber) {
  if (a.ndim() != 2 || a.shape(1) != 2) throw ContourError(ErrorCode::InvalidArgument, "points must have shape (n, 2)");
  auto v = a.unchecked<2>();
  std::vector<Point2> pts(a.shape(0));
  for (py::ssize_t i = 0; i < a.shape(0); ++i) pts[i] = {v(i, 0), v(i, 1)};
  return FiberLoop(h, std::move(pts), tol_fiber);
}

BasePath path_of(const std::vector<cplx>& samples) {
  BasePath p;
  p.samples = samples;
  return p;
}

py::dict integrals_dict(const LoopIntegrals& li) {
  return py::dict("T"_a = li.T, "I"_a = li.I, "theta_plus"_a = li.theta_plus, "theta_minus"_a = li.theta_minus,
                  "phi"_a = li.phi);
}

py::dict functionals_dict(const LoopFunctionals& f) {
  return py::dict("T"_a = f.T, "I"_a = f.I, "theta_plus"_a = f.theta_plus, "theta_minus"_a = f.theta_minus,
                  "phi"_a = f.phi, "psi"_a = f.psi, "psi_condition"_a = f.psi_condition,
                  "near_resonant"_a = f.near_resonant);
}

std::string poly_repr(const Poly& p) {
  std::ostringstream os;
  os << "Poly([";
  bool first = true;
  for (const auto& t : p.terms()) {
    if (!first) os << ", ";
    first = false;
    os << "(" << t.deg_x << ", " << t.deg_y << ", " << t.coeff.real();
    if (t.coeff.imag() != 0.0) os << (t.coeff.imag() < 0 ? "" : "+") << t.coeff.imag() << "j";
    os << ")";
  }
  os << "])";
  return os.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Loop functionals, monodromy and Melnikov tools for planar polynomial Hamiltonians.";
  py::register_exception<ContourError>(m, "ContourError", PyExc_RuntimeError);

  py::class_<Poly>(m, "Poly")
      .def(py::init<>())
      .def(py::init([](const std::vector<std::tuple<int, int, cplx>>& terms) {
             std::vector<Term> t;
             for (const auto& [i, j, c] : terms) t.push_back({i, j, c});
             return Poly(std::move(t));
           }),
           "terms"_a, "Terms (deg_x, deg_y, coeff).")
      .def_static("constant", &Poly::constant)
      .def_static("monomial", &Poly::monomial, "deg_x"_a, "deg_y"_a, "coeff"_a = cplx(1.0))
      .def_static("x", &Poly::x)
      .def_static("y", &Poly::y)
      .def("__call__", [](const Poly& p, cplx x, cplx y) { return p.eval({x, y}); })
      .def("partial_x", &Poly::partial_x)
      .def("partial_y", &Poly::partial_y)
      .def("degree", &Poly::degree)
      .def("is_zero", &Poly::is_zero)
      .def_property_readonly("terms",
                             [](const Poly& p) {
                               std::vector<std::tuple<int, int, cplx>> out;
                               for (const auto& t : p.terms()) out.emplace_back(t.deg_x, t.deg_y, t.coeff);
                               return out;
                             })
      .def(py::self + py::self)
      .def(py::self - py::self)
      .def(py::self * py::self)
      .def(-py::self)
      .def("__rmul__", [](const Poly& p, cplx s) { return s * p; })
      .def("__mul__", [](const Poly& p, cplx s) { return s * p; })
      .def(py::self == py::self)
      .def("__repr__", &poly_repr);

  m.def(
      "critical_data",
      [](const Poly& H) {
        const CriticalData cd = critical_data(H);
        std::vector<PointTuple> pts;
        for (const auto& p : cd.points) pts.push_back(to_tuple(p));
        return py::dict("points"_a = pts, "values"_a = cd.values, "value_of_point"_a = cd.value_of_point,
                        "failed_seeds"_a = cd.failed_seeds);
      },
      "H"_a, "Critical points and deduplicated critical values of H.");

  py::class_<FiberControls>(m, "FiberControls")
      .def(py::init<>())
      .def_readwrite("max_step", &FiberControls::max_step)
      .def_readwrite("base_step", &FiberControls::base_step)
      .def_readwrite("min_base_step", &FiberControls::min_base_step)
      .def_readwrite("min_grad", &FiberControls::min_grad)
      .def_readwrite("tol_fiber", &FiberControls::tol_fiber)
      .def_readwrite("tol_base", &FiberControls::tol_base)
      .def_readwrite("max_newton", &FiberControls::max_newton);

  py::class_<FiberLoop>(m, "FiberLoop")
      .def(py::init(&loop_from_array), "h"_a, "points"_a, "tol_fiber"_a = 1e-10)
      .def_property_readonly("h", &FiberLoop::h)
      .def_property_readonly("points", &points_array)
      .def_property_readonly("base", [](const FiberLoop& l) { return to_tuple(l.base()); })
      .def("__len__", &FiberLoop::size)
      .def("max_spacing", &FiberLoop::max_spacing)
      .def("max_residual", [](const FiberLoop& l, const Poly& H) { return l.max_residual(Fibration(H)); });

  const FiberControls dfc;
  m.def(
      "trace_real_oval",
      [](const Poly& H, double h, std::pair<double, double> hint, int n, const FiberControls& c) {
        return trace_real_oval(Fibration(H), h, hint.first, hint.second, n, c);
      },
      "H"_a, "h"_a, "hint"_a = std::pair{-2.0, 0.0}, "n_points"_a = 400, "controls"_a = dfc);
  m.def(
      "vanishing_cycle",
      [](const Poly& H, const PointTuple& crit, cplx crit_value, cplx h, int n, const FiberControls& c) {
        return vanishing_cycle(Fibration(H), to_point(crit), crit_value, h, n, c);
      },
      "H"_a, "crit"_a, "crit_value"_a, "h"_a, "n_points"_a = 64, "controls"_a = dfc);
  m.def(
      "transport_loop",
      [](const Poly& H, const FiberLoop& l, const std::vector<cplx>& path, const FiberControls& c) {
        return transport_loop(Fibration(H), l, path_of(path), c);
      },
      "H"_a, "loop"_a, "path"_a, "controls"_a = dfc, "Carries a loop along the base path samples.");
  m.def("segment_path", [](cplx a, cplx b, double step) { return BasePath::segment(a, b, step).samples; },
        "a"_a, "b"_a, "step"_a = 1e-2);
  m.def("compose_loops", [](const FiberLoop& a, const FiberLoop& b) { return compose_loops(a, b); });
  m.def("invert_loop", &invert_loop);
  m.def(
      "refine_loop",
      [](const Poly& H, const FiberLoop& l, double max_step) { return refine_loop(Fibration(H), l, max_step); },
      "H"_a, "loop"_a, "max_step"_a);

  py::class_<Coefficients>(m, "Coefficients")
      .def(py::init([](const Poly& A, const Poly& b, const Poly& p) { return Coefficients{A, b, p}; }),
           "A"_a = Poly::constant(1.0), "b"_a = Poly::constant(1.0), "p"_a = Poly::x())
      .def_readwrite("A", &Coefficients::A)
      .def_readwrite("b", &Coefficients::b)
      .def_readwrite("p", &Coefficients::p);

  const Coefficients dco{Poly::constant(1.0), Poly::constant(1.0), Poly::x()};
  m.def("resonance_gap", &resonance_gap, "I"_a);
  m.def(
      "loop_integrals",
      [](const Poly& H, const FiberLoop& l, const Coefficients& co) {
        return integrals_dict(loop_integrals(Fibration(H), l, co));
      },
      "H"_a, "loop"_a, "coeffs"_a = dco, "T, I, theta+, theta-, phi; defined on resonant loops too.");
  m.def(
      "loop_functionals",
      [](const Poly& H, const FiberLoop& l, const Coefficients& co, double tol) {
        return functionals_dict(loop_functionals(Fibration(H), l, co, tol));
      },
      "H"_a, "loop"_a, "coeffs"_a = dco, "tol_resonance"_a = 1e-8);
  m.def(
      "psi_direct",
      [](const Poly& H, const FiberLoop& l, const Coefficients& co, double tol) {
        return psi_direct(Fibration(H), l, co, tol);
      },
      "H"_a, "loop"_a, "coeffs"_a = dco, "tol_resonance"_a = 1e-8);
  m.def(
      "abelian_integral",
      [](const Poly& H, const FiberLoop& l, const Poly& Q, const Poly& P) {
        return abelian_integral(Fibration(H), l, Q, P);
      },
      "H"_a, "loop"_a, "Q"_a, "P"_a = Poly{}, "Closed integral of Q dx - P dy.");

  py::class_<TriMatrix>(m, "TriMatrix")
      .def(py::init([](cplx I, cplx a, cplx b, cplx c) { return TriMatrix{I, a, b, c}; }), "I"_a = cplx(0.0),
           "a"_a = cplx(0.0), "b"_a = cplx(0.0), "c"_a = cplx(0.0))
      .def_readwrite("I", &TriMatrix::I)
      .def_readwrite("a", &TriMatrix::a)
      .def_readwrite("b", &TriMatrix::b)
      .def_readwrite("c", &TriMatrix::c)
      .def("dense", &TriMatrix::dense)
      .def("inverse", [](const TriMatrix& w) { return inverse(w); })
      .def("__matmul__", [](const TriMatrix& a, const TriMatrix& b) { return a * b; })
      .def("__mul__", [](const TriMatrix& a, const TriMatrix& b) { return a * b; })
      .def("__repr__", [](const TriMatrix& w) {
        std::ostringstream os;
        os << "TriMatrix(I=" << w.I << ", a=" << w.a << ", b=" << w.b << ", c=" << w.c << ")";
        return os.str();
      });
  m.def("commutator", &commutator);
  m.def("in_S", &in_S, "w"_a, "tol_resonance"_a = 1e-8);
  m.def("psi", &psi, "w"_a, "tol_resonance"_a = 1e-8);
  m.def("psi_tilde", &psi_tilde);
  m.def("distance", py::overload_cast<const TriMatrix&, const TriMatrix&>(&distance));
  m.def("commutator_coefficient", &commutator_coefficient);
  m.def(
      "mid_identity_residual",
      [](const TriMatrix& a, const TriMatrix& b, double tol) {
        const MidResidual r = mid_identity_residual(a, b, tol);
        return py::dict("residual"_a = r.residual, "scale"_a = r.scale);
      },
      "w1"_a, "w2"_a, "tol_resonance"_a = 1e-8);
  m.def(
      "rho", [](const Poly& H, const FiberLoop& l, const Coefficients& co) { return rho(Fibration(H), l, co); },
      "H"_a, "loop"_a, "coeffs"_a = dco);

  py::class_<FrameSetup>(m, "FrameSetup")
      .def(py::init<>())
      .def_property(
          "crit", [](const FrameSetup& s) { return to_tuple(s.crit); },
          [](FrameSetup& s, const PointTuple& p) { s.crit = to_point(p); })
      .def_readwrite("crit_value", &FrameSetup::crit_value)
      .def_readwrite("h0", &FrameSetup::h0)
      .def_readwrite("base_hint_x", &FrameSetup::base_hint_x)
      .def_readwrite("base_hint_y", &FrameSetup::base_hint_y)
      .def_readwrite("start_offset", &FrameSetup::start_offset)
      .def_readwrite("n_points", &FrameSetup::n_points)
      .def_readwrite("controls", &FrameSetup::controls);

  m.def(
      "build_frame",
      [](const Poly& H, const FrameSetup& s) {
        const Frame f = build_frame(Fibration(H), s);
        return py::dict("h0"_a = f.h0, "gamma"_a = f.gamma, "delta"_a = f.delta, "delta_free"_a = f.delta_free,
                        "commutator"_a = f.commutator);
      },
      "H"_a, "setup"_a = FrameSetup{}, "gamma, delta and their commutator, all based at one point.");
  m.def(
      "monodromy_transport",
      [](const Poly& H, const FiberLoop& l, cplx crit_value, double radius, const Coefficients& co,
         const FiberLoop* delta) {
        const MonodromyReport r = monodromy_transport(Fibration(H), l, crit_value, radius, co, delta);
        return py::dict("loop_after"_a = r.loop_after, "rho_before"_a = r.rho_before, "rho_after"_a = r.rho_after,
                        "base_drift"_a = r.base_drift, "rotated"_a = r.rotated, "residuals"_a = r.residuals);
      },
      "H"_a, "loop"_a, "crit_value"_a, "radius"_a, "coeffs"_a = dco, "delta"_a = nullptr);

  py::class_<Section>(m, "Section")
      .def(py::init([](double px, double py_, double nx, double ny) { return Section{px, py_, nx, ny}; }),
           "px"_a = -2.0, "py"_a = 0.0, "nx"_a = 0.0, "ny"_a = 1.0)
      .def_readwrite("px", &Section::px)
      .def_readwrite("py", &Section::py)
      .def_readwrite("nx", &Section::nx)
      .def_readwrite("ny", &Section::ny);

  py::class_<FlowControls>(m, "FlowControls")
      .def(py::init<>())
      .def_readwrite("abs_tol", &FlowControls::abs_tol)
      .def_readwrite("rel_tol", &FlowControls::rel_tol)
      .def_readwrite("event_tol", &FlowControls::event_tol)
      .def_readwrite("max_time", &FlowControls::max_time)
      .def_readwrite("escape_radius", &FlowControls::escape_radius)
      .def_readwrite("initial_dt", &FlowControls::initial_dt);

  m.def("section_start", &section_start, "H"_a, "section"_a, "h"_a);
  m.def(
      "poincare_return",
      [](const Poly& H, const Poly& P, const Poly& Q, double h, double eps, const Section& s, int crossings,
         const FlowControls& c) {
        const ReturnSample r = poincare_return(H, P, Q, h, eps, s, crossings, c);
        return py::dict("h"_a = r.h, "eps"_a = r.eps, "delta_h"_a = r.delta_h, "crossings"_a = r.crossings,
                        "time"_a = r.time);
      },
      "H"_a, "P"_a, "Q"_a, "h"_a, "eps"_a, "section"_a = Section{}, "crossings"_a = 1,
      "controls"_a = FlowControls{});
  m.def("default_eps_grid", &default_eps_grid);
  m.def(
      "melnikov_expansion",
      [](const Poly& H, const Poly& P, const Poly& Q, const std::vector<double>& hs, const std::vector<double>& eps,
         const Section& s, const FlowControls& c) {
        const MelnikovExpansion e = melnikov_expansion(H, P, Q, hs, eps, s, c);
        return py::dict("k"_a = e.k, "h"_a = e.h, "Mk"_a = e.Mk, "coefficients"_a = e.coefficients,
                        "noise_floor"_a = e.noise_floor, "residual"_a = e.residual);
      },
      "H"_a, "P"_a, "Q"_a, "h_grid"_a, "eps_grid"_a = default_eps_grid(), "section"_a = Section{},
      "controls"_a = FlowControls{});

  m.def("chebyshev_grid", &chebyshev_grid, "a"_a, "b"_a, "n"_a);
  py::class_<LinearOde>(m, "LinearOde")
      .def_readonly("order", &LinearOde::order)
      .def_readonly("degree", &LinearOde::degree)
      .def_readonly("a", &LinearOde::a)
      .def_readonly("b", &LinearOde::b)
      .def_readonly("coeffs", &LinearOde::coeffs)
      .def_readonly("residual", &LinearOde::residual)
      .def_readonly("amplification", &LinearOde::amplification)
      .def("coefficient", &LinearOde::coefficient, "m"_a, "h"_a)
      .def("apply_residual", &LinearOde::apply_residual, "samples"_a);
  m.def("fit_linear_ode", &fit_linear_ode, "samples"_a, "a"_a, "b"_a, "order"_a, "degree"_a = 2);

  py::class_<System3D>(m, "System3D")
      .def(py::init([](const Poly& H, const Poly& R, const Poly& S, const Poly& A, const Poly& b, const Poly& P,
                       const Poly& Q, double eps, double margin) {
             return System3D{H, R, S, A, b, P, Q, eps, margin};
           }),
           "H"_a, "R"_a = Poly{}, "S"_a = Poly{}, "A"_a = Poly::constant(1.0), "b"_a = Poly::constant(1.0),
           "P"_a = Poly{}, "Q"_a = Poly{}, "eps"_a = 0.0, "hyp_margin"_a = 0.1)
      .def_readwrite("H", &System3D::H)
      .def_readwrite("R", &System3D::R)
      .def_readwrite("S", &System3D::S)
      .def_readwrite("A", &System3D::A)
      .def_readwrite("b", &System3D::b)
      .def_readwrite("P", &System3D::P)
      .def_readwrite("Q", &System3D::Q)
      .def_readwrite("eps", &System3D::eps)
      .def_readwrite("hyp_margin", &System3D::hyp_margin);

  m.def("normal_periodic_solution", &normal_periodic_solution, "system"_a, "loop"_a, "t"_a);
  m.def(
      "pontryagin_melnikov",
      [](const System3D& s, const FiberLoop& l) {
        const PontryaginMelnikov pm = pontryagin_melnikov(s, l);
        return py::dict("direct"_a = pm.direct, "abelian"_a = pm.abelian, "psi"_a = pm.psi,
                        "decomposed"_a = pm.decomposed(), "scale"_a = pm.scale, "route_gap"_a = pm.route_gap());
      },
      "system"_a, "loop"_a);
  m.def(
      "simulate_3d_return",
      [](const System3D& s, double h, const Section& sec, const FlowControls& c, int n) {
        const Simulation3D r = simulate_3d_return(s, h, sec, c, n);
        py::array_t<double> prof({static_cast<py::ssize_t>(r.profile.size()), py::ssize_t{5}});
        auto v = prof.mutable_unchecked<2>();
        for (std::size_t i = 0; i < r.profile.size(); ++i) {
          const auto& p = r.profile[i];
          v(i, 0) = p.t;
          v(i, 1) = p.x;
          v(i, 2) = p.y;
          v(i, 3) = p.z;
          v(i, 4) = p.H;
        }
        return py::dict("h"_a = r.h, "eps"_a = r.eps, "delta_h"_a = r.delta_h, "period"_a = r.period,
                        "tracking"_a = r.tracking, "profile"_a = prof);
      },
      "system"_a, "h"_a, "section"_a = Section{}, "controls"_a = FlowControls{}, "n_points"_a = 400,
      "Profile columns: t, x, y, z, H.");
}
