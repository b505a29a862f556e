#include <doctest.h>

#include <algorithm>

#include "common.hpp"
#include "contourlab/error.hpp"
#include "contourlab/tri_group.hpp"

using namespace contourlab;
using testing::circle;
using testing::elliptic;

namespace {

double max_dist(const FiberLoop& l, Point2 c) {
  double m = 0.0;
  for (const auto& p : l.points()) m = std::max(m, distance(p, c));
  return m;
}

const Coefficients kCoeffs{Poly::constant(1.0), Poly::constant(1.0), Poly::x()};

}  // namespace

TEST_SUITE("fiber") {
  TEST_CASE("projection leaves fiber points alone") {
    const Fibration fib(circle());
    const Point2 p{cplx(0.6), cplx(0.8)};
    const Point2 q = project_to_fiber(fib, p, 1.0);
    CHECK(distance(p, q) < 1e-15);
  }

  TEST_CASE("projection onto the unit circle is radial") {
    const Fibration fib(circle());
    const Point2 q = project_to_fiber(fib, {cplx(1.0 + 1e-3), cplx(0.0)}, 1.0, 1e-14);
    CHECK(std::abs(q.x - 1.0) < 1e-12);
    CHECK(std::abs(q.y) < 1e-12);
  }

  TEST_CASE("projection of nudged elliptic points") {
    const Fibration fib(elliptic());
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 20; ++k) {
      const cplx x(u(rng), u(rng)), h(u(rng), u(rng));
      const Point2 on{x, std::sqrt(h + x * x * x - 3.0 * x)};
      const Point2 off{on.x + 1e-4 * cplx(u(rng), u(rng)), on.y + 1e-4 * cplx(u(rng), u(rng))};
      const Point2 q = project_to_fiber(fib, off, h, 1e-13);
      CHECK(std::abs(fib.value(q) - h) <= 1e-12);
    }
  }

  TEST_CASE("real oval of the circle") {
    const Fibration fib(circle());
    const FiberLoop l = trace_real_oval(fib, 1.0, 1.0, 0.0, 100);
    CHECK(l.size() >= 100);
    for (const auto& p : l.points()) CHECK(std::abs(std::norm(p.x) + std::norm(p.y) - 1.0) < 1e-10);
    CHECK(l.max_spacing() <= FiberControls{}.max_step * (1 + 1e-12));
  }

  TEST_CASE("real oval of the elliptic fiber h = 0 spans [-sqrt 3, 0]") {
    const Fibration fib(elliptic());
    const FiberLoop l = trace_real_oval(fib, 0.0, -2.0, 0.0, 400);
    double lo = 1e9, hi = -1e9;
    for (const auto& p : l.points()) {
      lo = std::min(lo, p.x.real());
      hi = std::max(hi, p.x.real());
      CHECK(std::abs(p.x.imag()) + std::abs(p.y.imag()) < 1e-12);
    }
    CHECK(lo == doctest::Approx(-std::sqrt(3.0)).epsilon(1e-12));
    // The oval is vertical at x = 0, so the samples only reach it to O(step^2).
    CHECK(std::abs(hi) < 1e-4);
    CHECK(l.max_residual(fib) <= 1e-10);
  }

  TEST_CASE("real oval near the saddle closes") {
    const Fibration fib(elliptic());
    const FiberLoop l = trace_real_oval(fib, 1.9, -2.0, 0.0, 400);
    CHECK(l.max_residual(fib) <= 1e-10);
    CHECK(distance(l.points().back(), l.base()) <= FiberControls{}.max_step * (1 + 1e-12));
  }

  TEST_CASE("orientation follows the Hamiltonian flow") {
    const Fibration fib(elliptic());
    const FiberLoop l = trace_real_oval(fib, 0.0, -2.0, 0.0, 400);
    // At (e1, 0) the field (H_y, -H_x) points up.
    CHECK(l.points()[1].y.real() > 0.0);
  }

  TEST_CASE("vanishing cycle of the quadratic form") {
    const Fibration fib(circle());
    const double eps = 1e-3;
    const FiberLoop l = vanishing_cycle(fib, {0.0, 0.0}, 0.0, eps, 64);
    for (const auto& p : l.points()) CHECK(std::abs(norm(p) - std::sqrt(eps)) < 1e-9);
  }

  TEST_CASE("vanishing cycle shrinks like sqrt(2 - h)") {
    const Fibration fib(elliptic());
    const Point2 crit{1.0, 0.0};
    const double d1 = max_dist(vanishing_cycle(fib, crit, 2.0, 1.99, 64), crit);
    const double d2 = max_dist(vanishing_cycle(fib, crit, 2.0, 1.9999, 64), crit);
    const double d3 = max_dist(vanishing_cycle(fib, crit, 2.0, 1.995, 64), crit);
    CHECK(d1 < 0.2);
    CHECK(d1 / d2 == doctest::Approx(10.0).epsilon(0.02));
    CHECK(d1 / d3 == doctest::Approx(std::sqrt(2.0)).epsilon(0.02));
  }

  TEST_CASE("degenerate Hessian is rejected") {
    const Fibration fib(Poly({{0, 2, 1.0}, {3, 0, 1.0}}));
    CHECK_THROWS_AS(vanishing_cycle(fib, {0.0, 0.0}, 0.0, 1e-3, 64), ContourError);
  }

  TEST_CASE("transport along a constant path") {
    const Fibration fib(elliptic());
    const FiberLoop l = trace_real_oval(fib, 0.5, -2.0, 0.0, 200);
    BasePath p;
    p.samples = {0.5, 0.5};
    const FiberLoop t = transport_loop(fib, l, p);
    REQUIRE(t.size() == l.size());
    for (std::size_t i = 0; i < l.size(); ++i) CHECK(distance(t.points()[i], l.points()[i]) <= 1e-10);
  }

  TEST_CASE("transported oval matches the traced oval") {
    const Fibration fib(elliptic());
    const FiberLoop l0 = trace_real_oval(fib, 0.0, -2.0, 0.0, 400);
    const FiberLoop moved = transport_loop(fib, l0, BasePath::segment(0.0, 1.0, 1e-2));
    const FiberLoop l1 = trace_real_oval(fib, 1.0, -2.0, 0.0, 400);
    CHECK(moved.max_residual(fib) <= 1e-10);
    const TriMatrix a = rho(fib, moved, kCoeffs), b = rho(fib, l1, kCoeffs);
    CHECK(distance(a, b) / b.dense().norm() < 1e-6);
  }

  TEST_CASE("transport around a small circle at a regular value") {
    const Fibration fib(elliptic());
    const FiberLoop l = trace_real_oval(fib, 0.0, -2.0, 0.0, 400);
    const BasePath loop_path = BasePath::segment(0.0, 0.3, 1e-2)
                                   .then(BasePath::circle(0.0, 0.3, 1, 1e-2))
                                   .then(BasePath::segment(0.3, 0.0, 1e-2));
    const FiberLoop t = transport_loop(fib, l, loop_path);
    CHECK(distance(rho(fib, t, kCoeffs), rho(fib, l, kCoeffs)) < 1e-7);
  }

  TEST_CASE("composition with a trivial loop") {
    const Fibration fib(elliptic());
    const FiberLoop g = testing::frame().gamma;
    const FiberLoop trivial(g.h(), {g.base()});
    const FiberLoop gt = compose_loops(g, trivial);
    CHECK(distance(rho(fib, gt, kCoeffs), rho(fib, g, kCoeffs)) < 1e-12);
  }

  TEST_CASE("gamma gamma^-1 has vanishing functionals") {
    const Fibration fib(elliptic());
    const FiberLoop g = testing::frame().gamma;
    const LoopIntegrals li = loop_integrals(fib, compose_loops(g, invert_loop(g)), kCoeffs);
    for (cplx v : {li.T, li.I, li.theta_plus, li.theta_minus, li.phi}) CHECK(std::abs(v) <= 1e-8);
  }

  TEST_CASE("composition needs a common base point") {
    const auto& f = testing::frame();
    CHECK_THROWS_AS(compose_loops(f.gamma, f.delta_free), ContourError);
  }

  TEST_CASE("inversion") {
    const Fibration fib(elliptic());
    const FiberLoop g = testing::frame().gamma;
    const FiberLoop gi = invert_loop(g);
    const FiberLoop gii = invert_loop(gi);
    REQUIRE(gii.size() == g.size());
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(distance(gii.points()[i], g.points()[i]) == 0.0);
    CHECK(distance(gi.base(), g.base()) == 0.0);
    const TriMatrix r = rho(fib, g, kCoeffs), ri = rho(fib, gi, kCoeffs);
    CHECK(std::abs(ri.I + r.I) < 1e-12);
    CHECK(distance(ri, inverse(r)) < 1e-8);
    CHECK(std::abs(loop_integrals(fib, gi, kCoeffs).T + loop_integrals(fib, g, kCoeffs).T) < 1e-12);
  }

  TEST_CASE("rebase keeps psi and moves theta+") {
    const Fibration fib(elliptic());
    const auto& f = testing::frame();
    const FiberLoop same = rebase_loop(fib, f.delta_free, {f.delta_free.base()});
    CHECK(distance(rho(fib, same, kCoeffs), rho(fib, f.delta_free, kCoeffs)) < 1e-13);

    const LoopFunctionals a = loop_functionals(fib, f.delta_free, kCoeffs);
    const LoopFunctionals b = loop_functionals(fib, f.delta, kCoeffs);
    CHECK(testing::rel_err(b.psi, a.psi) < 1e-7);
    CHECK(std::abs(b.theta_plus - a.theta_plus) > 1e-3);
  }

  TEST_CASE("rebase rejects connectors off the fiber") {
    const Fibration fib(elliptic());
    const auto& f = testing::frame();
    std::vector<Point2> bad = {Point2{cplx(5.0), cplx(5.0)}, f.delta_free.base()};
    CHECK_THROWS_AS(rebase_loop(fib, f.delta_free, bad), ContourError);
  }

  TEST_CASE("halving the sample spacing barely moves the functionals") {
    const Fibration fib(elliptic());
    const auto& f = testing::frame();
    // The commutator has I = 0, so only the raw integrals exist there.
    for (const FiberLoop* l : {&f.gamma, &f.delta, &f.commutator}) {
      const FiberLoop fine = refine_loop(fib, *l, 0.5 * l->max_spacing());
      const LoopIntegrals a = loop_integrals(fib, *l, kCoeffs), b = loop_integrals(fib, fine, kCoeffs);
      for (auto [x, y] : {std::pair{a.T, b.T}, {a.I, b.I}, {a.theta_plus, b.theta_plus},
                          {a.theta_minus, b.theta_minus}, {a.phi, b.phi}})
        CHECK(std::abs(x - y) < 1e-7);
    }
    for (const FiberLoop* l : {&f.gamma, &f.delta}) {
      const FiberLoop fine = refine_loop(fib, *l, 0.5 * l->max_spacing());
      CHECK(std::abs(loop_functionals(fib, *l, kCoeffs).psi - loop_functionals(fib, fine, kCoeffs).psi) < 1e-7);
    }
  }

  TEST_CASE("base path helpers") {
    const BasePath s = BasePath::segment(0.0, 1.0, 0.1);
    CHECK(s.samples.front() == cplx(0.0));
    CHECK(s.samples.back() == cplx(1.0));
    const BasePath c = BasePath::circle(2.0, 2.5, 1, 0.01);
    CHECK(c.min_clearance({2.0}) == doctest::Approx(0.5));
    CHECK(std::abs(c.samples.back() - c.samples.front()) < 1e-12);
    const BasePath r = s.reversed();
    CHECK(r.samples.front() == cplx(1.0));
  }
}
