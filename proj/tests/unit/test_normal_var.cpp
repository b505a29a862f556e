#include <doctest.h>

#include "common.hpp"
#include "contourlab/error.hpp"
#include "contourlab/normal_var.hpp"
#include "contourlab/tri_group.hpp"

using namespace contourlab;
using testing::c;
using testing::elliptic;

namespace {

FiberLoop oval(double h) {
  const auto st = section_start(elliptic(), Section{}, h);
  return trace_real_oval(Fibration(elliptic()), h, st[0], st[1], 400);
}

System3D base_system() {
  System3D s;
  s.H = elliptic();
  s.A = c(1.0);
  s.b = Poly::x();
  s.S = c(1.0);
  s.R = Poly::x();
  s.Q = Poly::y();
  return s;
}

}  // namespace

TEST_SUITE("normal_var") {
  TEST_CASE("b = 0 gives the zero solution") {
    const NormalSolution g(Fibration(elliptic()), oval(0.0), c(1.0), Poly{});
    CHECK(g.max_abs() == 0.0);
    CHECK(std::abs(g.at_time(0.7)) == 0.0);
  }

  TEST_CASE("constant coefficients give the constant solution") {
    // g' = -g + 1 is solved by g = 1.
    const NormalSolution g(Fibration(elliptic()), oval(0.0), c(-1.0), c(1.0));
    for (double t : {0.0, 0.3, 1.1, 1.9, 5.0}) CHECK(std::abs(g.at_time(t) - 1.0) < 1e-12);
    for (std::size_t k = 0; k < g.quadrature().segment_count(); k += 17) CHECK(std::abs(g.at_node(k, 2) - 1.0) < 1e-12);
  }

  TEST_CASE("periodic solution solves g' = A g + b") {
    const Fibration fib(elliptic());
    const NormalSolution g(fib, oval(0.0), c(1.0), Poly::x());
    const double T = g.period().real();
    CHECK(std::abs(g.period().imag()) < 1e-10);
    CHECK(std::abs(g.at_time(0.0) - g.at_time(T * (1 - 1e-15))) < 1e-8);
    const double step = 1e-5;
    for (int k = 1; k < 20; ++k) {
      const double t = T * k / 20.0;
      Point2 q;
      const cplx gt = g.at_time(t, &q);
      const cplx deriv = (g.at_time(t + step) - g.at_time(t - step)) / (2 * step);
      CHECK(std::abs(deriv - (gt + q.x)) <= 1e-6);
      CHECK(std::abs(fib.value(q)) < 1e-9);
    }
    System3D s = base_system();
    CHECK(normal_periodic_solution(s, oval(0.0), 0.4) == doctest::Approx(g.at_time(0.4).real()).epsilon(1e-14));
  }

  TEST_CASE("small |I| is rejected") {
    CHECK_THROWS_AS(NormalSolution(Fibration(elliptic()), oval(0.0), c(0.01), c(1.0)), ContourError);
  }

  TEST_CASE("without normal coupling J is the Abelian integral") {
    System3D s = base_system();
    s.R = Poly{};
    s.S = Poly{};
    const PontryaginMelnikov pm = pontryagin_melnikov(s, oval(0.0));
    CHECK(std::abs(pm.psi) == 0.0);
    CHECK(std::abs(pm.direct - pm.abelian) < 1e-12 * std::abs(pm.abelian));
  }

  TEST_CASE("b = 0 gives Psi = 0") {
    System3D s = base_system();
    s.b = Poly{};
    const PontryaginMelnikov pm = pontryagin_melnikov(s, oval(0.0));
    CHECK(std::abs(pm.psi) == 0.0);
  }

  TEST_CASE("the two routes to J agree") {
    for (double h : {-1.0, 0.0, 1.0}) {
      const PontryaginMelnikov pm = pontryagin_melnikov(base_system(), oval(h));
      CHECK(pm.route_gap() <= 1e-6);
      CHECK(std::abs(pm.psi) > 1e-3);
    }
  }

  TEST_CASE("reversing the loop negates J") {
    const FiberLoop l = oval(0.0);
    const PontryaginMelnikov a = pontryagin_melnikov(base_system(), l);
    const PontryaginMelnikov b = pontryagin_melnikov(base_system(), invert_loop(l));
    CHECK(std::abs(a.direct + b.direct) < 1e-10 * std::abs(a.direct));
  }

  TEST_CASE("eps = 0 stays on the invariant plane") {
    System3D s = base_system();
    s.eps = 0.0;
    const Simulation3D r = simulate_3d_return(s, 0.0, Section{});
    CHECK(std::abs(r.delta_h) < 1e-10);
    for (const auto& p : r.profile) CHECK(p.z == 0.0);
    CHECK(r.period == doctest::Approx(1.99233289958349).epsilon(1e-8));
  }

  TEST_CASE("displacement is eps J up to O(eps^2)") {
    const PontryaginMelnikov pm = pontryagin_melnikov(base_system(), oval(0.0));
    const double J = pm.direct.real();
    std::vector<double> err, track;
    for (double eps : {1e-3, 5e-4, 2.5e-4}) {
      System3D s = base_system();
      s.eps = eps;
      const Simulation3D r = simulate_3d_return(s, 0.0, Section{});
      err.push_back(std::abs(r.delta_h - eps * J) / (eps * eps));
      track.push_back(r.tracking / (eps * eps));
    }
    for (double e : err) CHECK(e < 1e3);
    // Constants settle: successive ratios close to 1.
    CHECK(err[2] / err[1] == doctest::Approx(1.0).epsilon(0.1));
    CHECK(track[2] / track[1] == doctest::Approx(1.0).epsilon(0.1));
  }
}
