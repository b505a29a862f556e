#include <doctest.h>

#include "common.hpp"
#include "contourlab/error.hpp"
#include "contourlab/melnikov.hpp"

using namespace contourlab;
using testing::c;
using testing::elliptic;
using testing::rel_err;

namespace {

double oval_integral_y_dx(double h) {
  const Fibration fib(elliptic());
  const auto st = section_start(elliptic(), Section{}, h);
  return abelian_integral(fib, trace_real_oval(fib, h, st[0], st[1], 400), Poly::y(), Poly{}).real();
}

// y dH + dx: exact at first order.
Poly second_order_Q() { return c(1.0) + Poly::y() * elliptic().partial_x(); }
Poly second_order_P() { return -(Poly::y() * elliptic().partial_y()); }

}  // namespace

TEST_SUITE("melnikov") {
  TEST_CASE("section start lies on the level curve") {
    for (double h : {-1.5, 0.0, 1.5}) {
      const auto st = section_start(elliptic(), Section{}, h);
      CHECK(std::abs(elliptic().eval({st[0], st[1]}) - h) < 1e-12);
      CHECK(st[1] == 0.0);
    }
  }

  TEST_CASE("unperturbed flow returns to its level") {
    const ReturnSample r = poincare_return(elliptic(), Poly{}, Poly{}, 0.0, 0.0, Section{});
    CHECK(std::abs(r.delta_h) <= 1e-10);
    // The flight time is the period.
    CHECK(r.time == doctest::Approx(1.99233289958349).epsilon(1e-8));
  }

  TEST_CASE("first-order displacement is the Abelian integral") {
    const double eps = 1e-4;
    const ReturnSample r = poincare_return(elliptic(), Poly{}, Poly::y(), 0.0, eps, Section{});
    CHECK(std::abs(r.delta_h / eps - oval_integral_y_dx(0.0)) / std::abs(oval_integral_y_dx(0.0)) < 1e-4);
  }

  TEST_CASE("halving eps halves a first-order displacement") {
    const double a = poincare_return(elliptic(), Poly{}, Poly::y(), 0.5, 2e-4, Section{}).delta_h;
    const double b = poincare_return(elliptic(), Poly{}, Poly::y(), 0.5, 1e-4, Section{}).delta_h;
    CHECK(a / b == doctest::Approx(2.0).epsilon(0.05));
  }

  TEST_CASE("two crossings add up") {
    const double eps = 1e-4;
    const double one = poincare_return(elliptic(), Poly{}, Poly::y(), 0.0, eps, Section{}).delta_h;
    const ReturnSample two = poincare_return(elliptic(), Poly{}, Poly::y(), 0.0, eps, Section{}, 2);
    CHECK(two.crossings == 2);
    CHECK(std::abs(two.delta_h - 2 * one) <= 1e-3 * std::abs(2 * one));
  }

  TEST_CASE("expansion finds the first order") {
    const std::vector<double> hs = {-1.0, 0.0, 1.0};
    const MelnikovExpansion e = melnikov_expansion(elliptic(), Poly{}, Poly::y(), hs, default_eps_grid(), Section{});
    CHECK(e.k == 1);
    REQUIRE(e.Mk.size() == hs.size());
    for (std::size_t i = 0; i < hs.size(); ++i) CHECK(rel_err(e.Mk[i], oval_integral_y_dx(hs[i])) < 1e-3);
  }

  TEST_CASE("expansion finds the second order") {
    const MelnikovExpansion e = melnikov_expansion(elliptic(), second_order_P(), second_order_Q(), {-0.5, 0.0, 0.5},
                                                   default_eps_grid(), Section{});
    CHECK(e.k == 2);
    const double a = poincare_return(elliptic(), second_order_P(), second_order_Q(), 0.0, 1e-3, Section{}).delta_h;
    const double b = poincare_return(elliptic(), second_order_P(), second_order_Q(), 0.0, 5e-4, Section{}).delta_h;
    CHECK(a / b == doctest::Approx(4.0).epsilon(0.05));
  }

  TEST_CASE("a Hamiltonian perturbation has no displacement at any order") {
    // (P, Q) = (-F_y, F_x) with F = x^2 y keeps H - eps F constant.
    const Poly Q = Poly::monomial(1, 1, 2.0), P = -Poly::monomial(2, 0);
    CHECK_THROWS_AS(melnikov_expansion(elliptic(), P, Q, {0.0, 0.5}, default_eps_grid(), Section{}), ContourError);
  }

  TEST_CASE("expansion needs five eps values") {
    CHECK_THROWS_AS(melnikov_expansion(elliptic(), Poly{}, Poly::y(), {0.0}, {1e-3, 5e-4}, Section{}), ContourError);
  }

  TEST_CASE("Chebyshev-Lobatto grid") {
    const auto g = chebyshev_grid(-1.0, 3.0, 5);
    REQUIRE(g.size() == 5);
    CHECK(g.front() == doctest::Approx(3.0));
    CHECK(g.back() == doctest::Approx(-1.0));
    CHECK(g[2] == doctest::Approx(1.0));
  }

  TEST_CASE("sine and cosine satisfy x'' + x = 0") {
    const auto hs = chebyshev_grid(-1.0, 2.0, 20);
    std::vector<std::vector<cplx>> s(2);
    for (double h : hs) {
      s[0].push_back(std::sin(h));
      s[1].push_back(std::cos(h));
    }
    const LinearOde ode = fit_linear_ode(s, -1.0, 2.0, 2, 0);
    CHECK(ode.residual <= 1e-10);
    CHECK(std::abs(ode.coeffs[1][0] / ode.coeffs[2][0]) < 1e-8);
    CHECK(std::abs(ode.coeffs[0][0] / ode.coeffs[2][0] - 1.0) < 1e-8);
    for (const auto& f : s) CHECK(ode.apply_residual(f) <= 1e-10);
  }

  TEST_CASE("Gaussian satisfies x' = h x") {
    const auto hs = chebyshev_grid(-1.0, 1.0, 16);
    std::vector<cplx> f;
    for (double h : hs) f.push_back(std::exp(0.5 * h * h));
    const LinearOde ode = fit_linear_ode({f}, -1.0, 1.0, 1, 1);
    // a_0 = -h a_1 with constant a_1.
    CHECK(std::abs(ode.coeffs[1][1] / ode.coeffs[1][0]) < 1e-8);
    CHECK(std::abs(ode.coeffs[0][0] / ode.coeffs[1][0]) < 1e-8);
    CHECK(std::abs(ode.coeffs[0][1] / ode.coeffs[1][0] + 1.0) < 1e-8);
  }

  TEST_CASE("exponential satisfies x' = x") {
    const auto hs = chebyshev_grid(0.0, 1.0, 16);
    std::vector<cplx> f;
    for (double h : hs) f.push_back(std::exp(h));
    const LinearOde ode = fit_linear_ode({f}, 0.0, 1.0, 1, 0);
    CHECK(std::abs(ode.coeffs[0][0] / ode.coeffs[1][0] + 1.0) < 1e-8);
  }

  TEST_CASE("fit rejects small or ill-conditioned grids") {
    CHECK_THROWS_AS(fit_linear_ode({std::vector<cplx>(7, 1.0)}, -1.0, 1.0, 1), ContourError);
    CHECK_THROWS_AS(fit_linear_ode({std::vector<cplx>(8, 1.0), std::vector<cplx>(9, 1.0)}, -1.0, 1.0, 1),
                    ContourError);
    try {
      fit_linear_ode({std::vector<cplx>(200, 1.0)}, -1.0, 1.0, 6);
      FAIL("expected IllConditioned");
    } catch (const ContourError& e) {
      CHECK(e.code() == ErrorCode::IllConditioned);
    }
  }

  TEST_CASE("periods of dx/y satisfy a second-order equation") {
    const Fibration fib(elliptic());
    const auto hs = chebyshev_grid(-1.0, 1.0, 16);
    const Coefficients co{c(1.0), c(1.0), Poly::x()};
    std::vector<std::vector<cplx>> periods(2);
    std::vector<cplx> sum;
    for (double h : hs) {
      FrameSetup setup;
      setup.h0 = h;
      const Frame f = build_frame(fib, setup);
      // dx / y = 2 dt on the fiber.
      const cplx pg = 2.0 * loop_integrals(fib, f.gamma, co).T;
      const cplx pd = 2.0 * loop_integrals(fib, f.delta, co).T;
      periods[0].push_back(pg);
      periods[1].push_back(pd);
      sum.push_back(pg + pd);
    }
    const LinearOde ode = fit_linear_ode(periods, -1.0, 1.0, 2);
    CHECK(ode.residual <= 1e-6);
    CHECK(ode.apply_residual(sum) <= 1e-6);
  }
}
