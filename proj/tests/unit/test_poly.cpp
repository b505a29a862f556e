#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>

#include "common.hpp"
#include "contourlab/error.hpp"

using namespace contourlab;
using testing::elliptic;

namespace {

// Dense coefficient table evaluated as a polynomial in y whose coefficients
// are polynomials in x, both by Horner.
cplx horner(const Poly& p, Point2 q) {
  const int nx = p.max_deg_x() + 1, ny = p.max_deg_y() + 1;
  std::vector<std::vector<cplx>> table(ny, std::vector<cplx>(nx, 0.0));
  for (const auto& t : p.terms()) table[t.deg_y][t.deg_x] += t.coeff;
  cplx acc = 0.0;
  for (int j = ny - 1; j >= 0; --j) {
    cplx cx = 0.0;
    for (int i = nx - 1; i >= 0; --i) cx = cx * q.x + table[j][i];
    acc = acc * q.y + cx;
  }
  return acc;
}

bool contains(const std::vector<cplx>& vals, cplx v, double tol) {
  return std::any_of(vals.begin(), vals.end(), [&](cplx w) { return std::abs(w - v) <= tol; });
}

}  // namespace

TEST_SUITE("poly") {
  TEST_CASE("evaluation at simple points") {
    const Poly H = elliptic();
    CHECK(std::abs(H.eval({0.0, 0.0})) == 0.0);
    CHECK(std::abs(H.eval({1.0, 0.0}) - 2.0) < 1e-15);
    const Point2 q{cplx(0.3, 0.1), cplx(1.2)};
    CHECK(std::abs(H.eval(q) - horner(H, q)) < 1e-14);
  }

  TEST_CASE("evaluation matches Horner on random polynomials") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<Term> terms;
      for (int k = 0; k < 8; ++k)
        terms.push_back({int(rng() % 5), int(rng() % 5), cplx(u(rng), u(rng))});
      const Poly p(terms);
      const Point2 q{cplx(u(rng), u(rng)), cplx(u(rng), u(rng))};
      CHECK(std::abs(p.eval(q) - horner(p, q)) < 1e-13);
    }
  }

  TEST_CASE("terms are merged and zeros dropped") {
    const Poly p({{1, 0, 2.0}, {1, 0, -2.0}, {0, 1, 1.0}, {0, 1, 1.0}, {2, 2, 0.0}});
    REQUIRE(p.terms().size() == 1);
    CHECK(p.terms()[0].deg_y == 1);
    CHECK(p.terms()[0].coeff == cplx(2.0));
    CHECK(Poly({{0, 0, 0.0}}).is_zero());
    CHECK(Poly{}.degree() == -1);
  }

  TEST_CASE("partial derivatives") {
    CHECK(Poly::constant(3.0).partial_x().is_zero());
    CHECK(Poly::constant(3.0).partial_y().is_zero());
    const Poly H = elliptic();
    CHECK(H.partial_x() == Poly({{2, 0, -3.0}, {0, 0, 3.0}}));
    CHECK(H.partial_y() == Poly({{0, 1, 2.0}}));
    const Poly xy = Poly::monomial(1, 1);
    CHECK(xy.partial_x() == Poly::y());
    CHECK(xy.partial_y() == Poly::x());
  }

  TEST_CASE("partials agree with central differences") {
    const Poly H = elliptic() + Poly({{2, 3, cplx(0.5, -0.25)}});
    const Poly Hx = H.partial_x(), Hy = H.partial_y();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const double step = 1e-6;
    for (int k = 0; k < 100; ++k) {
      const Point2 q{cplx(u(rng), u(rng)), cplx(u(rng), u(rng))};
      const cplx fx = (H.eval({q.x + step, q.y}) - H.eval({q.x - step, q.y})) / (2 * step);
      const cplx fy = (H.eval({q.x, q.y + step}) - H.eval({q.x, q.y - step})) / (2 * step);
      CHECK(std::abs(Hx.eval(q) - fx) <= 1e-5 * std::max(1.0, std::abs(fx)));
      CHECK(std::abs(Hy.eval(q) - fy) <= 1e-5 * std::max(1.0, std::abs(fy)));
    }
  }

  TEST_CASE("critical data of the elliptic Hamiltonian") {
    const CriticalData cd = critical_data(elliptic());
    REQUIRE(cd.values.size() == 2);
    CHECK(contains(cd.values, 2.0, 1e-10));
    CHECK(contains(cd.values, -2.0, 1e-10));
    REQUIRE(cd.points.size() == 2);
    const Fibration fib(elliptic());
    for (std::size_t i = 0; i < cd.points.size(); ++i) {
      const Point2 g = fib.gradient(cd.points[i]);
      CHECK(std::abs(g.x) + std::abs(g.y) <= 1e-12);
      CHECK(std::abs(fib.value(cd.points[i]) - cd.values[cd.value_of_point[i]]) < 1e-10);
    }
  }

  TEST_CASE("critical data is stable under a finer seed lattice") {
    CriticalSearch fine;
    fine.resolution = 41;
    const CriticalData a = critical_data(elliptic()), b = critical_data(elliptic(), fine);
    REQUIRE(a.values.size() == b.values.size());
    for (cplx v : a.values) CHECK(contains(b.values, v, 1e-8));
  }

  TEST_CASE("quadratic form has one critical value") {
    const CriticalData cd = critical_data(testing::circle());
    REQUIRE(cd.points.size() == 1);
    CHECK(std::abs(cd.points[0].x) < 1e-12);
    CHECK(std::abs(cd.points[0].y) < 1e-12);
    CHECK(std::abs(cd.values[0]) < 1e-12);
  }

  TEST_CASE("cubic critical values match the discriminant") {
    // y^2 - (x^3 - x + h): a double root of x^3 + p x + q needs
    // 4 p^3 + 27 q^2 = 0, here p = -1 and q = h.
    const Poly H({{0, 2, 1.0}, {3, 0, -1.0}, {1, 0, 1.0}});
    const double p = -1.0;
    const double hq = std::sqrt(-4.0 * p * p * p / 27.0);
    const CriticalData cd = critical_data(H);
    REQUIRE(cd.values.size() == 2);
    CHECK(contains(cd.values, hq, 1e-10));
    CHECK(contains(cd.values, -hq, 1e-10));
  }

  TEST_CASE("quartic critical values match roots of f'") {
    // H = y^2 - f(x) with f = x^4 - x^2; critical values are -f at f' = 0.
    const Poly H({{0, 2, 1.0}, {4, 0, -1.0}, {2, 0, 1.0}});
    Eigen::Matrix3cd comp = Eigen::Matrix3cd::Zero();  // companion of x^3 - x/2
    comp(1, 0) = 1.0;
    comp(2, 1) = 1.0;
    comp(1, 2) = 0.5;
    Eigen::ComplexEigenSolver<Eigen::Matrix3cd> es(comp);
    std::vector<cplx> expected;
    for (int k = 0; k < 3; ++k) {
      const cplx x = es.eigenvalues()(k);
      const cplx v = -(std::pow(x, 4) - x * x);
      if (!contains(expected, v, 1e-8)) expected.push_back(v);
    }
    const CriticalData cd = critical_data(H);
    REQUIRE(cd.values.size() == expected.size());
    for (cplx v : expected) CHECK(contains(cd.values, v, 1e-10));
  }

  TEST_CASE("constant H is rejected") {
    CHECK_THROWS_AS(critical_data(Poly::constant(1.0)), ContourError);
  }
}
