#include "contourlab/melnikov.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "contourlab/error.hpp"
#include "contourlab/parallel.hpp"
#include "flow_events.hpp"

namespace contourlab {

namespace {

double real_eval(const Poly& p, double x, double y) {
  return p.is_zero() ? 0.0 : p.eval({cplx(x), cplx(y)}).real();
}

}  // namespace

std::array<double, 2> section_start(const Poly& H, const Section& sec, double h) {
  const double dx = sec.ny, dy = -sec.nx;  // along the line
  const Poly Hx = H.partial_x(), Hy = H.partial_y();
  double s = 0.0;
  for (int it = 0; it < 60; ++it) {
    const double x = sec.px + s * dx, y = sec.py + s * dy;
    const double r = real_eval(H, x, y) - h;
    const double d = real_eval(Hx, x, y) * dx + real_eval(Hy, x, y) * dy;
    if (d == 0.0) throw ContourError(ErrorCode::SectionTangency, "level curve tangent to the section line");
    const double step = r / d;
    s -= step;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(s))) break;
  }
  const double x = sec.px + s * dx, y = sec.py + s * dy;
  if (std::abs(real_eval(H, x, y) - h) > 1e-12 * std::max(1.0, std::abs(h)))
    throw ContourError(ErrorCode::NoConvergence, "no point with H = h on the section line");
  return {x, y};
}

ReturnSample poincare_return(const Poly& H, const Poly& P, const Poly& Q, double h, double eps, const Section& sec,
                             int crossings, const FlowControls& c) {
  if (crossings < 1) throw ContourError(ErrorCode::InvalidArgument, "crossings must be >= 1");
  const Poly Hx = H.partial_x(), Hy = H.partial_y();
  using State = std::array<double, 2>;
  auto rhs = [&](const State& s, State& ds) {
    ds[0] = real_eval(Hy, s[0], s[1]) + eps * real_eval(P, s[0], s[1]);
    ds[1] = -real_eval(Hx, s[0], s[1]) + eps * real_eval(Q, s[0], s[1]);
  };
  auto section_fn = [&](const State& s) { return sec.nx * (s[0] - sec.px) + sec.ny * (s[1] - sec.py); };
  auto transversality = [&](const State& s) {
    State v;
    rhs(s, v);
    const double speed = std::hypot(v[0], v[1]);
    return speed == 0.0 ? 0.0 : (sec.nx * v[0] + sec.ny * v[1]) / (speed * std::hypot(sec.nx, sec.ny));
  };

  State s0 = section_start(H, sec, h);
  if (transversality(s0) <= 1e-8)
    throw ContourError(ErrorCode::SectionTangency, "flow does not cross the section positively at the start");
  auto hit = detail::integrate_to_crossing<2>(rhs, s0, section_fn, crossings, c, [](double, const State&) {});
  if (transversality(hit.state) <= 1e-8)
    throw ContourError(ErrorCode::SectionTangency, "flow tangent to the section at the return");
  ReturnSample r;
  r.h = h;
  r.eps = eps;
  r.crossings = crossings;
  r.delta_h = real_eval(H, hit.state[0], hit.state[1]) - h;
  r.time = hit.t;
  return r;
}

std::vector<double> default_eps_grid() { return {1e-3, 5e-4, 2.5e-4, 1.25e-4, 6.25e-5}; }

MelnikovExpansion melnikov_expansion(const Poly& H, const Poly& P, const Poly& Q, const std::vector<double>& hs,
                                     const std::vector<double>& eps, const Section& sec, const FlowControls& c) {
  if (eps.size() < 5) throw ContourError(ErrorCode::InvalidArgument, "eps grid needs at least 5 values");
  if (hs.empty()) throw ContourError(ErrorCode::InvalidArgument, "empty h grid");
  MelnikovExpansion out;
  out.h = hs;
  out.samples.resize(hs.size() * eps.size());
  parallel_for(out.samples.size(), [&](std::size_t i) {
    out.samples[i] = poincare_return(H, P, Q, hs[i / eps.size()], eps[i % eps.size()], sec, 1, c);
  });

  const int J = std::min<int>(3, static_cast<int>(eps.size()) - 2);
  const double eps_min = *std::min_element(eps.begin(), eps.end());
  const double eps_max = *std::max_element(eps.begin(), eps.end());
  const double tol = std::max(c.abs_tol, c.rel_tol);
  for (int j = 1; j <= J; ++j) out.noise_floor.push_back(10.0 * tol / std::pow(eps_min, j));

  // Columns scaled by eps_max^j keep the Vandermonde system well scaled.
  Eigen::MatrixXd V(eps.size(), J);
  for (std::size_t i = 0; i < eps.size(); ++i)
    for (int j = 0; j < J; ++j) V(i, j) = std::pow(eps[i] / eps_max, j + 1);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(V);
  for (std::size_t k = 0; k < hs.size(); ++k) {
    Eigen::VectorXd rhs(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) rhs(i) = out.samples[k * eps.size() + i].delta_h;
    Eigen::VectorXd sol = qr.solve(rhs);
    std::vector<double> cj(J);
    for (int j = 0; j < J; ++j) cj[j] = sol(j) / std::pow(eps_max, j + 1);
    out.coefficients.push_back(cj);
    const double nrm = rhs.norm();
    if (nrm > 0.0) out.residual = std::max(out.residual, (V * sol - rhs).norm() / nrm);
  }
  for (int j = 1; j <= J; ++j) {
    double mx = 0.0;
    for (const auto& cj : out.coefficients) mx = std::max(mx, std::abs(cj[j - 1]));
    if (mx > out.noise_floor[j - 1]) {
      out.k = j;
      for (const auto& cj : out.coefficients) out.Mk.push_back(cj[j - 1]);
      return out;
    }
  }
  throw ContourError(ErrorCode::AllOrdersVanish,
                     "every fitted order stays below the noise floor up to order " + std::to_string(J));
}

std::vector<double> chebyshev_grid(double a, double b, int n) {
  if (n < 2) throw ContourError(ErrorCode::InvalidArgument, "Chebyshev grid needs at least 2 points");
  std::vector<double> out(n);
  for (int j = 0; j < n; ++j)
    out[j] = 0.5 * (a + b) + 0.5 * (b - a) * std::cos(std::numbers::pi * j / (n - 1));
  return out;
}

namespace {

// Trefethen's Chebyshev differentiation matrix, rescaled to [a, b].
Eigen::MatrixXd cheb_diff(int n, double a, double b) {
  const int N = n - 1;
  Eigen::VectorXd x(n), w(n);
  for (int j = 0; j < n; ++j) {
    x(j) = std::cos(std::numbers::pi * j / N);
    w(j) = ((j == 0 || j == N) ? 2.0 : 1.0) * (j % 2 ? -1.0 : 1.0);
  }
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      D(i, j) = (w(i) / w(j)) / (x(i) - x(j));
      row += D(i, j);
    }
    D(i, i) = -row;
  }
  return D * (2.0 / (b - a));
}

double cheb_T(int q, double s) { return std::cos(q * std::acos(std::clamp(s, -1.0, 1.0))); }

}  // namespace

cplx LinearOde::coefficient(int m, double h) const {
  const double s = (2.0 * h - a - b) / (b - a);
  cplx acc = 0.0;
  for (int q = 0; q <= degree; ++q) acc += coeffs[m][q] * cheb_T(q, s);
  return acc;
}

double LinearOde::apply_residual(const std::vector<cplx>& f) const {
  const int n = static_cast<int>(f.size());
  const Eigen::MatrixXd D = cheb_diff(n, a, b);
  const std::vector<double> hs = chebyshev_grid(a, b, n);
  std::vector<Eigen::VectorXcd> der(order + 1);
  der[0] = Eigen::Map<const Eigen::VectorXcd>(f.data(), n);
  for (int m = 1; m <= order; ++m) der[m] = D.cast<cplx>() * der[m - 1];
  double num = 0.0, den = 0.0;
  for (int m = 0; m <= order; ++m) {
    double amax = 0.0;
    for (int j = 0; j < n; ++j) amax = std::max(amax, std::abs(coefficient(m, hs[j])));
    den += amax * der[m].cwiseAbs().maxCoeff();
  }
  for (int j = 0; j < n; ++j) {
    cplx acc = 0.0;
    for (int m = 0; m <= order; ++m) acc += coefficient(m, hs[j]) * der[m](j);
    num = std::max(num, std::abs(acc));
  }
  return den == 0.0 ? 0.0 : num / den;
}

LinearOde fit_linear_ode(const std::vector<std::vector<cplx>>& samples, double a, double b, int order,
                         int degree) {
  if (samples.empty()) throw ContourError(ErrorCode::InvalidArgument, "no sample sets");
  if (order < 0 || degree < 0) throw ContourError(ErrorCode::InvalidArgument, "negative order or degree");
  const int n = static_cast<int>(samples[0].size());
  for (const auto& s : samples)
    if (static_cast<int>(s.size()) != n) throw ContourError(ErrorCode::InvalidArgument, "sample sets differ in size");
  if (n < 4 * (order + 1))
    throw ContourError(ErrorCode::InvalidArgument, "grid needs at least 4 (order + 1) points");
  if (!(b > a)) throw ContourError(ErrorCode::InvalidArgument, "empty interval");

  LinearOde ode;
  ode.order = order;
  ode.degree = degree;
  ode.a = a;
  ode.b = b;
  const Eigen::MatrixXd D = cheb_diff(n, a, b);
  Eigen::MatrixXd Dn = Eigen::MatrixXd::Identity(n, n);
  for (int m = 0; m < order; ++m) Dn = D * Dn;
  ode.amplification = Eigen::JacobiSVD<Eigen::MatrixXd>(Dn).singularValues()(0);
  if (ode.amplification > 1e12)
    throw ContourError(ErrorCode::IllConditioned, "differentiation amplification exceeds 1e12");

  const std::vector<double> hs = chebyshev_grid(a, b, n);
  const int cols = (order + 1) * (degree + 1);
  Eigen::MatrixXcd M(n * static_cast<int>(samples.size()), cols);
  for (std::size_t f = 0; f < samples.size(); ++f) {
    std::vector<Eigen::VectorXcd> der(order + 1);
    der[0] = Eigen::Map<const Eigen::VectorXcd>(samples[f].data(), n);
    for (int m = 1; m <= order; ++m) der[m] = D.cast<cplx>() * der[m - 1];
    for (int j = 0; j < n; ++j) {
      const double s = (2.0 * hs[j] - a - b) / (b - a);
      for (int m = 0; m <= order; ++m)
        for (int q = 0; q <= degree; ++q) M(f * n + j, m * (degree + 1) + q) = cheb_T(q, s) * der[m](j);
    }
  }
  // Unit-norm columns so that no derivative order dominates the null vector.
  Eigen::VectorXd scale(cols);
  for (int k = 0; k < cols; ++k) {
    scale(k) = M.col(k).norm();
    if (scale(k) == 0.0) scale(k) = 1.0;
    M.col(k) /= scale(k);
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  ode.residual = sv(0) == 0.0 ? 0.0 : sv(sv.size() - 1) / sv(0);
  Eigen::VectorXcd v = svd.matrixV().col(cols - 1);
  ode.coeffs.assign(order + 1, std::vector<cplx>(degree + 1));
  for (int m = 0; m <= order; ++m)
    for (int q = 0; q <= degree; ++q) ode.coeffs[m][q] = v(m * (degree + 1) + q) / scale(m * (degree + 1) + q);
  return ode;
}

}  // namespace contourlab
