#include "contourlab/normal_var.hpp"

#include <algorithm>
#include <cmath>

#include "contourlab/error.hpp"
#include "contourlab/tri_group.hpp"
#include "flow_events.hpp"

namespace contourlab {

NormalSolution::NormalSolution(const Fibration& fib, const FiberLoop& loop, const Poly& A, const Poly& b,
                               double hyp_margin, double tol_resonance)
    : quad_(std::make_shared<LoopQuadrature>(fib, loop)),
      profile_(std::make_shared<CumulativeProfile>(*quad_, A, b)) {
  const cplx I = profile_->exponent();
  if (std::abs(I) < hyp_margin)
    throw ContourError(ErrorCode::Resonance, "|oint A dt| below the hyperbolicity margin");
  if (resonance_gap(I) <= tol_resonance) throw ContourError(ErrorCode::Resonance, "e^I = 1 on the loop");
  inv_denom_ = 1.0 / (std::exp(-I) - 1.0);
  for (std::size_t k = 0; k < quad_->segment_count(); ++k)
    for (int j = 0; j < LoopQuadrature::kNodes; ++j) max_abs_ = std::max(max_abs_, std::abs(at_node(k, j)));
}

cplx NormalSolution::g_from(const CumulativeProfile::Values& v) const {
  // Split int_t^{t+T} at T; the wrapped part picks up e^{-I}.
  const cplx BT = profile_->b_total();
  return inv_denom_ * std::exp(v.a) * ((BT - v.B) + std::exp(-profile_->exponent()) * v.B);
}

cplx NormalSolution::at_node(std::size_t k, int j) const { return g_from(profile_->nodes(k)[j]); }

cplx NormalSolution::at_time(double t, Point2* point) const {
  const double T = period().real();
  if (!(T > 0.0) || std::abs(period().imag()) > 1e-8 * T)
    throw ContourError(ErrorCode::InvalidArgument, "at_time needs a loop with real positive period");
  t = std::fmod(t, T);
  if (t < 0.0) t += T;
  const std::size_t n = quad_->segment_count();
  std::size_t lo = 0, hi = n;  // start(lo).t <= t < start(hi).t
  while (hi - lo > 1) {
    std::size_t mid = (lo + hi) / 2;
    if (profile_->start(mid).t.real() <= t)
      lo = mid;
    else
      hi = mid;
  }
  const double t0 = profile_->start(lo).t.real(), t1 = profile_->start(lo + 1).t.real();
  double u = t1 > t0 ? std::clamp((t - t0) / (t1 - t0), 0.0, 1.0) : 0.0;
  QuadNode node;
  CumulativeProfile::Values v = profile_->at(lo, u, &node);
  for (int it = 0; it < 20; ++it) {
    const double f = v.t.real() - t;
    const double df = node.tau.real();
    if (df == 0.0) break;
    const double du = f / df;
    u = std::clamp(u - du, 0.0, 1.0);
    v = profile_->at(lo, u, &node);
    if (std::abs(du) <= 1e-15) break;
  }
  if (point) *point = node.q;
  return g_from(v);
}

double normal_periodic_solution(const System3D& sys, const FiberLoop& loop, double t_eval) {
  NormalSolution g(Fibration(sys.H), loop, sys.A, sys.b, sys.hyp_margin);
  return g.at_time(t_eval).real();
}

double PontryaginMelnikov::route_gap() const {
  return std::abs(direct - decomposed()) / std::max(std::abs(direct), scale);
}

PontryaginMelnikov pontryagin_melnikov(const System3D& sys, const FiberLoop& loop) {
  Fibration fib(sys.H);
  NormalSolution g(fib, loop, sys.A, sys.b, sys.hyp_margin);
  const LoopQuadrature& quad = g.quadrature();
  const Poly p = sys.S * fib.Hy() + sys.R * fib.Hx();
  const auto& w = LoopQuadrature::weights();
  auto ev = [](const Poly& f, Point2 q) { return f.is_zero() ? cplx(0.0) : f.eval(q); };

  PontryaginMelnikov out;
  cplx direct = 0.0;
  double scale = 0.0;
  for (std::size_t k = 0; k < quad.segment_count(); ++k) {
    const auto& nd = quad.segment(k);
    for (int j = 0; j < LoopQuadrature::kNodes; ++j) {
      const cplx gj = g.at_node(k, j);
      const Point2 q = nd[j].q, dq = nd[j].dq;
      const cplx Q = ev(sys.Q, q), P = ev(sys.P, q);
      direct += w[j] * ((Q + gj * ev(sys.S, q)) * dq.x - (P + gj * ev(sys.R, q)) * dq.y);
      scale += w[j] * (std::abs(Q * dq.x - P * dq.y) + std::abs(gj * ev(p, q) * nd[j].tau));
    }
  }
  out.direct = direct;
  out.scale = scale;
  out.abelian = abelian_integral(quad, sys.Q, sys.P);
  out.psi = psi(rho(quad, Coefficients{sys.A, sys.b, p}));
  return out;
}

Simulation3D simulate_3d_return(const System3D& sys, double h, const Section& section, const FlowControls& c,
                                int n_points) {
  Fibration fib(sys.H);
  const auto start = section_start(sys.H, section, h);
  FiberLoop loop = trace_real_oval(fib, h, start[0], start[1], n_points);
  NormalSolution g(fib, loop, sys.A, sys.b, sys.hyp_margin);

  const Poly Hx = fib.Hx(), Hy = fib.Hy();
  auto ev = [](const Poly& f, double x, double y) {
    return f.is_zero() ? 0.0 : f.eval({cplx(x), cplx(y)}).real();
  };
  const double eps = sys.eps;
  using State = std::array<double, 3>;
  auto rhs = [&](const State& s, State& ds) {
    const double x = s[0], y = s[1], z = s[2];
    ds[0] = ev(Hy, x, y) + z * ev(sys.R, x, y) + eps * ev(sys.P, x, y);
    ds[1] = -ev(Hx, x, y) + z * ev(sys.S, x, y) + eps * ev(sys.Q, x, y);
    ds[2] = ev(sys.A, x, y) * z + eps * ev(sys.b, x, y);
  };
  auto section_fn = [&](const State& s) {
    return section.nx * (s[0] - section.px) + section.ny * (s[1] - section.py);
  };

  Simulation3D out;
  out.h = h;
  out.eps = eps;
  out.period = g.period().real();
  const double escape = 10.0 * std::abs(eps) * g.max_abs();
  auto observe = [&](double t, const State& s) {
    if (std::abs(s[2]) > escape && s[2] != 0.0)
      throw ContourError(ErrorCode::NormalEscape, "|z| left 10 eps max|g|: hyperbolicity too weak for this eps");
    out.tracking = std::max(out.tracking, std::abs(s[2] - eps * g.at_time(t).real()));
    out.profile.push_back({t, s[0], s[1], s[2], ev(sys.H, s[0], s[1])});
  };
  State s0{start[0], start[1], eps * g.at_time(0.0).real()};
  auto hit = detail::integrate_to_crossing<3>(rhs, s0, section_fn, 1, c, observe);
  out.delta_h = ev(sys.H, hit.state[0], hit.state[1]) - h;
  return out;
}

}  // namespace contourlab
