#include "contourlab/ham_time.hpp"

#include <cmath>

#include "contourlab/error.hpp"

namespace contourlab {

namespace {

constexpr int kN = LoopQuadrature::kNodes;

cplx bilinear(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }

struct RawIntegrals {
  cplx T, I;
  cplx theta_p;  // int p e^{a} dt
  cplx theta_m;  // int b e^{-a} dt
  cplx phi;      // int p e^{a(t)} B(t) dt
};

RawIntegrals raw_integrals(const LoopQuadrature& quad, const Coefficients& co) {
  CumulativeProfile prof(quad, co.A, co.b);
  const auto& w = LoopQuadrature::weights();
  RawIntegrals r{prof.period(), prof.exponent(), 0.0, prof.b_total(), 0.0};
  if (co.p.is_zero()) return r;
  for (std::size_t k = 0; k < quad.segment_count(); ++k) {
    const auto& nd = quad.segment(k);
    const auto& v = prof.nodes(k);
    for (int j = 0; j < kN; ++j) {
      cplx f = w[j] * co.p.eval(nd[j].q) * std::exp(v[j].a) * nd[j].tau;
      r.theta_p += f;
      r.phi += f * v[j].B;
    }
  }
  return r;
}

}  // namespace

const std::array<double, kN>& LoopQuadrature::abscissae() {
  static const std::array<double, kN> u = {
      0.5 * (1.0 - 0.8611363115940526), 0.5 * (1.0 - 0.3399810435848563),
      0.5 * (1.0 + 0.3399810435848563), 0.5 * (1.0 + 0.8611363115940526)};
  return u;
}

const std::array<double, kN>& LoopQuadrature::weights() {
  static const std::array<double, kN> w = {0.5 * 0.3478548451374538, 0.5 * 0.6521451548625461,
                                           0.5 * 0.6521451548625461, 0.5 * 0.3478548451374538};
  return w;
}

const std::array<std::array<double, kN>, kN>& LoopQuadrature::partial() {
  static const auto S = [] {
    std::array<std::array<double, kN>, kN> out{};
    const auto& u = abscissae();
    for (int m = 0; m < kN; ++m) {
      // Lagrange basis polynomial through the nodes, expanded in powers of u.
      std::array<double, kN> c{1.0, 0.0, 0.0, 0.0};
      double denom = 1.0;
      int deg = 0;
      for (int k = 0; k < kN; ++k) {
        if (k == m) continue;
        for (int d = deg + 1; d >= 1; --d) c[d] = c[d - 1] - u[k] * c[d];
        c[0] = -u[k] * c[0];
        ++deg;
        denom *= u[m] - u[k];
      }
      for (int j = 0; j < kN; ++j) {
        double acc = 0.0, upow = u[j];
        for (int d = 0; d < kN; ++d, upow *= u[j]) acc += c[d] * upow / (d + 1);
        out[j][m] = acc / denom;
      }
    }
    return out;
  }();
  return S;
}

LoopQuadrature::LoopQuadrature(const Fibration& fib, const FiberLoop& loop, double min_grad)
    : fib_(fib), loop_(loop), min_grad_(min_grad) {
  const auto& pts = loop_.points();
  const std::size_t n = pts.size();
  if (n < 2) throw ContourError(ErrorCode::InvalidArgument, "loop needs at least two samples");
  directions_.resize(n);
  nodes_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    Point2 mid = 0.5 * (pts[k] + pts[(k + 1) % n]);
    Point2 g = fib_.gradient(mid);
    double gg = std::norm(g.x) + std::norm(g.y);
    if (gg < min_grad_ * min_grad_)
      throw ContourError(ErrorCode::HitCritical, "segment passes within min_grad of a critical point");
    directions_[k] = {std::conj(g.x) / gg, std::conj(g.y) / gg};
    for (int m = 0; m < kN; ++m) nodes_[k][m] = node_at(k, abscissae()[m]);
  }
}

QuadNode LoopQuadrature::node_at(std::size_t k, double u) const {
  const auto& pts = loop_.points();
  const Point2 p0 = pts[k];
  const Point2 v = pts[(k + 1) % pts.size()] - p0;
  const Point2 c = p0 + u * v;
  const Point2 n = directions_[k];
  const cplx h = loop_.h();
  cplx lambda = 0.0;
  bool converged = false;
  for (int it = 0; it < 40; ++it) {
    Point2 q = c + lambda * n;
    cplx r = fib_.value(q) - h;
    cplx d = bilinear(fib_.gradient(q), n);
    if (d == cplx(0.0)) break;
    cplx dl = r / d;
    lambda -= dl;
    if (std::abs(dl) * norm(n) <= 1e-15 * (1.0 + norm(q))) {
      converged = true;
      break;
    }
  }
  Point2 q = c + lambda * n;
  if (!converged && std::abs(fib_.value(q) - h) > 1e-10 * std::max(1.0, std::abs(h)))
    throw ContourError(ErrorCode::ProjectionDiverged, "quadrature node projection failed");
  Point2 g = fib_.gradient(q);
  double gg = std::norm(g.x) + std::norm(g.y);
  if (gg < min_grad_ * min_grad_)
    throw ContourError(ErrorCode::HitCritical, "quadrature node within min_grad of a critical point");
  cplx dlambda = -bilinear(g, v) / bilinear(g, n);
  Point2 dq = v + dlambda * n;
  // Hermitian-regularized Hamiltonian time: equals dx/H_y on the fiber.
  cplx tau = (std::conj(g.y) * dq.x - std::conj(g.x) * dq.y) / gg;
  return {q, dq, tau};
}

CumulativeProfile::CumulativeProfile(const LoopQuadrature& quad, const Poly& A, const Poly& b)
    : quad_(&quad), A_(A), b_(b) {
  const std::size_t n = quad.segment_count();
  const auto& w = LoopQuadrature::weights();
  const auto& S = LoopQuadrature::partial();
  start_.resize(n + 1);
  nodes_.resize(n);
  a_vals_.resize(n);
  b_vals_.resize(n);
  Values cur{0.0, 0.0, 0.0};
  start_[0] = cur;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& nd = quad.segment(k);
    std::array<cplx, kN> Atau, btau;
    for (int m = 0; m < kN; ++m) {
      a_vals_[k][m] = A_.is_zero() ? cplx(0.0) : A_.eval(nd[m].q);
      b_vals_[k][m] = b_.is_zero() ? cplx(0.0) : b_.eval(nd[m].q);
      Atau[m] = a_vals_[k][m] * nd[m].tau;
    }
    auto& v = nodes_[k];
    for (int j = 0; j < kN; ++j) {
      v[j].t = cur.t;
      v[j].a = cur.a;
      for (int m = 0; m < kN; ++m) {
        v[j].t += S[j][m] * nd[m].tau;
        v[j].a += S[j][m] * Atau[m];
      }
    }
    for (int m = 0; m < kN; ++m) btau[m] = b_vals_[k][m] * std::exp(-v[m].a) * nd[m].tau;
    for (int j = 0; j < kN; ++j) {
      v[j].B = cur.B;
      for (int m = 0; m < kN; ++m) v[j].B += S[j][m] * btau[m];
    }
    for (int m = 0; m < kN; ++m) {
      cur.t += w[m] * nd[m].tau;
      cur.a += w[m] * Atau[m];
      cur.B += w[m] * btau[m];
    }
    start_[k + 1] = cur;
  }
}

CumulativeProfile::Values CumulativeProfile::at(std::size_t k, double u, QuadNode* node) const {
  const Values& s0 = start_[k];
  if (node) *node = quad_->node_at(k, u);
  if (u == 0.0) return s0;
  const auto& x = LoopQuadrature::abscissae();
  const auto& w = LoopQuadrature::weights();
  Values out = s0;
  for (int m = 0; m < kN; ++m) {
    const double sm = u * x[m];
    QuadNode nm = quad_->node_at(k, sm);
    cplx a_sm = s0.a;
    if (!A_.is_zero()) {
      for (int l = 0; l < kN; ++l) {
        QuadNode nl = quad_->node_at(k, sm * x[l]);
        a_sm += sm * w[l] * A_.eval(nl.q) * nl.tau;
      }
    }
    cplx Am = A_.is_zero() ? cplx(0.0) : A_.eval(nm.q);
    cplx bm = b_.is_zero() ? cplx(0.0) : b_.eval(nm.q);
    out.t += u * w[m] * nm.tau;
    out.a += u * w[m] * Am * nm.tau;
    out.B += u * w[m] * bm * std::exp(-a_sm) * nm.tau;
  }
  return out;
}

TimeProfile time_profile(const Fibration& fib, const FiberLoop& loop, const Poly& A) {
  LoopQuadrature quad(fib, loop);
  CumulativeProfile prof(quad, A, Poly{});
  TimeProfile out;
  for (std::size_t k = 0; k <= quad.segment_count(); ++k) {
    out.t_cum.push_back(prof.start(k).t);
    out.a_cum.push_back(prof.start(k).a);
  }
  return out;
}

LoopIntegrals loop_integrals(const LoopQuadrature& quad, const Coefficients& co) {
  RawIntegrals r = raw_integrals(quad, co);
  const cplx half = std::exp(-0.5 * r.I);
  return {r.T, r.I, half * r.theta_p, r.theta_m / half, half * r.phi};
}

LoopIntegrals loop_integrals(const Fibration& fib, const FiberLoop& loop, const Coefficients& co) {
  return loop_integrals(LoopQuadrature(fib, loop), co);
}

double resonance_gap(cplx I) {
  cplx e = std::exp(I);
  return std::abs(e - 1.0) / std::max(1.0, std::abs(e));
}

LoopFunctionals loop_functionals(const LoopQuadrature& quad, const Coefficients& co, double tol_resonance) {
  RawIntegrals r = raw_integrals(quad, co);
  if (resonance_gap(r.I) <= tol_resonance)
    throw ContourError(ErrorCode::Resonance, "e^I = 1 on this loop; Psi is undefined");
  const cplx half = std::exp(-0.5 * r.I);
  const cplx em = std::exp(-r.I);
  LoopFunctionals f;
  f.T = r.T;
  f.I = r.I;
  f.theta_plus = half * r.theta_p;
  f.theta_minus = r.theta_m / half;
  f.phi = half * r.phi;
  // e^{I/2} phi + theta+ theta- / (e^{-I} - 1), with the half-exponents cancelled.
  f.psi = r.phi + r.theta_p * r.theta_m / (em - 1.0);
  f.psi_condition = std::abs(em) / std::abs(em - 1.0);
  f.near_resonant = f.psi_condition > 1e6;
  return f;
}

LoopFunctionals loop_functionals(const Fibration& fib, const FiberLoop& loop, const Coefficients& co,
                                 double tol_resonance) {
  return loop_functionals(LoopQuadrature(fib, loop), co, tol_resonance);
}

cplx psi_direct(const LoopQuadrature& quad, const Coefficients& co, double tol_resonance) {
  CumulativeProfile prof(quad, co.A, co.b);
  const cplx I = prof.exponent();
  if (resonance_gap(I) <= tol_resonance)
    throw ContourError(ErrorCode::Resonance, "e^I = 1 on this loop; Psi is undefined");
  if (co.p.is_zero() || co.b.is_zero()) return 0.0;
  const std::size_t n = quad.segment_count();
  const auto& w = LoopQuadrature::weights();
  const auto& S = LoopQuadrature::partial();

  // Inner integrand b(s) e^{-a(s)} ds at every node, and its segment totals.
  std::vector<std::array<cplx, kN>> f(n);
  std::vector<cplx> F(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& nd = quad.segment(k);
    const auto& v = prof.nodes(k);
    for (int m = 0; m < kN; ++m) {
      f[k][m] = prof.b_at(k)[m] * std::exp(-v[m].a) * nd[m].tau;
      F[k] += w[m] * f[k][m];
    }
  }
  const cplx wrap = std::exp(-I);  // s beyond T picks up e^{-I}
  cplx total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& nd = quad.segment(k);
    const auto& v = prof.nodes(k);
    for (int j = 0; j < kN; ++j) {
      cplx own_before = 0.0;
      for (int m = 0; m < kN; ++m) own_before += S[j][m] * f[k][m];
      cplx later = F[k] - own_before;
      for (std::size_t l = k + 1; l < n; ++l) later += F[l];
      cplx earlier = own_before;
      for (std::size_t l = 0; l < k; ++l) earlier += F[l];
      cplx outer = w[j] * co.p.eval(nd[j].q) * std::exp(v[j].a) * nd[j].tau;
      total += outer * (later + wrap * earlier);
    }
  }
  return total / (wrap - 1.0);
}

cplx psi_direct(const Fibration& fib, const FiberLoop& loop, const Coefficients& co, double tol_resonance) {
  return psi_direct(LoopQuadrature(fib, loop), co, tol_resonance);
}

cplx abelian_integral(const LoopQuadrature& quad, const Poly& Q, const Poly& P) {
  const auto& w = LoopQuadrature::weights();
  cplx acc = 0.0;
  for (std::size_t k = 0; k < quad.segment_count(); ++k) {
    const auto& nd = quad.segment(k);
    for (int j = 0; j < kN; ++j) {
      cplx qv = Q.is_zero() ? cplx(0.0) : Q.eval(nd[j].q);
      cplx pv = P.is_zero() ? cplx(0.0) : P.eval(nd[j].q);
      acc += w[j] * (qv * nd[j].dq.x - pv * nd[j].dq.y);
    }
  }
  return acc;
}

cplx abelian_integral(const Fibration& fib, const FiberLoop& loop, const Poly& Q, const Poly& P) {
  return abelian_integral(LoopQuadrature(fib, loop), Q, P);
}

}  // namespace contourlab
