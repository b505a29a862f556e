#include "contourlab/poly.hpp"

#include <algorithm>
#include <array>
#include <numbers>

#include "contourlab/error.hpp"

namespace contourlab {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonIsolatedCritical: return "NonIsolatedCritical";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::ProjectionDiverged: return "ProjectionDiverged";
    case ErrorCode::NotClosed: return "NotClosed";
    case ErrorCode::HitCritical: return "HitCritical";
    case ErrorCode::DegenerateHessian: return "DegenerateHessian";
    case ErrorCode::BasePointMismatch: return "BasePointMismatch";
    case ErrorCode::ConnectorOffFiber: return "ConnectorOffFiber";
    case ErrorCode::Resonance: return "Resonance";
    case ErrorCode::NotInS: return "NotInS";
    case ErrorCode::NoReturn: return "NoReturn";
    case ErrorCode::SectionTangency: return "SectionTangency";
    case ErrorCode::AllOrdersVanish: return "AllOrdersVanish";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::NormalEscape: return "NormalEscape";
  }
  return "Unknown";
}

Poly::Poly(std::vector<Term> terms) : terms_(std::move(terms)) { normalize(); }

Poly Poly::constant(cplx c) { return Poly({Term{0, 0, c}}); }

Poly Poly::monomial(int deg_x, int deg_y, cplx c) {
  if (deg_x < 0 || deg_y < 0)
    throw ContourError(ErrorCode::InvalidArgument, "negative monomial degree");
  return Poly({Term{deg_x, deg_y, c}});
}

void Poly::normalize() {
  for (const auto& t : terms_)
    if (t.deg_x < 0 || t.deg_y < 0)
      throw ContourError(ErrorCode::InvalidArgument, "negative monomial degree");
  std::sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) {
    return a.deg_x != b.deg_x ? a.deg_x < b.deg_x : a.deg_y < b.deg_y;
  });
  std::vector<Term> merged;
  merged.reserve(terms_.size());
  for (const auto& t : terms_) {
    if (!merged.empty() && merged.back().deg_x == t.deg_x && merged.back().deg_y == t.deg_y)
      merged.back().coeff += t.coeff;
    else
      merged.push_back(t);
  }
  std::erase_if(merged, [](const Term& t) { return t.coeff == cplx(0.0); });
  terms_ = std::move(merged);
  max_x_ = 0;
  max_y_ = 0;
  for (const auto& t : terms_) {
    max_x_ = std::max(max_x_, t.deg_x);
    max_y_ = std::max(max_y_, t.deg_y);
  }
}

cplx Poly::eval(Point2 pt) const {
  if (terms_.empty()) return 0.0;
  // Small fixed buffers cover every desk-scale degree; fall back to the heap otherwise.
  constexpr int kStack = 16;
  std::array<cplx, kStack> xs_buf, ys_buf;
  std::vector<cplx> xs_heap, ys_heap;
  cplx* xs = xs_buf.data();
  cplx* ys = ys_buf.data();
  if (max_x_ >= kStack) { xs_heap.resize(max_x_ + 1); xs = xs_heap.data(); }
  if (max_y_ >= kStack) { ys_heap.resize(max_y_ + 1); ys = ys_heap.data(); }
  xs[0] = 1.0;
  for (int i = 1; i <= max_x_; ++i) xs[i] = xs[i - 1] * pt.x;
  ys[0] = 1.0;
  for (int j = 1; j <= max_y_; ++j) ys[j] = ys[j - 1] * pt.y;
  cplx acc = 0.0;
  for (const auto& t : terms_) acc += t.coeff * xs[t.deg_x] * ys[t.deg_y];
  return acc;
}

Poly Poly::partial_x() const {
  std::vector<Term> out;
  for (const auto& t : terms_)
    if (t.deg_x > 0) out.push_back({t.deg_x - 1, t.deg_y, t.coeff * double(t.deg_x)});
  return Poly(std::move(out));
}

Poly Poly::partial_y() const {
  std::vector<Term> out;
  for (const auto& t : terms_)
    if (t.deg_y > 0) out.push_back({t.deg_x, t.deg_y - 1, t.coeff * double(t.deg_y)});
  return Poly(std::move(out));
}

bool Poly::is_constant() const noexcept {
  return terms_.empty() || (terms_.size() == 1 && terms_[0].deg_x == 0 && terms_[0].deg_y == 0);
}

bool Poly::is_real(double tol) const noexcept {
  return std::all_of(terms_.begin(), terms_.end(),
                     [tol](const Term& t) { return std::abs(t.coeff.imag()) <= tol; });
}

int Poly::degree() const noexcept {
  int d = -1;
  for (const auto& t : terms_) d = std::max(d, t.deg_x + t.deg_y);
  return d;
}

Poly operator+(const Poly& a, const Poly& b) {
  std::vector<Term> t = a.terms_;
  t.insert(t.end(), b.terms_.begin(), b.terms_.end());
  return Poly(std::move(t));
}

Poly Poly::operator-() const {
  std::vector<Term> t = terms_;
  for (auto& term : t) term.coeff = -term.coeff;
  return Poly(std::move(t));
}

Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }

Poly operator*(const Poly& a, const Poly& b) {
  std::vector<Term> t;
  t.reserve(a.terms_.size() * b.terms_.size());
  for (const auto& u : a.terms_)
    for (const auto& v : b.terms_) t.push_back({u.deg_x + v.deg_x, u.deg_y + v.deg_y, u.coeff * v.coeff});
  return Poly(std::move(t));
}

Poly operator*(cplx s, const Poly& a) {
  std::vector<Term> t = a.terms_;
  for (auto& term : t) term.coeff *= s;
  return Poly(std::move(t));
}

bool operator==(const Poly& a, const Poly& b) {
  if (a.terms_.size() != b.terms_.size()) return false;
  for (std::size_t i = 0; i < a.terms_.size(); ++i) {
    const auto& u = a.terms_[i];
    const auto& v = b.terms_[i];
    if (u.deg_x != v.deg_x || u.deg_y != v.deg_y || u.coeff != v.coeff) return false;
  }
  return true;
}

Fibration::Fibration(Poly h) : h_(std::move(h)) {
  hx_ = h_.partial_x();
  hy_ = h_.partial_y();
  hxx_ = hx_.partial_x();
  hxy_ = hx_.partial_y();
  hyy_ = hy_.partial_y();
}

void Fibration::hessian(Point2 p, cplx& hxx, cplx& hxy, cplx& hyy) const {
  hxx = hxx_.eval(p);
  hxy = hxy_.eval(p);
  hyy = hyy_.eval(p);
}

namespace {

struct NewtonOutcome {
  bool converged = false;
  Point2 point;
  double det_ratio = 0.0;  // |det Hess| / (Hessian scale)^2 at the limit
};

NewtonOutcome newton_gradient(const Fibration& f, Point2 p, const CriticalSearch& s) {
  NewtonOutcome out;
  for (int it = 0; it < s.max_iter; ++it) {
    Point2 g = f.gradient(p);
    if (std::abs(g.x) + std::abs(g.y) <= s.tol_newton) {
      out.converged = true;
      break;
    }
    cplx a, b, d;
    f.hessian(p, a, b, d);
    cplx det = a * d - b * b;
    if (det == cplx(0.0)) return out;
    // Solve [[a, b], [b, d]] dp = g.
    Point2 dp{(d * g.x - b * g.y) / det, (a * g.y - b * g.x) / det};
    p = p - dp;
    if (norm(p) > 1e8) return out;
  }
  if (!out.converged) {
    Point2 g = f.gradient(p);
    out.converged = std::abs(g.x) + std::abs(g.y) <= s.tol_newton;
  }
  cplx a, b, d;
  f.hessian(p, a, b, d);
  double scale = std::abs(a) + std::abs(b) + std::abs(d);
  out.det_ratio = scale > 0 ? std::abs(a * d - b * b) / (scale * scale) : 0.0;
  out.point = p;
  return out;
}

bool point_less(const Point2& a, const Point2& b) {
  if (a.x.real() != b.x.real()) return a.x.real() < b.x.real();
  if (a.x.imag() != b.x.imag()) return a.x.imag() < b.x.imag();
  if (a.y.real() != b.y.real()) return a.y.real() < b.y.real();
  return a.y.imag() < b.y.imag();
}

}  // namespace

CriticalData critical_data(const Poly& H, const CriticalSearch& s) {
  if (H.is_constant())
    throw ContourError(ErrorCode::InvalidArgument, "critical_data needs a nonconstant H");
  if (s.resolution < 2 || s.phases < 1 || !(s.box_hi > s.box_lo))
    throw ContourError(ErrorCode::InvalidArgument, "bad seed lattice");
  Fibration f(H);

  const double spacing = (s.box_hi - s.box_lo) / (s.resolution - 1);
  constexpr double kDegenerate = 1e-8;
  std::vector<Point2> regular, degenerate;
  CriticalData out;
  for (int k = 0; k < s.phases; ++k) {
    const cplx phase = std::polar(1.0, k * std::numbers::pi / (2.0 * s.phases) + 0.1);
    for (int i = 0; i < s.resolution; ++i) {
      for (int j = 0; j < s.resolution; ++j) {
        Point2 seed{phase * (s.box_lo + i * spacing), phase * (s.box_lo + j * spacing)};
        NewtonOutcome r = newton_gradient(f, seed, s);
        if (!r.converged) {
          ++out.failed_seeds;
          continue;
        }
        (r.det_ratio < kDegenerate ? degenerate : regular).push_back(r.point);
      }
    }
  }

  std::vector<Point2> points;
  auto add_unique = [&](const Point2& p, double tol) {
    for (const auto& q : points)
      if (distance(p, q) <= tol * std::max(1.0, norm(q))) return;
    points.push_back(p);
  };
  for (const auto& p : regular) add_unique(p, s.tol_dedup);

  // Degenerate limits: Newton converges linearly, so isolated ones scatter
  // in a tiny ball while a curve of critical points spreads over the box.
  if (!degenerate.empty()) {
    const double link = 2.0 * spacing;
    std::vector<int> cluster(degenerate.size(), -1);
    int n_clusters = 0;
    for (std::size_t i = 0; i < degenerate.size(); ++i) {
      if (cluster[i] >= 0) continue;
      std::vector<std::size_t> stack{i};
      cluster[i] = n_clusters;
      double diameter = 0.0;
      std::size_t best = i;
      while (!stack.empty()) {
        std::size_t u = stack.back();
        stack.pop_back();
        diameter = std::max(diameter, distance(degenerate[u], degenerate[i]));
        Point2 gu = f.gradient(degenerate[u]);
        Point2 gb = f.gradient(degenerate[best]);
        if (norm(gu) < norm(gb)) best = u;
        for (std::size_t v = 0; v < degenerate.size(); ++v) {
          if (cluster[v] < 0 && distance(degenerate[u], degenerate[v]) <= link) {
            cluster[v] = n_clusters;
            stack.push_back(v);
          }
        }
      }
      if (diameter > 1e-3)
        throw ContourError(ErrorCode::NonIsolatedCritical,
                           "converged critical points with singular Hessian form a curve");
      add_unique(degenerate[best], 1e-4);
      ++n_clusters;
    }
  }

  std::sort(points.begin(), points.end(), point_less);
  out.points = points;
  for (const auto& p : points) {
    cplx v = f.value(p);
    std::size_t idx = out.values.size();
    for (std::size_t k = 0; k < out.values.size(); ++k) {
      if (std::abs(out.values[k] - v) <= s.tol_dedup * std::max(1.0, std::abs(v))) {
        idx = k;
        break;
      }
    }
    if (idx == out.values.size()) out.values.push_back(v);
    out.value_of_point.push_back(idx);
  }
  // Values ordered by decreasing real part; remap the point -> value index.
  std::vector<std::size_t> order(out.values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const cplx& u = out.values[a];
    const cplx& w = out.values[b];
    return u.real() != w.real() ? u.real() > w.real() : u.imag() > w.imag();
  });
  std::vector<cplx> sorted(order.size());
  std::vector<std::size_t> remap(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    sorted[k] = out.values[order[k]];
    remap[order[k]] = k;
  }
  out.values = std::move(sorted);
  for (auto& i : out.value_of_point) i = remap[i];
  return out;
}

}  // namespace contourlab
