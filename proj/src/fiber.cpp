#include "contourlab/fiber.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "contourlab/error.hpp"

namespace contourlab {

namespace {

double scaled_tol(double tol, cplx h) { return tol * std::max(1.0, std::abs(h)); }

double grad_norm(const Fibration& fib, Point2 p) { return norm(fib.gradient(p)); }

/// Drops samples whose neighbours are already close; keeps sample 0.
std::vector<Point2> coarsen(const std::vector<Point2>& pts, double max_step) {
  if (pts.size() < 4) return pts;
  std::vector<Point2> out;
  out.reserve(pts.size());
  out.push_back(pts[0]);
  const std::size_t n = pts.size();
  for (std::size_t i = 1; i < n; ++i) {
    const Point2& next = pts[(i + 1) % n];
    const std::size_t removed = i - out.size();
    if (n - removed - 1 >= 3 && distance(out.back(), next) <= 0.5 * max_step) continue;
    out.push_back(pts[i]);
  }
  return out;
}

std::vector<Point2> refine_points(const Fibration& fib, const std::vector<Point2>& pts, cplx h,
                                  double max_step, const FiberControls& c, bool closed) {
  std::vector<Point2> out;
  out.reserve(pts.size());
  const std::size_t n = pts.size();
  const std::size_t segs = closed ? n : n - 1;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(pts[i]);
    if (i >= segs) continue;
    const Point2& a = pts[i];
    const Point2& b = pts[(i + 1) % n];
    double d = distance(a, b);
    if (d <= max_step) continue;
    int k = static_cast<int>(std::ceil(d / max_step));
    for (int m = 1; m < k; ++m) {
      double u = double(m) / k;
      out.push_back(project_to_fiber(fib, a + u * (b - a), h, c.tol_fiber, c.max_newton));
    }
  }
  return out;
}

void check_gradient(const Fibration& fib, const std::vector<Point2>& pts, double min_grad) {
  for (const auto& p : pts)
    if (grad_norm(fib, p) < min_grad)
      throw ContourError(ErrorCode::HitCritical, "loop sample within min_grad of a critical point");
}

}  // namespace

FiberLoop::FiberLoop(cplx h, std::vector<Point2> points, double tol_fiber)
    : h_(h), points_(std::move(points)), tol_fiber_(tol_fiber) {
  if (points_.empty()) throw ContourError(ErrorCode::InvalidArgument, "empty loop");
}

double FiberLoop::max_residual(const Fibration& fib) const {
  double r = 0.0;
  for (const auto& p : points_) r = std::max(r, std::abs(fib.value(p) - h_));
  return r;
}

double FiberLoop::max_spacing() const {
  double d = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i)
    d = std::max(d, distance(points_[i], points_[(i + 1) % points_.size()]));
  return d;
}

double FiberLoop::min_gradient(const Fibration& fib) const {
  double g = INFINITY;
  for (const auto& p : points_) g = std::min(g, grad_norm(fib, p));
  return g;
}

BasePath BasePath::segment(cplx a, cplx b, double step) {
  BasePath path;
  int n = std::max(1, static_cast<int>(std::ceil(std::abs(b - a) / step)));
  for (int k = 0; k <= n; ++k) path.samples.push_back(k == n ? b : a + (b - a) * (double(k) / n));
  return path;
}

BasePath BasePath::circle(cplx center, cplx start, int turns, double step) {
  if (turns == 0) throw ContourError(ErrorCode::InvalidArgument, "circle with zero turns");
  BasePath path;
  path.closed = true;
  const double r = std::abs(start - center);
  if (r == 0.0) throw ContourError(ErrorCode::InvalidArgument, "circle of zero radius");
  const double theta0 = std::arg(start - center);
  const double sweep = 2.0 * std::numbers::pi * turns;
  int n = std::max(8, static_cast<int>(std::ceil(std::abs(sweep) * r / step)));
  for (int k = 0; k <= n; ++k)
    path.samples.push_back(k == n ? start : center + std::polar(r, theta0 + sweep * k / n));
  return path;
}

BasePath BasePath::then(const BasePath& next) const {
  if (samples.empty()) return next;
  if (next.samples.empty()) return *this;
  if (std::abs(samples.back() - next.samples.front()) > 1e-12)
    throw ContourError(ErrorCode::InvalidArgument, "base paths do not join");
  BasePath out = *this;
  out.samples.insert(out.samples.end(), next.samples.begin() + 1, next.samples.end());
  out.closed = std::abs(out.samples.front() - out.samples.back()) <= 1e-12;
  return out;
}

BasePath BasePath::reversed() const {
  BasePath out = *this;
  std::reverse(out.samples.begin(), out.samples.end());
  return out;
}

double BasePath::min_clearance(const std::vector<cplx>& critical_values) const {
  double d = INFINITY;
  for (const auto& h : samples)
    for (const auto& c : critical_values) d = std::min(d, std::abs(h - c));
  return d;
}

Point2 project_to_fiber(const Fibration& fib, Point2 pt, cplx h, double tol, int max_iter) {
  const double t = scaled_tol(tol, h);
  for (int it = 0; it < max_iter; ++it) {
    cplx r = fib.value(pt) - h;
    Point2 g = fib.gradient(pt);
    double gg = std::norm(g.x) + std::norm(g.y);
    if (gg == 0.0) throw ContourError(ErrorCode::ProjectionDiverged, "gradient vanished");
    Point2 step{r * std::conj(g.x) / gg, r * std::conj(g.y) / gg};
    pt = pt - step;
    // One polishing step past tolerance pushes the residual to round-off.
    if (std::abs(r) <= t) return pt;
  }
  throw ContourError(ErrorCode::ProjectionDiverged,
                     "Newton projection did not converge in " + std::to_string(max_iter) + " iterations");
}

FiberLoop trace_real_oval(const Fibration& fib, double h, double hint_x, double hint_y, int n_points,
                          const FiberControls& c) {
  if (!fib.is_real()) throw ContourError(ErrorCode::InvalidArgument, "trace_real_oval needs a real H");
  if (n_points < 3) throw ContourError(ErrorCode::InvalidArgument, "n_points must be >= 3");
  Point2 start = project_to_fiber(fib, {hint_x, hint_y}, h, c.tol_fiber, c.max_newton);
  double x0 = start.x.real(), y0 = start.y.real();

  auto field = [&](double x, double y, double& vx, double& vy) {
    Point2 g = fib.gradient({x, y});
    double gx = g.x.real(), gy = g.y.real();
    double n = std::hypot(gx, gy);
    if (n < c.min_grad) throw ContourError(ErrorCode::HitCritical, "oval runs into a critical point");
    vx = gy / n;
    vy = -gx / n;
  };
  auto snap = [&](double& x, double& y) {
    Point2 p = project_to_fiber(fib, {x, y}, h, c.tol_fiber, c.max_newton);
    x = p.x.real();
    y = p.y.real();
  };

  const double ds = c.max_step / 10.0;
  const double max_length = 1e3;
  double tx, ty;
  field(x0, y0, tx, ty);
  std::vector<std::array<double, 2>> dense{{x0, y0}};
  double x = x0, y = y0, travel = 0.0, prev_f = 0.0;
  bool closed = false;
  while (travel < max_length) {
    double k1x, k1y, k2x, k2y, k3x, k3y, k4x, k4y;
    field(x, y, k1x, k1y);
    field(x + 0.5 * ds * k1x, y + 0.5 * ds * k1y, k2x, k2y);
    field(x + 0.5 * ds * k2x, y + 0.5 * ds * k2y, k3x, k3y);
    field(x + ds * k3x, y + ds * k3y, k4x, k4y);
    double xn = x + ds / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
    double yn = y + ds / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y);
    snap(xn, yn);
    travel += ds;
    double f = (xn - x0) * tx + (yn - y0) * ty;
    if (travel > 4 * ds && prev_f < 0.0 && f >= 0.0 && std::hypot(xn - x0, yn - y0) < 4 * ds) {
      closed = true;
      break;
    }
    dense.push_back({xn, yn});
    x = xn;
    y = yn;
    prev_f = f;
  }
  if (!closed) throw ContourError(ErrorCode::NotClosed, "flow did not return within max arclength");

  const std::size_t m = dense.size();
  std::vector<double> s(m + 1, 0.0);
  for (std::size_t i = 1; i <= m; ++i) {
    const auto& a = dense[i - 1];
    const auto& b = dense[i % m];
    s[i] = s[i - 1] + std::hypot(b[0] - a[0], b[1] - a[1]);
  }
  const double length = s[m];
  std::vector<Point2> pts;
  pts.reserve(n_points);
  pts.push_back(start);
  std::size_t seg = 0;
  for (int k = 1; k < n_points; ++k) {
    double target = length * k / n_points;
    while (seg + 1 < m && s[seg + 1] < target) ++seg;
    const auto& a = dense[seg];
    const auto& b = dense[(seg + 1) % m];
    double span = s[seg + 1] - s[seg];
    double u = span > 0 ? (target - s[seg]) / span : 0.0;
    pts.push_back(project_to_fiber(fib, {a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1])}, h,
                                   c.tol_fiber, c.max_newton));
  }
  pts = refine_points(fib, pts, h, c.max_step, c, true);
  check_gradient(fib, pts, c.min_grad);
  return FiberLoop(h, std::move(pts), c.tol_fiber);
}

FiberLoop vanishing_cycle(const Fibration& fib, Point2 crit, cplx crit_value, cplx h, int n_points,
                          const FiberControls& c) {
  if (n_points < 3) throw ContourError(ErrorCode::InvalidArgument, "n_points must be >= 3");
  cplx hxx, hxy, hyy;
  fib.hessian(crit, hxx, hxy, hyy);
  const double scale = std::abs(hxx) + std::abs(hxy) + std::abs(hyy);
  if (scale == 0.0 || std::abs(hxx * hyy - hxy * hxy) <= 1e-10 * scale * scale)
    throw ContourError(ErrorCode::DegenerateHessian, "critical point is not Morse");

  // Basis orthonormal for the complex bilinear form v^T Hess w.
  auto form = [&](Point2 u, Point2 w) { return u.x * (hxx * w.x + hxy * w.y) + u.y * (hxy * w.x + hyy * w.y); };
  constexpr double r2 = std::numbers::sqrt2 / 2.0;
  const Point2 candidates[3] = {{1.0, 0.0}, {0.0, 1.0}, {r2, r2}};
  const Point2 partners[3] = {{0.0, 1.0}, {1.0, 0.0}, {r2, -r2}};
  int pick = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(form(candidates[i], candidates[i])) > std::abs(form(candidates[pick], candidates[pick])))
      pick = i;
  Point2 e1 = (1.0 / std::sqrt(form(candidates[pick], candidates[pick]))) * candidates[pick];
  Point2 w = partners[pick];
  Point2 e2 = w - form(e1, w) * e1;
  e2 = (1.0 / std::sqrt(form(e2, e2))) * e2;

  const cplx s = std::sqrt(2.0 * (h - crit_value));
  const double radius = std::abs(s);
  std::vector<Point2> pts;
  pts.reserve(n_points);
  for (int k = 0; k < n_points; ++k) {
    double xi = 2.0 * std::numbers::pi * k / n_points;
    Point2 model = crit + s * (std::cos(xi) * e1 + std::sin(xi) * e2);
    Point2 p = project_to_fiber(fib, model, h, c.tol_fiber, c.max_newton);
    if (distance(p, model) > radius)
      throw ContourError(ErrorCode::ProjectionDiverged, "Morse model too coarse: radius too large");
    pts.push_back(p);
  }
  pts = refine_points(fib, pts, h, c.max_step, c, true);
  check_gradient(fib, pts, c.min_grad);
  return FiberLoop(h, std::move(pts), c.tol_fiber);
}

FiberLoop transport_loop(const Fibration& fib, const FiberLoop& loop, const BasePath& path,
                         const FiberControls& c) {
  if (path.samples.empty()) throw ContourError(ErrorCode::InvalidArgument, "empty base path");
  if (std::abs(loop.h() - path.samples.front()) > scaled_tol(1e-12, loop.h()))
    throw ContourError(ErrorCode::InvalidArgument, "loop.h does not match the path start");
  std::vector<Point2> pts = loop.points();
  cplx h = path.samples.front();
  std::vector<Point2> trial(pts.size());

  auto attempt = [&](cplx target) -> bool {
    trial.resize(pts.size());
    try {
      for (std::size_t i = 0; i < pts.size(); ++i) {
        trial[i] = project_to_fiber(fib, pts[i], target, c.tol_fiber, c.max_newton);
        if (distance(trial[i], pts[i]) > c.max_step) return false;
      }
    } catch (const ContourError& e) {
      if (e.code() == ErrorCode::ProjectionDiverged) return false;
      throw;
    }
    return true;
  };

  for (std::size_t k = 1; k < path.samples.size(); ++k) {
    const cplx target = path.samples[k];
    while (h != target) {
      cplx remaining = target - h;
      double len = std::min(std::abs(remaining), c.base_step);
      bool done = false;
      while (!done) {
        bool final_step = len >= std::abs(remaining);
        cplx next = final_step ? target : h + remaining * (len / std::abs(remaining));
        if (attempt(next)) {
          h = next;
          pts.swap(trial);
          done = true;
        } else {
          len *= 0.5;
          if (len < c.min_base_step)
            throw ContourError(ErrorCode::ProjectionDiverged, "transport step fell below min_base_step");
        }
      }
      pts = coarsen(pts, c.max_step);
      pts = refine_points(fib, pts, h, c.max_step, c, true);
      check_gradient(fib, pts, c.min_grad);
    }
  }
  return FiberLoop(h, std::move(pts), c.tol_fiber);
}

FiberLoop compose_loops(const FiberLoop& first, const FiberLoop& second, const FiberControls& c) {
  if (std::abs(first.h() - second.h()) > c.tol_base)
    throw ContourError(ErrorCode::BasePointMismatch, "loops live on different fibers");
  if (distance(first.base(), second.base()) > c.tol_base)
    throw ContourError(ErrorCode::BasePointMismatch, "base points differ; rebase first");
  std::vector<Point2> pts = first.points();
  pts.push_back(first.base());
  pts.insert(pts.end(), second.points().begin() + 1, second.points().end());
  return FiberLoop(first.h(), std::move(pts), std::max(first.tol_fiber(), second.tol_fiber()));
}

FiberLoop invert_loop(const FiberLoop& loop) {
  std::vector<Point2> pts;
  pts.reserve(loop.size());
  pts.push_back(loop.base());
  for (std::size_t i = loop.size() - 1; i >= 1; --i) pts.push_back(loop.points()[i]);
  return FiberLoop(loop.h(), std::move(pts), loop.tol_fiber());
}

FiberLoop rebase_loop(const Fibration& fib, const FiberLoop& loop, const std::vector<Point2>& connector,
                      const FiberControls& c) {
  if (connector.empty()) throw ContourError(ErrorCode::ConnectorOffFiber, "empty connector");
  const double tol = scaled_tol(std::max(c.tol_fiber, loop.tol_fiber()), loop.h());
  for (const auto& p : connector)
    if (std::abs(fib.value(p) - loop.h()) > tol)
      throw ContourError(ErrorCode::ConnectorOffFiber, "connector sample off the fiber");
  if (distance(connector.back(), loop.base()) > c.tol_base)
    throw ContourError(ErrorCode::ConnectorOffFiber, "connector does not end at the loop's base point");
  std::vector<Point2> path(connector.begin(), connector.end() - 1);
  path.push_back(loop.base());
  path = refine_points(fib, path, loop.h(), c.max_step, c, false);
  const std::size_t m = path.size() - 1;  // path[m] == loop.base()
  if (m == 0) return loop;
  std::vector<Point2> pts(path.begin(), path.begin() + m);
  pts.insert(pts.end(), loop.points().begin(), loop.points().end());
  pts.push_back(loop.base());
  for (std::size_t i = m - 1; i >= 1; --i) pts.push_back(path[i]);
  return FiberLoop(loop.h(), std::move(pts), loop.tol_fiber());
}

FiberLoop rotate_loop(const FiberLoop& loop, std::size_t k) {
  const auto& p = loop.points();
  if (k >= p.size()) throw ContourError(ErrorCode::InvalidArgument, "rotate index out of range");
  std::vector<Point2> pts(p.begin() + k, p.end());
  pts.insert(pts.end(), p.begin(), p.begin() + k);
  return FiberLoop(loop.h(), std::move(pts), loop.tol_fiber());
}

std::vector<Point2> fiber_chord(const Fibration& fib, Point2 a, Point2 b, cplx h, const FiberControls& c) {
  return refine_points(fib, {a, b}, h, c.max_step, c, false);
}

FiberLoop refine_loop(const Fibration& fib, const FiberLoop& loop, double max_step, const FiberControls& c) {
  return FiberLoop(loop.h(), refine_points(fib, loop.points(), loop.h(), max_step, c, true), loop.tol_fiber());
}

ClosestPair closest_samples(const FiberLoop& a, const FiberLoop& b) {
  ClosestPair best{0, 0, INFINITY};
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) {
      double d = distance(a.points()[i], b.points()[j]);
      if (d < best.dist) best = {i, j, d};
    }
  return best;
}

}  // namespace contourlab
