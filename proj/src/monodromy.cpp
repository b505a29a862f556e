#include "contourlab/monodromy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/SVD>

#include "contourlab/error.hpp"
#include "contourlab/parallel.hpp"

namespace contourlab {

namespace {

constexpr cplx kTwoPiI{0.0, 2.0 * std::numbers::pi};

// Sign of the intersection index (gamma . delta) that makes a counterclockwise
// turn around the critical value send gamma to gamma * delta.
constexpr double kOrientation = -1.0;

Point2 tangent(const FiberLoop& loop, std::size_t i) {
  const auto& p = loop.points();
  const std::size_t n = p.size();
  return p[(i + 1) % n] - p[(i + n - 1) % n];
}

double intersection_sign(Point2 tg, Point2 td) {
  return (std::conj(tg.x) * td.x + std::conj(tg.y) * td.y).imag();
}

}  // namespace

Frame build_frame(const Fibration& fib, const FrameSetup& s) {
  const FiberControls& c = s.controls;
  Frame f;
  f.h0 = s.h0;
  f.gamma = trace_real_oval(fib, s.h0, s.base_hint_x, s.base_hint_y, s.n_points, c);

  const cplx dir = (cplx(s.h0) - s.crit_value) / std::abs(cplx(s.h0) - s.crit_value);
  const cplx h_start = s.crit_value + s.start_offset * dir;
  FiberLoop d = vanishing_cycle(fib, s.crit, s.crit_value, h_start, 64, c);
  BasePath path = BasePath::segment(h_start, s.h0, c.base_step);
  f.delta_path = path.samples;
  d = transport_loop(fib, d, path, c);

  ClosestPair cp = closest_samples(f.gamma, d);
  if (cp.i == 0)
    throw ContourError(ErrorCode::BasePointMismatch, "gamma meets delta at its own base point");
  const double sign = intersection_sign(tangent(f.gamma, cp.i), tangent(d, cp.j));
  d = rotate_loop(d, cp.j);
  if (sign * kOrientation < 0.0) d = invert_loop(d);
  f.delta_free = d;
  f.meeting_distance = cp.dist;

  // Back along gamma from its base to the meeting sample, then a short chord.
  const auto& g = f.gamma.points();
  f.connector.push_back(g[0]);
  for (std::size_t i = g.size() - 1; i >= cp.i; --i) f.connector.push_back(g[i]);
  std::vector<Point2> chord = fiber_chord(fib, g[cp.i], d.base(), s.h0, c);
  f.connector.insert(f.connector.end(), chord.begin() + 1, chord.end());

  f.delta = rebase_loop(fib, d, f.connector, c);
  FiberLoop gd = compose_loops(f.gamma, f.delta, c);
  FiberLoop gdg = compose_loops(gd, invert_loop(f.gamma), c);
  f.commutator = compose_loops(gdg, invert_loop(f.delta), c);
  return f;
}

BasePath monodromy_path(cplx h0, cplx center, double radius, int turns, double step) {
  if (radius <= 0.0) throw ContourError(ErrorCode::InvalidArgument, "radius must be positive");
  const double d = std::abs(h0 - center);
  if (d == 0.0) throw ContourError(ErrorCode::InvalidArgument, "h0 sits on the critical value");
  cplx start = center + radius * (h0 - center) / d;
  if (std::abs(start - h0) <= 1e-12 * std::max(1.0, std::abs(h0))) start = h0;
  BasePath circle = BasePath::circle(center, start, turns, step);
  if (start == h0) return circle;
  BasePath in = BasePath::segment(h0, start, step);
  return in.then(circle).then(in.reversed());
}

MonodromyImage monodromy_image(const Fibration& fib, const FiberLoop& loop, cplx center, double radius,
                               int turns, const FiberControls& c, double rebase_radius) {
  BasePath path = monodromy_path(loop.h(), center, radius, turns, c.base_step);
  FiberLoop moved = transport_loop(fib, loop, path, c);
  MonodromyImage out;
  out.base_drift = distance(moved.base(), loop.base());
  if (out.base_drift > rebase_radius) {
    std::size_t best = 0;
    double dist = INFINITY;
    for (std::size_t i = 0; i < moved.size(); ++i) {
      double d = distance(moved.points()[i], loop.base());
      if (d < dist) {
        dist = d;
        best = i;
      }
    }
    moved = rotate_loop(moved, best);
    out.rotated = true;
    if (dist > rebase_radius)
      throw ContourError(ErrorCode::BasePointMismatch, "transported loop no longer passes near the base point");
  }
  if (distance(moved.base(), loop.base()) > 0.0) {
    std::vector<Point2> connector = fiber_chord(fib, loop.base(), moved.base(), moved.h(), c);
    connector.front() = loop.base();
    moved = rebase_loop(fib, moved, connector, c);
  }
  out.loop = std::move(moved);
  return out;
}

MonodromyReport monodromy_transport(const Fibration& fib, const FiberLoop& loop, cplx crit_value, double radius,
                                    const Coefficients& coeffs, const FiberLoop* delta,
                                    const FiberControls& c) {
  MonodromyReport r;
  r.crit_value = crit_value;
  r.radius = radius;
  r.loop_before = loop;
  MonodromyImage img = monodromy_image(fib, loop, crit_value, radius, 1, c);
  r.loop_after = img.loop;
  r.base_drift = img.base_drift;
  r.rotated = img.rotated;
  r.rho_before = rho(fib, loop, coeffs);
  r.rho_after = rho(fib, r.loop_after, coeffs);
  r.residuals["unchanged"] = distance(r.rho_after, r.rho_before);
  if (delta) r.residuals["picard_lefschetz"] = distance(r.rho_after, r.rho_before * rho(fib, *delta, coeffs));
  return r;
}

FrameTurn turn_frame(const Fibration& fib, const Frame& frame, cplx crit_value, double radius,
                     const Coefficients& coeffs, const FiberControls& c) {
  FrameTurn t;
  t.radius = radius;
  const FiberLoop* loops[3] = {&frame.gamma, &frame.delta, &frame.commutator};
  TriMatrix* before[3] = {&t.gamma_before, &t.delta_before, &t.comm_before};
  TriMatrix* after[3] = {&t.gamma_after, &t.delta_after, &t.comm_after};
  const char* names[3] = {"gamma", "delta", "commutator"};
  std::vector<MonodromyImage> images(3);
  parallel_for(3, [&](std::size_t k) { images[k] = monodromy_image(fib, *loops[k], crit_value, radius, 1, c); });
  for (int k = 0; k < 3; ++k) {
    *before[k] = rho(fib, *loops[k], coeffs);
    *after[k] = rho(fib, images[k].loop, coeffs);
    t.drift[names[k]] = images[k].base_drift;
  }
  t.psi_gamma_after = loop_functionals(fib, images[0].loop, coeffs).psi;
  return t;
}

MonellReport monell_residual(const FrameTurn& t, double tol) {
  MonellReport r;
  const cplx X = std::exp(-t.gamma_before.I), Y = std::exp(-t.delta_before.I);
  const cplx pg = psi(t.gamma_before, tol), pd = psi(t.delta_before, tol);
  if (resonance_gap(t.gamma_before.I + t.delta_before.I) <= tol)
    throw ContourError(ErrorCode::Resonance, "gamma * delta is resonant");
  const cplx tail = Y / ((Y - 1.0) * (Y - 1.0)) * (1.0 / (X * Y - 1.0) - 1.0 / (X - 1.0)) * psi_tilde(t.comm_before);
  r.lhs = t.psi_gamma_after;
  r.rhs = pg + pd - tail;
  r.residual = std::abs(r.lhs - r.rhs);
  r.scale = std::max({std::abs(r.lhs), std::abs(pg), std::abs(pd), std::abs(tail)});
  r.mid_identity = std::abs(mid_identity_residual(t.gamma_before, t.delta_before, tol).residual);
  return r;
}

cplx xi_value(const TriMatrix& g, const TriMatrix& d, const TriMatrix& comm, cplx log_term, double tol) {
  const cplx X = std::exp(-g.I), Y = std::exp(-d.I);
  return psi(g, tol) - psi(d, tol) * log_term / kTwoPiI +
         Y * psi_tilde(comm) / ((Y - 1.0) * (Y - 1.0) * (X - 1.0));
}

XiReport xi_invariance(const FrameTurn& t, cplx h0, cplx crit_value, double tol) {
  XiReport r;
  const cplx lg = std::log(h0 - crit_value);
  r.before = xi_value(t.gamma_before, t.delta_before, t.comm_before, lg, tol);
  r.after = xi_value(t.gamma_after, t.delta_after, t.comm_after, lg + kTwoPiI, tol);
  r.difference = std::abs(r.after - r.before);
  return r;
}

std::vector<cplx> xi_profile(const Fibration& fib, const FrameSetup& setup, const std::vector<double>& hs,
                             const Coefficients& coeffs) {
  std::vector<cplx> out(hs.size());
  parallel_for(hs.size(), [&](std::size_t k) {
    FrameSetup s = setup;
    s.h0 = hs[k];
    Frame f = build_frame(fib, s);
    out[k] = xi_value(rho(fib, f.gamma, coeffs), rho(fib, f.delta, coeffs), rho(fib, f.commutator, coeffs),
                      std::log(cplx(hs[k]) - setup.crit_value));
  });
  return out;
}

RankReport rank_sequence(const std::vector<std::vector<cplx>>& rows, double threshold) {
  RankReport r;
  r.rows = rows;
  const double thresholds[3] = {1e-6, threshold, 1e-10};
  for (double thr : thresholds) {
    std::vector<int> seq;
    for (std::size_t j = 0; j < rows.size(); ++j) {
      Eigen::MatrixXcd m(j + 1, rows[0].size());
      for (std::size_t i = 0; i <= j; ++i)
        for (std::size_t k = 0; k < rows[i].size(); ++k) m(i, k) = rows[i][k];
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
      const auto& sv = svd.singularValues();
      int rank = 0;
      for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > thr * sv(0)) ++rank;
      seq.push_back(rank);
    }
    if (thr == threshold)
      r.ranks = seq;
    else
      r.sensitivity[thr] = seq;
  }
  r.strictly_increasing = !r.ranks.empty();
  for (std::size_t j = 1; j < r.ranks.size(); ++j)
    if (r.ranks[j] <= r.ranks[j - 1]) r.strictly_increasing = false;
  return r;
}

namespace {

struct FramePair {
  TriMatrix gamma, delta;
};

std::vector<FramePair> frame_pairs(const Fibration& fib, const FrameSetup& setup, const std::vector<double>& hs,
                                   const Coefficients& coeffs) {
  std::vector<FramePair> out(hs.size());
  parallel_for(hs.size(), [&](std::size_t k) {
    FrameSetup s = setup;
    s.h0 = hs[k];
    Frame f = build_frame(fib, s);
    out[k] = {rho(fib, f.gamma, coeffs), rho(fib, f.delta, coeffs)};
  });
  return out;
}

}  // namespace

RankReport rank_growth(const Fibration& fib, const FrameSetup& setup, const std::vector<double>& hs, int max_iter,
                       const Coefficients& coeffs, double threshold) {
  std::vector<FramePair> pairs = frame_pairs(fib, setup, hs, coeffs);
  std::vector<std::vector<cplx>> rows(max_iter + 1, std::vector<cplx>(hs.size()));
  for (std::size_t k = 0; k < hs.size(); ++k) {
    TriMatrix w = pairs[k].gamma;
    for (int i = 0; i <= max_iter; ++i) {
      if (!in_S(w)) throw ContourError(ErrorCode::Resonance, "resonant element on the monodromy orbit");
      rows[i][k] = psi(w);
      w = w * pairs[k].delta;
    }
  }
  return rank_sequence(rows, threshold);
}

RankReport rank_growth_reduced(const Fibration& fib, const FrameSetup& setup, const std::vector<double>& hs,
                               int max_iter, const Coefficients& coeffs, double threshold) {
  std::vector<FramePair> pairs = frame_pairs(fib, setup, hs, coeffs);
  std::vector<std::vector<cplx>> rows(max_iter + 1, std::vector<cplx>(hs.size()));
  for (std::size_t k = 0; k < hs.size(); ++k) {
    const cplx X = std::exp(-pairs[k].gamma.I), Y = std::exp(-pairs[k].delta.I);
    std::vector<cplx> u(2 * max_iter + 1);
    for (std::size_t m = 0; m < u.size(); ++m) {
      cplx den = X * std::pow(Y, static_cast<double>(m)) - 1.0;
      if (std::abs(den) <= 1e-8 * std::max(1.0, std::abs(den + 1.0)))
        throw ContourError(ErrorCode::Resonance, "resonant element on the monodromy orbit");
      u[m] = 1.0 / den;
    }
    // (Mon - Id)^{2j} expands with signed binomial weights on Mon^m u.
    for (int j = 0; j <= max_iter; ++j) {
      cplx acc = 0.0;
      double binom = 1.0;
      for (int m = 0; m <= 2 * j; ++m) {
        acc += (m % 2 ? -binom : binom) * u[m];
        binom = binom * (2 * j - m) / (m + 1);
      }
      rows[j][k] = acc;
    }
  }
  return rank_sequence(rows, threshold);
}

}  // namespace contourlab
