#pragma once

#include <cstddef>
#include <vector>

#include "contourlab/poly.hpp"

namespace contourlab {

/// Step-control knobs shared by every loop construction and transport.
struct FiberControls {
  double max_step = 1e-2;       ///< max distance between consecutive loop samples
  double base_step = 1e-2;      ///< max |dh| per transport step
  double min_base_step = 1e-7;  ///< transport gives up below this step
  double min_grad = 1e-6;       ///< loops must keep |grad H| above this
  double tol_fiber = 1e-10;     ///< |H - h| allowed at every sample
  double tol_base = 1e-9;       ///< base points coincide within this
  int max_newton = 25;
};

/// Closed discretized loop on the level curve E_h. Sample 0 is the base
/// point; the segment from the last sample back to sample 0 is implicit.
class FiberLoop {
 public:
  FiberLoop() = default;
  FiberLoop(cplx h, std::vector<Point2> points, double tol_fiber = 1e-10);

  cplx h() const noexcept { return h_; }
  const std::vector<Point2>& points() const noexcept { return points_; }
  Point2 base() const { return points_.front(); }
  std::size_t size() const noexcept { return points_.size(); }
  double tol_fiber() const noexcept { return tol_fiber_; }

  double max_residual(const Fibration& fib) const;
  double max_spacing() const;
  double min_gradient(const Fibration& fib) const;

 private:
  cplx h_ = 0.0;
  std::vector<Point2> points_;
  double tol_fiber_ = 1e-10;
};

/// Path in the base C \ Delta.
struct BasePath {
  std::vector<cplx> samples;
  bool closed = false;

  /// Straight segment a -> b sampled at spacing <= step.
  static BasePath segment(cplx a, cplx b, double step);
  /// Circle |h - center| = radius starting at `start` (must lie on it),
  /// traversed `turns` times; negative turns run clockwise.
  static BasePath circle(cplx center, cplx start, int turns, double step);
  /// Concatenation; the first sample of `next` must equal our last.
  BasePath then(const BasePath& next) const;
  BasePath reversed() const;
  double min_clearance(const std::vector<cplx>& critical_values) const;
};

/// Newton projection of `pt` onto {H = h}, stepping along the conjugate
/// gradient (minimum-norm correction, transversal to the fiber).
Point2 project_to_fiber(const Fibration& fib, Point2 pt, cplx h, double tol = 1e-10,
                        int max_iter = 25);

/// Real oval of a real H through the real point nearest to `hint`,
/// oriented along the Hamiltonian flow (H_y, -H_x). `n_points` is a lower
/// bound: the loop is refined further whenever samples exceed max_step.
FiberLoop trace_real_oval(const Fibration& fib, double h, double hint_x, double hint_y,
                          int n_points, const FiberControls& controls = {});

/// Loop on E_h vanishing at the Morse point `crit` as h -> crit_value,
/// built from the quadratic model of H and projected onto E_h.
FiberLoop vanishing_cycle(const Fibration& fib, Point2 crit, cplx crit_value, cplx h,
                          int n_points, const FiberControls& controls = {});

/// Carries the loop over the base path, re-projecting every sample at each
/// base step with automatic step halving and adaptive resampling.
FiberLoop transport_loop(const Fibration& fib, const FiberLoop& loop, const BasePath& path,
                         const FiberControls& controls = {});

FiberLoop compose_loops(const FiberLoop& first, const FiberLoop& second,
                        const FiberControls& controls = {});
FiberLoop invert_loop(const FiberLoop& loop);

/// connector * loop * connector^-1, where `connector` runs on E_h from the
/// new base point to loop.base().
FiberLoop rebase_loop(const Fibration& fib, const FiberLoop& loop,
                      const std::vector<Point2>& connector, const FiberControls& controls = {});

/// Starts the loop at sample k. This is a change of base point along the
/// loop itself, i.e. conjugation by the arc from sample 0 to sample k.
FiberLoop rotate_loop(const FiberLoop& loop, std::size_t k);

/// Projected straight chord a -> b on E_h with spacing <= max_step.
std::vector<Point2> fiber_chord(const Fibration& fib, Point2 a, Point2 b, cplx h,
                                const FiberControls& controls = {});

/// Inserts projected midpoints until every segment is at most max_step.
FiberLoop refine_loop(const Fibration& fib, const FiberLoop& loop, double max_step,
                      const FiberControls& controls = {});

struct ClosestPair {
  std::size_t i = 0;
  std::size_t j = 0;
  double dist = 0.0;
};
ClosestPair closest_samples(const FiberLoop& a, const FiberLoop& b);

}  // namespace contourlab
