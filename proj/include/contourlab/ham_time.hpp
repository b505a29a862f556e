#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "contourlab/fiber.hpp"
#include "contourlab/poly.hpp"

namespace contourlab {

/// Quadrature node on a fiber-projected segment: the point, the derivative
/// of the projected path with respect to the segment parameter u in [0, 1],
/// and tau = dt/du for the Hamiltonian time.
struct QuadNode {
  Point2 q;
  Point2 dq;
  cplx tau;
};

/// Per-segment 4-point Gauss-Legendre nodes for a loop. Each segment is the
/// chord between consecutive samples projected onto the fiber along a fixed
/// direction, so the derivative of the projected path is exact.
class LoopQuadrature {
 public:
  static constexpr int kNodes = 4;
  using Nodes = std::array<QuadNode, kNodes>;

  LoopQuadrature(const Fibration& fib, const FiberLoop& loop, double min_grad = 1e-6);

  const Fibration& fibration() const noexcept { return fib_; }
  const FiberLoop& loop() const noexcept { return loop_; }
  std::size_t segment_count() const noexcept { return nodes_.size(); }
  const Nodes& segment(std::size_t k) const { return nodes_[k]; }

  /// Node of segment k at parameter u (projection computed on demand).
  QuadNode node_at(std::size_t k, double u) const;

  /// Gauss-Legendre abscissae and weights on [0, 1].
  static const std::array<double, kNodes>& abscissae();
  static const std::array<double, kNodes>& weights();
  /// partial[j][m] integrates the interpolant through the nodes over [0, u_j].
  static const std::array<std::array<double, kNodes>, kNodes>& partial();

 private:
  Fibration fib_;
  FiberLoop loop_;
  std::vector<Point2> directions_;
  std::vector<Nodes> nodes_;
  double min_grad_;
};

/// Cumulative Hamiltonian time, exponent integral a(t) = int_0^t A and
/// B(t) = int_0^t b e^{-a} along the loop, at segment starts and nodes.
class CumulativeProfile {
 public:
  struct Values {
    cplx t;
    cplx a;
    cplx B;
  };

  CumulativeProfile(const LoopQuadrature& quad, const Poly& A, const Poly& b);

  cplx period() const noexcept { return start_.back().t; }
  cplx exponent() const noexcept { return start_.back().a; }
  cplx b_total() const noexcept { return start_.back().B; }

  /// Values at the start of segment k; index segment_count() is the loop end.
  const Values& start(std::size_t k) const { return start_[k]; }
  const std::array<Values, LoopQuadrature::kNodes>& nodes(std::size_t k) const { return nodes_[k]; }
  /// Evaluated A and b at the nodes of segment k.
  const std::array<cplx, LoopQuadrature::kNodes>& A_at(std::size_t k) const { return a_vals_[k]; }
  const std::array<cplx, LoopQuadrature::kNodes>& b_at(std::size_t k) const { return b_vals_[k]; }

  /// Values and node at an interior parameter u of segment k, integrated
  /// with nested Gauss-Legendre rules on [0, u].
  Values at(std::size_t k, double u, QuadNode* node = nullptr) const;

  const LoopQuadrature& quadrature() const noexcept { return *quad_; }

 private:
  const LoopQuadrature* quad_;
  Poly A_, b_;
  std::vector<Values> start_;
  std::vector<std::array<Values, LoopQuadrature::kNodes>> nodes_;
  std::vector<std::array<cplx, LoopQuadrature::kNodes>> a_vals_, b_vals_;
};

struct TimeProfile {
  std::vector<cplx> t_cum;  ///< t at samples 0..n, t_cum[n] = T
  std::vector<cplx> a_cum;  ///< int_0^t A dt at samples 0..n, a_cum[n] = I
};

TimeProfile time_profile(const Fibration& fib, const FiberLoop& loop, const Poly& A);

/// Coefficient data (A, b, p) of the generalized Abelian integral.
struct Coefficients {
  Poly A;
  Poly b;
  Poly p;
};

/// T, I and the entries theta+, theta-, phi of the triangular representation.
/// Defined for every loop, resonant or not.
struct LoopIntegrals {
  cplx T;
  cplx I;
  cplx theta_plus;
  cplx theta_minus;
  cplx phi;
};

struct LoopFunctionals {
  cplx T;
  cplx I;
  cplx theta_plus;
  cplx theta_minus;
  cplx phi;
  cplx psi;
  /// |e^{-I}| / |e^{-I} - 1|: amplification of the psi denominator.
  double psi_condition = 0.0;
  bool near_resonant = false;
};

LoopIntegrals loop_integrals(const LoopQuadrature& quad, const Coefficients& coeffs);
LoopIntegrals loop_integrals(const Fibration& fib, const FiberLoop& loop, const Coefficients& coeffs);

/// Relative measure |e^{I} - 1| / max(1, |e^{I}|) used for every resonance test.
double resonance_gap(cplx I);

/// All functionals; Psi from the factorized form. Throws Resonance when
/// resonance_gap(I) <= tol_resonance.
LoopFunctionals loop_functionals(const LoopQuadrature& quad, const Coefficients& coeffs,
                                 double tol_resonance = 1e-8);
LoopFunctionals loop_functionals(const Fibration& fib, const FiberLoop& loop, const Coefficients& coeffs,
                                 double tol_resonance = 1e-8);

/// Psi by the literal double integral over [t, t + T], O(n^2) in the samples.
cplx psi_direct(const LoopQuadrature& quad, const Coefficients& coeffs, double tol_resonance = 1e-8);
cplx psi_direct(const Fibration& fib, const FiberLoop& loop, const Coefficients& coeffs,
                double tol_resonance = 1e-8);

/// Closed integral of Q dx - P dy over the loop (loop orientation).
cplx abelian_integral(const LoopQuadrature& quad, const Poly& Q, const Poly& P);
cplx abelian_integral(const Fibration& fib, const FiberLoop& loop, const Poly& Q, const Poly& P);

}  // namespace contourlab
