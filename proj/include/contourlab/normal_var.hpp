#pragma once

#include <memory>
#include <vector>

#include "contourlab/fiber.hpp"
#include "contourlab/ham_time.hpp"
#include "contourlab/melnikov.hpp"
#include "contourlab/poly.hpp"

namespace contourlab {

/// x' = H_y + z R + eps P,  y' = -H_x + z S + eps Q,  z' = A z + eps b.
struct System3D {
  Poly H, R, S, A, b, P, Q;
  double eps = 0.0;
  double hyp_margin = 0.1;  ///< required |oint A dt| on the working oval
};

/// Periodic solution g of g' = A g + b along a loop, in Hamiltonian time.
class NormalSolution {
 public:
  /// Throws Resonance when |I| < hyp_margin or e^I = 1 within tol_resonance.
  NormalSolution(const Fibration& fib, const FiberLoop& loop, const Poly& A, const Poly& b,
                 double hyp_margin = 0.1, double tol_resonance = 1e-8);

  cplx period() const { return profile_->period(); }
  cplx exponent() const { return profile_->exponent(); }
  /// g at quadrature node j of segment k.
  cplx at_node(std::size_t k, int j) const;
  /// g at a real Hamiltonian time (real loops only); wraps modulo T.
  cplx at_time(double t, Point2* point = nullptr) const;
  /// max |g| over the quadrature nodes.
  double max_abs() const { return max_abs_; }
  const LoopQuadrature& quadrature() const { return *quad_; }
  const CumulativeProfile& profile() const { return *profile_; }

 private:
  cplx g_from(const CumulativeProfile::Values& v) const;
  std::shared_ptr<LoopQuadrature> quad_;
  std::shared_ptr<CumulativeProfile> profile_;
  cplx inv_denom_;  // 1 / (e^{-I} - 1)
  double max_abs_ = 0.0;
};

/// g(t_eval) on a real loop; the real part (the imaginary part is round-off).
double normal_periodic_solution(const System3D& sys, const FiberLoop& loop, double t_eval);

struct PontryaginMelnikov {
  cplx direct;    ///< oint (Q + g S) dx - (P + g R) dy
  cplx abelian;   ///< oint Q dx - P dy
  cplx psi;       ///< psi(rho) with p = S H_y + R H_x
  cplx decomposed() const { return abelian + psi; }
  double scale = 0.0;  ///< oint |Q dx - P dy| + oint |g p dt|, the natural size of J
  /// |direct - decomposed| / max(|direct|, scale).
  double route_gap() const;
};

PontryaginMelnikov pontryagin_melnikov(const System3D& sys, const FiberLoop& loop);

struct ProfileSample {
  double t, x, y, z, H;
};

struct Simulation3D {
  double h = 0.0;
  double eps = 0.0;
  double delta_h = 0.0;
  double period = 0.0;
  double tracking = 0.0;  ///< max |z - eps g| along the orbit
  std::vector<ProfileSample> profile;
};

/// Integrates the 3D flow from (x0, y0, eps g(x0, y0)) on the section until
/// the first return. Throws NoReturn, NormalEscape (|z| > 10 eps max|g|).
Simulation3D simulate_3d_return(const System3D& sys, double h, const Section& section,
                                const FlowControls& controls = {}, int n_points = 400);

}  // namespace contourlab
