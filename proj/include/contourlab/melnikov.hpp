#pragma once

#include <array>
#include <vector>

#include "contourlab/poly.hpp"

namespace contourlab {

/// Transversal line through `point` with normal (nx, ny). A return is a
/// crossing with n . (p - point) changing sign from negative to positive.
/// The starting point with H = h is found on the line by Newton from
/// `point`.
struct Section {
  double px = -2.0, py = 0.0;
  double nx = 0.0, ny = 1.0;
};

/// Integrator and event settings for the planar perturbed flow
///   x' = H_y + eps P,  y' = -H_x + eps Q.
struct FlowControls {
  double abs_tol = 1e-12;
  double rel_tol = 1e-11;
  double event_tol = 1e-12;  ///< position tolerance of the refined crossing
  double max_time = 1e3;
  double escape_radius = 1e3;
  double initial_dt = 1e-3;
};

struct ReturnSample {
  double h = 0.0;
  double eps = 0.0;
  double delta_h = 0.0;
  int crossings = 1;
  double time = 0.0;  ///< flight time to the last counted crossing
};

/// Point of the section line where H = h.
std::array<double, 2> section_start(const Poly& H, const Section& section, double h);

/// Integrates from the section point with H = h until the `crossings`-th
/// return and reports H(return) - h. Throws NoReturn or SectionTangency.
ReturnSample poincare_return(const Poly& H, const Poly& P, const Poly& Q, double h, double eps,
                             const Section& section, int crossings = 1, const FlowControls& controls = {});

/// Default geometric eps grid {1e-3, 5e-4, 2.5e-4, 1.25e-4, 6.25e-5}.
std::vector<double> default_eps_grid();

struct MelnikovExpansion {
  int k = 0;                                   ///< first nonvanishing order
  std::vector<double> h;
  std::vector<double> Mk;                      ///< order-k coefficient per h
  std::vector<std::vector<double>> coefficients;  ///< c_1..c_J per h
  std::vector<double> noise_floor;             ///< per order
  double residual = 0.0;                       ///< max relative least-squares residual
  std::vector<ReturnSample> samples;
};

/// Least-squares fit delta_h(h, eps) = sum_{j=1..J} c_j(h) eps^j with
/// J = min(3, grid size - 2). Order j is present when max_h |c_j| exceeds
/// 10 * max(abs_tol, rel_tol) / min(eps)^j. Throws AllOrdersVanish.
MelnikovExpansion melnikov_expansion(const Poly& H, const Poly& P, const Poly& Q, const std::vector<double>& h_grid,
                                     const std::vector<double>& eps_grid, const Section& section,
                                     const FlowControls& controls = {});

/// Chebyshev-Lobatto nodes on [a, b], ordered from b down to a.
std::vector<double> chebyshev_grid(double a, double b, int n);

struct LinearOde {
  int order = 0;
  int degree = 0;
  double a = -1.0, b = 1.0;  ///< interval of the grid
  /// coeffs[m][q]: coefficient of T_q(s) in a_m(h), s = (2h - a - b)/(b - a).
  std::vector<std::vector<cplx>> coeffs;
  double residual = 0.0;       ///< sigma_min / sigma_max of the collocation matrix
  double amplification = 0.0;  ///< 2-norm of the order-n differentiation matrix

  /// a_m at h.
  cplx coefficient(int m, double h) const;
  /// max_j |sum_m a_m f^{(m)}| / (sum_m max|a_m| max|f^{(m)}|) on the grid.
  double apply_residual(const std::vector<cplx>& samples) const;
};

/// Fits sum_{m=0..order} a_m(h) x^{(m)} = 0 with polynomial a_m of the
/// given degree, jointly for every sample set, on the Chebyshev-Lobatto
/// grid of [a, b] with samples[i].size() points. Throws IllConditioned
/// when the differentiation amplification exceeds 1e12, InvalidArgument
/// when the grid has fewer than 4 (order + 1) points.
LinearOde fit_linear_ode(const std::vector<std::vector<cplx>>& samples, double a, double b, int order,
                         int degree = 2);

}  // namespace contourlab
