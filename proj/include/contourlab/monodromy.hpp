#pragma once

#include <map>
#include <string>
#include <vector>

#include "contourlab/fiber.hpp"
#include "contourlab/ham_time.hpp"
#include "contourlab/tri_group.hpp"

namespace contourlab {

/// Recipe for the pair (gamma, delta) used by the monodromy identities.
/// gamma is the real oval of E_{h0} through base_hint; delta is the cycle
/// vanishing at `crit`, built at crit_value + start_offset * (h0 - crit_value)
/// / |h0 - crit_value| and carried to h0 along the straight segment.
struct FrameSetup {
  Point2 crit{1.0, 0.0};
  cplx crit_value = 2.0;
  double h0 = 1.5;
  double base_hint_x = -2.0;
  double base_hint_y = 0.0;
  double start_offset = 1e-2;
  int n_points = 400;
  FiberControls controls{};
};

/// Loops of one frame, all based at gamma's base point.
struct Frame {
  cplx h0;
  FiberLoop gamma;
  FiberLoop delta;       ///< vanishing cycle conjugated to gamma's base point
  FiberLoop delta_free;  ///< same cycle, based on itself
  FiberLoop commutator;  ///< gamma delta gamma^-1 delta^-1
  std::vector<Point2> connector;  ///< from gamma's base to delta_free's base
  std::vector<cplx> delta_path;   ///< base path used to carry delta to h0
  double meeting_distance = 0.0;  ///< gap closed by the connector's last chord
};

/// Builds gamma and delta and orients delta so that the turn around
/// crit_value maps gamma to gamma * delta.
Frame build_frame(const Fibration& fib, const FrameSetup& setup);

/// h0 -> nearest point of the circle |h - center| = radius, `turns`
/// counterclockwise turns, then back to h0.
BasePath monodromy_path(cplx h0, cplx center, double radius, int turns, double step);

struct MonodromyImage {
  FiberLoop loop;         ///< transported loop, rebased to the original base point
  double base_drift = 0;  ///< |*' - *| before rebasing
  bool rotated = false;   ///< base point re-chosen along the loop itself
};

/// Transports `loop` around the circle and brings the result back to the
/// original base point: by a short in-fiber chord when the base point
/// drifted less than rebase_radius, otherwise by first restarting the loop
/// at its sample nearest the old base point (conjugation by an arc of the
/// loop; only conjugation-invariant quantities survive that case).
MonodromyImage monodromy_image(const Fibration& fib, const FiberLoop& loop, cplx center, double radius,
                               int turns = 1, const FiberControls& controls = {},
                               double rebase_radius = 0.05);

struct MonodromyReport {
  cplx crit_value;
  double radius = 0.0;
  FiberLoop loop_before, loop_after;
  TriMatrix rho_before, rho_after;
  double base_drift = 0.0;
  bool rotated = false;
  std::map<std::string, double> residuals;
};

/// Mon around crit_value applied to `loop`. Always reports "unchanged" =
/// |rho(after) - rho(before)|; with a vanishing cycle (based like `loop`)
/// also "picard_lefschetz" = |rho(after) - rho(before) rho(delta)|.
MonodromyReport monodromy_transport(const Fibration& fib, const FiberLoop& loop, cplx crit_value,
                                    double radius, const Coefficients& coeffs,
                                    const FiberLoop* delta = nullptr, const FiberControls& controls = {});

/// One turn applied to every loop of a frame.
struct FrameTurn {
  double radius = 0.0;
  TriMatrix gamma_before, delta_before, comm_before;
  TriMatrix gamma_after, delta_after, comm_after;
  cplx psi_gamma_after;  ///< Psi evaluated on the transported gamma
  std::map<std::string, double> drift;
};

FrameTurn turn_frame(const Fibration& fib, const Frame& frame, cplx crit_value, double radius,
                     const Coefficients& coeffs, const FiberControls& controls = {});

struct MonellReport {
  cplx lhs;  ///< Mon Psi_gamma on the transported loop
  cplx rhs;  ///< algebraic right-hand side from rho(gamma), rho(delta)
  double residual = 0.0;
  double scale = 0.0;
  double mid_identity = 0.0;  ///< commutator identity on (rho(gamma), rho(delta))
};

MonellReport monell_residual(const FrameTurn& turn, double tol_resonance = 1e-8);

/// xi = Psi_gamma - Psi_delta log(h - c) / 2 pi i
///      + e^{-I_delta} psi~([gamma, delta]) / ((e^{-I_delta} - 1)^2 (e^{-I_gamma} - 1)).
cplx xi_value(const TriMatrix& gamma, const TriMatrix& delta, const TriMatrix& comm, cplx log_term,
              double tol_resonance = 1e-8);

struct XiReport {
  cplx before, after;
  double difference = 0.0;
};

/// xi before the turn (principal log) and after (log advanced by 2 pi i).
XiReport xi_invariance(const FrameTurn& turn, cplx h0, cplx crit_value, double tol_resonance = 1e-8);

/// xi at frames built for each h (no transport); bounded values as h
/// approaches the critical value are the evidence asked for.
std::vector<cplx> xi_profile(const Fibration& fib, const FrameSetup& setup, const std::vector<double>& h_values,
                             const Coefficients& coeffs);

struct RankReport {
  std::vector<int> ranks;                    ///< at the primary threshold
  std::map<double, std::vector<int>> sensitivity;  ///< other thresholds
  bool strictly_increasing = false;
  std::vector<std::vector<cplx>> rows;       ///< row i: (Mon)^i Psi_gamma at every sample
};

/// Numerical rank of the first j+1 rows of `rows` for j = 0..rows-1.
RankReport rank_sequence(const std::vector<std::vector<cplx>>& rows, double threshold = 1e-8);

/// (Mon)^i Psi_gamma(h_k) = psi(rho(gamma) rho(delta)^i) at each frame.
RankReport rank_growth(const Fibration& fib, const FrameSetup& setup, const std::vector<double>& h_samples,
                       int max_iter, const Coefficients& coeffs, double threshold = 1e-8);

/// Reduced variant: r_0 = 1/(e^{-I_gamma} - 1), r_{j+1} = (Mon - Id)^2 r_j,
/// where Mon^i r_0 = 1/(e^{-I_gamma} e^{-i I_delta} - 1).
RankReport rank_growth_reduced(const Fibration& fib, const FrameSetup& setup,
                               const std::vector<double>& h_samples, int max_iter, const Coefficients& coeffs,
                               double threshold = 1e-8);

}  // namespace contourlab
