#pragma once

#include <Eigen/Dense>

#include "contourlab/ham_time.hpp"
#include "contourlab/poly.hpp"

namespace contourlab {

/// Element of the upper-triangular group, stored as the exponent I and the
/// three off-diagonal entries of
///   [[e^{-I/2}, a, b], [0, e^{I/2}, c], [0, 0, e^{-I/2}]].
/// Keeping I (not e^{-I/2}) fixes the half-exponent branch.
struct TriMatrix {
  cplx I = 0.0;
  cplx a = 0.0;
  cplx b = 0.0;
  cplx c = 0.0;

  static TriMatrix identity() { return {}; }
  Eigen::Matrix3cd dense() const;
};

TriMatrix multiply(const TriMatrix& w1, const TriMatrix& w2);
TriMatrix operator*(const TriMatrix& w1, const TriMatrix& w2);
TriMatrix inverse(const TriMatrix& w);
/// w1 w2 w1^-1 w2^-1; the I field is set to exactly zero.
TriMatrix commutator(const TriMatrix& w1, const TriMatrix& w2);

/// |e^I - 1| > tol under the shared relative resonance measure.
bool in_S(const TriMatrix& w, double tol_resonance = 1e-8);

/// (1,3) entry of (W - e^{I/2})(W - e^{-I/2}) / (e^{-I} - 1), which is
/// e^{I/2} b + a c / (e^{-I} - 1). Throws NotInS.
cplx psi(const TriMatrix& w, double tol_resonance = 1e-8);
/// (e^{-I} - 1) e^{I/2} b + a c, defined everywhere.
cplx psi_tilde(const TriMatrix& w);

/// Frobenius distance of the dense forms.
double distance(const TriMatrix& w1, const TriMatrix& w2);

TriMatrix rho(const LoopQuadrature& quad, const Coefficients& coeffs);
TriMatrix rho(const Fibration& fib, const FiberLoop& loop, const Coefficients& coeffs);

/// Coefficient of psi_tilde([W1, W2]) in the commutator identity.
cplx commutator_coefficient(cplx I1, cplx I2);

struct MidResidual {
  cplx residual;
  double scale;  ///< largest magnitude among the four terms
};

/// psi(W1 W2) - psi(W1) - psi(W2) - coefficient * psi_tilde([W1, W2]).
/// Throws NotInS naming whichever of W1, W2, W1 W2 is resonant.
MidResidual mid_identity_residual(const TriMatrix& w1, const TriMatrix& w2,
                                  double tol_resonance = 1e-8);

}  // namespace contourlab
