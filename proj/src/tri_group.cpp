#include "contourlab/tri_group.hpp"

#include <algorithm>
#include <string>

#include "contourlab/error.hpp"

namespace contourlab {

Eigen::Matrix3cd TriMatrix::dense() const {
  Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
  const cplx d = std::exp(-0.5 * I);
  m(0, 0) = d;
  m(1, 1) = std::exp(0.5 * I);
  m(2, 2) = d;
  m(0, 1) = a;
  m(0, 2) = b;
  m(1, 2) = c;
  return m;
}

TriMatrix multiply(const TriMatrix& w1, const TriMatrix& w2) {
  const cplx m1 = std::exp(-0.5 * w1.I), p1 = std::exp(0.5 * w1.I);
  const cplx m2 = std::exp(-0.5 * w2.I), p2 = std::exp(0.5 * w2.I);
  TriMatrix r;
  r.I = w1.I + w2.I;
  r.a = m1 * w2.a + w1.a * p2;
  r.c = p1 * w2.c + w1.c * m2;
  r.b = m1 * w2.b + w1.a * w2.c + w1.b * m2;
  return r;
}

TriMatrix operator*(const TriMatrix& w1, const TriMatrix& w2) { return multiply(w1, w2); }

TriMatrix inverse(const TriMatrix& w) {
  const cplx p = std::exp(0.5 * w.I);
  // Inverse of the dense form: diagonal entries invert, I -> -I.
  TriMatrix r;
  r.I = -w.I;
  r.a = -w.a;
  r.c = -w.c;
  r.b = p * (w.a * w.c - w.b * p);
  return r;
}

TriMatrix commutator(const TriMatrix& w1, const TriMatrix& w2) {
  TriMatrix r = w1 * w2 * inverse(w1) * inverse(w2);
  r.I = 0.0;
  return r;
}

bool in_S(const TriMatrix& w, double tol_resonance) { return resonance_gap(w.I) > tol_resonance; }

cplx psi(const TriMatrix& w, double tol_resonance) {
  if (!in_S(w, tol_resonance)) throw ContourError(ErrorCode::NotInS, "psi needs e^I != 1");
  return std::exp(0.5 * w.I) * w.b + w.a * w.c / (std::exp(-w.I) - 1.0);
}

cplx psi_tilde(const TriMatrix& w) {
  // (1,3) entry of (W - e^{I/2})(W - e^{-I/2}); all other entries vanish.
  return (std::exp(-0.5 * w.I) - std::exp(0.5 * w.I)) * w.b + w.a * w.c;
}

double distance(const TriMatrix& w1, const TriMatrix& w2) { return (w1.dense() - w2.dense()).norm(); }

TriMatrix rho(const LoopQuadrature& quad, const Coefficients& coeffs) {
  LoopIntegrals li = loop_integrals(quad, coeffs);
  return {li.I, li.theta_minus, li.phi, li.theta_plus};
}

TriMatrix rho(const Fibration& fib, const FiberLoop& loop, const Coefficients& coeffs) {
  return rho(LoopQuadrature(fib, loop), coeffs);
}

cplx commutator_coefficient(cplx I1, cplx I2) {
  const cplx e1 = std::exp(-I1), e2 = std::exp(-I2), e12 = std::exp(-(I1 + I2));
  return e12 / ((e1 - 1.0) * (e2 - 1.0) * (e12 - 1.0));
}

MidResidual mid_identity_residual(const TriMatrix& w1, const TriMatrix& w2, double tol_resonance) {
  const TriMatrix w12 = w1 * w2;
  auto require = [&](const TriMatrix& w, const char* name) {
    if (!in_S(w, tol_resonance))
      throw ContourError(ErrorCode::NotInS, std::string(name) + " is not in S");
  };
  require(w1, "W1");
  require(w2, "W2");
  require(w12, "W1*W2");
  const cplx t12 = psi(w12, tol_resonance);
  const cplx t1 = psi(w1, tol_resonance);
  const cplx t2 = psi(w2, tol_resonance);
  const cplx tc = commutator_coefficient(w1.I, w2.I) * psi_tilde(commutator(w1, w2));
  const double scale = std::max({std::abs(t12), std::abs(t1), std::abs(t2), std::abs(tc)});
  return {t12 - t1 - t2 - tc, scale};
}

}  // namespace contourlab
