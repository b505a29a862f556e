#pragma once

#include <cmath>
#include <complex>
#include <random>

#include "contourlab/fiber.hpp"
#include "contourlab/ham_time.hpp"
#include "contourlab/monodromy.hpp"
#include "contourlab/poly.hpp"

namespace testing {

using contourlab::cplx;
using contourlab::Poly;

// y^2 - x^3 + 3x
inline Poly elliptic() { return Poly({{0, 2, 1.0}, {3, 0, -1.0}, {1, 0, 3.0}}); }
inline Poly circle() { return Poly({{2, 0, 1.0}, {0, 2, 1.0}}); }
inline Poly c(double v) { return Poly::constant(v); }

// gamma, delta and [gamma, delta] at h = 1.5, built once per process.
inline const contourlab::Frame& frame() {
  static const contourlab::Frame f = [] {
    contourlab::Fibration fib(elliptic());
    return contourlab::build_frame(fib, contourlab::FrameSetup{});
  }();
  return f;
}

inline double rel_err(cplx a, cplx b) { return std::abs(a - b) / std::max(1e-300, std::abs(b)); }

}  // namespace testing
