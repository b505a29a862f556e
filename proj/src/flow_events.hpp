#pragma once

// Adaptive integration up to the n-th signed crossing of a section
// function, shared by the planar and the 3D return maps.

#include <array>
#include <cmath>
#include <cstddef>

#include <boost/numeric/odeint.hpp>

#include "contourlab/error.hpp"
#include "contourlab/melnikov.hpp"

namespace contourlab::detail {

template <std::size_t N>
struct Crossing {
  std::array<double, N> state;
  double t = 0.0;
};

/// `rhs(s, ds)` is the vector field, `sec(s)` the signed section function
/// (a return is a negative-to-positive sign change), `observe(t, s)` is
/// called after every accepted step. The start is not counted even when it
/// lies on the section.
template <std::size_t N, class Rhs, class Sec, class Observe>
Crossing<N> integrate_to_crossing(Rhs&& rhs, std::array<double, N> s, Sec&& sec, int crossings,
                                  const FlowControls& c, Observe&& observe) {
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, N>;
  auto system = [&](const State& x, State& dx, double) { rhs(x, dx); };
  auto controlled = odeint::make_controlled(c.abs_tol, c.rel_tol, odeint::runge_kutta_fehlberg78<State>());
  odeint::runge_kutta_fehlberg78<State> fixed;

  auto advance = [&](const State& from, double tau) {
    State out = from;
    if (tau != 0.0) fixed.do_step(system, out, 0.0, tau);
    return out;
  };

  double t = 0.0, dt = c.initial_dt;
  double f_prev = sec(s);
  int found = 0;
  observe(t, s);
  while (true) {
    const State s_prev = s;
    const double t_prev = t;
    int rejected = 0;
    while (controlled.try_step(system, s, t, dt) == odeint::fail) {
      if (++rejected > 200) throw ContourError(ErrorCode::NoReturn, "step size control failed");
    }
    double norm2 = 0.0;
    for (double v : s) norm2 += v * v;
    if (!std::isfinite(norm2) || std::sqrt(norm2) > c.escape_radius)
      throw ContourError(ErrorCode::NoReturn, "trajectory escaped the escape radius");
    if (t > c.max_time) throw ContourError(ErrorCode::NoReturn, "no return within max_time");
    const double f = sec(s);
    if (f_prev < 0.0 && f >= 0.0 && ++found == crossings) {
      // Illinois-modified regula falsi on the substep length.
      const double h = t - t_prev;
      double lo = 0.0, hi = h, f_lo = f_prev, f_hi = f;
      double tau = h;
      State x = s;
      int side = 0;
      for (int it = 0; it < 100; ++it) {
        tau = lo - f_lo * (hi - lo) / (f_hi - f_lo);
        x = advance(s_prev, tau);
        const double g = sec(x);
        if (std::abs(g) <= c.event_tol || hi - lo <= 1e-15 * std::max(1.0, std::abs(t_prev))) break;
        if ((g < 0.0) == (f_lo < 0.0)) {
          lo = tau;
          f_lo = g;
          if (side == -1) f_hi *= 0.5;
          side = -1;
        } else {
          hi = tau;
          f_hi = g;
          if (side == 1) f_lo *= 0.5;
          side = 1;
        }
      }
      observe(t_prev + tau, x);
      return {x, t_prev + tau};
    }
    observe(t, s);
    f_prev = f;
  }
}

}  // namespace contourlab::detail
