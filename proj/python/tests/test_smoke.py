import cmath
import math

import numpy as np
import pytest

import contourlab as cl

H = cl.elliptic()
T0 = 1.99233289958349


def test_poly_eval_and_partials():
    assert H(1.0, 0.0) == pytest.approx(2.0)
    assert H.partial_y() == cl.Poly([(0, 1, 2.0)])
    assert H.degree() == 3
    assert (2.0 * cl.Poly.x())(3.0, 0.0) == pytest.approx(6.0)


def test_critical_values():
    cd = cl.critical_data(H)
    vals = sorted(v.real for v in cd["values"])
    assert vals == pytest.approx([-2.0, 2.0], abs=1e-10)
    assert len(cd["points"]) == 2


def test_constant_h_raises():
    with pytest.raises(cl.ContourError, match="InvalidArgument"):
        cl.critical_data(cl.Poly.constant(1.0))


def test_oval_period():
    oval = cl.trace_real_oval(H, 0.0)
    assert oval.points.shape[1] == 2
    assert oval.max_residual(H) <= 1e-10
    li = cl.loop_integrals(H, oval)
    assert li["T"].real == pytest.approx(T0, rel=1e-8)


def test_functionals_match_rho():
    f = cl.build_frame(H)
    for name in ("gamma", "delta"):
        loop = f[name]
        lf = cl.loop_functionals(H, loop)
        r = cl.rho(H, loop)
        assert abs(lf["psi"] - cl.psi(r)) <= 1e-10 * abs(lf["psi"])
        assert abs(cl.psi_direct(H, loop) - lf["psi"]) <= 1e-6 * abs(lf["psi"])
    gd = cl.compose_loops(f["gamma"], f["delta"])
    prod = cl.rho(H, f["gamma"]) @ cl.rho(H, f["delta"])
    assert cl.distance(cl.rho(H, gd), prod) <= 1e-7


def test_resonant_loop_raises():
    circle = cl.Poly([(2, 0, 1.0), (0, 2, 1.0)])
    loop = cl.trace_real_oval(circle, 1.0, hint=(1.0, 0.0), n_points=200)
    co = cl.Coefficients(A=cl.Poly.constant(2j))
    assert cl.resonance_gap(cl.loop_integrals(circle, loop, co)["I"]) < 1e-9
    with pytest.raises(cl.ContourError, match="Resonance"):
        cl.loop_functionals(H=circle, loop=loop, coeffs=co)


def test_trimatrix_dense_product():
    rng = np.random.default_rng(1)
    z = lambda: complex(*rng.uniform(-1, 1, 2))
    w1 = cl.TriMatrix(0.4 + 1j * z().real, z(), z(), z())
    w2 = cl.TriMatrix(-0.7 + 1j * z().real, z(), z(), z())
    assert np.allclose((w1 @ w2).dense(), w1.dense() @ w2.dense(), atol=1e-13)
    m = cl.mid_identity_residual(w1, w2)
    assert abs(m["residual"]) <= 1e-11 * max(1.0, m["scale"])


def test_first_order_melnikov():
    eps = 1e-4
    oval = cl.trace_real_oval(H, 0.0)
    abel = cl.abelian_integral(H, oval, cl.Poly.y()).real
    r = cl.poincare_return(H, cl.Poly(), cl.Poly.y(), 0.0, eps)
    assert abs(r["delta_h"] / eps - abel) <= 1e-3 * abs(abel)


def test_fit_linear_ode_exponential():
    hs = cl.chebyshev_grid(0.0, 1.0, 16)
    ode = cl.fit_linear_ode([[cmath.exp(h) for h in hs]], 0.0, 1.0, 1, 0)
    assert ode.coeffs[0][0] / ode.coeffs[1][0] == pytest.approx(-1.0, abs=1e-8)


def test_three_d_cross_check():
    sys = cl.System3D(H, S=cl.Poly.constant(1.0), b=cl.Poly.x())
    oval = cl.trace_real_oval(H, 0.0)
    pm = cl.pontryagin_melnikov(sys, oval)
    assert pm["route_gap"] <= 1e-6
    sys.eps = 1e-3
    r = cl.simulate_3d_return(sys, 0.0)
    assert r["profile"].shape[1] == 5
    assert abs(r["delta_h"] / sys.eps - pm["direct"].real) <= 10 * sys.eps
    assert math.isfinite(r["tracking"])
