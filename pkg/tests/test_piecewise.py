"""Piecewise polynomials, box splines, and exponential moments."""

import numpy as np
import pytest
from numpy.polynomial import Polynomial
from scipy.integrate import simpson

from slablens.piecewise import PiecewisePoly, box_spline, cubic_bump


def test_box_transform_is_sinc():
    w = 0.7
    bx = PiecewisePoly.box(w)
    qs = np.array([0.0, 1e-9, 0.3, 2.0, 17.0, 250.0])
    got = bx.exp_integral(-1j * qs, -w, w, 0.0)
    safe = np.where(qs == 0, 1.0, qs * w)
    ref = np.where(qs == 0, 1.0, np.sin(safe) / safe)
    assert np.max(np.abs(got - ref)) < 5e-15


def test_box_spline_transform_and_mass():
    ws = [0.9, 0.35, 0.2]
    sp = box_spline(ws)
    assert sp.support == (pytest.approx(-1.45), pytest.approx(1.45))
    assert sp.integral() == pytest.approx(1.0, abs=1e-13)
    qs = np.linspace(-30, 30, 301)
    got = sp.exp_integral(-1j * qs, *sp.support, 0.0)
    ref = np.ones_like(qs, dtype=complex)
    for w in ws:
        safe = np.where(qs == 0, 1.0, qs * w)
        ref = ref * np.where(qs == 0, 1.0, np.sin(safe) / safe)
    assert np.max(np.abs(got - ref)) < 1e-13


def test_five_box_spline_smoothness():
    t2 = box_spline([0.9, 0.9, 0.9, 0.35, 0.35])
    d3 = t2.derivative().derivative().derivative()
    for b in t2.breaks[1:-1]:
        assert abs(d3(b - 1e-12) - d3(b + 1e-12)) < 1e-9  # C^3


def test_cubic_bump_shape():
    cb = cubic_bump(1.2, 3.2)
    u = lambda s: (s - 1.2) - 1.0
    ref = lambda s: u(s) ** 3 * (abs(u(s)) - 1) ** 3
    ss = np.linspace(1.2, 3.2, 101)
    assert max(abs(cb(float(s)) - ref(float(s))) for s in ss) < 1e-14
    assert cb(1.2) == cb(3.2) == cb(2.2) == 0.0
    # odd about the midpoint, C^2 there
    assert cb(1.5) == pytest.approx(-cb(2.9), abs=1e-15)
    d1, d2 = cb.derivative(), cb.derivative().derivative()
    assert abs(d1(2.2 - 1e-12) - d1(2.2 + 1e-12)) < 1e-10
    assert abs(d2(2.2 - 1e-12) - d2(2.2 + 1e-12)) < 1e-9


@pytest.mark.parametrize("c", [0.0, -3.7 + 2.1j, -250j, 40j, -80.0])
def test_exp_integral_vs_simpson(c):
    cb = cubic_bump(1.2, 3.2, amplitude=2.5)
    ys = np.linspace(1.2, 3.2, 40001)
    ref = simpson(cb(ys) * np.exp(c * (ys - 1.2)), x=ys)
    got = cb.exp_integral(np.array([c]), 1.2, 3.2, 1.2)[0]
    assert abs(got - ref) < 5e-12
    # partial range
    ref = simpson(cb(ys[:20001]) * np.exp(c * (ys[:20001] - 1.2)), x=ys[:20001])
    got = cb.exp_integral(np.array([c]), 1.2, 2.2, 1.2)[0]
    assert abs(got - ref) < 5e-12


def test_moments_and_products():
    cb = cubic_bump(0.0, 2.0)
    ys = np.linspace(0.0, 2.0, 20001)
    assert cb.moment(0) == pytest.approx(simpson(cb(ys), x=ys), abs=1e-10)
    clip = np.linspace(0.3, 1.1, 8001)  # exact endpoints for the reference
    assert cb.moment(2, 0.3, 1.1) == pytest.approx(
        simpson(clip**2 * cb(clip), x=clip), abs=1e-10
    )
    other = PiecewisePoly([0.5, 1.5], [Polynomial([1.0, 2.0])])
    clip = np.linspace(0.5, 1.5, 8001)
    ref = simpson(cb(clip) * (1 + 2 * (clip - 1.0)), x=clip)
    assert cb.product_integral(other) == pytest.approx(ref, abs=1e-10)


def test_convolve_box_pointwise():
    b1 = PiecewisePoly.box(0.9)
    w = 0.35
    conv = b1.convolve_box(w)
    # overlap of the two boxes in closed form
    for yv in (-1.2, -0.6, 0.0, 0.33, 1.0, 1.24, 1.3):
        lo = max(-0.9, yv - w)
        hi = min(0.9, yv + w)
        ref = max(hi - lo, 0.0) / (2 * 0.9) / (2 * w)
        assert conv(yv) == pytest.approx(ref, abs=1e-13)
