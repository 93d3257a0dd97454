"""Double-double primitives against mpmath references."""

import mpmath as mp
import numpy as np
import pytest

from slablens import compensated as cp

mp.mp.dps = 45


def _as_mp(pair, i):
    return mp.mpf(float(pair[0][i])) + mp.mpf(float(pair[1][i]))


def test_exp_matches_mpmath():
    rng = np.random.default_rng(11)
    xs = np.concatenate([rng.uniform(-40, 12, 300), rng.uniform(-1e-8, 1e-8, 50), [0.0, 690.0]])
    h, l = cp.dd_exp(cp.dd(xs))
    for x, hh, ll in zip(xs, h, l):
        ref = mp.e ** mp.mpf(float(x))
        assert abs((mp.mpf(float(hh)) + mp.mpf(float(ll)) - ref) / ref) < 1e-29


def test_exp_saturates():
    h, l = cp.dd_exp(cp.dd(np.array([-800.0, 800.0])))
    assert h[0] == 0.0 and np.isinf(h[1])


def test_sincos_matches_mpmath():
    rng = np.random.default_rng(12)
    xs = np.concatenate([rng.uniform(-15, 15, 400), [0.0, 1e-300, -3e-17]])
    (sh, sl), (ch, cl) = cp.dd_sincos(cp.dd(xs))
    pair_s = (sh, sl)
    pair_c = (ch, cl)
    for i, x in enumerate(xs):
        assert abs(_as_mp(pair_s, i) - mp.sin(mp.mpf(float(x)))) < 1e-30
        assert abs(_as_mp(pair_c, i) - mp.cos(mp.mpf(float(x)))) < 1e-30


def test_sqrt_div_mul():
    rng = np.random.default_rng(13)
    a = rng.uniform(1e-12, 1e12, 300)
    h, l = cp.dd_sqrt(cp.dd(a))
    for x, hh, ll in zip(a, h, l):
        ref = mp.sqrt(mp.mpf(float(x)))
        assert abs((mp.mpf(float(hh)) + mp.mpf(float(ll)) - ref) / ref) < 1e-30

    b = rng.uniform(0.5, 2.0, 300)
    q = cp.dd_div(cp.dd(a), cp.dd(b))
    for x, y, hh, ll in zip(a, b, q[0], q[1]):
        ref = mp.mpf(float(x)) / mp.mpf(float(y))
        assert abs((mp.mpf(float(hh)) + mp.mpf(float(ll)) - ref) / ref) < 1e-30


def test_two_prod_exact():
    # the error term recovers the exact product
    a, b = 1.0 + 2.0**-30, 1.0 - 2.0**-30
    p, e = cp.two_prod(np.float64(a), np.float64(b))
    assert mp.mpf(float(p)) + mp.mpf(float(e)) == mp.mpf(a) * mp.mpf(b)


def test_complex_exp():
    for re, im in [(-3.0, 2.5), (0.0, 0.0), (-50.0, 13.0), (-1e-9, 1e-9)]:
        cre, cim = cp.cdd_exp((cp.dd(re), cp.dd(im)))
        ref = mp.e ** mp.mpc(re, im)
        got_re = mp.mpf(float(cre[0])) + mp.mpf(float(cre[1]))
        got_im = mp.mpf(float(cim[0])) + mp.mpf(float(cim[1]))
        assert abs(got_re - ref.real) < 1e-29
        assert abs(got_im - ref.imag) < 1e-29
