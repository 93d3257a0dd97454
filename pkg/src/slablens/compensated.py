"""Error-free-transformation (double-double) arithmetic for cancellation-prone kernels.

A double-double value is a pair ``(hi, lo)`` of floats (or ndarrays) with
``|lo| <= ulp(hi)/2``, representing ``hi + lo`` to roughly 32 significant
digits.  Everything here is elementwise and works on scalars and numpy
arrays alike; scalars come back as 0-d numpy values.

Only the operations the dispersion kernel needs are provided: ring ops,
sqrt, exp, sin, cos, and a complex layer built from pairs of real
double-doubles.
"""

from __future__ import annotations

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1, Dekker splitting constant

# ln 2 and pi/2 to double-double accuracy
_LN2_HI = 6.93147180559945286e-01
_LN2_LO = 2.31904681384629956e-17
_PIO2_HI = 1.57079632679489656e00
_PIO2_LO = 6.12323399573676604e-17


def two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def quick_two_sum(a, b):
    """Assumes |a| >= |b| elementwise."""
    s = a + b
    return s, b - (s - a)


def _split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def dd(x):
    """Promote a float/array to a double-double pair."""
    x = np.asarray(x, dtype=float)
    return x, np.zeros_like(x)


def dd_add(a, b):
    sh, se = two_sum(a[0], b[0])
    se = se + a[1] + b[1]
    return quick_two_sum(sh, se)


def dd_neg(a):
    return -a[0], -a[1]


def dd_sub(a, b):
    return dd_add(a, dd_neg(b))


def dd_mul(a, b):
    ph, pe = two_prod(a[0], b[0])
    pe = pe + a[0] * b[1] + a[1] * b[0]
    return quick_two_sum(ph, pe)


def dd_mul_d(a, b):
    """double-double times plain double."""
    ph, pe = two_prod(a[0], b)
    pe = pe + a[1] * b
    return quick_two_sum(ph, pe)


def dd_div(a, b):
    q1 = a[0] / b[0]
    r = dd_sub(a, dd_mul_d(b, q1))
    q2 = r[0] / b[0]
    r = dd_sub(r, dd_mul_d(b, q2))
    q3 = r[0] / b[0]
    s = quick_two_sum(q1, q2)
    return dd_add(s, dd(q3))


def dd_sqr(a):
    ph, pe = two_prod(a[0], a[0])
    pe = pe + 2.0 * a[0] * a[1]
    return quick_two_sum(ph, pe)


def dd_sqrt(a):
    """Componentwise sqrt; requires a >= 0 (hi part)."""
    y = np.sqrt(np.maximum(a[0], 0.0))
    ysq = dd_sqr((y, np.zeros_like(y)))
    r = dd_sub(a, ysq)
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = np.where(y > 0.0, r[0] / (2.0 * y), 0.0)
    return quick_two_sum(y, corr)


# inverse factorials 1/2! .. 1/33! as double-doubles (hi, lo)
_INV_FACT = [
    (0.5, 0.0),
    (0.16666666666666666, 9.25185853854297e-18),
    (0.041666666666666664, 2.3129646346357427e-18),
    (0.008333333333333333, 1.1564823173178714e-19),
    (0.001388888888888889, -5.300543954373577e-20),
    (0.0001984126984126984, 1.7209558293420705e-22),
    (2.48015873015873e-05, 2.1511947866775882e-23),
    (2.7557319223985893e-06, -1.858393274046472e-22),
    (2.755731922398589e-07, 2.3767714622250297e-23),
    (2.505210838544172e-08, -1.448814070935912e-24),
    (2.08767569878681e-09, -1.20734505911326e-25),
    (1.6059043836821613e-10, 1.2585294588752098e-26),
    (1.1470745597729725e-11, 2.0655512752830745e-28),
    (7.647163731819816e-13, 7.03872877733453e-30),
    (4.779477332387385e-14, 4.399205485834081e-31),
    (2.8114572543455206e-15, 1.6508842730861433e-31),
    (1.5619206968586225e-16, 1.1910679660273754e-32),
    (8.22063524662433e-18, 2.2141894119604265e-34),
    (4.110317623312165e-19, 1.4412973378659527e-36),
    (1.9572941063391263e-20, -1.3643503830087908e-36),
    (8.896791392450574e-22, -7.911402614872376e-38),
    (3.868170170630684e-23, -8.843177655482344e-40),
    (1.6117375710961184e-24, -3.6846573564509766e-41),
    (6.446950284384474e-26, -1.9330404233703465e-42),
    (2.4795962632247976e-27, -1.2953730964765229e-43),
    (9.183689863795546e-29, 1.4303150396787322e-45),
    (3.279889237069838e-30, 1.5117542744029879e-46),
    (1.1309962886447716e-31, 1.0498015412959506e-47),
    (3.7699876288159054e-33, 2.5870347832750324e-49),
    (1.216125041553518e-34, 5.586290567888806e-51),
    (3.8003907548547434e-36, 1.7457158024652518e-52),
    (1.151633562077195e-37, -6.09957445788454e-54),
]


def dd_exp(a):
    """exp of a double-double, elementwise.

    Range-reduces by ln2, evaluates expm1 on r/512 by Taylor series, and
    squares back up.  Saturates to 0 / inf outside the double range.
    """
    hi = np.asarray(a[0], dtype=float)
    m = np.rint(hi / _LN2_HI)
    ml2h = two_prod(m, _LN2_HI)
    ml2l = two_prod(m, _LN2_LO)
    r = dd_sub(dd_sub((hi, np.asarray(a[1], dtype=float)), ml2h), ml2l)
    # u = r / 512 (exact scaling)
    u = (r[0] / 512.0, r[1] / 512.0)
    # s = expm1(u) by Taylor: u + u^2/2! + ...
    usq = dd_sqr(u)
    s = dd_mul(usq, _INV_FACT[0])
    term = usq
    for k in range(1, 9):
        term = dd_mul(term, u)
        s = dd_add(s, dd_mul(term, _INV_FACT[k]))
    s = dd_add(u, s)
    # 9 doublings: expm1(2t) = expm1(t)^2 + 2 expm1(t)
    for _ in range(9):
        s = dd_add(dd_sqr(s), dd_mul_d(s, 2.0))
    res = dd_add(dd(1.0), s)
    under = hi < -709.0
    over = hi > 709.0
    mi = np.clip(m, -1022, 1023).astype(np.int64)
    with np.errstate(over="ignore", under="ignore"):
        out_hi = np.ldexp(res[0], mi)
        out_lo = np.ldexp(res[1], mi)
    out_hi = np.where(under, 0.0, np.where(over, np.inf, out_hi))
    out_lo = np.where(under | over, 0.0, out_lo)
    return out_hi, out_lo


def _sin_taylor(r):
    # |r| <= pi/4; terms through r^31/31! keep the tail below 1e-34
    rsq = dd_sqr(r)
    s = r
    term = r
    sign = -1.0
    for k in range(1, 16):
        term = dd_mul(term, rsq)
        contrib = dd_mul(term, _INV_FACT[2 * k - 1])
        s = dd_add(s, dd_mul_d(contrib, sign))
        sign = -sign
    return s


def _cos_taylor(r):
    rsq = dd_sqr(r)
    s = dd_sub(dd(1.0), dd_mul_d(rsq, 0.5))
    term = rsq
    sign = 1.0
    for k in range(2, 17):
        term = dd_mul(term, rsq)
        contrib = dd_mul(term, _INV_FACT[2 * k - 2])
        s = dd_add(s, dd_mul_d(contrib, sign))
        sign = -sign
    return s


def dd_sincos(a):
    """Return (sin, cos) of a double-double, elementwise.

    Argument reduction uses pi/2 to ~107 bits, adequate for the moderate
    arguments (|a| up to a few tens) the kernels produce.
    """
    hi = np.asarray(a[0], dtype=float)
    m = np.rint(hi / _PIO2_HI)
    r = dd_sub((hi, np.asarray(a[1], dtype=float)), two_prod(m, _PIO2_HI))
    r = dd_sub(r, two_prod(m, _PIO2_LO))
    sr = _sin_taylor(r)
    cr = _cos_taylor(r)
    k = np.mod(m.astype(np.int64), 4)
    sin_hi = np.select([k == 0, k == 1, k == 2], [sr[0], cr[0], -sr[0]], -cr[0])
    sin_lo = np.select([k == 0, k == 1, k == 2], [sr[1], cr[1], -sr[1]], -cr[1])
    cos_hi = np.select([k == 0, k == 1, k == 2], [cr[0], -sr[0], -cr[0]], sr[0])
    cos_lo = np.select([k == 0, k == 1, k == 2], [cr[1], -sr[1], -cr[1]], sr[1])
    return (sin_hi, sin_lo), (cos_hi, cos_lo)


# -- complex layer: value = (re_dd, im_dd) --------------------------------


def cdd(re, im=0.0):
    return dd(re), dd(im)


def cdd_add(a, b):
    return dd_add(a[0], b[0]), dd_add(a[1], b[1])


def cdd_sub(a, b):
    return dd_sub(a[0], b[0]), dd_sub(a[1], b[1])


def cdd_mul(a, b):
    re = dd_sub(dd_mul(a[0], b[0]), dd_mul(a[1], b[1]))
    im = dd_add(dd_mul(a[0], b[1]), dd_mul(a[1], b[0]))
    return re, im


def cdd_sqr(a):
    re = dd_sub(dd_sqr(a[0]), dd_sqr(a[1]))
    im = dd_mul_d(dd_mul(a[0], a[1]), 2.0)
    return re, im


def cdd_exp(a):
    """exp of a complex double-double."""
    mag = dd_exp(a[0])
    s, c = dd_sincos(a[1])
    return dd_mul(mag, c), dd_mul(mag, s)


def cdd_to_complex(a):
    re = a[0][0] + a[0][1]
    im = a[1][0] + a[1][1]
    return re + 1j * im
