"""Compactly supported piecewise polynomials and their exponential integrals.

Every extended source in this problem is separable with piecewise-polynomial
factors (indicator blocks, the cubic-cubed bump profile, box-spline smoothed
current profiles), so their spectral moments reduce to

    integral of P(s) * exp(c (s - anchor)) ds

with complex c.  That integral is evaluated in closed form: endpoint
series when |c| * halfwidth <= 1, integration by parts otherwise, which keeps
it exact for every wavenumber rather than relying on a fixed quadrature rule.

Polynomials are stored in a local variable centered on each piece to keep
coefficient magnitudes tame.
"""

from __future__ import annotations

import math
from typing import List, Optional, Sequence

import numpy as np
from numpy.polynomial import Polynomial

_SERIES_TERMS = 24


class PiecewisePoly:
    """Polynomial pieces on contiguous breakpoints, zero outside."""

    def __init__(self, breaks: Sequence[float], polys: Sequence[Polynomial]):
        breaks = np.asarray(breaks, dtype=float)
        if len(breaks) != len(polys) + 1 or np.any(np.diff(breaks) <= 0):
            raise ValueError("breaks must be strictly increasing with one poly per gap")
        self.breaks = breaks
        self.polys = [Polynomial(p.coef) for p in polys]
        self._exp_cache: dict = {}

    def __getstate__(self):
        state = dict(self.__dict__)
        state["_exp_cache"] = {}
        return state

    # -- constructors ------------------------------------------------------

    @staticmethod
    def box(w: float, height: Optional[float] = None) -> "PiecewisePoly":
        """Indicator block on [-w, w]; default height 1/(2w) (unit mass)."""
        if height is None:
            height = 1.0 / (2.0 * w)
        return PiecewisePoly([-w, w], [Polynomial([height])])

    @staticmethod
    def indicator(lo: float, hi: float, height: float = 1.0) -> "PiecewisePoly":
        return PiecewisePoly([lo, hi], [Polynomial([height])])

    # -- basics ------------------------------------------------------------

    @property
    def support(self):
        return float(self.breaks[0]), float(self.breaks[-1])

    def _mid(self, i: int) -> float:
        return 0.5 * (self.breaks[i] + self.breaks[i + 1])

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        out = np.zeros(y.shape, dtype=float)
        for i, poly in enumerate(self.polys):
            lo, hi = self.breaks[i], self.breaks[i + 1]
            mask = (y >= lo) & (y <= hi) if i == len(self.polys) - 1 else (y >= lo) & (y < hi)
            if mask.any():
                out[mask] = poly(y[mask] - self._mid(i))
        return out if out.shape else float(out)

    def scale(self, factor: float) -> "PiecewisePoly":
        return PiecewisePoly(self.breaks, [p * factor for p in self.polys])

    def derivative(self) -> "PiecewisePoly":
        return PiecewisePoly(self.breaks, [p.deriv() for p in self.polys])

    def max_abs(self) -> float:
        ys = np.concatenate(
            [np.linspace(self.breaks[i], self.breaks[i + 1], 33) for i in range(len(self.polys))]
        )
        return float(np.max(np.abs(self(ys))))

    # -- exact integrals ----------------------------------------------------

    def moment(self, k: int, lo: Optional[float] = None, hi: Optional[float] = None) -> float:
        """integral of s^k P(s) ds over support clipped to [lo, hi]."""
        lo = self.breaks[0] if lo is None else max(lo, self.breaks[0])
        hi = self.breaks[-1] if hi is None else min(hi, self.breaks[-1])
        if hi <= lo:
            return 0.0
        total = 0.0
        for i, poly in enumerate(self.polys):
            a = max(lo, self.breaks[i])
            b = min(hi, self.breaks[i + 1])
            if b <= a:
                continue
            mid = self._mid(i)
            # s^k = (t + mid)^k in the local variable
            sk = Polynomial([mid, 1.0]) ** k if k else Polynomial([1.0])
            prim = (poly * sk).integ()
            total += prim(b - mid) - prim(a - mid)
        return total

    def integral(self, lo: Optional[float] = None, hi: Optional[float] = None) -> float:
        return self.moment(0, lo, hi)

    def product_integral(self, other: "PiecewisePoly") -> float:
        """integral of P(s) Q(s) ds over the common support, exact."""
        cuts = np.unique(np.concatenate([self.breaks, other.breaks]))
        lo = max(self.breaks[0], other.breaks[0])
        hi = min(self.breaks[-1], other.breaks[-1])
        total = 0.0
        for a, b in zip(cuts[:-1], cuts[1:]):
            if b <= lo or a >= hi:
                continue
            ip = np.searchsorted(self.breaks, 0.5 * (a + b)) - 1
            iq = np.searchsorted(other.breaks, 0.5 * (a + b)) - 1
            mid = 0.5 * (a + b)
            p_loc = self.polys[ip](Polynomial([mid - self._mid(ip), 1.0]))
            q_loc = other.polys[iq](Polynomial([mid - other._mid(iq), 1.0]))
            prim = (p_loc * q_loc).integ()
            total += prim(b - mid) - prim(a - mid)
        return total

    def exp_integral(self, c, lo: float, hi: float, anchor: float):
        """integral of P(s) exp(c (s - anchor)) ds over support clipped to [lo, hi].

        Vectorized over complex c.  Callers arrange Re(c*(s - anchor)) <= 0 on
        the integration range, so no intermediate overflows.
        """
        c = np.asarray(c, dtype=complex)
        out = np.zeros(c.shape, dtype=complex)
        lo = max(lo, self.breaks[0])
        hi = min(hi, self.breaks[-1])
        if hi <= lo:
            return out if out.shape else complex(out)
        for i, poly in enumerate(self.polys):
            a = max(lo, self.breaks[i])
            b = min(hi, self.breaks[i + 1])
            if b <= a:
                continue
            mid = 0.5 * (a + b)
            cache_key = (i, round(a, 14), round(b, 14))
            cached = self._exp_cache.get(cache_key)
            if cached is None:
                loc = poly(Polynomial([mid - self._mid(i), 1.0]))
                h = 0.5 * (b - a)
                # series branch: antiderivatives of t^m P(t) evaluated at +-h
                moms = []
                tpow = Polynomial([1.0])
                tlin = Polynomial([0.0, 1.0])
                for _m in range(_SERIES_TERMS):
                    prim = (loc * tpow).integ()
                    moms.append(prim(h) - prim(-h))
                    tpow = tpow * tlin
                # by-parts branch: derivative values at the endpoints
                d_hi, d_lo = [], []
                q = loc
                for _k in range(loc.degree() + 1):
                    d_hi.append(q(h))
                    d_lo.append(q(-h))
                    q = q.deriv()
                cached = (h, np.array(moms), np.array(d_hi), np.array(d_lo))
                if len(self._exp_cache) < 4096:
                    self._exp_cache[cache_key] = cached
            h, moms, d_hi, d_lo = cached
            shift = mid - anchor
            small = np.abs(c) * h <= 1.0
            if small.any():
                cs = c[small]
                acc = np.zeros(cs.shape, dtype=complex)
                power = np.ones(cs.shape, dtype=complex)
                fact = 1.0
                for m in range(_SERIES_TERMS):
                    acc += power / fact * moms[m]
                    power = power * cs
                    fact *= m + 1
                out[small] += np.exp(cs * shift) * acc
            big = ~small
            if big.any():
                cb = c[big]
                s_hi = np.zeros(cb.shape, dtype=complex)
                s_lo = np.zeros(cb.shape, dtype=complex)
                cpow = cb.copy()
                sign = 1.0
                for qh, ql in zip(d_hi, d_lo):
                    s_hi += sign * qh / cpow
                    s_lo += sign * ql / cpow
                    cpow = cpow * cb
                    sign = -sign
                out[big] += np.exp(cb * (h + shift)) * s_hi - np.exp(cb * (-h + shift)) * s_lo
        return out if out.shape else complex(out)

    # -- smoothing ----------------------------------------------------------

    def convolve_box(self, w: float) -> "PiecewisePoly":
        """Convolution with the unit-mass box of half-width w (exact)."""
        F_polys, F_consts, total = self._antiderivative_pieces()

        def F_symbolic(j: int, offset: float) -> Polynomial:
            # antiderivative on F-piece j, composed with t -> t + offset
            if j < 0:
                return Polynomial([0.0])
            if j >= len(self.polys):
                return Polynomial([total])
            return F_polys[j](Polynomial([offset, 1.0])) + F_consts[j]

        new_breaks = np.unique(np.concatenate([self.breaks - w, self.breaks + w]))
        polys = []
        keep = []
        for a, b in zip(new_breaks[:-1], new_breaks[1:]):
            mid = 0.5 * (a + b)
            jp = np.searchsorted(self.breaks, mid + w) - 1
            jm = np.searchsorted(self.breaks, mid - w) - 1
            up = F_symbolic(jp, mid + w - (self._mid(jp) if 0 <= jp < len(self.polys) else 0.0))
            dn = F_symbolic(jm, mid - w - (self._mid(jm) if 0 <= jm < len(self.polys) else 0.0))
            poly = (up - dn) * (1.0 / (2.0 * w))
            polys.append(poly)
            keep.append((a, b))
        return PiecewisePoly(new_breaks, polys)

    def _antiderivative_pieces(self):
        """Local antiderivatives, per-piece constants, and total mass."""
        F_polys: List[Polynomial] = []
        F_consts: List[float] = []
        acc = 0.0
        for i, poly in enumerate(self.polys):
            prim = poly.integ()
            a = self.breaks[i] - self._mid(i)
            F_polys.append(prim)
            F_consts.append(acc - prim(a))
            acc += prim(self.breaks[i + 1] - self._mid(i)) - prim(a)
        return F_polys, F_consts, acc


def box_spline(half_widths: Sequence[float]) -> PiecewisePoly:
    """Iterated convolution of unit-mass boxes; transform = prod sinc(w q)."""
    if not half_widths:
        raise ValueError("need at least one box")
    pp = PiecewisePoly.box(half_widths[0])
    for w in half_widths[1:]:
        pp = pp.convolve_box(w)
    return pp


def cubic_bump(lo: float, hi: float, amplitude: float = 1.0) -> PiecewisePoly:
    """u^3 (|u|-1)^3 profile mapped onto [lo, hi] with u = 2(s-lo)/(hi-lo) - 1.

    Twice continuously differentiable with compact support; odd about the
    interval midpoint.
    """
    mid = 0.5 * (lo + hi)
    du = 2.0 / (hi - lo)
    polys = []
    for left, right, sign in ((lo, mid, -1.0), (mid, hi, 1.0)):
        pmid = 0.5 * (left + right)
        u = Polynomial([du * (pmid - mid), du])  # u as a function of t = s - pmid
        w = u**3 * (sign * u - 1.0) ** 3  # |u| = sign*u on this half
        polys.append(w * amplitude)
    return PiecewisePoly([lo, mid, hi], polys)
