"""Source zoo behind one spectral contract.

Every source is decomposed into parts that are even or odd in y about a
center line, each part a sum of separable terms X(x) * Y(y) whose y-factor
has a closed-form transform:

    f(x, y)    = sum_parts sum_terms X(x) * Y(y)
    f_hat(x,q) = exp(-i q y_center) * sum_parts sum_terms X(x) * Y_hat(q)

with Y_hat real/even for even parts and imaginary/odd for odd parts.  The
x-profiles are piecewise polynomials (or delta distributions for the
dipole), so every moment the field solver needs -- the exponentially
weighted I_p, partial moments up to x, and the degenerate-branch linear
moments -- is evaluated in closed form.

Sources:
  * Dipole          d . grad(delta), the classic resonance probe
  * Bump            separable cubic-cubed blob (smooth, compact)
  * SincBust        transform -i*sinc(a1 q) sin(a2 q): zeros at both roots
  * BesselBust      transform J0(b0 q) J1(b1 q): zeros at both roots
  * CurrentSource   divergence-free current realization with t2_hat =
                    sinc^3(a1 q) sinc^2(a2 q) (zeros of order 3 and 2)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.special import j0 as bessel_j0, j1 as bessel_j1, jn_zeros, roots_legendre

from .dispersion import RootStatus, RootStatusError, find_roots
from .kernel import nus
from .params import Params
from .piecewise import PiecewisePoly, box_spline, cubic_bump
from .scaled import ScaledComplex

MU0 = 1.0  # only the product mu0*C enters the density; nondimensionalized away


def sinc(x):
    """sin(x)/x with the removable singularity filled."""
    return np.sinc(np.asarray(x) / np.pi)


# -- x-profile protocol ----------------------------------------------------


class _PolyProfile:
    def __init__(self, pp: PiecewisePoly):
        self.pp = pp

    def exp_moment(self, c, lo, hi, anchor, boundary):
        return self.pp.exp_integral(c, lo, hi, anchor)

    def weighted_moment(self, x, lo, hi, boundary):
        return self.pp.moment(1, lo, hi) - x * self.pp.moment(0, lo, hi)

    def mass(self, lo, hi, boundary):
        return self.pp.integral(lo, hi)

    def __call__(self, x):
        return self.pp(x)


class _DeltaProfile:
    def __init__(self, x0: float):
        self.x0 = x0

    def _inside(self, lo, hi, boundary):
        if boundary == "full":
            return lo <= self.x0 <= hi
        if boundary == "tail":  # integration range (lo, hi], lo = evaluation x
            return lo < self.x0 <= hi
        if boundary == "direct":  # integration range [lo, hi), hi clipped at x
            return lo <= self.x0 < hi
        return lo < self.x0 < hi

    def exp_moment(self, c, lo, hi, anchor, boundary):
        c = np.asarray(c, dtype=complex)
        if not self._inside(lo, hi, boundary):
            return np.zeros(c.shape, dtype=complex)
        return np.exp(c * (self.x0 - anchor))

    def weighted_moment(self, x, lo, hi, boundary):
        return (self.x0 - x) if self._inside(lo, hi, boundary) else 0.0

    def mass(self, lo, hi, boundary):
        return 1.0 if self._inside(lo, hi, boundary) else 0.0


class _DeltaPrimeProfile(_DeltaProfile):
    def exp_moment(self, c, lo, hi, anchor, boundary):
        c = np.asarray(c, dtype=complex)
        if not self._inside(lo, hi, boundary):
            return np.zeros(c.shape, dtype=complex)
        return -c * np.exp(c * (self.x0 - anchor))

    def weighted_moment(self, x, lo, hi, boundary):
        return -1.0 if self._inside(lo, hi, boundary) else 0.0

    def mass(self, lo, hi, boundary):
        return 0.0


@dataclass
class Term:
    x_profile: object
    y_hat: Callable  # transform of the centered y-factor
    y_spatial: Optional[Callable] = None  # centered y-factor itself


# y_hat factors as picklable callables (field maps fan rows out to workers)


@dataclass(frozen=True)
class ConstYHat:
    weight: float

    def __call__(self, q):
        return self.weight * np.ones_like(np.asarray(q, dtype=float))


@dataclass(frozen=True)
class LinearImagYHat:
    weight: float

    def __call__(self, q):
        return 1j * np.asarray(q, dtype=float) * self.weight


@dataclass(frozen=True)
class PolyTransformYHat:
    """Transform of a real piecewise-polynomial y-profile (odd or even)."""

    profile: PiecewisePoly

    def __call__(self, q):
        lo, hi = self.profile.support
        return self.profile.exp_integral(-1j * np.asarray(q, dtype=float), lo, hi, 0.0)


@dataclass(frozen=True)
class SincSinYHat:
    alpha1: float
    alpha2: float

    def __call__(self, q):
        q = np.asarray(q, dtype=float)
        return -1j * sinc(self.alpha1 * q) * np.sin(self.alpha2 * q)


@dataclass(frozen=True)
class BesselYHat:
    beta0: float
    beta1: float

    def __call__(self, q):
        q = np.asarray(q, dtype=float)
        return 1j * bessel_j0(self.beta0 * q) * bessel_j1(self.beta1 * q)


@dataclass(frozen=True)
class SmoothCurrentYHat:
    """mu0 * t2_hat(q), optionally times -q^2 (the t2'' transform)."""

    alpha1: float
    alpha2: float
    second_derivative: bool = False

    def __call__(self, q):
        q = np.asarray(q, dtype=float)
        t2h = MU0 * sinc(self.alpha1 * q) ** 3 * sinc(self.alpha2 * q) ** 2
        return -q * q * t2h if self.second_derivative else t2h


@dataclass
class Part:
    parity: int  # +1 even in (y - y_center), -1 odd
    terms: List[Term]


@dataclass(frozen=True)
class MomentIntegrals:
    minus: ScaledComplex
    plus: ScaledComplex


@dataclass(frozen=True)
class DipoleTransform:
    """f_hat of a dipole is distributional: weights of delta and delta'."""

    delta_weight: complex
    delta_prime_weight: complex
    x0: float


class Source:
    """Common contract; concrete sources fill d0, d1, y_center and parts."""

    kind: str = ""
    d0: float
    d1: float
    y_center: float = 0.0
    parts: List[Part]

    # -- per-part spectral moments (no center phase), used by the field solver

    def part_i_mant(self, part: Part, q, u):
        """integral of X(s) exp(-u (s - d0)) ds over the full support, per Y_hat."""
        out = 0.0
        for t in part.terms:
            out = out + t.y_hat(q) * t.x_profile.exp_moment(-u, self.d0, self.d1, self.d0, "full")
        return out

    def part_tail_mant(self, part: Part, q, u, x: float):
        """integral over (x, d1] of X(s) exp(-u (s - x)) ds.

        Profiles clip to their own support, so the raw evaluation point is
        passed straight through; delta profiles at x0 count iff x < x0.
        """
        out = 0.0
        for t in part.terms:
            out = out + t.y_hat(q) * t.x_profile.exp_moment(-u, x, self.d1, x, "tail")
        return out

    def part_direct_mant(self, part: Part, q, u, x: float):
        """integral over [d0, x) of X(s) exp(+u (s - x)) ds."""
        out = 0.0
        for t in part.terms:
            out = out + t.y_hat(q) * t.x_profile.exp_moment(u, self.d0, x, x, "direct")
        return out

    def part_linear_mant(self, part: Part, q, x: float):
        """integral over [d0, x) of X(s) (s - x) ds."""
        out = 0.0
        for t in part.terms:
            out = out + t.y_hat(q) * t.x_profile.weighted_moment(x, self.d0, x, "direct")
        return out

    def part_plain_mant(self, part: Part, q, upto: Optional[float] = None):
        hi = self.d1 if upto is None else upto
        boundary = "full" if upto is None else "direct"
        out = 0.0
        for t in part.terms:
            out = out + t.y_hat(q) * t.x_profile.mass(self.d0, hi, boundary)
        return out

    # -- public spectral quantities -----------------------------------------

    def center_phase(self, q):
        return np.exp(-1j * np.asarray(q, dtype=float) * self.y_center)

    def i_scaled(self, p: float, params: Params) -> ScaledComplex:
        """I_p with the e^{-gamma (d0/a) nu_m'} factor on the ledger."""
        nu_c, _, nu_m = nus(p, params)
        u = params.k0 * nu_m
        q = params.k0 * p
        mant = 0j
        for part in self.parts:
            mant = mant + complex(self.part_i_mant(part, q, u))
        mant *= complex(self.center_phase(q)) * np.exp(-1j * u.imag * self.d0)
        return ScaledComplex(mant, -u.real * self.d0).normalized()

    def moments(self, x: float, q: float, params: Params) -> MomentIntegrals:
        """Partial moments over [d0, min(x, d1)) of f_hat e^{-+ k0 nu_m s}."""
        if x < params.a:
            raise ValueError("moments are defined for x >= a")
        p = abs(q) / params.k0  # nu_m depends on q^2 only
        _, _, nu_m = nus(p, params)
        u = params.k0 * nu_m
        anchor = min(x, self.d1)
        phase = complex(self.center_phase(q))
        minus = 0j
        plus = 0j
        for part in self.parts:
            for t in part.terms:
                yv = complex(t.y_hat(q))
                minus += yv * complex(
                    t.x_profile.exp_moment(np.asarray(-u), self.d0, x, self.d0, "direct")
                )
                plus += yv * complex(
                    t.x_profile.exp_moment(np.asarray(u), self.d0, x, anchor, "direct")
                )
        sc_minus = ScaledComplex(minus * phase * np.exp(-1j * u.imag * self.d0), -u.real * self.d0)
        sc_plus = ScaledComplex(plus * phase * np.exp(1j * u.imag * anchor), u.real * anchor)
        return MomentIntegrals(minus=sc_minus.normalized(), plus=sc_plus.normalized())

    def f_hat(self, x: float, q: float):
        out = 0j
        for part in self.parts:
            for t in part.terms:
                out += complex(t.y_hat(q)) * float(t.x_profile(x))
        return out * complex(self.center_phase(q))

    def spatial_density(self, x: float, y: float) -> float:
        out = 0.0
        for part in self.parts:
            for t in part.terms:
                if t.y_spatial is None:
                    raise NotImplementedError(f"{self.kind} has no pointwise density")
                out += float(t.x_profile(x)) * float(t.y_spatial(y - self.y_center))
        return out

    def l2_norm(self) -> float:
        raise NotImplementedError


def _validate_support(params: Params, d0: float, d1: float):
    if not d0 > params.a:
        raise ValueError(f"source support must start right of the slab: d0={d0} <= a={params.a}")
    if not d1 >= d0:
        raise ValueError(f"need d1 >= d0, got ({d0}, {d1})")


# -- dipole ------------------------------------------------------------------


class Dipole(Source):
    kind = "dipole"

    def __init__(self, params: Params, x0: float, y0: float = 0.0, moment=(1.0, 0.0)):
        _validate_support(params, x0, x0)
        self.x0 = float(x0)
        self.y0 = float(y0)
        self.dx, self.dy = float(moment[0]), float(moment[1])
        self.d0 = self.d1 = self.x0
        self.y_center = self.y0
        parts = []
        if self.dx != 0.0:
            parts.append(
                Part(parity=+1, terms=[Term(_DeltaPrimeProfile(self.x0), ConstYHat(self.dx))])
            )
        if self.dy != 0.0:
            parts.append(
                Part(parity=-1, terms=[Term(_DeltaProfile(self.x0), LinearImagYHat(self.dy))])
            )
        self.parts = parts

    def i_scaled(self, p: float, params: Params) -> ScaledComplex:
        _, _, nu_m = nus(p, params)
        u = params.k0 * nu_m
        q = params.k0 * p
        mant = (self.dx * u + 1j * self.dy * q) * np.exp(-1j * u.imag * self.x0) * complex(
            self.center_phase(q)
        )
        return ScaledComplex(complex(mant), -u.real * self.x0).normalized()

    def f_hat(self, x: float, q: float) -> DipoleTransform:
        phase = complex(self.center_phase(q))
        return DipoleTransform(
            delta_weight=1j * q * self.dy * phase,
            delta_prime_weight=self.dx * phase,
            x0=self.x0,
        )

    def spatial_density(self, x: float, y: float):
        raise NotImplementedError("dipole density is distributional")

    def l2_norm(self) -> float:
        raise NotImplementedError("dipole has no L2 norm")

    def moment_bound(self, p: float, params: Params) -> float:
        """Polynomial envelope B(p): |I_p| e^{+gamma (d0/a) nu_m'} <= B."""
        g_over_a = params.gamma / params.a
        if p <= 1.0:
            return g_over_a * (abs(self.dx) * math.sqrt(1.0 - p * p) + abs(self.dy) * p)
        return g_over_a * (abs(self.dx) * math.sqrt(p * p - 1.0) + abs(self.dy) * p)


# -- separable extended sources ---------------------------------------------


class Bump(Source):
    """C * w(u(x)) * w(v(y)) with w(t) = t^3 (|t|-1)^3 on [-1, 1]."""

    kind = "bump"

    def __init__(
        self,
        params: Params,
        d0: float,
        d1: Optional[float] = None,
        h0: float = -1.0,
        h1: float = 1.0,
        amplitude: float = 1.0e4,
    ):
        d1 = d0 + 2.0 if d1 is None else d1
        _validate_support(params, d0, d1)
        if not h1 > h0:
            raise ValueError("need h1 > h0")
        self.d0, self.d1 = float(d0), float(d1)
        self.h0, self.h1 = float(h0), float(h1)
        self.amplitude = float(amplitude)
        self.y_center = 0.5 * (h0 + h1)
        self.x_poly = cubic_bump(self.d0, self.d1, amplitude=self.amplitude)
        half = 0.5 * (h1 - h0)
        self.y_poly = cubic_bump(-half, half)  # centered; odd
        self.parts = [
            Part(
                parity=-1,
                terms=[Term(_PolyProfile(self.x_poly), PolyTransformYHat(self.y_poly), self.y_poly)],
            )
        ]

    def l2_norm(self) -> float:
        ix = self.x_poly.product_integral(self.x_poly)
        iy = self.y_poly.product_integral(self.y_poly)
        return math.sqrt(ix * iy)


class SincBust(Source):
    """f_hat = -i chi(x) sinc(alpha1 q) sin(alpha2 q); I vanishes at both roots."""

    kind = "sinc-bust"

    def __init__(self, params: Params, d0: float, d1: Optional[float] = None):
        d1 = d0 + 2.0 if d1 is None else d1
        _validate_support(params, d0, d1)
        roots = find_roots(params.gamma)
        if roots.status is not RootStatus.TWO_ROOTS:
            raise RootStatusError(
                f"resonance-free design needs two roots; gamma={params.gamma:.6g} "
                f"gave {roots.status.value}"
            )
        self.d0, self.d1 = float(d0), float(d1)
        self.alpha1 = math.pi / (params.k0 * roots.p1)
        self.alpha2 = math.pi / (params.k0 * roots.p2)
        self.roots = roots
        a1, a2 = self.alpha1, self.alpha2
        # spatial y-factor: two opposite-sign blocks of height 1/(4 alpha1)
        h = 1.0 / (4.0 * a1)
        self.y_poly = PiecewisePoly(
            [-a1 - a2, -a1 + a2, a1 - a2, a1 + a2],
            [np.polynomial.Polynomial([-h]), np.polynomial.Polynomial([0.0]), np.polynomial.Polynomial([h])],
        )

        x_pp = PiecewisePoly.indicator(self.d0, self.d1)
        self.parts = [
            Part(parity=-1, terms=[Term(_PolyProfile(x_pp), SincSinYHat(a1, a2), self.y_poly)])
        ]

    def l2_norm(self) -> float:
        return math.sqrt((self.d1 - self.d0) * self.alpha2 / (4.0 * self.alpha1**2))


class _BesselConvolution:
    """(f0 * f1)(y): convolution of the two inverse transforms of J0, J1.

    f0(t) = 1/(pi sqrt(b0^2-t^2)), f1(s) = -s/(b1 pi sqrt(b1^2-s^2)); the
    angle substitution t = b0 sin(theta) removes the f0 singularity and the
    integration is split at the points where f1's own endpoints cross.
    """

    def __init__(self, beta0: float, beta1: float, n_nodes: int = 96):
        self.beta0 = beta0
        self.beta1 = beta1
        x, w = roots_legendre(n_nodes)
        self._gl = (x, w)

    def support(self):
        return self.beta0 + self.beta1

    def _f1(self, s):
        s = np.asarray(s, dtype=float)
        inside = np.abs(s) < self.beta1
        out = np.zeros_like(s)
        rad = np.sqrt(np.maximum(self.beta1**2 - s * s, 0.0))
        np.divide(-s, self.beta1 * math.pi * rad, out=out, where=inside & (rad > 0))
        return out

    def __call__(self, y: float) -> float:
        y = float(y)
        if abs(y) >= self.support():
            return 0.0
        cuts = [-0.5 * math.pi, 0.5 * math.pi]
        for s_sing in (y - self.beta1, y + self.beta1):
            c = s_sing / self.beta0
            if -1.0 < c < 1.0:
                cuts.append(math.asin(c))
        cuts = sorted(set(cuts))
        x, w = self._gl
        total = 0.0
        for a, b in zip(cuts[:-1], cuts[1:]):
            if b - a < 1e-15:
                continue
            mid_s = y - self.beta0 * math.sin(0.5 * (a + b))
            if abs(mid_s) >= self.beta1:
                continue
            # theta = a + (b-a) sin^2(phi) soaks up inverse-sqrt endpoints
            phi = 0.25 * math.pi * (x + 1.0)
            theta = a + (b - a) * np.sin(phi) ** 2
            jac = (b - a) * np.sin(2.0 * phi) * 0.25 * math.pi
            total += float(np.sum(w * self._f1(y - self.beta0 * np.sin(theta)) * jac))
        return total / math.pi


class BesselBust(Source):
    """f_hat = i chi(x) J0(beta0 q) J1(beta1 q), betas pinned to the roots.

    The i factor pairs the transform with the real convolution density
    (f0*f1); it does not move the zeros.
    """

    kind = "bessel-bust"

    def __init__(self, params: Params, d0: float, d1: Optional[float] = None):
        d1 = d0 + 2.0 if d1 is None else d1
        _validate_support(params, d0, d1)
        roots = find_roots(params.gamma)
        if roots.status is not RootStatus.TWO_ROOTS:
            raise RootStatusError(
                f"resonance-free design needs two roots; gamma={params.gamma:.6g} "
                f"gave {roots.status.value}"
            )
        self.d0, self.d1 = float(d0), float(d1)
        j0_first = float(jn_zeros(0, 1)[0])
        j1_first = float(jn_zeros(1, 1)[0])
        self.beta0 = j0_first / (params.k0 * roots.p1)
        self.beta1 = j1_first / (params.k0 * roots.p2)
        self.roots = roots
        self.convolution = _BesselConvolution(self.beta0, self.beta1)

        x_pp = PiecewisePoly.indicator(self.d0, self.d1)
        self.parts = [
            Part(
                parity=-1,
                terms=[Term(_PolyProfile(x_pp), BesselYHat(self.beta0, self.beta1), self.convolution)],
            )
        ]

    def l2_norm(self) -> float:
        # Parseval in y: block dq integration plus the asymptotic-mean tail
        b0, b1 = self.beta0, self.beta1
        q_block = 50.0 / max(b0, b1)
        acc = 0.0
        q_lo = 0.0
        for _ in range(200):
            qs = np.linspace(q_lo, q_lo + q_block, 4001)
            vals = (bessel_j0(b0 * qs) * bessel_j1(b1 * qs)) ** 2
            block = float(np.trapezoid(vals, qs))
            acc += block
            q_lo += q_block
            if block < 1e-9 * acc:
                break
        tail = 1.0 / (math.pi**2 * b0 * b1 * q_lo)
        return math.sqrt((self.d1 - self.d0) * (acc + tail) / math.pi)


class CurrentSource(Source):
    """Divergence-free current realization; f = -mu0 (r1'' t2 + r1 t2'').

    t2 is the five-fold box spline with transform sinc^3(a1 q) sinc^2(a2 q),
    so f_hat has zeros of orders 3 and 2 at the two resonance wavenumbers
    and the current components stay continuously differentiable.
    """

    kind = "current"

    def __init__(
        self, params: Params, d0: float, d1: Optional[float] = None, amplitude: float = 1.0e3
    ):
        d1 = d0 + 2.0 if d1 is None else d1
        _validate_support(params, d0, d1)
        roots = find_roots(params.gamma)
        if roots.status is not RootStatus.TWO_ROOTS:
            raise RootStatusError(
                f"resonance-free design needs two roots; gamma={params.gamma:.6g} "
                f"gave {roots.status.value}"
            )
        self.d0, self.d1 = float(d0), float(d1)
        self.amplitude = float(amplitude)
        self.alpha1 = math.pi / (params.k0 * roots.p1)
        self.alpha2 = math.pi / (params.k0 * roots.p2)
        self.roots = roots
        self.r1 = cubic_bump(self.d0, self.d1, amplitude=self.amplitude)
        self.r1_d = self.r1.derivative()
        self.r1_dd = self.r1_d.derivative()
        self.t2 = box_spline([self.alpha1] * 3 + [self.alpha2] * 2)
        self.t2_d = self.t2.derivative()
        self.t2_dd = self.t2_d.derivative()
        a1, a2 = self.alpha1, self.alpha2
        self.parts = [
            Part(
                parity=+1,
                terms=[
                    Term(_PolyProfile(self.r1_dd.scale(-1.0)), SmoothCurrentYHat(a1, a2), self.t2),
                    Term(
                        _PolyProfile(self.r1.scale(-1.0)),
                        SmoothCurrentYHat(a1, a2, second_derivative=True),
                        self.t2_dd,
                    ),
                ],
            )
        ]

    def current_components(self, x: float, y: float):
        """(J_x, J_y) = (r1 t2', -r1' t2); exactly divergence-free."""
        yc = y - self.y_center
        return (
            float(self.r1(x)) * float(self.t2_d(yc)),
            -float(self.r1_d(x)) * float(self.t2(yc)),
        )

    def l2_norm(self) -> float:
        ix_dd = self.r1_dd.product_integral(self.r1_dd)
        ix_cross = self.r1_dd.product_integral(self.r1)
        ix = self.r1.product_integral(self.r1)
        iy = self.t2.product_integral(self.t2)
        iy_cross = self.t2.product_integral(self.t2_dd)
        iy_dd = self.t2_dd.product_integral(self.t2_dd)
        val = MU0**2 * (ix_dd * iy + 2.0 * ix_cross * iy_cross + ix * iy_dd)
        return math.sqrt(max(val, 0.0))


def make_source(kind: str, params: Params, **kwargs) -> Source:
    kind = kind.lower()
    if kind == "dipole":
        return Dipole(params, **kwargs)
    if kind == "bump":
        return Bump(params, **kwargs)
    if kind == "sinc-bust":
        return SincBust(params, **kwargs)
    if kind == "bessel-bust":
        return BesselBust(params, **kwargs)
    if kind == "current":
        return CurrentSource(params, **kwargs)
    raise ValueError(f"unknown source kind {kind!r}")
