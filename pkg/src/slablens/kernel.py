"""Per-mode transform-domain quantities for the lossy slab.

Everything here is a function of the dimensionless transverse wavenumber
p = q/k0 (p >= 0).  The three vertical wavenumbers are

    nu_c = nu_m = principal_sqrt(p^2 - 1),     nu_s = principal_sqrt(p^2 + 1 + i*delta),

principal meaning argument in (-pi, pi], hence Re >= 0.  The dispersion
denominator

    g_delta = [nu_s - (1+i*delta)*nu_m]^2 - [nu_s + (1+i*delta)*nu_m]^2 * exp(-2*gamma*nu_s)

is O(delta) near its loss-free roots while built from O(1) terms, so it is
evaluated in compensated (double-double) arithmetic end to end.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import compensated as cp
from .params import Params
from .scaled import ScaledComplex

# Half-width of the |p - 1| band evaluated through the nu_m -> 0 limit
# formulas; below this, direct division by nu_m loses over half the mantissa.
EPS_SWITCH = 1e-8


class DomainError(ValueError):
    pass


def principal_sqrt(z) -> complex:
    """Square root with argument halved from (-pi, pi]; Re(result) >= 0.

    Negative reals map to +i*sqrt(|z|) regardless of the sign of a zero
    imaginary part.
    """
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"non-finite argument {z!r}")
    if z.imag == 0.0:
        z = complex(z.real, 0.0)  # strip -0.0 so the cut lands on theta = +pi
    return cmath.sqrt(z)


def principal_sqrt_array(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    z = np.where(z.imag == 0.0, z.real + 0.0j, z)
    return np.sqrt(z)


def nus(p: float, params: Params):
    """(nu_c, nu_s, nu_m) at p; nu_c and nu_m are the same object."""
    p = float(p)
    if not (math.isfinite(p) and p >= 0.0):
        raise DomainError(f"p must be finite and >= 0, got {p}")
    nu_c = principal_sqrt(p * p - 1.0)
    nu_s = principal_sqrt(complex(p * p + 1.0, params.delta))
    return nu_c, nu_s, nu_c


def nus_arrays(p: np.ndarray, delta: float):
    p = np.asarray(p, dtype=float)
    nu_c = principal_sqrt_array(p * p - 1.0)
    nu_s = np.sqrt((p * p + 1.0) + 1j * delta)
    return nu_c, nu_s


def _g_delta_dd(p, gamma: float, delta: float):
    """g_delta as a complex double-double, elementwise over p."""
    p = np.asarray(p, dtype=float)
    s = cp.two_prod(p, p)
    sm1 = cp.dd_add(s, cp.dd(-1.0))
    sp1 = cp.dd_add(s, cp.dd(1.0))
    neg = sm1[0] < 0.0
    abs_sm1 = (np.where(neg, -sm1[0], sm1[0]), np.where(neg, -sm1[1], sm1[1]))
    nm = cp.dd_sqrt(abs_sm1)  # |nu_m|
    # nu_s = sqrt(sp1 + i*delta) via the real half-angle formulas
    mod = cp.dd_sqrt(cp.dd_add(cp.dd_sqr(sp1), cp.two_prod(delta, delta)))
    ns_re = cp.dd_sqrt(cp.dd_mul_d(cp.dd_add(sp1, mod), 0.5))
    ns_im = cp.dd_div(cp.dd(np.full_like(p, delta)), cp.dd_mul_d(ns_re, 2.0))
    # w = (1 + i*delta) * nu_m with nu_m real (p>=1) or i|nu_m| (p<1)
    dnm = cp.dd_mul_d(nm, delta)
    ge1 = ~neg
    w_re = (np.where(ge1, nm[0], -dnm[0]), np.where(ge1, nm[1], -dnm[1]))
    w_im = (np.where(ge1, dnm[0], nm[0]), np.where(ge1, dnm[1], nm[1]))
    a_c = (cp.dd_sub(ns_re, w_re), cp.dd_sub(ns_im, w_im))
    b_c = (cp.dd_add(ns_re, w_re), cp.dd_add(ns_im, w_im))
    z = (cp.dd_mul_d(ns_re, -2.0 * gamma), cp.dd_mul_d(ns_im, -2.0 * gamma))
    expo = cp.cdd_exp(z)
    return cp.cdd_sub(cp.cdd_sqr(a_c), cp.cdd_mul(cp.cdd_sqr(b_c), expo))


def g_delta(p: float, params: Params) -> complex:
    p = float(p)
    if not (math.isfinite(p) and p >= 0.0):
        raise DomainError(f"p must be finite and >= 0, got {p}")
    return complex(cp.cdd_to_complex(_g_delta_dd(p, params.gamma, params.delta)))


def g_delta_array(p: np.ndarray, params: Params) -> np.ndarray:
    return np.asarray(cp.cdd_to_complex(_g_delta_dd(p, params.gamma, params.delta)))


def g_zero(p: float, gamma: float) -> float:
    """Loss-free dispersion function, real-valued branch (p >= 1)."""
    p = float(p)
    if not (math.isfinite(p) and p >= 0.0):
        raise DomainError(f"p must be finite and >= 0, got {p}")
    if p < 1.0:
        raise DomainError("g_zero is real-valued only for p >= 1; use g_zero_complex")
    g = _g_delta_dd(p, gamma, 0.0)
    return float(g[0][0] + g[0][1])


def g_zero_array(p: np.ndarray, gamma: float) -> np.ndarray:
    g = _g_delta_dd(p, gamma, 0.0)
    return np.asarray(g[0][0] + g[0][1])


def g_zero_complex(p: float, gamma: float) -> complex:
    """Loss-free limit of g_delta for any p >= 0 (complex below p = 1)."""
    p = float(p)
    if not (math.isfinite(p) and p >= 0.0):
        raise DomainError(f"p must be finite and >= 0, got {p}")
    return complex(cp.cdd_to_complex(_g_delta_dd(p, gamma, 0.0)))


@dataclass(frozen=True)
class SpectralPoint:
    """All per-p coefficients; exponentially scaled entries carry ledgers.

    alpha is None on the |p-1| <= EPS_SWITCH band, where it diverges; the
    combinations that stay well defined there are exposed as properties.
    """

    p: float
    gamma: float
    nu_c: complex
    nu_s: complex
    nu_m: complex
    alpha: Optional[complex]
    R: complex
    psi_plus: ScaledComplex
    psi_minus: ScaledComplex
    g_delta: complex
    A: Optional[ScaledComplex]
    eps_slab: complex

    @property
    def A_over_alpha(self) -> Optional[ScaledComplex]:
        """A/alpha; finite through the nu_c -> 0 degeneracy."""
        if self.A is None:
            return None
        return self.A * (self.eps_slab * self.nu_c / self.nu_s)

    @property
    def nu_m_psi_plus_plus_psi_minus(self) -> ScaledComplex:
        """nu_m*psi+ + psi-  =  e^{gamma nu_s} g_delta / (2 nu_s eps_slab).

        The closed form has no nu_m division, so it stays well defined on
        the degenerate band.
        """
        return ScaledComplex(
            self.g_delta
            * cmath.exp(1j * self.gamma * self.nu_s.imag)
            / (2.0 * self.nu_s * self.eps_slab),
            self.gamma * self.nu_s.real,
        ).normalized()


def spectral_point(
    p: float, params: Params, i_scaled: Optional[ScaledComplex] = None
) -> SpectralPoint:
    """Assemble every transform-domain coefficient at p.

    i_scaled is the source moment I_p in scaled form; without it the
    source-independent quantities are returned and A is None.
    """
    nu_c, nu_s, nu_m = nus(p, params)
    g = g_delta(p, params)
    delta = params.delta
    gamma = params.gamma
    eps_slab = complex(-1.0, -delta)
    one_pd = complex(1.0, delta)

    if abs(p - 1.0) <= EPS_SWITCH:
        # nu_m -> 0 limit values throughout the band
        alpha: Optional[complex] = None
        R = 1.0 + 0j
        half_plus = 0.5 + 0j
    else:
        alpha = nu_s / (eps_slab * nu_c)
        R = (nu_s + one_pd * nu_m) / (nu_s - one_pd * nu_m)
        # (alpha+1)/(2 alpha) without dividing by nu_c
        half_plus = (nu_s - one_pd * nu_m) / (2.0 * nu_s)
    em2 = cmath.exp(-2.0 * gamma * nu_s)  # Re(nu_s) > 0, never overflows
    phase = cmath.exp(1j * gamma * nu_s.imag)
    psi_plus = ScaledComplex(half_plus * phase * (1.0 + R * em2), gamma * nu_s.real).normalized()
    psi_minus = ScaledComplex(
        (nu_s / eps_slab) * half_plus * phase * (1.0 - R * em2), gamma * nu_s.real
    ).normalized()

    A = None
    if i_scaled is not None:
        if alpha is None:
            # nu_m -> 0 limit: outgoing closure pins A = I/(k0 psi-)
            A = (i_scaled / (params.k0 * psi_minus)).normalized()
        else:
            # A = 2 eps_slab nu_s I e^{gamma(nu_m - nu_s)} / (k0 g); exact
            # algebra for I e^{gamma nu_m} / (k0 (nu_m psi+ + psi-))
            mant = (
                2.0
                * eps_slab
                * nu_s
                * i_scaled.mantissa
                * cmath.exp(1j * gamma * (nu_m.imag - nu_s.imag))
                / (params.k0 * g)
            )
            A = ScaledComplex(
                mant, i_scaled.log_scale + gamma * (nu_m.real - nu_s.real)
            ).normalized()

    return SpectralPoint(
        p=float(p),
        gamma=gamma,
        nu_c=nu_c,
        nu_s=nu_s,
        nu_m=nu_m,
        alpha=alpha,
        R=R,
        psi_plus=psi_plus,
        psi_minus=psi_minus,
        g_delta=g,
        A=A,
        eps_slab=eps_slab,
    )
