"""Root structure of the loss-free dispersion function and the critical gamma.

Everything is driven through G0(s; gamma) = s + sqrt(s^2-1) - exp(gamma*sqrt(s+1))
in the variable s = p^2: its zeros coincide with those of g_zero, it is concave
for s > 1 once gamma >= sqrt(e)/(e+1), and its maximum over s > 1 changes sign
at the critical value gamma_star ~ 0.9373.  Below gamma_star there are exactly
two simple roots 1 < p1 < p2; above there are none.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .kernel import DomainError, g_delta, g_zero_array, principal_sqrt
from .params import Params

# gamma >= sqrt(e)/(e+1): G0 concave for s > 1 (unique interior maximum)
CONCAVITY_GAMMA = math.sqrt(math.e) / (math.e + 1.0)
# gamma > 1/sqrt(2): concavity holds with no interval argument needed
STRICT_CONCAVITY_GAMMA = 1.0 / math.sqrt(2.0)

# roots closer to the fold than this (relative to gamma_star) are flagged,
# not refined; they become numerically indistinguishable there
FOLD_BAND = 1e-4


class RootStatus(str, Enum):
    TWO_ROOTS = "TwoRoots"
    NO_ROOTS = "NoRoots"
    DOUBLE_ROOT_NEAR = "DoubleRootNear"


class RootStatusError(RuntimeError):
    """Raised when an operation needs roots that do not exist at this gamma."""


@dataclass(frozen=True)
class RootPair:
    gamma: float
    p1: float
    p2: float
    status: RootStatus


@dataclass(frozen=True)
class GammaStarResult:
    gamma_star: float
    bracket: Tuple[float, float]
    inner_max_location: float


@dataclass(frozen=True)
class ConjectureSample:
    delta: float
    gamma: float
    root_index: int
    g_ratio: float
    m_value: float


def G0(s: float, gamma: float) -> complex:
    """s + sqrt(s^2 - 1) - exp(gamma*sqrt(s+1)); complex for s < 1."""
    s = float(s)
    if not (math.isfinite(s) and s >= 0.0):
        raise DomainError(f"s must be finite and >= 0, got {s}")
    if gamma <= 0.0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    return s + principal_sqrt(s * s - 1.0) - math.exp(gamma * math.sqrt(s + 1.0))


def _G0_real(s, gamma: float):
    """Real branch for s >= 1, vectorized; -inf once the exponential overflows."""
    s = np.asarray(s, dtype=float)
    with np.errstate(over="ignore"):
        e = np.exp(gamma * np.sqrt(s + 1.0))
    return s + np.sqrt(np.maximum(s * s - 1.0, 0.0)) - e


def _dG0_ds(s: float, gamma: float) -> float:
    rt = math.sqrt(s * s - 1.0)
    return 1.0 + s / rt - 0.5 * gamma * math.exp(gamma * math.sqrt(s + 1.0)) / math.sqrt(s + 1.0)


def _d2G0_ds2(s: float, gamma: float) -> float:
    u = math.sqrt(s + 1.0)
    return -((s * s - 1.0) ** -1.5) - gamma * math.exp(gamma * u) * (gamma * u - 1.0) / (
        4.0 * u**3
    )


def _search_smax(gamma: float) -> float:
    """Geometric growth until G0 < -10 and decreasing over 3 doublings."""
    s = 2.0
    prev = _G0_real(s, gamma)
    streak = 0
    while streak < 3:
        s *= 2.0
        cur = _G0_real(s, gamma)
        streak = streak + 1 if (cur < -10.0 and cur < prev) else 0
        prev = cur
        if s > 1e200:  # unreachable for gamma > 0; defensive stop
            break
    return s


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_max(f, lo: float, hi: float, tol: float) -> float:
    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while (b - a) > tol * max(1.0, abs(a) + abs(b)):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
    return 0.5 * (a + b)


def g0_peak(gamma: float) -> Tuple[float, float]:
    """(s_peak, G0(s_peak)) for the interior maximum of G0 on s > 1.

    Golden section plus a few Newton polish steps on dG0/ds; for small gamma
    (below the concavity threshold) a grid argmax seeds the local search.
    """
    smax = _search_smax(gamma)
    lo = 1.0 + 1e-12
    if gamma < CONCAVITY_GAMMA:
        grid = np.geomspace(lo, smax, 512)
        k = int(np.argmax(_G0_real(grid, gamma)))
        lo = grid[max(k - 1, 0)]
        hi = grid[min(k + 1, len(grid) - 1)]
    else:
        hi = smax
    s = _golden_max(lambda t: _G0_real(t, gamma), lo, hi, 1e-12)
    for _ in range(3):
        d2 = _d2G0_ds2(s, gamma)
        if d2 == 0.0:
            break
        step = _dG0_ds(s, gamma) / d2
        if not math.isfinite(step):
            break
        s_new = s - step
        if s_new <= 1.0:
            break
        s = s_new
    return s, float(_G0_real(s, gamma))


@lru_cache(maxsize=1)
def gamma_star() -> GammaStarResult:
    """Critical gamma: the sign change of max_{s>1} G0(s; gamma)."""
    lo, hi = 0.85, 1.05
    flo, fhi = g0_peak(lo)[1], g0_peak(hi)[1]
    while flo <= 0.0:
        lo -= 0.1
        flo = g0_peak(lo)[1]
    while fhi >= 0.0:
        hi += 0.1
        fhi = g0_peak(hi)[1]
    while hi - lo > 1e-6:
        mid = 0.5 * (lo + hi)
        if g0_peak(mid)[1] > 0.0:
            lo = mid
        else:
            hi = mid
    gs = 0.5 * (lo + hi)
    return GammaStarResult(gamma_star=gs, bracket=(lo, hi), inner_max_location=g0_peak(gs)[0])


def find_roots(gamma: float) -> RootPair:
    """Locate the zeros of g_zero(., gamma) above p = 1 in the s = p^2 variable."""
    if not (math.isfinite(gamma) and gamma > 0.0):
        raise DomainError(f"gamma must be positive, got {gamma}")
    gs = gamma_star().gamma_star
    if abs(gamma - gs) <= FOLD_BAND * gs:
        s_peak, _ = g0_peak(gamma)
        p = math.sqrt(s_peak)
        return RootPair(gamma=gamma, p1=p, p2=p, status=RootStatus.DOUBLE_ROOT_NEAR)

    s_peak, g_peak = g0_peak(gamma)
    if g_peak <= 0.0:
        return RootPair(gamma=gamma, p1=math.nan, p2=math.nan, status=RootStatus.NO_ROOTS)

    smax = _search_smax(gamma)
    f = lambda s: float(_G0_real(s, gamma))
    # G0(1) = 1 - exp(sqrt(2) gamma) < 0 and G0 -> -inf: one root each side of the peak
    s1 = brentq(f, 1.0 + 1e-13, s_peak, xtol=1e-300, rtol=8.9e-16)
    hi = smax
    while not (f(hi) < 0.0):
        hi *= 2.0
    s2 = brentq(f, s_peak, hi, xtol=1e-300, rtol=8.9e-16)
    return RootPair(
        gamma=gamma, p1=math.sqrt(s1), p2=math.sqrt(s2), status=RootStatus.TWO_ROOTS
    )


def lambda_gamma(params: Params) -> float:
    """Resonant oscillation wavelength 2*pi/(k0*p2)."""
    roots = find_roots(params.gamma)
    gs = gamma_star().gamma_star
    if roots.status is RootStatus.NO_ROOTS or (
        roots.status is RootStatus.DOUBLE_ROOT_NEAR and params.gamma >= gs
    ):
        raise RootStatusError(
            f"no resonance roots at gamma={params.gamma:.6g} >= gamma_star={gs:.6g}"
        )
    return 2.0 * math.pi / (params.k0 * roots.p2)


def conjecture_scan(
    delta_grid: Sequence[float], gamma_grid: Sequence[float], a: float = 1.0
) -> List[ConjectureSample]:
    """|g_delta|/delta and the numerator factor M at both roots over a grid.

    Both quantities stay bounded (and nearly delta-independent) as delta
    shrinks, which is what makes the resonant integrand scale as delta^-2.
    """
    from .energy import m_factor  # local import; energy depends on this module

    out: List[ConjectureSample] = []
    for gamma in gamma_grid:
        roots = find_roots(gamma)
        if roots.status is not RootStatus.TWO_ROOTS:
            raise RootStatusError(
                f"conjecture scan needs two roots; gamma={gamma:.6g} gave {roots.status.value}"
            )
        for delta in delta_grid:
            params = Params.from_gamma(gamma, delta, a=a)
            for idx, p in ((1, roots.p1), (2, roots.p2)):
                ratio = abs(g_delta(p, params)) / delta
                m_val = m_factor(p, params, params.a)
                out.append(
                    ConjectureSample(
                        delta=delta, gamma=gamma, root_index=idx, g_ratio=ratio, m_value=m_val
                    )
                )
    return out


# -- proof-constant reproduction and inequality audit ----------------------


def proof_constants() -> dict:
    """Numerical values of the closed-form constants in the root analysis."""
    e = math.e
    gs = gamma_star().gamma_star
    # max over [sqrt(e)/(e+1), 1/sqrt(2)] of e*g*(g^-2 - 2)^{3/2} (1 - sqrt(2) g)
    grid = np.linspace(CONCAVITY_GAMMA, STRICT_CONCAVITY_GAMMA, 20001)
    vals = e * grid * np.maximum(grid**-2 - 2.0, 0.0) ** 1.5 * (1.0 - math.sqrt(2.0) * grid)
    concavity_margin_numeric = float(vals.max())
    concavity_margin_closed = (
        (e**2 + 1.0) ** 1.5 * (e - math.sqrt(2.0 * e) + 1.0) / (e + 1.0) ** 2
    )
    g2_slope = (CONCAVITY_GAMMA / (2.0 * math.sqrt(2.0))) * math.exp(
        math.sqrt(2.0) * CONCAVITY_GAMMA
    )
    envelope = ((4.0 + 0.4**2) ** 0.25 + math.sqrt(1.0 + 0.4**2)) * math.exp(-gs)
    corner = 1.0 - (e + 1.0) * CONCAVITY_GAMMA**2 + math.sqrt(1.0 - 2.0 * CONCAVITY_GAMMA**2)
    return {
        "concavity_gamma": CONCAVITY_GAMMA,
        "strict_concavity_gamma": STRICT_CONCAVITY_GAMMA,
        "concavity_margin_numeric": concavity_margin_numeric,
        "concavity_margin_closed": concavity_margin_closed,
        "g2_slope_at_one": g2_slope,
        "small_p_envelope": envelope,
        "corner_value_scaled": corner,
    }


@dataclass(frozen=True)
class BoundViolation:
    bound: str
    p: float
    delta: float
    gamma: float
    lhs: float
    rhs: float


@dataclass
class BoundsAuditReport:
    n_samples: int
    checked: dict = field(default_factory=dict)
    violations: List[BoundViolation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _uv(p):
    return np.sqrt(p * p + 1.0), np.sqrt(np.maximum(p * p - 1.0, 0.0))


def _delta_gamma_surrogate(gamma: float) -> float:
    """min{0.4, (m/M)^2} with m, M taken over [1, p_tilde] as in the tail split."""
    p = np.linspace(1.0, 60.0, 4001)
    u, v = _uv(p)
    rhs = 0.5 * (u - v) ** 2 - (0.5 + 3.0 * math.sqrt(0.4)) * (u + v) ** 2 * np.exp(
        -2.0 * gamma * u
    )
    # p_tilde: beyond the last sign change the expression stays positive
    neg = np.nonzero(rhs <= 0.0)[0]
    p_tilde = p[neg[-1] + 1] if len(neg) else 1.0
    mask = p <= max(p_tilde, 1.0 + 1e-9)
    pm = p[mask] if mask.any() else p[:2]
    um, vm = _uv(pm)
    g0_half = 0.5 * np.abs(g_zero_array(pm, gamma))
    m_small = float(g0_half.min())
    m_big = float((3.0 * (um + vm) ** 2 * np.exp(-2.0 * gamma * um)).max())
    return min(0.4, (m_small / m_big) ** 2)


def bounds_audit(n_samples: int, seed: int = 20240817) -> BoundsAuditReport:
    """Sample the closed-form inequalities used by the bounded-energy proofs.

    Each failed sample is reported with its (p, delta, gamma) witness; a
    healthy run returns an empty violation list.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    from .energy import m_factor  # local import to avoid a module cycle

    rng = np.random.default_rng(seed)
    gs = gamma_star().gamma_star
    report = BoundsAuditReport(n_samples=n_samples)

    def record(bound, mask_bad, p, delta, gamma, lhs, rhs):
        report.checked[bound] = report.checked.get(bound, 0) + len(np.atleast_1d(mask_bad))
        for i in np.nonzero(np.atleast_1d(mask_bad))[0]:
            report.violations.append(
                BoundViolation(
                    bound=bound,
                    p=float(np.atleast_1d(p)[i]),
                    delta=float(np.atleast_1d(delta)[i]),
                    gamma=float(np.atleast_1d(gamma)[i]),
                    lhs=float(np.atleast_1d(lhs)[i]),
                    rhs=float(np.atleast_1d(rhs)[i]),
                )
            )

    # first-difference lower bound (gamma-free)
    n = n_samples
    p = rng.uniform(0.0, 10.0, n)
    delta = rng.uniform(1e-6, 1.0 - 1e-6, n)
    u, v = _uv(p)
    nu_s = np.sqrt((p * p + 1.0) + 1j * delta)
    nu_m = np.where(p >= 1.0, v + 0j, 1j * np.sqrt(np.maximum(1.0 - p * p, 0.0)))
    first = np.abs(nu_s - (1.0 + 1j * delta) * nu_m) ** 2
    rhs = np.where(p <= 1.0, 1.0, (u - v) ** 2)
    record("first_term_lower", first < rhs * (1.0 - 1e-12), p, delta, gamma=np.full(n, math.nan), lhs=first, rhs=rhs)

    # second-term upper bounds, small-p branch (the ~0.9813 envelope)
    p = rng.uniform(0.0, 1.0, n)
    delta = rng.uniform(1e-6, 0.4, n)
    gamma = rng.uniform(gs, 4.0, n)
    nu_s = np.sqrt((p * p + 1.0) + 1j * delta)
    nu_m = 1j * np.sqrt(1.0 - p * p)
    lhs = np.abs(nu_s + (1.0 + 1j * delta) * nu_m) * np.exp(-gamma * nu_s.real)
    envelope = proof_constants()["small_p_envelope"]
    record("second_term_upper_small_p", lhs > envelope + 1e-3, p, delta, gamma, lhs, np.full(n, envelope))

    # second-term upper bound, large-p branch
    p = rng.uniform(1.0, 10.0, n)
    delta = rng.uniform(1e-6, 1.0 - 1e-6, n)
    gamma = rng.uniform(gs, 4.0, n)
    u, v = _uv(p)
    nu_s = np.sqrt((p * p + 1.0) + 1j * delta)
    lhs = np.abs(nu_s + (1.0 + 1j * delta) * v) ** 2 * np.exp(-2.0 * gamma * nu_s.real)
    rhs = (1.0 + 3.0 * np.sqrt(delta)) * (u + v) ** 2 * np.exp(-2.0 * gamma * u)
    record("second_term_upper_large_p", lhs > rhs * (1.0 + 1e-12), p, delta, gamma, lhs, rhs)

    # |g_delta| lower bounds with the per-gamma delta surrogate
    n_gamma = max(4, min(24, n_samples // 16))
    gammas = rng.uniform(gs + 0.02, 4.0, n_gamma)
    per = max(1, n_samples // (2 * n_gamma))
    for gamma in gammas:
        dg = _delta_gamma_surrogate(float(gamma))
        ps = rng.uniform(0.0, 1.0, per)
        ds = rng.uniform(1e-8, 0.4, per)
        lhs = np.array([abs(g_delta(pp, Params.from_gamma(float(gamma), float(dd)))) for pp, dd in zip(ps, ds)])
        record("g_lower_small_p", lhs < 0.01 * (1.0 - 1e-9), ps, ds, np.full(per, gamma), lhs, np.full(per, 0.01))
        ps = rng.uniform(1.0, 10.0, per)
        ds = rng.uniform(min(1e-8, dg / 2), dg, per)
        lhs = np.array([abs(g_delta(pp, Params.from_gamma(float(gamma), float(dd)))) for pp, dd in zip(ps, ds)])
        rhs = 0.5 * np.abs(g_zero_array(ps, float(gamma)))
        record("g_lower_large_p", lhs < rhs * (1.0 - 1e-9), ps, ds, np.full(per, gamma), lhs, rhs)

    # numerator-factor envelope with a per-gamma constant assembled from
    # its own sub-term bounds
    for gamma in gammas[: max(2, n_gamma // 2)]:
        gamma = float(gamma)
        c1 = (1.0 - math.exp(-2.0 * gamma)) / 2.0
        pg = np.linspace(1.0, 40.0, 2000)
        ug, vg = _uv(pg)
        ratio = 4.0 * (ug + vg) ** 2 * np.exp(-2.0 * gamma * ug) / (ug - vg) ** 2
        c2 = c1 * max(0.99, float(ratio.max()))
        c3 = gamma * max(1.0, float((2.0 * (ug + vg) * np.exp(-2.0 * gamma * ug) / (ug - vg)).max()))
        c_gamma = ((1.0 + 0.4**2) / math.pi) * (c1 + c2 + 2.0 * c3)
        per2 = max(1, n_samples // (2 * max(2, n_gamma // 2)))
        ps = rng.uniform(0.0, 10.0, per2)
        ds = rng.uniform(1e-10, 0.4, per2)
        lhs = np.array(
            [m_factor(pp, Params.from_gamma(gamma, float(dd)), 1.0) for pp, dd in zip(ps, ds)]
        )
        uu, vv = _uv(ps)
        env = (((ps**2 + 1.0) ** 2 + 1.0) ** 0.25 + math.sqrt(2.0) * np.sqrt(np.abs(ps**2 - 1.0))) ** 2 * (
            np.sqrt((ps**2 + 1.0) ** 2 + 1.0) + ps**2
        )
        record("m_envelope", np.abs(lhs) > c_gamma * env * (1.0 + 1e-9), ps, ds, np.full(per2, gamma), np.abs(lhs), c_gamma * env)

    # positivity of the tail-split expression for gamma = 1.5 and 2 gamma_star
    for gamma in (1.5 * gs, 2.0 * gs):
        ps = np.linspace(1.0, 10.0, 2000)
        u, v = _uv(ps)
        rhs = 0.5 * (u - v) ** 2 - (0.5 + 3.0 * math.sqrt(0.4)) * (u + v) ** 2 * np.exp(-2.0 * gamma * u)
        record(
            "large_p_split_positive",
            rhs <= 0.0,
            ps,
            np.full_like(ps, 0.4),
            np.full_like(ps, gamma),
            rhs,
            np.zeros_like(ps),
        )

    return report
