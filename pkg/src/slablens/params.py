"""Slab geometry and material parameters.

The slab occupies 0 < x < a with permittivity -1 - i*delta; both half-spaces
outside it have permittivity 1.  The x < 0 region is tagged C, the slab S,
and x > a (where every source lives) M.  All lengths are in units where the
default slab width is a = 1; the single dimensionless control parameter is
gamma = k0 * a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

REGION_C = "C"
REGION_S = "S"
REGION_M = "M"


@dataclass(frozen=True)
class Params:
    k0: float
    delta: float
    a: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.a) and self.a > 0):
            raise ValueError(f"slab width a must be positive, got {self.a}")
        if not (math.isfinite(self.k0) and self.k0 > 0):
            raise ValueError(f"wavenumber k0 must be positive, got {self.k0}")
        # delta = 0 is accepted as the loss-free limit used by dispersion
        # analysis; field and energy evaluations require delta > 0.
        if not (math.isfinite(self.delta) and 0.0 <= self.delta < 1.0):
            raise ValueError(f"loss delta must lie in [0, 1), got {self.delta}")

    @classmethod
    def from_gamma(cls, gamma: float, delta: float, a: float = 1.0) -> "Params":
        return cls(k0=gamma / a, delta=delta, a=a)

    @property
    def gamma(self) -> float:
        """k0 * a, recomputed so it can never drift from its factors."""
        return self.k0 * self.a

    def region(self, x: float) -> str:
        if x < 0.0:
            return REGION_C
        if x <= self.a:
            return REGION_S
        return REGION_M

    def permittivity(self, region: str) -> complex:
        if region == REGION_S:
            return complex(-1.0, -self.delta)
        if region in (REGION_C, REGION_M):
            return 1.0 + 0j
        raise ValueError(f"unknown region {region!r}")

    def permittivity_at(self, x: float) -> complex:
        return self.permittivity(self.region(x))
