"""Overflow-safe complex values carried as (mantissa, natural-log scale) pairs.

Spectral factors like exp(2*gamma*nu_m'*a) overflow doubles long before the
formulas they enter become ill-defined, so every exponential in the solver is
tracked as ``value = mantissa * exp(log_scale)`` and only collapsed to a
plain complex at the end, when the combination is known to be representable.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

_MANT_LO = 1e-2
_MANT_HI = 1e2


@dataclass(frozen=True)
class ScaledComplex:
    """value = mantissa * exp(log_scale); zero iff mantissa == 0."""

    mantissa: complex
    log_scale: float = 0.0

    @staticmethod
    def from_complex(z) -> "ScaledComplex":
        return ScaledComplex(complex(z), 0.0).normalized()

    @staticmethod
    def from_exp(z) -> "ScaledComplex":
        """exp(z) for complex z, phase kept in the mantissa."""
        z = complex(z)
        return ScaledComplex(cmath.exp(1j * z.imag), z.real)

    @staticmethod
    def zero() -> "ScaledComplex":
        return ScaledComplex(0j, 0.0)

    def normalized(self) -> "ScaledComplex":
        m = self.mantissa
        if m == 0:
            return ScaledComplex(0j, 0.0)
        am = abs(m)
        if _MANT_LO <= am <= _MANT_HI and math.isfinite(self.log_scale):
            return self
        return ScaledComplex(m / am, self.log_scale + math.log(am))

    @property
    def value(self) -> complex:
        """Collapse to a plain complex; raises OverflowError if unrepresentable."""
        if self.mantissa == 0:
            return 0j
        return self.mantissa * math.exp(self.log_scale)

    def log_abs(self) -> float:
        if self.mantissa == 0:
            return -math.inf
        return self.log_scale + math.log(abs(self.mantissa))

    def abs(self) -> "ScaledComplex":
        return ScaledComplex(abs(self.mantissa), self.log_scale)

    def conjugate(self) -> "ScaledComplex":
        return ScaledComplex(self.mantissa.conjugate(), self.log_scale)

    def __mul__(self, other) -> "ScaledComplex":
        if isinstance(other, ScaledComplex):
            return ScaledComplex(
                self.mantissa * other.mantissa, self.log_scale + other.log_scale
            ).normalized()
        return ScaledComplex(self.mantissa * complex(other), self.log_scale).normalized()

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ScaledComplex":
        if isinstance(other, ScaledComplex):
            return ScaledComplex(
                self.mantissa / other.mantissa, self.log_scale - other.log_scale
            ).normalized()
        return ScaledComplex(self.mantissa / complex(other), self.log_scale).normalized()

    def __add__(self, other) -> "ScaledComplex":
        if not isinstance(other, ScaledComplex):
            other = ScaledComplex.from_complex(other)
        if self.mantissa == 0:
            return other.normalized()
        if other.mantissa == 0:
            return self.normalized()
        # rescale onto the larger exponent; the smaller side underflows harmlessly
        if self.log_scale >= other.log_scale:
            big, small = self, other
        else:
            big, small = other, self
        shift = small.log_scale - big.log_scale
        m = big.mantissa + small.mantissa * (math.exp(shift) if shift > -745 else 0.0)
        return ScaledComplex(m, big.log_scale).normalized()

    def __radd__(self, other) -> "ScaledComplex":
        return self.__add__(other)

    def __sub__(self, other) -> "ScaledComplex":
        if not isinstance(other, ScaledComplex):
            other = ScaledComplex.from_complex(other)
        return self.__add__(ScaledComplex(-other.mantissa, other.log_scale))

    def __neg__(self) -> "ScaledComplex":
        return ScaledComplex(-self.mantissa, self.log_scale)
