"""Spectral solver for a lossy negative-permittivity slab lens.

The slab {0 < x < a} has permittivity -1 - i*delta between unit half-spaces;
sources live right of it.  The package computes the explicit transform-domain
solution, the dispersion function and its loss-free roots, the critical
frequency-width product where those roots disappear, strip energies and
their resonant blow-up, reconstructed field maps with the shielding and
anomalous-resonance regimes, and source designs whose spectra vanish at the
resonant wavenumbers.
"""

from .dispersion import (
    ConjectureSample,
    GammaStarResult,
    RootPair,
    RootStatus,
    RootStatusError,
    bounds_audit,
    conjecture_scan,
    find_roots,
    gamma_star,
    lambda_gamma,
    proof_constants,
)
from .energy import EnergyBreakdown, L_integrand, energy, energy_l2, m_factor, strip_energy_realspace
from .field import (
    FieldGrid,
    GridSpec,
    ResidualReport,
    SpectralSolver,
    dominant_wavenumber,
    field_map,
    reconstruct,
    residuals,
    v_hat,
)
from .kernel import (
    EPS_SWITCH,
    SpectralPoint,
    g_delta,
    g_zero,
    g_zero_complex,
    nus,
    principal_sqrt,
    spectral_point,
)
from .params import Params
from .quadrature import QuadConfig, QuadratureFailure
from .scaled import ScaledComplex
from .sources import (
    BesselBust,
    Bump,
    CurrentSource,
    Dipole,
    MomentIntegrals,
    SincBust,
    Source,
    make_source,
)

__all__ = [
    "BesselBust",
    "Bump",
    "ConjectureSample",
    "CurrentSource",
    "Dipole",
    "EnergyBreakdown",
    "EPS_SWITCH",
    "FieldGrid",
    "GammaStarResult",
    "GridSpec",
    "L_integrand",
    "MomentIntegrals",
    "Params",
    "QuadConfig",
    "QuadratureFailure",
    "ResidualReport",
    "RootPair",
    "RootStatus",
    "RootStatusError",
    "ScaledComplex",
    "SincBust",
    "Source",
    "SpectralPoint",
    "SpectralSolver",
    "bounds_audit",
    "conjecture_scan",
    "dominant_wavenumber",
    "energy",
    "energy_l2",
    "field_map",
    "find_roots",
    "gamma_star",
    "g_delta",
    "g_zero",
    "g_zero_complex",
    "lambda_gamma",
    "m_factor",
    "make_source",
    "nus",
    "principal_sqrt",
    "proof_constants",
    "reconstruct",
    "residuals",
    "spectral_point",
    "strip_energy_realspace",
    "v_hat",
]

__version__ = "0.1.0"
