"""Field assembly: transform values, reconstruction, maps, residuals."""

import io
import math

import mpmath as mp
import numpy as np
import pytest

from slablens import field as fld
from slablens.field import (
    GridSpec,
    SpectralSolver,
    dominant_wavenumber,
    field_map,
    pde_residual,
    reconstruct,
    residuals,
    v_hat,
)
from slablens.params import Params
from slablens.quadrature import QuadConfig, QuadratureFailure
from slablens.sources import Bump, CurrentSource, Dipole, SincBust

mp.mp.dps = 45


def _vhat_dipole_mp(x, p, params, x0=1.2, dx=1.0, dy=0.0):
    """Raw transfer formulas evaluated in 45-digit arithmetic."""
    k0 = mp.mpf(params.k0)
    delta = mp.mpf(params.delta)
    a = mp.mpf(params.a)
    p = mp.mpf(p)
    q = k0 * p
    nm = mp.sqrt(mp.mpc(p * p - 1, 0))
    ns = mp.sqrt(mp.mpc(p * p + 1, delta))
    eps = mp.mpc(-1, -delta)
    alpha = ns / (eps * nm)
    R = (alpha - 1) / (alpha + 1)
    half = (alpha + 1) / (2 * alpha)
    psi_p = half * mp.e ** (k0 * ns * a) * (1 + R * mp.e ** (-2 * k0 * ns * a))
    psi_m = (ns / eps) * half * mp.e ** (k0 * ns * a) * (1 - R * mp.e ** (-2 * k0 * ns * a))
    Iq = (dx * k0 * nm + 1j * q * dy) * mp.e ** (-k0 * nm * x0)
    A = Iq * mp.e ** (k0 * nm * a) / (k0 * (nm * psi_p + psi_m))
    if x <= 0:
        return A * mp.e ** (k0 * nm * x)
    if x <= a:
        return A * half * mp.e ** (k0 * ns * x) * (1 + R * mp.e ** (-2 * k0 * ns * x))
    Jm = Iq if x > x0 else 0
    Jp = (-dx * k0 * nm + 1j * q * dy) * mp.e ** (k0 * nm * x0) if x > x0 else 0
    t1 = (mp.e ** (k0 * nm * x) / 2) * (A * mp.e ** (-k0 * nm * a) * (psi_p + psi_m / nm) - Jm / (k0 * nm))
    t2 = (mp.e ** (-k0 * nm * x) / 2) * (A * mp.e ** (k0 * nm * a) * (psi_p - psi_m / nm) + Jp / (k0 * nm))
    return t1 + t2


class TestVHat:
    def test_against_mpmath(self, gstar):
        params = Params.from_gamma(0.5 * gstar, 1e-6)
        d = Dipole(params, x0=1.2, moment=(1.0, 0.0))
        for p in (0.25, 0.8, 1.5, 3.0):
            for x in (-1.3, 0.0, 0.4, 1.0, 1.5, 2.5):
                got = v_hat(x, p, d, params).value
                ref = _vhat_dipole_mp(x, p, params)
                rel = float(abs(mp.mpc(got.real, got.imag) - ref) / abs(ref))
                assert rel < 1e-12

    def test_spec_point_example(self, gstar):
        # x = a + 0.5, p = 2, dipole at 1.2a, delta = 1e-6: 1e-8 relative
        params = Params.from_gamma(0.5 * gstar, 1e-6)
        d = Dipole(params, x0=1.2, moment=(1.0, 0.0))
        got = v_hat(1.5, 2.0, d, params).value
        ref = _vhat_dipole_mp(1.5, 2.0, params)
        assert float(abs(mp.mpc(got.real, got.imag) - ref) / abs(ref)) < 1e-8

    def test_interface_continuity_and_flux(self, gstar):
        params = Params.from_gamma(0.5 * gstar, 1e-4)
        d = Dipole(params, x0=1.2, moment=(1.0, 0.0))
        sol = SpectralSolver(d, params)
        for p in (0.5, 2.0, 11.0):
            v_left = sol.v_hat(-1e-300, p).value
            v_right = sol.v_hat(1e-300, p).value
            assert abs(v_left - v_right) <= 1e-12 * abs(v_left)
            # flux ratio dV_c/dx = (1/eps_s) dV_s/dx at x=0 via tiny steps
            h = 1e-7
            d_c = (sol.v_hat(0.0, p).value - sol.v_hat(-h, p).value) / h
            d_s = (sol.v_hat(h, p).value - sol.v_hat(0.0, p).value) / h
            eps_s = complex(-1, -params.delta)
            assert abs(d_c - d_s / eps_s) <= 1e-5 * max(abs(d_c), params.k0 * abs(v_left))

    def test_leftgoing_phase_in_core(self, gstar):
        # for p < 1 the core phase advances like exp(+i k0 |nu_c| x)
        params = Params.from_gamma(0.5 * gstar, 1e-6)
        d = Dipole(params, x0=1.2, moment=(1.0, 0.0))
        sol = SpectralSolver(d, params)
        p = 0.6
        k_expect = params.k0 * math.sqrt(1 - p * p)
        xs = np.linspace(-8.0, -6.0, 9)
        vals = np.array([sol.v_hat(float(x), p).value for x in xs])
        phases = np.unwrap(np.angle(vals))
        slope = np.polyfit(xs, phases, 1)[0]
        assert slope == pytest.approx(k_expect, rel=1e-9)

    def test_band_continuity_in_p(self, gstar):
        # the nu_m -> 0 branch mismatch across the switch is O(nu_m) ~ 1e-4;
        # sources with a nonvanishing zeroth moment show it as a relative gap
        params = Params.from_gamma(0.5 * gstar, 1e-4)
        b = Bump(params, d0=1.2)
        d = Dipole(params, x0=1.2, moment=(0.0, 1.0))
        for source in (b, d):
            sol = SpectralSolver(source, params)
            for x in (-0.5, 0.5, 1.5, 3.0):
                inside = sol.v_hat(x, 1.0 + 0.99e-8).value
                outside = sol.v_hat(x, 1.0 + 1.01e-8).value
                assert abs(inside - outside) <= 5e-4 * abs(outside)


class TestReconstruct:
    def test_even_and_odd_symmetry(self, gstar):
        params = Params.from_gamma(0.5 * gstar, 1e-6)
        d = Dipole(params, x0=1.2, moment=(1.0, 0.0))
        assert reconstruct((0.5, 0.7), d, params) == reconstruct((0.5, -0.7), d, params)
        b = Bump(params, d0=1.2)
        assert reconstruct((1.5, 0.9), b, params) == -reconstruct((1.5, -0.9), b, params)
        # a mixed dipole is the superposition of its pure-parity components
        dm = Dipole(params, x0=1.2, y0=0.4, moment=(1.0, 0.5))
        dx_only = Dipole(params, x0=1.2, y0=0.4, moment=(1.0, 0.0))
        dy_only = Dipole(params, x0=1.2, y0=0.4, moment=(0.0, 0.5))
        pt = (0.5, 1.2)
        v_sum = reconstruct(pt, dx_only, params) + reconstruct(pt, dy_only, params)
        assert reconstruct(pt, dm, params) == pytest.approx(v_sum, rel=1e-10)

    def test_eps_switch_insensitive(self, gstar, monkeypatch):
        params = Params.from_gamma(0.5 * gstar, 1e-6)
        d = Dipole(params, x0=1.2, moment=(1.0, 0.0))
        v_ref = reconstruct((0.8, 0.4), d, params)
        import slablens.field as field_mod

        monkeypatch.setattr(field_mod, "EPS_SWITCH", field_mod.EPS_SWITCH / 2)
        v_half = reconstruct((0.8, 0.4), d, params)
        assert abs(v_ref - v_half) <= 1e-8 * abs(v_ref)

    def test_quadrature_failure_reports_panel(self, gstar):
        params = Params.from_gamma(0.5 * gstar, 1e-6)
        d = Dipole(params, x0=1.2, moment=(1.0, 0.0))
        cfg = QuadConfig(abs_tol=1e-308, rel_tol=1e-16, max_depth=4)
        with pytest.raises(QuadratureFailure) as err:
            reconstruct((0.8, 0.4), d, params, cfg)
        assert "reconstruct at" in str(err.value)


class TestFieldMap:
    def test_small_grid_finite_and_tagged(self, gstar):
        params = Params.from_gamma(0.5 * gstar, 1e-6)
        d = Dipole(params, x0=1.2, moment=(1.0, 0.0))
        grid = GridSpec(-1.0, 2.0, 3, -1.0, 1.0, 3)
        fg = field_map(grid, d, params)
        assert fg.values.shape == (3, 3)
        assert np.all(np.isfinite(fg.values))
        assert list(fg.regions) == ["C", "S", "M"]

    def test_matches_reconstruct(self, gstar):
        params = Params.from_gamma(0.5 * gstar, 1e-6)
        b = Bump(params, d0=1.2)
        grid = GridSpec(-0.5, 2.0, 3, -1.5, 2.5, 4)
        fg = field_map(grid, b, params)
        sol = SpectralSolver(b, params)
        for i, x in enumerate(grid.xs):
            for j, y in enumerate(grid.ys):
                ref = sol.reconstruct(float(x), float(y))
                assert abs(fg.values[i, j] - ref) < 1e-7 * max(abs(ref), 1e-4)

    def test_worker_determinism(self, gstar):
        params = Params.from_gamma(0.5 * gstar, 1e-6)
        d = Dipole(params, x0=1.2, moment=(1.0, 0.0))
        grid = GridSpec(-1.0, 2.0, 8, -1.0, 1.0, 5)
        serial = field_map(grid, d, params, workers=1)
        parallel = field_map(grid, d, params, workers=3)
        assert np.array_equal(serial.values, parallel.values)

    def test_csv_emission(self, gstar):
        params = Params.from_gamma(0.5 * gstar, 1e-6)
        d = Dipole(params, x0=1.2, moment=(1.0, 0.0))
        grid = GridSpec(-1.0, 2.0, 2, 0.0, 1.0, 2)
        fg = field_map(grid, d, params)
        buf = io.StringIO()
        fg.write_csv(buf, header_comments=["case = unit"])
        lines = buf.getvalue().splitlines()
        assert lines[0] == "# case = unit"
        assert lines[1] == "x,y,re,im,region"
        assert len(lines) == 2 + 4
        first = lines[2].split(",")
        assert len(first) == 5 and first[4] in "CSM"


class TestResiduals:
    def test_plane_wave_self_test(self):
        # exact free-space solution drives the discrete operator to ~1e-10
        k0 = 0.75
        v_fun = lambda x, y: np.exp(1j * k0 * x)
        h = 0.008 / k0
        res = pde_residual(v_fun, lambda x: 1.0 + 0j, k0, [(2.0, 0.3), (5.0, -1.0)], h)
        assert res < 1e-10

    def test_dipole_residuals(self, gstar):
        params = Params.from_gamma(0.5 * gstar, 1e-3)
        d = Dipole(params, x0=1.2, moment=(1.0, 0.0))
        rep = residuals(d, params)
        assert rep.continuity_max < 1e-4
        assert rep.pde_max < 1e-3
        assert rep.outgoing_decay < 1e-2


class TestDominantWavenumber:
    def test_pure_tone(self):
        dy = 0.05
        ys = dy * np.arange(4096)
        vals = np.cos(3.7 * ys) * np.exp(-0.001 * ys)
        assert dominant_wavenumber(vals, dy) == pytest.approx(3.7, rel=1e-3)
