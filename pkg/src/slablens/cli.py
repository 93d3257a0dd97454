"""Command-line front door.

Subcommands cover every computable result class: dispersion roots and the
critical gamma, field maps, strip-energy scans, conjecture and shielding
scans, the resonance-free source demos, the inequality audit, and the
residual self-checks.  Numeric flags accept gamma as a plain number or as a
multiple of the critical value ("0.5gstar"), resolved from the computed
constant, never a hardcoded one.

Every output is CSV with the full configuration echoed in '#' header
comments, so a result file is reproducible on its own.  Exit codes: 0
success, 2 usage/validation, 3 quadrature failure, 4 root-status errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import dispersion
from .dispersion import RootStatus, RootStatusError
from .energy import EnergyBreakdown, L_integrand, energy, strip_energy_realspace
from .field import FieldGrid, GridSpec, SpectralSolver, dominant_wavenumber, residuals
from .params import Params
from .quadrature import QuadConfig, QuadratureFailure
from .sources import Source, make_source

_GAMMA_STAR_ALGO_VERSION = "g0-peak-bisect-1"

COMMANDS = (
    "field-map",
    "energy-scan",
    "g-roots",
    "gamma-star",
    "conjecture-scan",
    "shielding-scan",
    "busting-demo",
    "bounds-audit",
    "residual-check",
)


def _cache_path() -> Path:
    root = os.environ.get("SLABLENS_CACHE_DIR")
    base = Path(root) if root else Path.home() / ".cache" / "slablens"
    return base / "gamma_star.json"


def cached_gamma_star() -> float:
    """gamma_star with a small file cache keyed by the algorithm version."""
    path = _cache_path()
    try:
        data = json.loads(path.read_text())
        if data.get("algo") == _GAMMA_STAR_ALGO_VERSION:
            return float(data["gamma_star"])
    except (OSError, ValueError, KeyError):
        pass
    value = dispersion.gamma_star().gamma_star
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps({"algo": _GAMMA_STAR_ALGO_VERSION, "gamma_star": value}))
    except OSError:
        pass
    return value


def resolve_gamma(text: str) -> float:
    """'0.9' -> 0.9; '0.5gstar' -> 0.5 * gamma_star."""
    text = str(text).strip().lower()
    if text.endswith("gstar"):
        head = text[: -len("gstar")]
        mult = 1.0 if head in ("", "+") else float(head)
        return mult * cached_gamma_star()
    return float(text)


@dataclass
class RunConfig:
    command: str
    options: Dict[str, str] = dc_field(default_factory=dict)

    def render(self) -> str:
        lines = [f"command = {self.command}"]
        for key in sorted(self.options):
            lines.append(f"{key} = {self.options[key]}")
        return "\n".join(lines) + "\n"


_OPTION_KEYS = {
    "gamma", "delta", "a", "source", "d0", "d1", "moment", "x0", "y0",
    "h0", "h1", "amplitude", "xi", "grid", "out", "abs-tol", "rel-tol",
    "pole-floor", "threads", "seed", "samples", "deltas", "gammas", "d0s",
    "xis", "emit", "quantity", "preset", "config", "h", "p-grid", "line-x",
    "points",
}


def parse_config_text(text: str) -> RunConfig:
    command = None
    options: Dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line is not 'key = value': {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key == "command":
            command = value
        elif key in _OPTION_KEYS:
            options[key] = value
        else:
            raise ValueError(f"unknown config key {key!r}")
    if command not in COMMANDS:
        raise ValueError(f"config must name a command from {COMMANDS}")
    return RunConfig(command=command, options=options)


# -- presets: one per figure in the report ----------------------------------

def _field_preset(source: str, gamma: str, d0: float, clip: float, **extra) -> tuple:
    opts = {
        "source": source,
        "gamma": gamma,
        "delta": "1e-12",
        "d0": str(d0),
        "grid": "-2.5:4.5:141,-4:4:161",
        "clip-hint": str(clip),
    }
    opts.update({k: str(v) for k, v in extra.items()})
    return ("field-map", opts)


def build_presets() -> Dict[str, RunConfig]:
    presets: Dict[str, tuple] = {}
    presets["fig-slab"] = ("g-roots", {"gamma": "0.5gstar", "emit": "geometry"})
    for tag, d0 in (("a", 4.0), ("b", 4.0), ("c", 1.2), ("d", 1.2)):
        presets[f"fig-dipole-large-gamma-{tag}"] = _field_preset(
            "dipole", "2gstar", d0, 0.2, moment="1,0"
        )
        presets[f"fig-general-large-gamma-{tag}"] = _field_preset(
            "bump", "2gstar", d0, 0.2, amplitude="1e4", h0=-1, h1=1
        )
        presets[f"fig-dipole-small-gamma-{tag}"] = _field_preset(
            "dipole", "0.5gstar", d0, 0.2, moment="1,0"
        )
        presets[f"fig-general-small-gamma-{tag}"] = _field_preset(
            "bump", "0.5gstar", d0, 0.1, amplitude="1e4", h0=-1, h1=1
        )
    for tag, gamma in (("a", "1.01gstar"), ("b", "1.01gstar"), ("c", "0.99gstar"), ("d", "0.99gstar")):
        presets[f"fig-dipole-compare-{tag}"] = _field_preset("dipole", gamma, 1.2, 0.1, moment="1,0")
    for tag, kind in (("a", "sinc-bust"), ("b", "sinc-bust"), ("c", "bessel-bust"), ("d", "bessel-bust")):
        presets[f"fig-alr-bust-{tag}"] = _field_preset(kind, "0.5gstar", 1.2, 0.2)
    presets["fig-realistic-source"] = (
        "field-map",
        {
            "source": "current", "gamma": "0.5gstar", "delta": "1e-12", "d0": "1.2",
            "amplitude": "1e3", "quantity": "source-density",
            "grid": "1.1:3.3:121,-14:14:201",
        },
    )
    for tag in ("a", "b"):
        presets[f"fig-realistic-sine-{tag}"] = _field_preset(
            "current", "0.5gstar", 1.2, 0.2, amplitude="1e3"
        )
    pd_grids = {
        "a": {"deltas": "1e-12:1e-10:7", "gammas": "1.01gstar:2gstar:7", "d0s": "1.2"},
        "b": {"deltas": "1e-12:1e-10:7", "gammas": "1.01gstar:2gstar:7", "d0s": "4.0"},
        "c": {"deltas": "1e-12:1e-10:7", "gammas": "1.01gstar", "d0s": "1.2:2.0:7"},
        "d": {"deltas": "1e-12:1e-10:7", "gammas": "2gstar", "d0s": "1.2:2.0:7"},
        "e": {"deltas": "1e-10", "gammas": "1.01gstar:2gstar:7", "d0s": "1.2:2.0:7"},
        "f": {"deltas": "1e-12", "gammas": "1.01gstar:2gstar:7", "d0s": "1.2:2.0:7"},
    }
    for tag, grids in pd_grids.items():
        opts = {"source": "dipole", "moment": "1,0", "xis": "1.0"}
        opts.update(grids)
        presets[f"fig-dipole-bounded-pd-{tag}"] = ("energy-scan", opts)
    for tag in ("a", "b"):
        presets[f"fig-g-delta-{tag}"] = (
            "conjecture-scan",
            {"deltas": "1e-12:1e-10:7", "gammas": "0.1gstar:0.99gstar:10"},
        )
        presets[f"fig-m-delta-{tag}"] = (
            "conjecture-scan",
            {"deltas": "1e-12:1e-10:7", "gammas": "0.1gstar:0.99gstar:10"},
        )
    integrand_cfg = {
        "a": ("0.99gstar", 1.2), "b": ("0.99gstar", 4.0),
        "c": ("1.01gstar", 1.2), "d": ("1.01gstar", 4.0),
    }
    for tag, (gamma, d0) in integrand_cfg.items():
        presets[f"fig-dipole-integrand-{tag}"] = (
            "energy-scan",
            {
                "source": "dipole", "moment": "1,0", "emit": "integrand",
                "gammas": gamma, "d0s": str(d0),
                "deltas": "1e-4,1e-6,1e-8,1e-10,1e-12", "p-grid": "1:5:400",
            },
        )
    for tag, span in (("a", "1:7:400"), ("b", "7:10:300")):
        presets[f"fig-large-p-int-{tag}"] = (
            "bounds-audit",
            {"emit": "large-p-curve", "p-grid": span, "gammas": "1gstar,1.5gstar,2gstar"},
        )
    return {name: RunConfig(command=cmd, options=dict(opts)) for name, (cmd, opts) in presets.items()}


PRESETS = build_presets()
_OPTION_KEYS.add("clip-hint")


# -- option helpers ----------------------------------------------------------


def _get(options, key, default=None):
    return options.get(key, default)


def _floats_list(text: str, gamma_like: bool = False) -> List[float]:
    """'a,b,c' or 'lo:hi:n' (log spacing for deltas, linear otherwise)."""
    text = text.strip()
    conv = resolve_gamma if gamma_like else float
    if ":" in text:
        lo_s, hi_s, n_s = text.split(":")
        lo, hi, n = conv(lo_s), conv(hi_s), int(n_s)
        if lo > 0 and hi > 0 and (hi / lo > 50.0):
            return list(np.geomspace(lo, hi, n))
        return list(np.linspace(lo, hi, n))
    return [conv(tok) for tok in text.split(",") if tok.strip()]


def _parse_grid(text: str) -> GridSpec:
    try:
        xpart, ypart = text.split(",")
        x0, x1, nx = xpart.split(":")
        y0, y1, ny = ypart.split(":")
        return GridSpec(float(x0), float(x1), int(nx), float(y0), float(y1), int(ny))
    except (ValueError, TypeError) as exc:
        raise ValueError(f"bad grid spec {text!r}; want x0:x1:nx,y0:y1:ny") from exc


def _params_from(options) -> Params:
    gamma = resolve_gamma(_get(options, "gamma", "0.5gstar"))
    delta = float(_get(options, "delta", "1e-6"))
    a = float(_get(options, "a", "1"))
    return Params.from_gamma(gamma, delta, a=a)


def _source_from(options, params: Params) -> Source:
    kind = _get(options, "source", "dipole")
    d0 = float(_get(options, "d0", "1.2"))
    kwargs = {}
    if kind == "dipole":
        moment = [float(t) for t in _get(options, "moment", "1,0").split(",")]
        kwargs = {
            "x0": float(_get(options, "x0", str(d0))),
            "y0": float(_get(options, "y0", "0")),
            "moment": tuple(moment),
        }
    else:
        kwargs["d0"] = d0
        if _get(options, "d1") is not None:
            kwargs["d1"] = float(options["d1"])
        if kind == "bump":
            kwargs["h0"] = float(_get(options, "h0", "-1"))
            kwargs["h1"] = float(_get(options, "h1", "1"))
            kwargs["amplitude"] = float(_get(options, "amplitude", "1e4"))
        if kind == "current":
            kwargs["amplitude"] = float(_get(options, "amplitude", "1e3"))
    return make_source(kind, params, **kwargs)


def _quad_from(options) -> QuadConfig:
    return QuadConfig(
        abs_tol=float(_get(options, "abs-tol", "1e-11")),
        rel_tol=float(_get(options, "rel-tol", "1e-8")),
        pole_floor=float(_get(options, "pole-floor", "1e-3")),
    )


class _Output:
    def __init__(self, path: Optional[str]):
        self.path = path

    def __enter__(self):
        self.fh = open(self.path, "w") if self.path else sys.stdout
        return self.fh

    def __exit__(self, *exc):
        if self.path:
            self.fh.close()
        return False


def _echo_lines(config: RunConfig) -> List[str]:
    lines = [f"command = {config.command}"]
    lines += [f"{k} = {config.options[k]}" for k in sorted(config.options)]
    return lines


def _write_table(fh, config: RunConfig, columns: Sequence[str], rows) -> None:
    for line in _echo_lines(config):
        fh.write(f"# {line}\n")
    fh.write(",".join(columns) + "\n")
    for row in rows:
        fh.write(",".join(f"{v:.17g}" if isinstance(v, (int, float)) else str(v) for v in row))
        fh.write("\n")


# -- command implementations -------------------------------------------------


def _run_gamma_star(config: RunConfig, fh) -> int:
    res = dispersion.gamma_star()
    _write_table(
        fh,
        config,
        ["gamma_star", "bracket_lo", "bracket_hi", "inner_max_s"],
        [(res.gamma_star, res.bracket[0], res.bracket[1], res.inner_max_location)],
    )
    return 0


def _run_g_roots(config: RunConfig, fh) -> int:
    if _get(config.options, "emit") == "geometry":
        a = float(_get(config.options, "a", "1"))
        _write_table(
            fh, config, ["boundary", "x", "region_left", "region_right"],
            [("slab-left", 0.0, "C", "S"), ("slab-right", a, "S", "M")],
        )
        return 0
    gamma = resolve_gamma(_get(config.options, "gamma", "0.5gstar"))
    roots = dispersion.find_roots(gamma)
    _write_table(
        fh, config, ["gamma", "p1", "p2", "status"],
        [(roots.gamma, roots.p1, roots.p2, roots.status.value)],
    )
    return 0


def _run_field_map(config: RunConfig, fh) -> int:
    params = _params_from(config.options)
    source = _source_from(config.options, params)
    grid = _parse_grid(_get(config.options, "grid", "-2.5:4.5:141,-4:4:161"))
    if _get(config.options, "quantity", "field") == "source-density":
        xs, ys = grid.xs, grid.ys
        rows = []
        for x in xs:
            for y in ys:
                rows.append((x, y, source.spatial_density(float(x), float(y)), 0.0, params.region(float(x))))
        _write_table(fh, config, ["x", "y", "re", "im", "region"], rows)
        return 0
    workers = int(_get(config.options, "threads", "1"))
    fg = SpectralSolver(source, params).field_map(grid, _quad_from(config.options), workers=workers)
    fg.write_csv(fh, header_comments=_echo_lines(config))
    return 0


def _run_energy_scan(config: RunConfig, fh) -> int:
    opts = config.options
    deltas = _floats_list(_get(opts, "deltas", _get(opts, "delta", "1e-6")))
    gammas = _floats_list(_get(opts, "gammas", _get(opts, "gamma", "0.5gstar")), gamma_like=True)
    d0s = _floats_list(_get(opts, "d0s", _get(opts, "d0", "1.2")))
    a = float(_get(opts, "a", "1"))
    if _get(opts, "emit", "table") == "integrand":
        p_lo, p_hi, p_n = _get(opts, "p-grid", "1:5:400").split(":")
        ps = np.linspace(float(p_lo), float(p_hi), int(p_n))
        rows = []
        for gamma in gammas:
            for d0 in d0s:
                for delta in deltas:
                    params = Params.from_gamma(gamma, delta, a=a)
                    source = _source_from({**opts, "d0": str(d0)}, params)
                    for p in ps:
                        rows.append((delta, gamma, d0, p, float(L_integrand(float(p), source, params, params.a))))
        _write_table(fh, config, ["delta", "gamma", "d0", "p", "L"], rows)
        return 0
    xis = _floats_list(_get(opts, "xis", _get(opts, "xi", str(a))))
    rows = []
    for delta in deltas:
        for gamma in gammas:
            for d0 in d0s:
                for xi in xis:
                    params = Params.from_gamma(gamma, delta, a=a)
                    source = _source_from({**opts, "d0": str(d0)}, params)
                    eb = energy(source, params, xi)
                    rows.append((delta, gamma, d0, xi, eb.total, eb.small_p, eb.large_p, eb.quad_error_estimate))
    _write_table(
        fh, config,
        ["delta", "gamma", "d0", "xi", "total", "small_p", "large_p", "err_est"],
        rows,
    )
    return 0


def _run_conjecture_scan(config: RunConfig, fh) -> int:
    deltas = _floats_list(_get(config.options, "deltas", "1e-12:1e-10:5"))
    gammas = _floats_list(_get(config.options, "gammas", "0.1gstar:0.99gstar:10"), gamma_like=True)
    samples = dispersion.conjecture_scan(deltas, gammas)
    rows = [(s.delta, s.gamma, s.root_index, s.g_ratio, s.m_value) for s in samples]
    _write_table(fh, config, ["delta", "gamma", "root_index", "g_ratio", "m_value"], rows)
    return 0


def _run_shielding_scan(config: RunConfig, fh) -> int:
    opts = config.options
    gammas = _floats_list(_get(opts, "gammas", "2gstar,3gstar,4gstar"), gamma_like=True)
    delta = float(_get(opts, "delta", "1e-12"))
    a = float(_get(opts, "a", "1"))
    cfg = _quad_from(opts)
    xs = (-0.25 * a, -0.6 * a, -1.0 * a)
    ys = (0.0, 0.5 * a, 1.1 * a)
    rows = []
    for gamma in gammas:
        params = Params.from_gamma(gamma, delta, a=a)
        source = _source_from(opts, params)
        solver = SpectralSolver(source, params)
        sup = max(abs(solver.reconstruct(x, y, cfg)) for x in xs for y in ys)
        rows.append((gamma, delta, sup))
    _write_table(fh, config, ["gamma", "delta", "sup_vc"], rows)
    return 0


def _run_busting_demo(config: RunConfig, fh) -> int:
    params = _params_from(config.options)
    source = _source_from(config.options, params)
    roots = dispersion.find_roots(params.gamma)
    if roots.status is not RootStatus.TWO_ROOTS:
        raise RootStatusError(f"no resonance roots at gamma={params.gamma:.6g}")
    checks = []
    for p_root in (roots.p1, roots.p2):
        i_sc = source.i_scaled(p_root, params)
        from .kernel import nus

        _, _, nu_m = nus(p_root, params)
        log_free = i_sc.log_abs() + params.k0 * nu_m.real * source.d0
        checks.append(math.exp(log_free) if log_free > -700 else 0.0)
    norm = source.l2_norm()
    grid = _parse_grid(_get(config.options, "grid", "-2.5:4.5:81,-4:4:81"))
    fg = SpectralSolver(source, params).field_map(grid, _quad_from(config.options))
    extra = [
        f"I_p_check root1 = {checks[0]:.6e}",
        f"I_p_check root2 = {checks[1]:.6e}",
        f"source_l2_norm = {norm:.6e}",
        f"I_p_check_pass = {bool(max(checks) <= 1e-10 * norm)}",
    ]
    fg.write_csv(fh, header_comments=_echo_lines(config) + extra)
    return 0


def _run_bounds_audit(config: RunConfig, fh) -> int:
    opts = config.options
    if _get(opts, "emit") == "large-p-curve":
        p_lo, p_hi, p_n = _get(opts, "p-grid", "1:10:400").split(":")
        ps = np.linspace(float(p_lo), float(p_hi), int(p_n))
        gammas = _floats_list(_get(opts, "gammas", "1gstar,1.5gstar,2gstar"), gamma_like=True)
        rows = []
        for gamma in gammas:
            u = np.sqrt(ps**2 + 1.0)
            v = np.sqrt(ps**2 - 1.0)
            rhs = 0.5 * (u - v) ** 2 - (0.5 + 3.0 * math.sqrt(0.4)) * (u + v) ** 2 * np.exp(-2.0 * gamma * u)
            for p, val in zip(ps, rhs):
                rows.append((gamma, p, val))
        _write_table(fh, config, ["gamma", "p", "tail_split_rhs"], rows)
        return 0
    n = int(_get(opts, "samples", "10000"))
    seed = int(_get(opts, "seed", "20240817"))
    report = dispersion.bounds_audit(n, seed=seed)
    rows = [("checked:" + k, v, "", "", "", "") for k, v in sorted(report.checked.items())]
    for viol in report.violations:
        rows.append((viol.bound, viol.p, viol.delta, viol.gamma, viol.lhs, viol.rhs))
    _write_table(
        fh, config, ["bound", "p_or_count", "delta", "gamma", "lhs", "rhs"], rows
    )
    return 0 if report.ok else 1


def _run_residual_check(config: RunConfig, fh) -> int:
    params = _params_from(config.options)
    source = _source_from(config.options, params)
    h = float(_get(config.options, "h", "5e-3"))
    rep = residuals(source, params, h=h)
    _write_table(
        fh, config,
        ["continuity_max", "pde_max", "outgoing_decay"],
        [(rep.continuity_max, rep.pde_max, rep.outgoing_decay)],
    )
    return 0


_RUNNERS = {
    "gamma-star": _run_gamma_star,
    "g-roots": _run_g_roots,
    "field-map": _run_field_map,
    "energy-scan": _run_energy_scan,
    "conjecture-scan": _run_conjecture_scan,
    "shielding-scan": _run_shielding_scan,
    "busting-demo": _run_busting_demo,
    "bounds-audit": _run_bounds_audit,
    "residual-check": _run_residual_check,
}


def run(config: RunConfig) -> int:
    """Dispatch a validated config; returns the process exit code."""
    out = _get(config.options, "out")
    with _Output(out) as fh:
        return _RUNNERS[config.command](config, fh)


def parse(argv: Sequence[str]) -> RunConfig:
    parser = argparse.ArgumentParser(
        prog="slablens",
        description="Spectral solver for the lossy negative-permittivity slab",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd in COMMANDS:
        sp = sub.add_parser(cmd)
        sp.add_argument("--preset", choices=sorted(PRESETS), default=None)
        sp.add_argument("--config", default=None, help="flat key = value file; flags override")
        for key in sorted(_OPTION_KEYS - {"preset", "config"}):
            sp.add_argument(f"--{key}", default=None)
    sp = sub.add_parser("presets")
    ns = parser.parse_args(argv)
    if ns.command == "presets":
        return RunConfig(command="presets")
    options: Dict[str, str] = {}
    if ns.preset:
        preset = PRESETS[ns.preset]
        if preset.command != ns.command:
            raise ValueError(
                f"preset {ns.preset} belongs to command {preset.command}, not {ns.command}"
            )
        options.update(preset.options)
        options["preset"] = ns.preset
    if ns.config:
        file_cfg = parse_config_text(Path(ns.config).read_text())
        if file_cfg.command != ns.command:
            raise ValueError(f"config file names command {file_cfg.command}, not {ns.command}")
        options.update(file_cfg.options)
    for key in _OPTION_KEYS - {"preset", "config"}:
        val = getattr(ns, key.replace("-", "_"), None)
        if val is not None:
            options[key] = val
    return RunConfig(command=ns.command, options=options)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        config = parse(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if config.command == "presets":
        for name in sorted(PRESETS):
            preset = PRESETS[name]
            print(f"{name}: {preset.command} " + " ".join(
                f"--{k} {v}" for k, v in sorted(preset.options.items())
            ))
        return 0
    try:
        return run(config)
    except QuadratureFailure as exc:
        print(f"quadrature failure: {exc}", file=sys.stderr)
        return 3
    except RootStatusError as exc:
        print(f"root status: {exc}", file=sys.stderr)
        return 4
    except (ValueError, NotImplementedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
