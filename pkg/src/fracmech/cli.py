"""Command-line front end.

Every run takes a JSON configuration ``{"command", "params", "grid"}``, writes
``<command>.csv`` and ``manifest.json`` into the output directory and, on
request, a plotting script. The manifest can be fed back as a configuration
and reproduces the CSV byte for byte.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import sys
import tempfile
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from . import annular, cam_design, couette, drafting, kernel_id, modal_dynamics
from .constitutive import FractionalLaw
from .errors import FracmechError, NumericalError, ParameterError

__all__ = ["COMMANDS", "ConfigError", "PLOT_KINDS", "RunConfig", "emit_plot_script", "format_number", "main", "run"]

log = logging.getLogger("fracmech")

THREADS_ENV = "GERASIMOV_THREADS"

PLOT_KINDS = ("velocity-profile", "cam", "decrement")


class ConfigError(ValueError):
    """The configuration cannot be parsed or fails validation."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: dict[str, Any] = field(default_factory=dict)
    grid: dict[str, Any] | None = None

    @classmethod
    def from_obj(cls, obj: Any) -> RunConfig:
        if not isinstance(obj, dict):
            raise ConfigError("configuration must be a JSON object")
        cmd = obj.get("command")
        if cmd not in COMMANDS:
            raise ConfigError(f"unknown or missing command {cmd!r}; expected one of {sorted(COMMANDS)}")
        params = obj.get("params", {})
        grid = obj.get("grid")
        if not isinstance(params, dict):
            raise ConfigError("params must be a JSON object")
        if grid is not None and not isinstance(grid, dict):
            raise ConfigError("grid must be a JSON object")
        return cls(cmd, dict(params), dict(grid) if grid is not None else None)


@dataclass
class Table:
    header: list[str]
    rows: list[Sequence[float | int | str]]
    reports: dict[str, Any] = field(default_factory=dict)
    plot_kind: str | None = None


# ---------------------------------------------------------------- formatting


def format_number(v: Any) -> str:
    """Twelve significant digits, shortest form, with negative zero folded to zero."""
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    x = float(v)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = format(x, ".12g")
    return "0" if s in ("-0", "0") else s


def _canonical(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_json_default)


def _json_default(obj: Any) -> Any:
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------- parameter access


class _Params:
    """Typed access to a params dict that records every resolved value."""

    def __init__(self, raw: dict[str, Any]):
        self.raw = raw
        self.resolved: dict[str, Any] = {}

    def num(self, key: str, default: float | None = None) -> float:
        if key in self.raw:
            val = self.raw[key]
        elif default is not None:
            val = default
        else:
            raise ConfigError(f"missing numeric parameter {key!r}")
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigError(f"parameter {key!r} must be a number, got {val!r}")
        if not math.isfinite(val):
            raise ConfigError(f"parameter {key!r} must be finite")
        self.resolved[key] = val
        return float(val)

    def int(self, key: str, default: int | None = None) -> int:
        v = self.num(key, default)
        if v != int(v):
            raise ConfigError(f"parameter {key!r} must be an integer, got {v}")
        self.resolved[key] = int(v)
        return int(v)

    def str(self, key: str, default: str | None = None, choices: Sequence[str] | None = None) -> str:
        val = self.raw.get(key, default)
        if not isinstance(val, str):
            raise ConfigError(f"parameter {key!r} must be a string")
        if choices is not None and val not in choices:
            raise ConfigError(f"parameter {key!r} must be one of {list(choices)}, got {val!r}")
        self.resolved[key] = val
        return val

    def list(self, key: str, default: list | None = None) -> list:
        val = self.raw.get(key, default)
        if not isinstance(val, list):
            raise ConfigError(f"parameter {key!r} must be a list")
        self.resolved[key] = val
        return val

    def has(self, key: str) -> bool:
        return key in self.raw


def _grid(cfg: RunConfig, x_count: int, t_count: int, t_max: float) -> dict[str, Any]:
    g = {"x_count": x_count, "t_count": t_count, "t_max": t_max}
    if cfg.grid:
        unknown = set(cfg.grid) - set(g)
        if unknown:
            raise ConfigError(f"unknown grid keys {sorted(unknown)}")
        g.update(cfg.grid)
    for k in ("x_count", "t_count"):
        if not isinstance(g[k], int) or isinstance(g[k], bool) or g[k] < 1:
            raise ConfigError(f"grid.{k} must be a positive integer")
    if not (isinstance(g["t_max"], (int, float)) and g["t_max"] > 0):
        raise ConfigError("grid.t_max must be positive")
    return g


# ---------------------------------------------------------------- commands


def _cmd_couette(cfg: RunConfig, p: _Params) -> tuple[Table, dict]:
    law = FractionalLaw(p.num("kappa", 1.0), p.num("alpha", 0.5))
    drive_cfg = p.raw.get("drive", {"type": "ramp", "speed": 1.0})
    if not isinstance(drive_cfg, dict):
        raise ConfigError("drive must be an object")
    kind = drive_cfg.get("type", "ramp")
    if kind == "ramp":
        drive = couette.RampDrive(float(drive_cfg.get("speed", 1.0)))
        drive_cfg = {"type": "ramp", "speed": drive.speed}
    elif kind == "sine":
        drive = couette.SineDrive(float(drive_cfg.get("amplitude", 1.0)), float(drive_cfg.get("omega", 1.0)))
        drive_cfg = {"type": "sine", "amplitude": drive.amplitude, "omega": drive.omega}
    else:
        raise ConfigError(f"drive.type must be 'ramp' or 'sine', got {kind!r}")
    p.resolved["drive"] = drive_cfg
    prob = couette.CouetteProblem(p.num("gap", 1.0), p.num("density", 1.0), law, drive, p.int("modes", 256))
    g = _grid(cfg, 11, 5, 1.0)
    xs = np.linspace(0.0, prob.gap, g["x_count"])
    ts = np.linspace(0.0, g["t_max"], g["t_count"] + 1)[1:] if g["t_count"] > 1 else np.array([g["t_max"]])
    rows = []
    for t in ts:
        ys = couette.displacement_profile(prob, xs, float(t))
        rows.extend((t, x, y) for x, y in zip(xs, ys))
    reports: dict[str, Any] = {"modes": prob.modes, "m": prob.m}
    if law.alpha == 0.5 and kind == "ramp":
        rep = couette.boundary_stress_report(prob, drive.speed, float(ts[-1]))
        reports["wall_stress_at_t_max"] = rep._asdict()
    return Table(["t", "x", "y"], rows, reports), g


def _cmd_annular(cfg: RunConfig, p: _Params) -> tuple[Table, dict]:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", annular.ThinGapWarning)
        geom = annular.BearingGeometry(p.num("r1"), p.num("r2"), FractionalLaw(p.num("kappa", 1.0), p.num("alpha", 0.5)))
    harmonics = p.list("harmonics", [[1.0, 1.0]])
    try:
        pairs = [(float(a), float(w)) for a, w in harmonics]
    except (TypeError, ValueError) as exc:
        raise ConfigError("harmonics must be a list of [amplitude, omega] pairs") from exc
    wall = p.str("wall", "inner", ("inner", "outer"))
    g = _grid(cfg, 1, 101, 2.0 * math.pi)
    ts = np.linspace(0.0, g["t_max"], g["t_count"])
    stress = annular.wall_stress_harmonic(geom, pairs, ts, wall)
    reports = {"thin_gap_valid": geom.thin_gap_valid, "warnings": [str(w.message) for w in caught]}
    return Table(["t", "stress"], list(zip(ts, np.atleast_1d(stress))), reports), g


def _cmd_string(cfg: RunConfig, p: _Params) -> tuple[Table, dict]:
    model = modal_dynamics.StringModel(
        p.num("length", 1.0), p.num("density", 1.0), p.num("viscosity", 0.01), p.num("stiffness", 1.0),
        p.num("ext_friction", 0.0),
    )
    count = p.int("modes", 10)
    rows = []
    for m in range(1, count + 1):
        r = modal_dynamics.modal_roots(model, m)
        rows.append((m, r.sigma, r.nu.real, r.nu.imag))
    reports = {"periodic_fundamental": modal_dynamics.periodic_fundamental(model)}
    return Table(["m", "sigma", "nu_re", "nu_im"], rows, reports, "decrement"), {}


def _cmd_torsion(cfg: RunConfig, p: _Params) -> tuple[Table, dict]:
    length = p.num("length", 1.0)
    roots = modal_dynamics.torsional_eigenvalues(
        p.num("delta"), p.num("rho"), p.num("rho0"), p.num("d"), length, p.int("count", 10)
    )
    K = p.num("delta") ** 4 * p.num("rho") / (p.num("rho0") * p.num("d"))
    rows = [(i + 1, s, s * s, modal_dynamics.torsion_residual(float(s), K, length)) for i, s in enumerate(roots)]
    return Table(["m", "s", "kappa", "residual"], rows), {}


def _cmd_membrane(cfg: RunConfig, p: _Params) -> tuple[Table, dict]:
    side = p.num("side", 1.0)
    modes = modal_dynamics.membrane_rect_modes(side, p.int("count", 20))
    rows = [(i + 1, lam, m, n) for i, (lam, m, n) in enumerate(modes)]
    reports = {}
    if p.has("bound"):
        bound = p.num("bound")
        reports["count_below_bound"] = modal_dynamics.membrane_count(side, bound)
        reports["area_estimate"] = side * side * bound / (4.0 * math.pi)
    return Table(["index", "eigenvalue", "m", "n"], rows, reports), {}


def _cmd_relax_cubic(cfg: RunConfig, p: _Params) -> tuple[Table, dict]:
    model = modal_dynamics.RelaxCubicModel(
        p.num("density"), p.num("relax_rate"), p.num("viscosity"), p.num("stiffness"), p.num("eigenvalue")
    )
    roots = modal_dynamics.relaxing_mode_roots(model)
    rows = [(i + 1, z.real, z.imag) for i, z in enumerate(roots)]
    reports = {"relax_rate": model.relax_rate, "aftereffect_rate": model.aftereffect_rate}
    return Table(["index", "re", "im"], rows, reports), {}


def _cmd_draft(cfg: RunConfig, p: _Params) -> tuple[Table, dict]:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", drafting.SlippageWarning)
        zone = drafting.DraftZone(
            p.num("v0", 1.0), p.num("B"), p.num("alpha"), p.num("beta"), p.num("n0", 10000.0), p.num("length", 1.0)
        )
    prof = drafting.velocity_profile(zone)
    if p.has("speeds"):
        vs = np.array([float(v) for v in p.list("speeds")])
        xs = np.atleast_1d(prof.x_of_v(vs))
        g: dict = {}
    else:
        g = _grid(cfg, 21, 1, 1.0)
        xs = np.linspace(0.0, zone.length, g["x_count"])
        vs = np.atleast_1d(prof.v_of_x(xs))
    n, n_slow, n_fast = drafting.fiber_counts(zone, vs)
    D = drafting.dissipative(zone, vs)
    rows = list(zip(xs, vs, np.atleast_1d(n), np.atleast_1d(n_slow), np.atleast_1d(n_fast), np.atleast_1d(D)))
    v_in, v_out, b = drafting.endpoint_speeds(zone)
    thin = drafting.thinning_classification(zone)
    reports = {
        "v_in": v_in,
        "v_out": v_out,
        "actual_draft": b,
        "draft_length_S": drafting.draft_length_S(zone.B, zone.alpha, zone.beta),
        "sigma_max": drafting.sigma_max(zone.B),
        "inflection_speed": drafting.inflection_speed(zone),
        "thinning": thin._asdict(),
        "warnings": [str(w.message) for w in caught],
    }
    return Table(["x", "v", "n", "n_slow", "n_fast", "D"], rows, reports, "velocity-profile"), g


def _read_field_csv(path: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # long format with columns t, x, value
    try:
        data = np.loadtxt(path, delimiter=",", comments="#", skiprows=1, ndmin=2)
    except OSError as exc:
        raise ConfigError(f"cannot read field file {path!r}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"field file {path!r} is not numeric CSV: {exc}") from exc
    if data.shape[1] != 3:
        raise ConfigError("field CSV must have three columns: t, x, value")
    t = np.unique(data[:, 0])
    x = np.unique(data[:, 1])
    if t.size * x.size != data.shape[0]:
        raise ConfigError("field CSV must cover a full t-by-x grid")
    order = np.lexsort((data[:, 1], data[:, 0]))
    return x, t, data[order, 2].reshape(t.size, x.size)


def _boundary(spec: Any, nodes: np.ndarray, name: str) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return lambda s: np.full_like(np.asarray(s, dtype=float), float(spec))
    if isinstance(spec, list) and len(spec) == nodes.size:
        vals = np.asarray(spec, dtype=float)
        return lambda s: np.interp(s, nodes, vals)
    raise ConfigError(f"{name} must be a number or a list with one value per grid node")


def _cmd_draft_unsteady(cfg: RunConfig, p: _Params) -> tuple[Table, dict]:
    kind = p.str("kind", None, ("lambda", "q", "v", "floating"))
    if kind == "floating":
        B, kappa = p.num("B"), p.num("kappa")
        g = _grid(cfg, 21, 1, 1.0)
        xi = np.linspace(0.0, 1.0, g["x_count"])
        bx = [drafting.quasi_stationary_Bx(B, kappa, float(s)) for s in xi]
        reports = {"dynamic_fiber_length": drafting.dynamic_fiber_length(B, kappa, 1.0)}
        return Table(["xi", "Bx"], list(zip(xi, bx)), reports), g
    x, t, vals = _read_field_csv(p.str("field"))
    grid = drafting.FieldGrid(x, t, vals)
    reports: dict[str, Any] = {}
    if kind == "lambda":
        rec = drafting.recover_from_lambda(grid, _boundary(p.raw.get("q_in"), t, "q_in"))
        p.resolved["q_in"] = p.raw.get("q_in")
        reports["draft"] = rec.draft.tolist()
    elif kind == "q":
        rec = drafting.recover_from_q(grid, _boundary(p.raw.get("lambda0"), x, "lambda0"))
        p.resolved["lambda0"] = p.raw.get("lambda0")
        reports["draft"] = rec.draft.tolist()
    else:
        res = drafting.lambda_series_from_v(grid, _boundary(p.raw.get("phi"), t, "phi"), p.int("terms", 6))
        p.resolved["phi"] = p.raw.get("phi")
        reports.update(
            terms_used=res.terms_used, term_norms=list(res.term_norms), diverging=res.diverging, residual=res.residual
        )
        T, X = np.meshgrid(t, x, indexing="ij")
        rows = list(zip(T.ravel(), X.ravel(), res.lam.values.ravel(), grid.values.ravel()))
        return Table(["t", "x", "lambda", "v"], rows, reports), {}
    T, X = np.meshgrid(t, x, indexing="ij")
    cols = [T.ravel(), X.ravel(), rec.lam.values.ravel(), rec.q.values.ravel(), rec.v.values.ravel(), rec.F.values.ravel()]
    return Table(["t", "x", "lambda", "q", "v", "F"], list(zip(*cols)), reports), {}


def _cmd_fit_kernel(cfg: RunConfig, p: _Params) -> tuple[Table, dict]:
    mode = p.str("mode", "prony", ("prony", "volterra"))
    if mode == "volterra":
        step = p.num("step")
        sys_ = kernel_id.DiscretizedVolterra(step, np.asarray(p.list("V"), float), np.asarray(p.list("W"), float))
        K = kernel_id.solve_kernel(sys_)
        return Table(["t", "K"], [(i * step, k) for i, k in enumerate(K)]), {}
    times = np.asarray(p.list("times"), dtype=float)
    values = np.asarray(p.list("values"), dtype=float)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RuntimeWarning)
        model = kernel_id.prony_fit(times, values, p.int("n_terms", 2), method=p.str("method", "pencil", ("pencil", "classic")))
    rows = [
        (i + 1, complex(a).real, complex(a).imag, complex(al).real, complex(al).imag)
        for i, (a, al) in enumerate(zip(model.amplitudes, model.exponents))
    ]
    reports = {"rms": model.rms, "stable": model.stable, "real": model.real, "warnings": [str(w.message) for w in caught]}
    return Table(["term", "A_re", "A_im", "alpha_re", "alpha_im"], rows, reports), {}


def _cmd_cam(cfg: RunConfig, p: _Params) -> tuple[Table, dict]:
    kind = p.str("type", "weight", ("weight", "number", "general"))
    lo, hi = (float(v) for v in p.list("range_deg", [0.0, 360.0] if kind != "number" else [0.0, 180.0]))
    step = p.num("step_deg", 10.0)
    if not (step > 0.0 and hi >= lo):
        raise ConfigError("range_deg must be increasing and step_deg positive")
    count = int(round((hi - lo) / step)) + 1
    deg = lo + step * np.arange(count)
    rad = np.radians(deg)
    if kind == "weight":
        prof = cam_design.weight_profile(p.num("a", 1.0), rad)
    elif kind == "number":
        prof = cam_design.number_profile(p.num("b", 1.0), rad)
    else:
        coeffs = [float(c) for c in p.list("calibration")]
        if not coeffs:
            raise ConfigError("calibration must list polynomial coefficients c0, c1, ...")
        poly = np.polynomial.Polynomial(coeffs)
        spec = cam_design.QuadrantSpec(
            p.num("C"), p.num("arm"), p.num("weight"), poly, poly.deriv(), math.radians(p.num("phi0_deg", 0.0))
        )
        prof = cam_design.general_profile(spec, rad)
    reports = {}
    if kind in ("weight", "number") and p.num("a" if kind == "weight" else "b", 1.0) == 1.0:
        cmp = cam_design.compare_table(kind)
        reports["table_deviations"] = [
            {"deg": c.degrees, "printed": c.printed, "computed": c.computed, "misprint": c.misprint}
            for c in cmp
            if c.error > 0.002
        ]
    return Table(["phi_deg", "x", "y"], list(zip(deg, prof.x, prof.y)), reports, "cam"), {}


COMMANDS: dict[str, Callable[[RunConfig, _Params], tuple[Table, dict]]] = {
    "couette": _cmd_couette,
    "annular": _cmd_annular,
    "string": _cmd_string,
    "torsion": _cmd_torsion,
    "membrane": _cmd_membrane,
    "relax-cubic": _cmd_relax_cubic,
    "draft": _cmd_draft,
    "draft-unsteady": _cmd_draft_unsteady,
    "fit-kernel": _cmd_fit_kernel,
    "cam": _cmd_cam,
}

_PLOT_BODIES = {
    "velocity-profile": ("x", "v", "x", "v", False),
    "cam": ("x", "y", "x", "y", True),
    "decrement": ("m", "sigma", "mode m", "decrement sigma_m", False),
}


def emit_plot_script(csv_path: str | Path, kind: str) -> Path:
    """Write a matplotlib script next to the CSV that plots it by relative path."""
    if kind not in _PLOT_BODIES:
        raise ConfigError(f"unknown plot kind {kind!r}; expected one of {list(PLOT_KINDS)}")
    csv_path = Path(csv_path)
    if not csv_path.exists():
        raise ConfigError(f"CSV {csv_path} does not exist")
    with open(csv_path, encoding="utf-8") as fh:
        header = next((ln for ln in fh if not ln.startswith("#")), "").strip().split(",")
    xcol, ycol, xlabel, ylabel, equal = _PLOT_BODIES[kind]
    if xcol not in header or ycol not in header:
        raise ConfigError(f"CSV {csv_path.name} lacks the columns {xcol!r}, {ycol!r} needed for a {kind} plot")
    lines = [
        "import csv",
        "from pathlib import Path",
        "",
        "import matplotlib.pyplot as plt",
        "",
        f"path = Path(__file__).with_name({csv_path.name!r})",
        "with open(path) as fh:",
        "    rows = list(csv.DictReader(ln for ln in fh if not ln.startswith('#')))",
        f"xs = [float(r[{xcol!r}]) for r in rows]",
        f"ys = [float(r[{ycol!r}]) for r in rows]",
        "fig, ax = plt.subplots()",
        "ax.plot(xs, ys, marker='.')",
        f"ax.set_xlabel({xlabel!r})",
        f"ax.set_ylabel({ylabel!r})",
    ]
    if equal:
        lines.append("ax.set_aspect('equal')")
    lines += ["fig.tight_layout()", f"fig.savefig(path.with_suffix('.png'))", ""]
    out = csv_path.with_name(csv_path.stem + "_plot.py")
    _atomic_write(out, "\n".join(lines))
    return out


def _apply_thread_cap() -> int | None:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return None
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from exc
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    try:
        import numba

        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
    except ImportError:
        pass
    return n


def run(config: RunConfig, output: str | Path, *, plot: bool = False) -> dict[str, Path]:
    """Execute one configuration; returns the written artifact paths.

    Nothing is written unless the computation succeeds.
    """
    handler = COMMANDS[config.command]
    params = _Params(config.params)
    try:
        table, grid = handler(config, params)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed parameters for {config.command}: {exc}") from exc
    unknown = set(config.params) - set(params.resolved) - {"drive"}
    if unknown:
        raise ConfigError(f"unknown parameters for {config.command}: {sorted(unknown)}")
    resolved = {"command": config.command, "params": params.resolved}
    if grid:
        resolved["grid"] = grid
    digest = hashlib.sha256(_canonical(resolved).encode()).hexdigest()
    lines = [f"# fracmech {config.command} manifest-sha256={digest}", ",".join(table.header)]
    lines += [",".join(format_number(v) for v in row) for row in table.rows]
    csv_text = "\n".join(lines) + "\n"
    manifest = dict(resolved)
    manifest["manifest_sha256"] = digest
    manifest["version"] = __version__
    manifest["reports"] = json.loads(_canonical(table.reports))
    out = Path(output)
    csv_path = out / f"{config.command}.csv"
    man_path = out / "manifest.json"
    _atomic_write(csv_path, csv_text)
    _atomic_write(man_path, json.dumps(manifest, indent=2, sort_keys=True, default=_json_default) + "\n")
    written = {"csv": csv_path, "manifest": man_path}
    if plot:
        if table.plot_kind is None:
            log.warning("no plot kind for command %s; skipping plot script", config.command)
        else:
            written["plot"] = emit_plot_script(csv_path, table.plot_kind)
    return written


def _load_config(path: str | None, command: str | None) -> RunConfig:
    obj: dict[str, Any] = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                obj = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise ConfigError("configuration must be a JSON object")
    if command is not None:
        if obj.get("command", command) != command:
            raise ConfigError(f"command {command!r} conflicts with config command {obj['command']!r}")
        obj = {**obj, "command": command}
    return RunConfig.from_obj(obj)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fracmech", description="Viscoelastic, modal, drafting and cam solvers.")
    ap.add_argument("command", nargs="?", choices=sorted(COMMANDS), help="solver to run (or set in the config)")
    ap.add_argument("--config", help="JSON configuration file")
    ap.add_argument("--output", default=".", help="output directory (default: current directory)")
    ap.add_argument("--plot", action="store_true", help="also write a plotting script")
    ap.add_argument("--verbose", action="store_true", help="log progress and reports")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        threads = _apply_thread_cap()
        if threads is not None:
            log.info("thread cap %d", threads)
        cfg = _load_config(args.config, args.command)
        written = run(cfg, args.output, plot=args.plot)
    except (ConfigError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        where = ", ".join(f"{k}={v}" for k, v in (("module", exc.module), ("parameter", exc.parameter)) if v)
        print(f"numerical failure ({where}): {exc}", file=sys.stderr)
        return 2
    except FracmechError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for name, path in written.items():
        log.info("wrote %s %s", name, path)
    return 0
