"""Parameter sweeps over (W, lambda, theta0), figure presets, and CSV/JSON output.

All frequencies at this layer are ratios to omega0, and omega0 = 1 internally.
Records come back in row-major order over the axes: the first axis varies
slowest.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .amplitude import SystemParams
from .errors import ConfigurationError, InvalidInputError
from .geometric_phase import (
    EVALUATORS,
    gp_exact,
    gp_markovian_limit,
    gp_perturbative,
    gp_unitary,
    kinematic_from_params,
)
from .numerics import QuadratureSettings

log = logging.getLogger(__name__)

WORKERS_ENV = "NONMARKOV_GP_WORKERS"
SWEEPABLE = ("W", "lambda", "theta0")
COLUMNS = (
    "w_over_omega0",
    "lambda_over_omega0",
    "theta0",
    "phi_exact",
    "phi_unitary",
    "phi_perturbative",
    "phi_kinematic",
    "phi_markovian",
    "correction",
    "quad_error",
)
ERROR_MARK = "error"
DEFAULT_LAMBDAS = (0.0, 0.05, 1.0, 5.0)


@dataclass(frozen=True)
class SweepAxis:
    name: str
    values: tuple

    @classmethod
    def linspace(cls, name, start, stop, count):
        if int(count) != count or count < 2:
            raise ConfigurationError(f"axis {name}: count must be an integer >= 2, got {count!r}")
        return cls(name, tuple(float(v) for v in np.linspace(start, stop, int(count))))

    def __post_init__(self):
        if self.name not in SWEEPABLE:
            raise ConfigurationError(f"cannot sweep over {self.name!r}; choose from {', '.join(SWEEPABLE)}")
        if len(self.values) < 2:
            raise ConfigurationError(f"axis {self.name} needs at least 2 values")


@dataclass(frozen=True)
class SweepSpec:
    fixed: dict
    axes: tuple
    evaluators: tuple = ("exact", "unitary")
    resolution: QuadratureSettings = field(default_factory=QuadratureSettings)
    output: Optional[str] = None
    fmt: str = "csv"

    def __post_init__(self):
        names = [a.name for a in self.axes]
        if not 1 <= len(names) <= 2:
            raise ConfigurationError(f"a sweep needs 1 or 2 axes, got {len(names)}")
        if len(set(names)) != len(names):
            raise ConfigurationError(f"duplicate axis name {names[0]!r}")
        missing = [n for n in SWEEPABLE if n not in names and n not in self.fixed]
        if missing:
            raise ConfigurationError(f"no value given for {', '.join(missing)}")
        bad = set(self.evaluators) - set(EVALUATORS)
        if bad:
            raise ConfigurationError(f"unknown evaluator(s) {', '.join(sorted(bad))}")
        if self.fmt not in ("csv", "json"):
            raise ConfigurationError(f"unknown output format {self.fmt!r}")
        for axis in self.axes:
            for v in axis.values:
                _check_value(axis.name, v)

    @property
    def shape(self):
        return tuple(len(a.values) for a in self.axes)

    def points(self):
        """Parameter dicts in row-major order over the axes."""
        grids = np.meshgrid(*[np.array(a.values) for a in self.axes], indexing="ij")
        flat = [g.ravel() for g in grids]
        out = []
        for k in range(flat[0].size):
            point = {n: self.fixed[n] for n in SWEEPABLE if n in self.fixed}
            for axis, g in zip(self.axes, flat):
                point[axis.name] = float(g[k])
            out.append(point)
        return out


def _check_value(name, value, line=None):
    if not math.isfinite(value):
        raise ConfigurationError(f"{name} must be finite", line)
    if name == "theta0" and not 0.0 <= value <= math.pi:
        raise ConfigurationError(f"theta0 = {value} outside [0, pi]", line)
    if name in ("W", "lambda") and value < 0:
        raise ConfigurationError(f"{name} must be >= 0", line)


@dataclass(frozen=True)
class PhaseRecord:
    """One flattened output row. ``None`` marks a value that was not requested
    or does not exist for the point; ``"error"`` marks a failed evaluation."""

    w_over_omega0: float
    lambda_over_omega0: float
    theta0: float
    phi_exact: object = None
    phi_unitary: object = None
    phi_perturbative: object = None
    phi_kinematic: object = None
    phi_markovian: object = None
    correction: object = None
    quad_error: object = None
    errors: tuple = ()

    @property
    def failed(self) -> bool:
        return bool(self.errors)

    def as_dict(self):
        return {c: getattr(self, c) for c in COLUMNS}


def evaluate_point(point: dict, evaluators: Sequence[str], resolution: QuadratureSettings) -> PhaseRecord:
    """Evaluate one grid point; failures are recorded per column, never raised."""
    row = {
        "w_over_omega0": point["W"],
        "lambda_over_omega0": point["lambda"],
        "theta0": point["theta0"],
    }
    errors = []
    try:
        params = SystemParams(W=point["W"], lam=point["lambda"], theta0=point["theta0"])
    except InvalidInputError as exc:
        return PhaseRecord(**row, errors=(f"params: {exc}",))

    def attempt(column, fn):
        try:
            row[column] = fn()
        except Exception as exc:  # noqa: BLE001 - one bad point must not stop the sweep
            row[column] = ERROR_MARK
            errors.append(f"{column}: {type(exc).__name__}: {exc}")

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        row["phi_unitary"] = gp_unitary(params.theta0) if "unitary" in evaluators or "exact" in evaluators else None
        if "exact" in evaluators:
            try:
                est = gp_exact(params, resolution)
                row["phi_exact"], row["quad_error"] = est.value, est.error
                row["correction"] = row["phi_unitary"] - est.value
            except Exception as exc:  # noqa: BLE001
                row["phi_exact"] = row["quad_error"] = row["correction"] = ERROR_MARK
                errors.append(f"phi_exact: {type(exc).__name__}: {exc}")
        if "kinematic" in evaluators:
            attempt("phi_kinematic", lambda: kinematic_from_params(params, resolution))
        if "perturbative" in evaluators:
            attempt("phi_perturbative", lambda: gp_perturbative(params))
        if "markovian" in evaluators and params.lam > 0:
            attempt("phi_markovian", lambda: gp_markovian_limit(params))
    return PhaseRecord(**row, errors=tuple(errors))


def _evaluate_star(args):
    return evaluate_point(*args)


def worker_count(requested: Optional[int] = None) -> int:
    """Explicit request, else $NONMARKOV_GP_WORKERS, else the CPU count."""
    if requested is None:
        env = os.environ.get(WORKERS_ENV, "").strip()
        if env:
            try:
                requested = int(env)
            except ValueError:
                raise ConfigurationError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
    if requested is None:
        requested = os.cpu_count() or 1
    return max(1, int(requested))


def run_sweep(spec: SweepSpec, workers: Optional[int] = None) -> list:
    """Evaluate every grid point; output order is row-major regardless of ``workers``."""
    tasks = [(p, spec.evaluators, spec.resolution) for p in spec.points()]
    n = worker_count(workers)
    if n == 1 or len(tasks) < 2 * n:
        records = [_evaluate_star(t) for t in tasks]
    else:
        chunk = max(1, len(tasks) // (8 * n))
        with ProcessPoolExecutor(max_workers=n) as pool:
            records = list(pool.map(_evaluate_star, tasks, chunksize=chunk))
    bad = failed_points(records)
    if bad:
        log.warning("%d of %d sweep points had evaluator failures", len(bad), len(records))
    return records


def failed_points(records) -> list:
    return [r for r in records if r.failed]


def grid(records, spec: SweepSpec, column: str) -> np.ndarray:
    """Reshape one column of a sweep into an array indexed like the axes."""
    vals = [getattr(r, column) for r in records]
    arr = np.array([np.nan if (v is None or v == ERROR_MARK) else v for v in vals], dtype=float)
    return arr.reshape(spec.shape)


# ---------------------------------------------------------------- presets


def figure_preset(
    name: str,
    w_range=None,
    theta0_range=None,
    lambdas: Sequence[float] = DEFAULT_LAMBDAS,
    resolution: Optional[QuadratureSettings] = None,
) -> SweepSpec:
    """Standard figure sweeps.

    Each preset pins one parameter: lambda = 5 and 0.05 (fig1a/b),
    theta0 = pi/3 (fig2), W = 0.2 (fig3). Axis ranges and the lambda family
    are defaults chosen to span the weak-to-strong and narrow-to-wide regimes.
    Ranges are ``(start, stop, count)``; the surfaces default to 41 x 41
    points and the fig2/fig3 curves to 51 points per lambda.
    """
    resolution = resolution or QuadratureSettings()
    curve = name in ("fig2", "fig3")
    w_range = w_range or (0.0, 1.0, 51 if curve else 41)
    theta0_range = theta0_range or (0.0, math.pi, 51 if curve else 41)
    lam_axis = SweepAxis("lambda", tuple(float(v) for v in lambdas))
    if name in ("fig1a", "fig1b"):
        lam = 5.0 if name == "fig1a" else 0.05
        axes = (SweepAxis.linspace("W", *w_range), SweepAxis.linspace("theta0", *theta0_range))
        return SweepSpec({"lambda": lam}, axes, ("exact", "unitary"), resolution)
    if name == "fig2":
        w_axis = SweepAxis.linspace("W", *w_range)
        return SweepSpec({"theta0": math.pi / 3}, (w_axis, lam_axis), ("exact", "perturbative", "unitary"), resolution)
    if name == "fig3":
        th_axis = SweepAxis.linspace("theta0", *theta0_range)
        return SweepSpec({"W": 0.2}, (th_axis, lam_axis), ("exact", "unitary"), resolution)
    raise InvalidInputError(f"unknown preset {name!r}; choose fig1a, fig1b, fig2 or fig3")


PRESETS = ("fig1a", "fig1b", "fig2", "fig3")


# ---------------------------------------------------------------- config


_CONFIG_KEYS = {"W", "lambda", "theta0", "axis", "axis2", "evaluators", "samples", "refinement_tolerance", "output", "format"}
_KEY_ALIASES = {"w": "W", "lam": "lambda", "theta": "theta0", "out": "output"}


def _number(text, line, what):
    try:
        return float(text)
    except ValueError:
        raise ConfigurationError(f"malformed number {text!r} for {what}", line) from None


def _parse_axis(value, line):
    tokens = value.split()
    if not tokens:
        raise ConfigurationError("empty axis definition", line)
    name = _KEY_ALIASES.get(tokens[0], tokens[0])
    if name not in SWEEPABLE:
        raise ConfigurationError(f"cannot sweep over {tokens[0]!r}", line)
    if len(tokens) > 1 and tokens[1] == "list":
        vals = tuple(_number(t, line, name) for t in tokens[2:])
        if len(vals) < 2:
            raise ConfigurationError(f"axis {name} needs at least 2 listed values", line)
        axis = SweepAxis(name, vals)
    elif len(tokens) == 4:
        start, stop = _number(tokens[1], line, name), _number(tokens[2], line, name)
        count = _number(tokens[3], line, f"{name} count")
        if count != int(count) or count < 2:
            raise ConfigurationError(f"axis {name}: count must be an integer >= 2", line)
        axis = SweepAxis.linspace(name, start, stop, int(count))
    else:
        raise ConfigurationError(f"axis expects 'NAME START STOP COUNT' or 'NAME list V1 V2 ...', got {value!r}", line)
    for v in axis.values:
        _check_value(name, v, line)
    return axis


def parse_config(text: str) -> SweepSpec:
    """Parse a ``key = value`` sweep description.

    Lines may hold several assignments separated by ';'. '#' starts a comment.
    Recognized keys: W, lambda, theta0 (fixed values, ratios to omega0 and
    radians), axis / axis2 (``NAME START STOP COUNT`` or ``NAME list V ...``),
    evaluators (comma list), samples, refinement_tolerance, output, format.
    """
    fixed, axes = {}, {}
    opts = {}
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        for stmt in body.split(";"):
            stmt = stmt.strip()
            if not stmt:
                continue
            if "=" not in stmt:
                raise ConfigurationError(f"expected 'key = value', got {stmt!r}", lineno)
            key, value = (s.strip() for s in stmt.split("=", 1))
            key = _KEY_ALIASES.get(key, key)
            if key not in _CONFIG_KEYS:
                raise ConfigurationError(f"unknown key {key!r}", lineno)
            if key in seen:
                raise ConfigurationError(f"{key} given twice (first on line {seen[key]})", lineno)
            seen[key] = lineno
            if key in SWEEPABLE:
                v = _number(value, lineno, key)
                _check_value(key, v, lineno)
                fixed[key] = v
            elif key in ("axis", "axis2"):
                axis = _parse_axis(value, lineno)
                if any(a.name == axis.name for a, _ in axes.values()):
                    raise ConfigurationError(f"duplicate axis name {axis.name!r}", lineno)
                axes[key] = (axis, lineno)
            elif key == "evaluators":
                opts[key] = tuple(e.strip() for e in value.split(",") if e.strip())
                bad = set(opts[key]) - set(EVALUATORS)
                if bad:
                    raise ConfigurationError(f"unknown evaluator(s) {', '.join(sorted(bad))}", lineno)
            elif key == "samples":
                n = _number(value, lineno, key)
                if n != int(n):
                    raise ConfigurationError("samples must be an integer", lineno)
                try:
                    opts[key] = QuadratureSettings(samples_per_period=int(n))
                except InvalidInputError as exc:
                    raise ConfigurationError(str(exc), lineno) from None
            elif key == "refinement_tolerance":
                opts[key] = _number(value, lineno, key)
            else:
                opts[key] = value

    if "axis" not in axes:
        if "axis2" in axes:
            raise ConfigurationError("axis2 given without axis", axes["axis2"][1])
        raise ConfigurationError("no axis defined")
    ordered = [axes["axis"]] + ([axes["axis2"]] if "axis2" in axes else [])
    for axis, lineno in ordered:
        if axis.name in fixed:
            raise ConfigurationError(f"{axis.name} is both fixed and swept", lineno)

    resolution = opts.get("samples", QuadratureSettings())
    if "refinement_tolerance" in opts:
        try:
            resolution = QuadratureSettings(resolution.samples_per_period, opts["refinement_tolerance"])
        except InvalidInputError as exc:
            raise ConfigurationError(str(exc), seen["refinement_tolerance"]) from None
    return SweepSpec(
        fixed=fixed,
        axes=tuple(a for a, _ in ordered),
        evaluators=opts.get("evaluators", ("exact", "unitary")),
        resolution=resolution,
        output=opts.get("output"),
        fmt=opts.get("format", "csv"),
    )


# ---------------------------------------------------------------- output


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    return format(float(v), ".17g")


def to_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in records:
        writer.writerow([_cell(getattr(r, c)) for c in COLUMNS])
    return buf.getvalue()


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def to_json(records) -> str:
    rows = [{c: _json_value(getattr(r, c)) for c in COLUMNS} for r in records]
    return json.dumps(rows, indent=1, allow_nan=False) + "\n"


def emit(records, fmt: str, path) -> Path:
    """Write records as CSV or JSON; the bytes depend only on the records."""
    records = list(records)
    if not records:
        raise InvalidInputError("nothing to write: no records")
    if fmt == "csv":
        text = to_csv(records)
    elif fmt == "json":
        text = to_json(records)
    else:
        raise InvalidInputError(f"unknown format {fmt!r}")
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def _from_cell(text):
    if text == "":
        return None
    if text == ERROR_MARK:
        return ERROR_MARK
    return float(text)


def load_records(path, fmt: Optional[str] = None) -> list:
    """Read back a file written by :func:`emit` (error details are not stored)."""
    path = Path(path)
    fmt = fmt or path.suffix.lstrip(".").lower()
    text = path.read_text(encoding="utf-8")
    if fmt == "json":
        rows = json.loads(text)
    elif fmt == "csv":
        reader = csv.DictReader(io.StringIO(text))
        rows = [{k: _from_cell(v) for k, v in row.items()} for row in reader]
    else:
        raise InvalidInputError(f"cannot infer format of {path}")
    names = {f.name for f in fields(PhaseRecord)}
    return [PhaseRecord(**{k: v for k, v in row.items() if k in names}) for row in rows]
