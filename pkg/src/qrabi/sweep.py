"""Grid sweeps over (delta, g), phase labels, ridge extraction and the quadratic fit."""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DegenerateFit, GridIncomplete, InvalidParameters, RabiError
from .oracle import oracle_statistics
from .params import RabiParams
from .solver import solve
from .stats import FIELDS, PhotonStatistics

SPECTRAL = "spectral"
ORACLE = "oracle"
METHODS = (SPECTRAL, ORACLE)
NORMAL = "normal"
SUPERRADIANT = "superradiant"

CRITICAL_CURVE = (2.0, 0.0, 0.0)
REFERENCE_RIDGE = (2.0, -1.5, 0.6)
_SOLVER_OPTIONS = ("root_tolerance", "series_tolerance", "n_cap", "state_tail_tolerance")


def coupling_lambda(delta, g):
    return g * math.sqrt(2.0 / delta)


def phase_label(lam):
    return SUPERRADIANT if lam >= 1.0 else NORMAL


class RootSummary(NamedTuple):
    x: float
    energy: float
    residual: float
    parity: str


@dataclass(frozen=True)
class SweepRecord:
    delta: float
    g: float
    lam: float
    phase: str
    root: RootSummary | None
    stats: PhotonStatistics | None
    truncation_n: int | None
    method: str = SPECTRAL
    error: str = ""

    @property
    def ok(self):
        return not self.error

    def value(self, quantity):
        if quantity == "lambda":
            return self.lam
        if quantity in ("delta", "g"):
            return getattr(self, quantity)
        if quantity == "truncation_n":
            return math.nan if self.truncation_n is None else float(self.truncation_n)
        if quantity in ("x_root", "energy", "residual"):
            if self.root is None:
                return math.nan
            return getattr(self.root, "x" if quantity == "x_root" else quantity)
        if self.stats is None:
            return math.nan
        if quantity == "mandel_q":
            q = self.stats.mandel_q
            return math.nan if q is None else q
        return getattr(self.stats, quantity)


@dataclass(frozen=True)
class RidgeFit:
    points: list
    coeffs: tuple
    rms_residual: float
    reference_curve: tuple = CRITICAL_CURVE
    excluded: list = field(default_factory=list)

    def __call__(self, g):
        c2, c1, c0 = self.coeffs
        g = np.asarray(g, dtype=float)
        return c2 * g * g + c1 * g + c0


def grid_axis(lo, hi, steps):
    if steps < 2:
        raise InvalidParameters(f"steps must be >= 2, got {steps}")
    if not (lo > 0 and hi > 0):
        raise InvalidParameters(f"sweep ranges must be positive, got [{lo}, {hi}]")
    return np.linspace(lo, hi, int(steps))


def solve_point(delta, g, method=SPECTRAL, options=None):
    """One grid point; solver failures become an error marker on the record."""
    options = options or {}
    lam = coupling_lambda(delta, g)
    base = dict(delta=float(delta), g=float(g), lam=lam, phase=phase_label(lam), method=method)
    try:
        params = RabiParams(float(delta), float(g))
        if method == SPECTRAL:
            gs = solve(params, **{k: v for k, v in options.items() if k in _SOLVER_OPTIONS})
            r = gs.root
            return SweepRecord(root=RootSummary(r.x_root, r.energy, r.residual, r.parity),
                               stats=gs.stats, truncation_n=gs.truncation_n, **base)
        if method == ORACLE:
            target = options.get("convergence_target", 1e-9)
            cap = options.get("oracle_n_cap", 4096)
            res = oracle_statistics(params, convergence_target=target, hard_cap=cap)
            parity = "minus" if res.parity_expect < 0 else "plus"
            summary = RootSummary(res.e0 + params.g**2, res.e0, 0.0, parity)
            return SweepRecord(root=summary, stats=res.stats, truncation_n=res.n_max_used + 1,
                               **base)
        raise InvalidParameters(f"unknown method {method!r}")
    except RabiError as exc:
        return SweepRecord(root=None, stats=None, truncation_n=None, error=exc.code, **base)


def _solve_packed(task):
    return solve_point(*task)


def resolve_workers(workers=None):
    """Explicit value, else RABI_WORKERS, else 1."""
    if workers is None:
        env = os.environ.get("RABI_WORKERS")
        workers = int(env) if env else 1
    if workers < 1:
        raise InvalidParameters(f"workers must be >= 1, got {workers}")
    return workers


def run_sweep(delta_range, g_range, method=SPECTRAL, workers=None, options=None):
    """Records for every grid point, row-major with delta outer and g inner.

    Points are independent, so the parallel map returns exactly the serial
    result; the worker count only affects wall time.
    """
    if method not in METHODS:
        raise InvalidParameters(f"method must be one of {METHODS}, got {method!r}")
    deltas = grid_axis(*delta_range)
    gs = grid_axis(*g_range)
    tasks = [(float(d), float(g), method, options) for d in deltas for g in gs]
    workers = resolve_workers(workers)
    if workers == 1:
        return [_solve_packed(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_solve_packed, tasks, chunksize=chunk))


def _columns(records):
    cols = {}
    for rec in records:
        cols.setdefault(rec.g, []).append(rec)
    return {g: sorted(rs, key=lambda r: r.delta) for g, rs in sorted(cols.items())}


def _vertex(xs, ys):
    """Abscissa of the parabola through three points (any spacing)."""
    (x0, x1, x2), (y0, y1, y2) = xs, ys
    num = (x1 - x0) ** 2 * (y1 - y2) - (x1 - x2) ** 2 * (y1 - y0)
    den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0)
    if den == 0:
        return x1
    return x1 - 0.5 * num / den


class RidgeExtraction(NamedTuple):
    points: list
    excluded: list


def extract_ridge(records, quantity="r"):
    """Per g column, the delta maximizing ``quantity``, refined by a 3-point parabola.

    Columns whose discrete maximum sits on the delta boundary are excluded
    and listed. Raises GridIncomplete if some column has fewer than three
    valid records.
    """
    cols = _columns(records)
    short = [g for g, rs in cols.items() if sum(1 for r in rs if r.ok) < 3]
    if short:
        raise GridIncomplete(
            "columns with fewer than 3 valid records: g = "
            + ", ".join(f"{g:.6g}" for g in short), short)
    points, excluded = [], []
    for g, rs in cols.items():
        valid = [r for r in rs if r.ok and math.isfinite(r.value(quantity))]
        vals = [r.value(quantity) for r in valid]
        i = int(np.argmax(vals))
        if i == 0 or i == len(valid) - 1:
            excluded.append(g)
            continue
        xs = [valid[j].delta for j in (i - 1, i, i + 1)]
        ys = [vals[j] for j in (i - 1, i, i + 1)]
        points.append((g, _vertex(xs, ys)))
    return RidgeExtraction(points, excluded)


def refine_ridge(points, records, quantity="r", options=None, xatol=1e-6):
    """Re-solve exactly around each interpolated peak (bounded 1-D maximization)."""
    cols = _columns(records)
    refined = []
    for g, d_star in points:
        deltas = [r.delta for r in cols[g]]
        # one grid cell either side of the cell holding the interpolated peak
        i = int(np.searchsorted(deltas, d_star))
        lo, hi = deltas[max(i - 2, 0)], deltas[min(i + 1, len(deltas) - 1)]

        def neg(d, g=g):
            rec = solve_point(d, g, SPECTRAL, options)
            v = rec.value(quantity)
            return -v if math.isfinite(v) else math.inf

        res = minimize_scalar(neg, bounds=(lo, hi), method="bounded", options={"xatol": xatol})
        refined.append((g, float(res.x)))
    return refined


def fit_quadratic(points):
    """Least-squares fit delta* = c2 g^2 + c1 g + c0."""
    if len(points) < 3:
        raise DegenerateFit(f"need at least 3 ridge points, got {len(points)}")
    g = np.array([p[0] for p in points], dtype=float)
    d = np.array([p[1] for p in points], dtype=float)
    design = np.column_stack([g * g, g, np.ones_like(g)])
    coeffs, _, rank, _ = np.linalg.lstsq(design, d, rcond=None)
    if rank < 3:
        raise DegenerateFit("ridge abscissae do not determine a quadratic (rank-deficient)")
    resid = design @ coeffs - d
    return RidgeFit(points=list(points), coeffs=tuple(float(c) for c in coeffs),
                    rms_residual=float(np.sqrt(np.mean(resid**2))))


def field_grid(records, quantity):
    """(deltas, gs, values[delta, g]) for a rectangular record list."""
    deltas = sorted({r.delta for r in records})
    gs = sorted({r.g for r in records})
    grid = np.full((len(deltas), len(gs)), np.nan)
    di = {d: i for i, d in enumerate(deltas)}
    gi = {g: i for i, g in enumerate(gs)}
    for r in records:
        grid[di[r.delta], gi[r.g]] = r.value(quantity)
    return np.array(deltas), np.array(gs), grid


__all__ = ["FIELDS", "RidgeFit", "SweepRecord", "extract_ridge", "field_grid", "fit_quadratic",
           "run_sweep"]
