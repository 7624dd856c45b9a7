"""Run configuration, CSV/JSON serialization and SVG heatmaps.

Formats are documented in docs/formats.md. The CSV header is frozen; floats
are written with ``repr``, the shortest decimal that round-trips exactly, so
reading a file back and writing it again is byte-identical.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .errors import InvalidParameters, NonRectangularGrid, UnknownField
from .stats import FIELDS, PhotonStatistics
from .sweep import RootSummary, SweepRecord

CSV_HEADER = ("delta,g,lambda,phase,parity,x_root,energy,residual,mean_n,var_n,q_excess,"
              "mandel_q,mean_x,dx,dp,product,r,overlap,cov_xp,truncation_n,error")
COLUMNS = tuple(CSV_HEADER.split(","))
NUMERIC_COLUMNS = tuple(c for c in COLUMNS if c not in ("phase", "parity", "error"))
FORMATS = ("csv", "json", "svg")


@dataclass
class RunConfig:
    root_tolerance: float = 1e-6
    series_tolerance: float = 1e-14
    state_tail_tolerance: float = 1e-10
    convergence_target: float = 1e-9
    n_cap: int = 400
    oracle_n_cap: int = 4096
    delta_lo: float = 0.1
    delta_hi: float = 18.0
    delta_steps: int = 32
    g_lo: float = 1.0
    g_hi: float = 3.0
    g_steps: int = 32
    workers: int = 1
    output: str = ""
    format: str = "csv"

    def __post_init__(self):
        self.validate()

    def validate(self):
        for name in ("root_tolerance", "series_tolerance", "state_tail_tolerance",
                     "convergence_target"):
            if not getattr(self, name) > 0:
                raise InvalidParameters(f"{name} must be positive")
        for name in ("n_cap", "oracle_n_cap", "workers"):
            if getattr(self, name) < 1:
                raise InvalidParameters(f"{name} must be >= 1")
        if self.delta_steps < 2 or self.g_steps < 2:
            raise InvalidParameters("sweep steps must be >= 2")
        if self.format not in FORMATS:
            raise InvalidParameters(f"format must be one of {FORMATS}")

    @property
    def delta_range(self):
        return (self.delta_lo, self.delta_hi, self.delta_steps)

    @property
    def g_range(self):
        return (self.g_lo, self.g_hi, self.g_steps)

    def solver_options(self):
        return dict(root_tolerance=self.root_tolerance, series_tolerance=self.series_tolerance,
                    n_cap=self.n_cap, state_tail_tolerance=self.state_tail_tolerance)

    def sweep_options(self):
        return dict(self.solver_options(), convergence_target=self.convergence_target,
                    oracle_n_cap=self.oracle_n_cap)

    def updated(self, **overrides):
        """Copy with the non-None overrides applied (flags beat the file)."""
        data = asdict(self)
        data.update({k: v for k, v in overrides.items() if v is not None})
        return RunConfig(**data)


def parse_config(text):
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    types = {f.name: f.type for f in fields(RunConfig)}
    casts = {"float": float, "int": int, "str": str}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParameters(f"config line {lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise InvalidParameters(f"config line {lineno}: unknown key {key!r}")
        try:
            values[key] = casts[types[key]](value)
        except ValueError as exc:
            raise InvalidParameters(f"config line {lineno}: {exc}") from exc
    return RunConfig(**values)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


# --- CSV -------------------------------------------------------------------

def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def record_row(rec):
    row = dict.fromkeys(COLUMNS, "")
    row.update(delta=_fmt(rec.delta), g=_fmt(rec.g), phase=rec.phase, error=rec.error)
    row["lambda"] = _fmt(rec.lam)
    if rec.root is not None:
        row.update(parity=rec.root.parity, x_root=_fmt(rec.root.x),
                   energy=_fmt(rec.root.energy), residual=_fmt(rec.root.residual))
    if rec.stats is not None:
        for name in FIELDS:
            row[name] = _fmt(float(getattr(rec.stats, name)))
        row["mandel_q"] = _fmt(rec.stats.mandel_q)
    row["truncation_n"] = _fmt(rec.truncation_n)
    return row


def write_csv(records, fh=None):
    """Serialize records; returns the text (also written to ``fh`` when given)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    buf.write(CSV_HEADER + "\n")
    for rec in records:
        row = record_row(rec)
        writer.writerow([row[c] for c in COLUMNS])
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text


def read_rows(text):
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or ",".join(header) != CSV_HEADER:
        raise InvalidParameters("not a sweep CSV: header mismatch")
    return [dict(zip(COLUMNS, values)) for values in reader]


def _num(s):
    return float(s) if s != "" else None


def row_record(row):
    root = None
    if row["x_root"] != "":
        root = RootSummary(float(row["x_root"]), float(row["energy"]), float(row["residual"]),
                           row["parity"])
    stats = None
    if row["mean_n"] != "":
        # mean_p is not a CSV column (it vanishes identically); it reads back as NaN
        stats = PhotonStatistics(**{name: float(row[name]) if name in row else math.nan
                                    for name in FIELDS})
    trunc = int(row["truncation_n"]) if row["truncation_n"] != "" else None
    return SweepRecord(delta=float(row["delta"]), g=float(row["g"]), lam=float(row["lambda"]),
                       phase=row["phase"], root=root, stats=stats, truncation_n=trunc,
                       error=row["error"])


def read_csv(text):
    return [row_record(row) for row in read_rows(text)]


# --- JSON ------------------------------------------------------------------

def solution_document(gs, config, version, validation=None):
    stats = gs.stats.as_dict()
    stats["mandel_q"] = gs.stats.mandel_q
    r = gs.root
    doc = {
        "version": version,
        "config": asdict(config),
        "params": {"delta": gs.params.delta, "g": gs.params.g,
                   "lambda": gs.params.coupling_lambda},
        "root": {"x_root": r.x_root, "parity": r.parity, "index_m": r.index_m,
                 "energy": r.energy, "residual": r.residual,
                 "relative_residual": r.relative_residual, "juddian": r.juddian,
                 "closed_form": r.closed_form},
        "stats": stats,
        "truncation": {"truncation_n": gs.minus.truncation_n, "tail_norm": gs.minus.tail_norm,
                       "series_terms": r.n_used},
    }
    if validation is not None:
        doc["validation"] = validation
    return doc


def dumps(doc):
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# --- SVG -------------------------------------------------------------------

# viridis anchors, interpolated linearly
_ANCHORS = ((0.0, (68, 1, 84)), (0.25, (59, 82, 139)), (0.5, (33, 145, 140)),
            (0.75, (94, 201, 98)), (1.0, (253, 231, 37)))
_MISSING = "#bdbdbd"
CELL = 12
LEFT, TOP, RIGHT, BOTTOM = 72, 28, 120, 48


def color(t):
    """Hex colour of the linear map at t in [0, 1]."""
    t = min(max(t, 0.0), 1.0)
    for (t0, c0), (t1, c1) in zip(_ANCHORS, _ANCHORS[1:]):
        if t <= t1:
            w = (t - t0) / (t1 - t0)
            rgb = (round(a + (b - a) * w) for a, b in zip(c0, c1))
            return "#%02x%02x%02x" % tuple(rgb)
    return "#%02x%02x%02x" % _ANCHORS[-1][1]


def _grid(rows, field):
    if field not in NUMERIC_COLUMNS:
        raise UnknownField(f"{field!r} is not a numeric column; choose from {NUMERIC_COLUMNS}")
    deltas = sorted({float(r["delta"]) for r in rows})
    gs = sorted({float(r["g"]) for r in rows})
    cells = {}
    for r in rows:
        key = (float(r["delta"]), float(r["g"]))
        if key in cells:
            raise NonRectangularGrid(f"duplicate grid point {key}")
        cells[key] = _num(r[field])
    if not rows or len(cells) != len(deltas) * len(gs):
        raise NonRectangularGrid(
            f"{len(cells)} points do not fill a {len(deltas)}x{len(gs)} grid")
    return deltas, gs, cells


def render_svg(rows, field):
    """Self-contained SVG heatmap of ``field``: g across, delta upward."""
    deltas, gs, cells = _grid(rows, field)
    finite = [v for v in cells.values() if v is not None and math.isfinite(v)]
    lo = min(finite) if finite else 0.0
    hi = max(finite) if finite else 0.0
    span = hi - lo
    width = LEFT + CELL * len(gs) + RIGHT
    height = TOP + CELL * len(deltas) + BOTTOM
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<title>{field}</title>',
        '<g font-family="sans-serif" font-size="10">',
        f'<text x="{LEFT}" y="16">{field}</text>',
    ]
    ny = len(deltas)
    for i, d in enumerate(deltas):
        y = TOP + CELL * (ny - 1 - i)
        for j, g in enumerate(gs):
            v = cells[(d, g)]
            if v is None or not math.isfinite(v):
                fill = _MISSING
            else:
                fill = color((v - lo) / span if span > 0 else 0.0)
            out.append(f'<rect x="{LEFT + CELL * j}" y="{y}" width="{CELL}" height="{CELL}" '
                       f'fill="{fill}"/>')
    bottom = TOP + CELL * ny
    right = LEFT + CELL * len(gs)
    out += [
        f'<text x="{LEFT}" y="{bottom + 14}">{gs[0]:.6g}</text>',
        f'<text x="{right}" y="{bottom + 14}" text-anchor="end">{gs[-1]:.6g}</text>',
        f'<text x="{(LEFT + right) // 2}" y="{bottom + 32}" text-anchor="middle">g</text>',
        f'<text x="{LEFT - 4}" y="{bottom}" text-anchor="end">{deltas[0]:.6g}</text>',
        f'<text x="{LEFT - 4}" y="{TOP + 10}" text-anchor="end">{deltas[-1]:.6g}</text>',
        f'<text x="14" y="{(TOP + bottom) // 2}" text-anchor="middle">Δ</text>',
    ]
    # legend: 32-step colour bar, max at the top
    bar_x, steps = right + 20, 32
    step_h = CELL * ny / steps
    for k in range(steps):
        t = 1.0 - (k + 0.5) / steps
        out.append(f'<rect x="{bar_x}" y="{TOP + k * step_h:.3f}" width="14" '
                   f'height="{step_h:.3f}" fill="{color(t if span > 0 else 0.0)}"/>')
    out += [
        f'<text x="{bar_x + 18}" y="{TOP + 8}">max {hi:.6g}</text>',
        f'<text x="{bar_x + 18}" y="{bottom}">min {lo:.6g}</text>',
        "</g>",
        "</svg>",
    ]
    return "\n".join(out) + "\n"
