"""Photonic branch states in the displaced Fock frame |g, n> = D(g)|n>.

Both branches live in the +g frame:

    |delta, g, +>  ~  sum_n a_n |g, n>,            a_n = (-1)^n sqrt(n!) K_n
    |delta, g, ->  ~  sum_n (-1)^n b_n |g, n>,     b_n = sqrt(n!) J_n

The common prefactors (exp(g^2/2) and the parity sign) are dropped; every
state is unit-normalized.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import FrameMismatch, TailDivergence
from .spectral import MINUS, N_CAP, PLUS, CoefficientTable, SpectralRoot

STATE_TAIL_TOLERANCE = 1e-10
CUT_RATIO = 1e-14
CUT_RUN = 4
_RESCALE = 1e200


@dataclass(frozen=True)
class FockVector:
    coeffs: np.ndarray
    frame_displacement: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float))

    def __len__(self):
        return len(self.coeffs)

    @property
    def norm(self):
        return float(np.linalg.norm(self.coeffs))

    def normalize(self):
        return FockVector(self.coeffs / self.norm, self.frame_displacement)

    def scaled(self, factor):
        return FockVector(self.coeffs * factor, self.frame_displacement)

    def __add__(self, other):
        _same_frame(self, other)
        a, b = _pad(self.coeffs, other.coeffs)
        return FockVector(a + b, self.frame_displacement)


def _same_frame(u, v):
    if u.frame_displacement != v.frame_displacement:
        raise FrameMismatch(
            f"frames differ: {u.frame_displacement!r} vs {v.frame_displacement!r}")


def _pad(a, b):
    size = max(len(a), len(b))
    return np.pad(a, (0, size - len(a))), np.pad(b, (0, size - len(b)))


def apply_lowering(v):
    """a|n> = sqrt(n)|n-1> in the working frame; the vector shrinks by one."""
    c = v.coeffs
    if len(c) == 0:
        return FockVector(c.copy(), v.frame_displacement)
    return FockVector(np.sqrt(np.arange(1, len(c))) * c[1:], v.frame_displacement)


def apply_raising(v):
    """a^dag|n> = sqrt(n+1)|n+1>; the vector grows by one."""
    c = v.coeffs
    out = np.zeros(len(c) + 1)
    out[1:] = np.sqrt(np.arange(1, len(c) + 1)) * c
    return FockVector(out, v.frame_displacement)


def inner(u, v):
    _same_frame(u, v)
    size = min(len(u), len(v))
    return float(np.dot(u.coeffs[:size], v.coeffs[:size]))


@dataclass(frozen=True)
class BranchState:
    vector: FockVector
    branch: str
    source_root: SpectralRoot
    truncation_n: int
    tail_norm: float
    raw: np.ndarray = field(repr=False)
    raw_norm: float = 1.0
    table: CoefficientTable | None = field(default=None, repr=False)


def _f(params, x, n):
    g = params.g
    return 2 * g + (n - x + params.delta**2 / (x - n)) / (2 * g)


def _forward_scaled(params, x, n_top):
    """u_0..u_{n_top} by the forward recurrence, from u_{-1} = 0, u_0 = 1.

    With u_n = sqrt(n!) K_n the recurrence reads
        sqrt(n) u_n = f_{n-1} u_{n-1} - sqrt(n-1) u_{n-2}.
    """
    u = np.zeros(n_top + 1)
    u[0] = 1.0
    for n in range(1, n_top + 1):
        prev2 = math.sqrt(n - 1) * u[n - 2] if n >= 2 else 0.0
        u[n] = (_f(params, x, n - 1) * u[n - 1] - prev2) / math.sqrt(n)
    return u


def _backward_scaled(params, x, n_low, n_start):
    """Minimal solution on n_low..n_start by downward recurrence (Miller), unnormalized."""
    w = np.zeros(n_start + 2)
    w[n_start] = 1.0
    for n in range(n_start + 1, n_low + 1, -1):
        w[n - 2] = (_f(params, x, n - 1) * w[n - 1] - math.sqrt(n) * w[n]) / math.sqrt(n - 1)
        if abs(w[n - 2]) > _RESCALE:
            w[n - 2:] /= _RESCALE
    return w[: n_start + 1]


def _match_index(params, x, n_cap):
    # the two local solutions swap dominance around n - 1 - x = 4 g^2:
    # below it the forward sweep is stable, above it the backward one
    return int(min(max(round(4 * params.g**2 + 1 + x), 1), n_cap // 2))


def _cut_index(raw):
    """Retained length: first run of CUT_RUN coefficients below CUT_RATIO of the peak."""
    mag = np.abs(raw)
    peak = mag.max()
    run = 0
    for n, m in enumerate(mag):
        if m < CUT_RATIO * peak:
            run += 1
            if run >= CUT_RUN:
                return n + 1
        else:
            run = 0
    return None


def stabilized_coefficients(params, root, n_cap=N_CAP):
    """Sequence u_n = sqrt(n!) K_n at a root, accurate at every order.

    Forward recurrence up to the turning index, where the eigen-solution is
    the growing one, then the downward (Miller) recurrence beyond it, where
    the eigen-solution is the minimal one; the two pieces are joined at the
    turning index. The start of the downward sweep grows until the joined
    sequence stops changing; past ``n_cap`` this raises TailDivergence.
    """
    x = root.x_root
    m = _match_index(params, x, n_cap)
    head = _forward_scaled(params, x, m)
    n_start = min(n_cap, max(2 * m, int(math.ceil(4 * params.g**2 + 16 * params.g + 30))))
    prev = None
    while True:
        w = _backward_scaled(params, x, m - 1, n_start)
        seq = np.concatenate([head, w[m + 1:] * (head[m] / w[m])])
        cut = _cut_index(seq)
        if cut is not None and cut < n_start:
            if prev is not None and np.max(np.abs(prev[:cut] - seq[:cut])) <= 1e-14 * np.max(
                    np.abs(seq[:cut])):
                return seq
            prev = seq
        if n_start >= n_cap:
            raise TailDivergence(
                f"coefficients at x={x!r} do not decay below {CUT_RATIO:g} of the peak "
                f"before n_cap={n_cap}")
        n_start = min(n_cap, int(n_start * 1.5))


def _table_from_scaled(params, x, u):
    n = np.arange(len(u))
    k = u * np.exp(-0.5 * gammaln(n + 1))
    j = params.delta / (x - n) * k
    return CoefficientTable(x=x, k=k, j=j, n_used=len(u) - 1, tail_estimate=float(abs(u[-1])),
                            delta=params.delta, g=params.g)


def _from_raw(raw, branch, root, g, table, tail_tolerance=STATE_TAIL_TOLERANCE):
    cut = _cut_index(raw)
    if cut is None:
        raise TailDivergence(f"{branch} branch coefficients never decay")
    total = float(np.linalg.norm(raw))
    kept = raw[:cut]
    kept_norm = float(np.linalg.norm(kept))
    tail = float(np.linalg.norm(raw[cut:])) / total
    if tail >= tail_tolerance:
        raise TailDivergence(f"{branch} branch tail norm {tail:.3g} above tolerance")
    return BranchState(
        vector=FockVector(kept / kept_norm, g),
        branch=branch,
        source_root=root,
        truncation_n=cut,
        tail_norm=tail,
        raw=kept,
        raw_norm=kept_norm,
        table=table,
    )


def coherent_coefficients(alpha, n_max=None):
    """Fock coefficients of the real coherent state |alpha>."""
    if n_max is None:
        n_max = int(math.ceil(alpha * alpha + 12 * abs(alpha) + 20))
    if alpha == 0:
        c = np.zeros(n_max + 1)
        c[0] = 1.0
        return c
    n = np.arange(n_max + 1)
    c = np.exp(n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1) - 0.5 * alpha * alpha)
    return c * np.sign(alpha) ** n


def _closed_form_state(params, root, branch):
    g = params.g
    if root.closed_form == "decoupled":
        # both branches are the lab vacuum, seen from the +g frame
        coeffs = coherent_coefficients(-g)
    elif branch == PLUS:
        coeffs = coherent_coefficients(-2 * g)
    else:
        coeffs = -np.array([1.0])
    cut = _cut_index(coeffs) if len(coeffs) > 1 else len(coeffs)
    cut = cut or len(coeffs)
    kept = coeffs[:cut]
    norm = float(np.linalg.norm(kept))
    return BranchState(vector=FockVector(kept / norm, g), branch=branch, source_root=root,
                       truncation_n=cut, tail_norm=0.0, raw=kept, raw_norm=norm)


def build_branch_state(params, root, branch, n_cap=N_CAP, tail_tolerance=STATE_TAIL_TOLERANCE):
    """Normalized photonic branch state for a spectral root, in the +g frame."""
    if branch not in (PLUS, MINUS):
        raise ValueError(f"branch must be {PLUS!r} or {MINUS!r}, got {branch!r}")
    if root.closed_form is not None:
        return _closed_form_state(params, root, branch)
    u = stabilized_coefficients(params, root, n_cap)
    table = _table_from_scaled(params, root.x_root, u)
    n = np.arange(len(u))
    sign = (-1.0) ** n
    if branch == PLUS:
        raw = sign * u
    else:
        raw = sign * u * params.delta / (root.x_root - n)
    return _from_raw(raw, branch, root, params.g, table, tail_tolerance)


def build_branches(params, root, n_cap=N_CAP, tail_tolerance=STATE_TAIL_TOLERANCE):
    """(plus, minus) branch states sharing one coefficient sequence."""
    if root.closed_form is not None:
        return (_closed_form_state(params, root, PLUS), _closed_form_state(params, root, MINUS))
    u = stabilized_coefficients(params, root, n_cap)
    table = _table_from_scaled(params, root.x_root, u)
    n = np.arange(len(u))
    sign = (-1.0) ** n
    plus = _from_raw(sign * u, PLUS, root, params.g, table, tail_tolerance)
    minus = _from_raw(sign * u * params.delta / (root.x_root - n), MINUS, root, params.g, table,
                      tail_tolerance)
    return plus, minus


__all__ = [
    "BranchState",
    "FockVector",
    "apply_lowering",
    "apply_raising",
    "build_branch_state",
    "build_branches",
    "coherent_coefficients",
    "inner",
    "stabilized_coefficients",
]
