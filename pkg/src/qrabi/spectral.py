"""Spectral-function route to the Rabi spectrum.

The renormalized eigenvalues x = E + g^2 are zeros of

    G_plus(x)  = sum_n (K_n(x) - J_n(x)) g^n
    G_minus(x) = sum_n (K_n(x) + J_n(x)) g^n

with the three-term recurrence

    n K_n = f_{n-1} K_{n-1} - K_{n-2},   K_{-1} = 0, K_0 = 1,
    f_n(x) = 2g + (n - x + delta^2 / (x - n)) / (2g),
    J_n(x) = delta / (x - n) K_n(x).

G has simple poles at every non-negative integer. Between two poles it is
continuous, so sign changes inside a pole-free interval bracket genuine roots.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from .errors import (
    BracketInvalid,
    JuddianSuspect,
    NoRootFound,
    PoleProximity,
    SeriesNoConverge,
    ZeroCoupling,
)

PLUS = "plus"
MINUS = "minus"
PARITIES = (PLUS, MINUS)

POLE_GUARD = 1e-6
SERIES_TOLERANCE = 1e-14
TAIL_RUN = 4
N_CAP = 400
ROOT_TOLERANCE = 1e-6
G_MIN = 1e-3
DELTA_MIN = 1e-10
SCAN_POINTS = 64
SCAN_STEP = 0.05

# Closest approach to the pole at x = 0 when scanning; poles at k >= 1 are
# approached down to a few ulps of k.
_ZERO_POLE_FLOOR = 1e-200
_APPROACH_DECADES = 2


def _sign(parity):
    if parity == PLUS:
        return 1.0
    if parity == MINUS:
        return -1.0
    raise ValueError(f"parity must be {PLUS!r} or {MINUS!r}, got {parity!r}")


def _check_pole(x, n_max, pole_guard):
    nearest = round(x)
    if 0 <= nearest <= n_max and abs(x - nearest) <= pole_guard:
        raise PoleProximity(f"x={x!r} lies within {pole_guard:g} of the pole at {nearest}")


def _check_coupling(params):
    if params.g == 0:
        raise ZeroCoupling("f_n is singular at g = 0; use the decoupled closed form")


@dataclass(frozen=True)
class CoefficientTable:
    x: float
    k: np.ndarray
    j: np.ndarray
    n_used: int
    tail_estimate: float
    delta: float
    g: float

    def f(self, n):
        g, x = self.g, self.x
        return 2 * g + (n - x + self.delta**2 / (x - n)) / (2 * g)

    def recurrence_residual(self):
        """Largest relative violation of n K_n = f_{n-1} K_{n-1} - K_{n-2}."""
        worst = 0.0
        k = self.k
        for n in range(1, len(k)):
            prev2 = k[n - 2] if n >= 2 else 0.0
            lhs = n * k[n]
            rhs = self.f(n - 1) * k[n - 1]
            scale = max(abs(lhs), abs(rhs), 1.0)
            worst = max(worst, abs(lhs - rhs + prev2) / scale)
        return worst


@dataclass(frozen=True)
class SpectralRoot:
    x_root: float
    parity: str
    index_m: int
    energy: float
    residual: float
    relative_residual: float = 0.0
    n_used: int = 0
    juddian: bool = False
    closed_form: str | None = None


def compute_coefficients(params, x, n_max, pole_guard=POLE_GUARD):
    """Forward recurrence for K_0..K_{n_max} and J_0..J_{n_max} at ``x``."""
    _check_coupling(params)
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    _check_pole(x, n_max, pole_guard)
    delta, g = params.delta, params.g
    k = np.empty(n_max + 1)
    k[0] = 1.0
    prev = 0.0
    for n in range(1, n_max + 1):
        f = 2 * g + (n - 1 - x + delta * delta / (x - (n - 1))) / (2 * g)
        k[n] = (f * k[n - 1] - prev) / n
        prev = k[n - 1]
    n_idx = np.arange(n_max + 1)
    j = delta / (x - n_idx) * k
    with np.errstate(over="ignore"):
        tail = float(abs(k[-1] + j[-1]) * g**n_max)
    return CoefficientTable(x=float(x), k=k, j=j, n_used=n_max, tail_estimate=tail,
                            delta=delta, g=g)


class GSeries(NamedTuple):
    value: float
    n_used: int
    tail_estimate: float
    max_term: float


def g_series(params, x, parity, series_tolerance=SERIES_TOLERANCE, tail_run=TAIL_RUN,
             n_cap=N_CAP, pole_guard=POLE_GUARD):
    """Truncated spectral sum with its truncation diagnostics.

    Runs the recurrence on the scaled sequence K_n g^n, which keeps large
    orders away from under- and overflow.
    """
    _check_coupling(params)
    _check_pole(x, n_cap, pole_guard)
    s = _sign(parity)
    delta, g = params.delta, params.g
    g2 = g * g
    kt_prev, kt = 0.0, 1.0
    term = 1.0 - s * delta / x
    total = term
    biggest = abs(term)
    quiet = 0
    for n in range(1, n_cap + 1):
        gf = 2 * g2 + (n - 1 - x + delta * delta / (x - (n - 1))) / 2
        kt_prev, kt = kt, (gf * kt - g2 * kt_prev) / n
        term = kt * (1.0 - s * delta / (x - n))
        total += term
        mag = abs(term)
        if mag > biggest:
            biggest = mag
        if mag < series_tolerance * biggest:
            quiet += 1
            if quiet >= tail_run:
                return GSeries(total, n, mag, biggest)
        else:
            quiet = 0
    raise SeriesNoConverge(f"G series at x={x!r} not converged after {n_cap} terms")


def g_function(params, x, parity, **kwargs):
    return g_series(params, x, parity, **kwargs).value


def g_values(params, xs, series_tolerance=SERIES_TOLERANCE, tail_run=TAIL_RUN, n_cap=N_CAP):
    """Evaluate G_plus and G_minus on an array of pole-free points at once."""
    _check_coupling(params)
    xs = np.asarray(xs, dtype=float)
    delta, g = params.delta, params.g
    g2 = g * g
    kt_prev = np.zeros_like(xs)
    kt = np.ones_like(xs)
    jt = delta / xs
    g_plus = kt - jt
    g_minus = kt + jt
    biggest = np.maximum(np.abs(g_plus), np.abs(g_minus))
    quiet = np.zeros(xs.shape, dtype=int)
    done = np.zeros(xs.shape, dtype=bool)
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, n_cap + 1):
            gf = 2 * g2 + (n - 1 - xs + delta * delta / (xs - (n - 1))) / 2
            kt_prev, kt = kt, (gf * kt - g2 * kt_prev) / n
            jt = delta / (xs - n) * kt
            tp = np.where(done, 0.0, kt - jt)
            tm = np.where(done, 0.0, kt + jt)
            g_plus += tp
            g_minus += tm
            mag = np.maximum(np.abs(tp), np.abs(tm))
            biggest = np.maximum(biggest, mag)
            quiet = np.where(mag < series_tolerance * biggest, quiet + 1, 0)
            done |= quiet >= tail_run
            if done.all():
                return g_plus, g_minus
    bad = xs[~done]
    raise SeriesNoConverge(f"G series not converged after {n_cap} terms at x={bad[:3]!r}")


def pole_residue(params, k, parity):
    """Residue of G_parity at the integer pole x = k.

    Just left of the pole G has sign -sign(residue), just right +sign(residue).
    A vanishing residue marks a Juddian (degenerate exceptional) point.
    """
    _check_coupling(params)
    s = _sign(parity)
    delta, g = params.delta, params.g
    x = float(k)
    # regular part of K_0..K_k at x = k
    kk = [1.0]
    prev = 0.0
    for n in range(1, k + 1):
        f = 2 * g + (n - 1 - x + delta * delta / (x - (n - 1))) / (2 * g)
        kk.append((f * kk[-1] - prev) / n)
        prev = kk[-2]
    res = -s * delta * kk[k] * g**k
    # residues of K_n for n > k follow the same recurrence from R_k = 0
    r_prev, r = 0.0, delta * delta / (2 * g) * kk[k] / (k + 1)
    biggest = abs(res)
    quiet = 0
    for n in range(k + 1, k + N_CAP):
        term = r * g**n * (1.0 - s * delta / (x - n))
        res += term
        biggest = max(biggest, abs(term))
        quiet = quiet + 1 if abs(term) < SERIES_TOLERANCE * biggest else 0
        if quiet >= TAIL_RUN:
            break
        f = 2 * g + (n - x + delta * delta / (x - n)) / (2 * g)
        r_prev, r = r, (f * r - r_prev) / (n + 1)
    return res


def _scan_grid(x_lo, x_hi, scan_points, pole_guard):
    """Scan points grouped by pole-free interval."""
    poles = [k for k in range(max(0, math.ceil(x_lo)), math.floor(x_hi) + 1)]
    edges = [x_lo] + poles + [x_hi]
    segments = []
    width = x_hi - x_lo
    for left, right in zip(edges[:-1], edges[1:]):
        if right <= left:
            continue
        left_pole = left in poles
        right_pole = right in poles
        a = left + pole_guard if left_pole else left
        b = right - pole_guard if right_pole else right
        if b <= a:
            continue
        count = max(2, int(math.ceil(scan_points * (right - left) / width)) + 1)
        pts = list(np.linspace(a, b, count))
        if left_pole:
            pts = [left + d for d in _approach(left, pole_guard)[::-1]] + pts
        if right_pole:
            pts = pts + [right - d for d in _approach(right, pole_guard)]
        pts = np.array(sorted(set(pts)))
        segments.append(pts[(pts > left if left_pole else pts >= left)
                            & (pts < right if right_pole else pts <= right)])
    return segments


def _approach(k, pole_guard):
    floor = _ZERO_POLE_FLOOR if k == 0 else 8 * np.finfo(float).eps * k
    out = []
    d = pole_guard / 10**_APPROACH_DECADES
    while d >= floor:
        out.append(d)
        d /= 10**_APPROACH_DECADES
    return out


def bracket_roots(params, parity, x_lo, x_hi, scan_points=SCAN_POINTS, pole_guard=POLE_GUARD,
                  **series_kwargs):
    """Sign-change brackets of G_parity on [x_lo, x_hi], never straddling a pole.

    The uniform grid is kept ``pole_guard`` away from each pole; extra points
    approach every pole geometrically so roots hugging a pole are still caught.
    """
    _sign(parity)
    if not x_hi > x_lo:
        return []
    idx = 0 if parity == PLUS else 1
    brackets = []
    for pts in _scan_grid(x_lo, x_hi, scan_points, pole_guard):
        vals = g_values(params, pts, **series_kwargs)[idx]
        sgn = np.sign(vals)
        for i in range(len(pts) - 1):
            if sgn[i] == 0:
                brackets.append((float(pts[i]), float(pts[i])))
            elif sgn[i] * sgn[i + 1] < 0:
                brackets.append((float(pts[i]), float(pts[i + 1])))
        if sgn[-1] == 0:
            brackets.append((float(pts[-1]), float(pts[-1])))
    return brackets


def refine_root(params, parity, bracket, index_m=0, root_tolerance=ROOT_TOLERANCE,
                pole_guard=POLE_GUARD, **series_kwargs):
    """Polish a bracketed zero of G_parity to full double precision.

    Brent's method (bisection safeguarded inverse quadratic steps) with a
    relative x tolerance, so roots lying extremely close to the pole at 0 keep
    their relative accuracy.
    """
    a, b = bracket

    def fn(x):
        return g_series(params, x, parity, pole_guard=0.0, **series_kwargs).value

    if a == b:
        x_root = a
    else:
        fa, fb = fn(a), fn(b)
        if fa == 0:
            x_root = a
        elif fb == 0:
            x_root = b
        elif np.sign(fa) == np.sign(fb):
            raise BracketInvalid(f"G_{parity} has the same sign at both ends of {bracket}")
        else:
            x_root = brentq(fn, a, b, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    series = g_series(params, x_root, parity, pole_guard=0.0, **series_kwargs)
    rel = abs(series.value) / series.max_term if series.max_term else 0.0
    if rel > root_tolerance:
        raise NoRootFound(f"refined root x={x_root!r} has relative residual {rel:.3g}")
    juddian = False
    nearest = round(x_root)
    if nearest >= 0 and abs(x_root - nearest) < pole_guard:
        residue = pole_residue(params, nearest, parity)
        scale = params.delta * max(1.0, params.g**nearest)
        if abs(residue) < 1e-8 * scale:
            juddian = True
            warnings.warn(JuddianSuspect(f"root x={x_root!r} coincides with the pole at {nearest}"),
                          stacklevel=2)
    return SpectralRoot(
        x_root=float(x_root),
        parity=parity,
        index_m=index_m,
        energy=float(x_root) - params.g**2,
        residual=abs(series.value),
        relative_residual=rel,
        n_used=series.n_used,
        juddian=juddian,
    )


def closed_form_root(params):
    """Ground root in the decoupled (g -> 0) or displaced-oscillator (delta -> 0) limit."""
    if params.g < G_MIN:
        return SpectralRoot(x_root=params.g**2 - params.delta, parity=MINUS, index_m=0,
                            energy=-params.delta, residual=0.0, closed_form="decoupled")
    return SpectralRoot(x_root=0.0, parity=MINUS, index_m=0, energy=-params.g**2,
                        residual=0.0, closed_form="displaced")


def ground_solution(params, g_min=G_MIN, delta_min=DELTA_MIN, scan_step=SCAN_STEP,
                    root_tolerance=ROOT_TOLERANCE, pole_guard=POLE_GUARD, **series_kwargs):
    """Lowest root over both parities on x in [-delta-1, 0).

    Variationally E0 >= -delta - g^2, so x0 >= -delta and the window starts
    below every root; the first bracket of each parity is therefore index 0.
    """
    if params.g < g_min or params.delta < delta_min:
        return closed_form_root(params)
    x_lo, x_hi = -params.delta - 1.0, 0.0
    for attempt in range(2):
        points = max(SCAN_POINTS, int(math.ceil((x_hi - x_lo) / scan_step)))
        found = []
        for parity in PARITIES:
            brackets = bracket_roots(params, parity, x_lo, x_hi, points, pole_guard,
                                     **series_kwargs)
            if brackets:
                found.append(refine_root(params, parity, brackets[0], 0, root_tolerance,
                                         pole_guard, **series_kwargs))
        if found:
            return min(found, key=lambda r: r.energy)
        x_lo -= params.delta + 1.0
    raise NoRootFound(f"no spectral root for {params} in the scan window")


def recheck_extended(table, params, dps=40):
    """Re-run the recurrence in extended precision; largest relative deviation of K and J."""
    import mpmath

    with mpmath.workdps(dps):
        delta, g, x = mpmath.mpf(params.delta), mpmath.mpf(params.g), mpmath.mpf(table.x)
        k = [mpmath.mpf(1)]
        prev = mpmath.mpf(0)
        for n in range(1, len(table.k)):
            f = 2 * g + (n - 1 - x + delta**2 / (x - (n - 1))) / (2 * g)
            k.append((f * k[-1] - prev) / n)
            prev = k[-2]
        worst = 0.0
        for n, kn in enumerate(k):
            jn = delta / (x - n) * kn
            for got, ref in ((table.k[n], kn), (table.j[n], jn)):
                if ref != 0:
                    worst = max(worst, float(abs((got - ref) / ref)))
    return worst


def with_index(root, index_m):
    return replace(root, index_m=index_m)
