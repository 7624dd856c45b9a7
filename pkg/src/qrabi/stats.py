"""Photon statistics of a branch state, evaluated in the laboratory frame.

A branch is stored in the frame displaced by alpha, where the laboratory
annihilation operator acts as a -> a_frame + alpha. Every moment below is
obtained by applying ladder operators to the stored coefficient vector.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .errors import CrossTermViolation, RootMismatch
from .spectral import MINUS, PLUS
from .state import FockVector, apply_lowering, apply_raising, inner

CROSS_TERM_LIMIT = 1e-8

FIELDS = ("mean_n", "var_n", "q_excess", "mean_x", "mean_p", "dx", "dp", "product", "r",
          "overlap", "cov_xp")


@dataclass(frozen=True)
class PhotonStatistics:
    mean_n: float
    var_n: float
    q_excess: float
    mean_x: float
    mean_p: float
    dx: float
    dp: float
    product: float
    r: float
    overlap: float
    cov_xp: float

    @property
    def mandel_q(self):
        """q_excess / mean_n, or None when the mean photon number vanishes."""
        if self.mean_n < 1e-12:
            return None
        return self.q_excess / self.mean_n

    def as_dict(self):
        return asdict(self)


class LabMoments(NamedTuple):
    a: float
    a2: float
    n: float
    n2: float
    adag: float
    adag2: float


def _lab_lower(v):
    shifted = apply_lowering(v)
    return shifted + v.scaled(v.frame_displacement)


def _lab_raise(v):
    return apply_raising(v) + v.scaled(v.frame_displacement)


def lab_moments(state):
    """<a>, <a^2>, <a^dag a>, <(a^dag a)^2> (plus <a^dag>, <a^dag^2>) of a normalized state."""
    v = state.vector if hasattr(state, "vector") else state
    av = _lab_lower(v)
    a2v = _lab_lower(av)
    nv = _lab_raise(av)
    adag_v = _lab_raise(v)
    return LabMoments(
        a=inner(v, av),
        a2=inner(v, a2v),
        n=inner(av, av),
        n2=inner(nv, nv),
        adag=inner(v, adag_v),
        adag2=inner(v, _lab_raise(adag_v)),
    )


def statistics_from_moments(m, overlap):
    """Assemble the panel from laboratory moments (real coefficient vectors).

    With real coefficients <a> = <a^dag> and <a^2> = <a^dag^2>; ``mean_p`` and
    ``cov_xp`` carry the differences of the separately computed pairs, i.e.
    the numerical residue of quantities that vanish identically.
    """
    mean_x = (m.a + m.adag) / math.sqrt(2)
    mean_p = (m.a - m.adag) / math.sqrt(2)
    x2 = (m.a2 + m.adag2 + 2 * m.n + 1) / 2
    p2 = -(m.a2 + m.adag2 - 2 * m.n - 1) / 2
    dx = math.sqrt(max(x2 - mean_x**2, 0.0))
    dp = math.sqrt(max(p2 - mean_p**2, 0.0))
    var_n = m.n2 - m.n**2
    return PhotonStatistics(
        mean_n=m.n,
        var_n=var_n,
        q_excess=var_n - m.n,
        mean_x=mean_x,
        mean_p=mean_p,
        dx=dx,
        dp=dp,
        product=dx * dp,
        r=-0.5 * math.log(dp / dx),
        overlap=abs(overlap),
        cov_xp=(m.a2 - m.adag2) / 2,
    )


def photon_statistics(plus, minus, branch=MINUS):
    """Statistics of one branch (minus by default) plus the branch overlap.

    The overlap is reported as a magnitude: its sign depends only on the
    arbitrary relative phase convention of the two spin projections.
    """
    if plus.source_root != minus.source_root:
        raise RootMismatch("branches were built from different spectral roots")
    chosen = {PLUS: plus, MINUS: minus}[branch]
    return statistics_from_moments(lab_moments(chosen), inner(plus.vector, minus.vector))


def quadrature_variance(stats, phi):
    """(Delta I)^2 for I = (a e^{-i phi} + a^dag e^{i phi}) / sqrt(2)."""
    if abs(stats.cov_xp) > CROSS_TERM_LIMIT:
        raise CrossTermViolation(f"cov_xp={stats.cov_xp:.3g} breaks the uncorrelated-quadrature form")
    return stats.dx**2 * math.cos(phi) ** 2 + stats.dp**2 * math.sin(phi) ** 2


def direct_quadrature_variance(state, phi):
    """Var(I) by applying I to the state directly, with complex phases."""
    v = state.vector if hasattr(state, "vector") else state
    c = v.coeffs.astype(complex)
    alpha = v.frame_displacement
    size = len(c) + 1
    psi = np.zeros(size, dtype=complex)
    psi[: len(c)] = c
    n = np.arange(size)
    lowered = np.zeros(size, dtype=complex)
    lowered[:-1] = np.sqrt(n[1:]) * psi[1:]
    lowered += alpha * psi
    raised = np.zeros(size, dtype=complex)
    raised[1:] = np.sqrt(n[1:]) * psi[:-1]
    raised += alpha * psi
    i_psi = (np.exp(-1j * phi) * lowered + np.exp(1j * phi) * raised) / math.sqrt(2)
    mean_i = np.vdot(psi, i_psi).real
    return float(np.vdot(i_psi, i_psi).real - mean_i**2)


def vacuum_statistics():
    """Exact panel of the vacuum (the decoupled ground state)."""
    v = FockVector(np.array([1.0]), 0.0)
    return statistics_from_moments(lab_moments(v), 1.0)
