"""Brute-force reference: dense diagonalization in a truncated Fock x spin basis.

Basis ordering is interleaved and fixed: index 2n is |n, down>, index 2n+1
is |n, up>, with sz|up> = +|up>. Everything here works in the undisplaced
number basis and shares no code with the spectral route.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConvergenceFailure
from .stats import PhotonStatistics

CONVERGENCE_TARGET = 1e-9
MEAN_N_TARGET = 1e-8
N_START = 32
GROWTH = 1.5
HARD_CAP = 4096


@dataclass(frozen=True)
class TruncatedHamiltonian:
    n_max: int
    entries: np.ndarray

    @property
    def dim(self):
        return 2 * (self.n_max + 1)


@dataclass(frozen=True)
class OracleResult:
    e0: float
    vector: np.ndarray
    parity_expect: float
    stats: PhotonStatistics
    n_max_used: int
    plus_vector: np.ndarray
    minus_vector: np.ndarray
    projection_norms: tuple
    plus_stats: PhotonStatistics | None = None


def build_hamiltonian(params, n_max):
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    dim = 2 * (n_max + 1)
    h = np.zeros((dim, dim))
    for n in range(n_max + 1):
        h[2 * n, 2 * n] = n - params.delta
        h[2 * n + 1, 2 * n + 1] = n + params.delta
        if n < n_max:
            c = params.g * math.sqrt(n + 1)
            # sx (a + a^dag) flips the spin and moves one photon
            h[2 * (n + 1), 2 * n + 1] = h[2 * n + 1, 2 * (n + 1)] = c
            h[2 * (n + 1) + 1, 2 * n] = h[2 * n, 2 * (n + 1) + 1] = c
    return TruncatedHamiltonian(n_max=n_max, entries=h)


def lowest_eigenpair(h, tol=1e-9):
    """Lowest eigenvalue and unit eigenvector of a real symmetric matrix.

    The vector's sign is fixed so that its largest-magnitude entry is positive.
    """
    m = h.entries if isinstance(h, TruncatedHamiltonian) else np.asarray(h, dtype=float)
    if not np.all(np.isfinite(m)):
        raise ConvergenceFailure("matrix has non-finite entries")
    try:
        w, v = scipy.linalg.eigh(m, subset_by_index=[0, 0])
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceFailure(f"eigensolver failed: {exc}") from exc
    e0, vec = float(w[0]), v[:, 0]
    vec = vec / np.linalg.norm(vec)
    if vec[np.argmax(np.abs(vec))] < 0:
        vec = -vec
    scale = max(1.0, float(np.max(np.abs(m))))
    residual = float(np.linalg.norm(m @ vec - e0 * vec))
    if residual > tol * scale:
        raise ConvergenceFailure(f"eigenpair residual {residual:.3g} exceeds {tol * scale:.3g}")
    return e0, vec


def _ladder(size):
    return np.diag(np.sqrt(np.arange(1, size)), 1)


def _panel(u, overlap):
    """Statistics of a normalized photonic vector in the number basis."""
    size = len(u) + 3
    psi = np.zeros(size)
    psi[: len(u)] = u
    a = _ladder(size)
    ad = a.T
    num = ad @ a
    x = (a + ad) / math.sqrt(2)
    mean_n = psi @ num @ psi
    n2 = psi @ num @ num @ psi
    mean_x = psi @ x @ psi
    x2 = psi @ x @ x @ psi
    # p = (a - a^dag)/(i sqrt 2): p^2 = -(a - a^dag)^2 / 2 is real
    p2 = -(psi @ (a - ad) @ (a - ad) @ psi) / 2
    # <p> and <(xp + px)/2> are i times real quantities that vanish for real psi
    mean_p = (psi @ a @ psi - psi @ ad @ psi) / math.sqrt(2)
    cov_xp = (psi @ (a @ a) @ psi - psi @ (ad @ ad) @ psi) / 2 - mean_x * mean_p
    dx = math.sqrt(max(x2 - mean_x**2, 0.0))
    dp = math.sqrt(max(p2 - mean_p**2, 0.0))
    var_n = n2 - mean_n**2
    return PhotonStatistics(
        mean_n=float(mean_n),
        var_n=float(var_n),
        q_excess=float(var_n - mean_n),
        mean_x=float(mean_x),
        mean_p=float(mean_p),
        dx=dx,
        dp=dp,
        product=dx * dp,
        r=-0.5 * math.log(dp / dx),
        overlap=abs(float(overlap)),
        cov_xp=float(cov_xp),
    )


def _solve_at(params, n_max):
    e0, vec = lowest_eigenpair(build_hamiltonian(params, n_max))
    down, up = vec[0::2], vec[1::2]
    plus = (up + down) / math.sqrt(2)
    minus = (up - down) / math.sqrt(2)
    norms = (float(np.linalg.norm(plus)), float(np.linalg.norm(minus)))
    plus_n, minus_n = plus / norms[0], minus / norms[1]
    parity = float(np.sum((-1.0) ** np.arange(n_max + 1) * (up**2 - down**2)))
    overlap = float(plus_n @ minus_n)
    return e0, vec, parity, plus_n, minus_n, norms, overlap


def oracle_statistics(params, convergence_target=CONVERGENCE_TARGET, n_start=N_START,
                      hard_cap=HARD_CAP):
    """Ground state and minus-branch statistics with a self-converged cutoff.

    The cutoff grows geometrically until both the energy and the mean photon
    number of the minus projection stop moving.
    """
    n_max = n_start
    prev = None
    while True:
        e0, vec, parity, plus, minus, norms, overlap = _solve_at(params, n_max)
        stats = _panel(minus, overlap)
        if prev is not None:
            de = abs(e0 - prev[0])
            dn = abs(stats.mean_n - prev[1])
            if de < convergence_target and dn <= MEAN_N_TARGET * max(abs(stats.mean_n), 1e-300):
                return OracleResult(e0=e0, vector=vec, parity_expect=parity, stats=stats,
                                    n_max_used=n_max, plus_vector=plus, minus_vector=minus,
                                    projection_norms=norms, plus_stats=_panel(plus, overlap))
        prev = (e0, stats.mean_n)
        nxt = int(math.ceil(n_max * GROWTH))
        if nxt > hard_cap:
            raise ConvergenceFailure(f"oracle cutoff exceeded {hard_cap} for {params}")
        n_max = nxt
