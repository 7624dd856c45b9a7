"""One-call ground-state pipeline: root -> branch states -> statistics."""
from __future__ import annotations

from dataclasses import dataclass

from . import spectral
from .params import RabiParams
from .spectral import SpectralRoot
from .state import STATE_TAIL_TOLERANCE, BranchState, build_branches
from .stats import PhotonStatistics, photon_statistics


@dataclass(frozen=True)
class GroundState:
    params: RabiParams
    root: SpectralRoot
    plus: BranchState
    minus: BranchState
    stats: PhotonStatistics

    @property
    def energy(self):
        return self.root.energy

    @property
    def truncation_n(self):
        return self.minus.truncation_n


def solve(params, root_tolerance=spectral.ROOT_TOLERANCE,
          series_tolerance=spectral.SERIES_TOLERANCE, n_cap=spectral.N_CAP,
          state_tail_tolerance=STATE_TAIL_TOLERANCE):
    """Exact ground state of the Rabi model and its photon statistics.

    >>> gs = solve(RabiParams(1.0, 0.0))
    >>> gs.energy, gs.stats.mean_n
    (-1.0, 0.0)
    """
    root = spectral.ground_solution(params, root_tolerance=root_tolerance,
                                    series_tolerance=series_tolerance, n_cap=n_cap)
    plus, minus = build_branches(params, root, n_cap=n_cap, tail_tolerance=state_tail_tolerance)
    return GroundState(params, root, plus, minus, photon_statistics(plus, minus))
