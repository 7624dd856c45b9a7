import math

import numpy as np
import pytest

from qrabi.errors import ConvergenceFailure
from qrabi.oracle import build_hamiltonian, lowest_eigenpair, oracle_statistics
from qrabi.params import RabiParams


def test_decoupled_matrix():
    h = build_hamiltonian(RabiParams(1.0, 0.0), 2)
    np.testing.assert_array_equal(np.diag(h.entries), [-1, 1, 0, 2, 1, 3])
    assert h.dim == 6
    e0, v = lowest_eigenpair(h)
    assert e0 == pytest.approx(-1.0, abs=1e-14)
    assert abs(v[0]) == pytest.approx(1.0, abs=1e-14)


def test_matrix_entries_and_symmetry():
    p = RabiParams(0.7, 0.3)
    h = build_hamiltonian(p, 5).entries
    assert np.array_equal(h, h.T)
    for n in range(5):
        assert h[2 * (n + 1), 2 * n + 1] == p.g * math.sqrt(n + 1)
        assert h[2 * (n + 1) + 1, 2 * n] == p.g * math.sqrt(n + 1)
    assert np.count_nonzero(h) == 12 + 4 * 5


def test_single_block():
    p = RabiParams(1.0, 0.5)
    e0, _ = lowest_eigenpair(build_hamiltonian(p, 0))
    assert e0 == pytest.approx(-p.delta, abs=1e-14)  # no coupling inside the n=0 block
    e0, _ = lowest_eigenpair(build_hamiltonian(p, 1))
    assert e0 < -p.delta


def test_displaced_oscillator_limit():
    e0, _ = lowest_eigenpair(build_hamiltonian(RabiParams(1e-12, 1.0), 60))
    assert e0 == pytest.approx(-1.0, abs=1e-8)


def test_self_convergence():
    p = RabiParams(1.0, 1.0)
    e60, _ = lowest_eigenpair(build_hamiltonian(p, 60))
    e80, _ = lowest_eigenpair(build_hamiltonian(p, 80))
    assert abs(e60 - e80) < 1e-10


def test_variational_monotonicity():
    p = RabiParams(2.0, 2.0)
    es = [lowest_eigenpair(build_hamiltonian(p, n))[0] for n in (4, 8, 16, 32, 48)]
    assert all(b <= a + 1e-12 for a, b in zip(es, es[1:]))


def test_random_symmetric_residual(rng):
    m = rng.standard_normal((50, 50))
    m = (m + m.T) / 2
    e0, v = lowest_eigenpair(m)
    assert np.linalg.norm(m @ v - e0 * v) < 1e-9 * np.max(np.abs(m))
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-14)


def test_nonfinite_matrix():
    with pytest.raises(ConvergenceFailure):
        lowest_eigenpair(np.array([[np.nan, 0.0], [0.0, 1.0]]))


def test_coherent_panel_at_small_delta():
    r = oracle_statistics(RabiParams(1e-6, 1.0))
    s = r.stats
    assert s.mean_n == pytest.approx(1.0, abs=1e-5)
    assert s.var_n == pytest.approx(1.0, abs=1e-5)
    assert abs(s.q_excess) < 1e-5
    assert s.product == pytest.approx(0.5, abs=1e-6)
    assert s.overlap == pytest.approx(math.exp(-2), abs=1e-3)


@pytest.mark.parametrize("delta,g", [(1.0, 1.0), (0.1, 1.0), (10.0, 3.0)])
def test_parity_and_projection(delta, g, oracle_cache):
    r = oracle_cache(delta, g)
    assert r.parity_expect == pytest.approx(-1.0, abs=1e-8)
    assert r.projection_norms[0] == pytest.approx(r.projection_norms[1], abs=1e-10)
    assert r.plus_stats.mean_n == pytest.approx(r.stats.mean_n, abs=1e-9)
    assert r.plus_stats.mean_x == pytest.approx(-r.stats.mean_x, abs=1e-9)


def test_cutoff_increase_is_harmless(oracle_cache):
    r = oracle_cache(1.0, 1.0)
    bigger = int(math.ceil(1.25 * r.n_max_used))
    e, _ = lowest_eigenpair(build_hamiltonian(RabiParams(1.0, 1.0), bigger))
    assert abs(e - r.e0) < 1e-10


def test_hard_cap():
    with pytest.raises(ConvergenceFailure):
        oracle_statistics(RabiParams(10.0, 3.0), hard_cap=40)
