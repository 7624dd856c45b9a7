import math
import warnings

import numpy as np
import pytest

from qrabi import spectral as sp
from qrabi.errors import BracketInvalid, PoleProximity, SeriesNoConverge, ZeroCoupling
from qrabi.oracle import build_hamiltonian
from qrabi.params import RabiParams

from conftest import VALIDATION_GRID


def test_first_coefficients_by_hand():
    table = sp.compute_coefficients(RabiParams(1.0, 0.5), -1.0, 1)
    assert table.k[0] == 1.0
    assert table.k[1] == pytest.approx(1.0, abs=1e-15)
    assert table.j[0] == pytest.approx(-1.0, abs=1e-15)


def test_table_invariants():
    p = RabiParams(1.0, 1.0)
    table = sp.compute_coefficients(p, -1.5, 40)
    n = np.arange(41)
    np.testing.assert_allclose(table.j, p.delta / (table.x - n) * table.k, rtol=0, atol=0)
    assert table.recurrence_residual() < 1e-12


def test_extended_precision_recheck():
    p = RabiParams(1.0, 1.0)
    table = sp.compute_coefficients(p, -1.5, 40)
    assert sp.recheck_extended(table, p) < 1e-10


@pytest.mark.parametrize("x", [0.0, 3.0 + 1e-7, 2.0 - 5e-7])
def test_pole_proximity(x):
    with pytest.raises(PoleProximity):
        sp.compute_coefficients(RabiParams(1.0, 1.0), x, 5)


def test_zero_coupling():
    with pytest.raises(ZeroCoupling):
        sp.compute_coefficients(RabiParams(1.0, 0.0), -1.0, 5)
    with pytest.raises(ZeroCoupling):
        sp.g_function(RabiParams(1.0, 0.0), -1.0, sp.MINUS)


def test_sign_change_straddles_ground_root(oracle_cache):
    p = RabiParams(1.0, 1.0)
    x0 = oracle_cache(1.0, 1.0).e0 + p.g**2
    lo = sp.g_function(p, x0 - 1e-3, sp.MINUS)
    hi = sp.g_function(p, x0 + 1e-3, sp.MINUS)
    assert lo * hi < 0


def test_series_converges_quickly_and_stably():
    p = RabiParams(0.1, 0.1)
    x = -p.delta - 0.5
    s = sp.g_series(p, x, sp.MINUS)
    assert math.isfinite(s.value) and s.n_used < 50
    doubled = sp.g_series(p, x, sp.MINUS, n_cap=2 * sp.N_CAP)
    assert abs(doubled.value - s.value) <= 1e-12 * abs(s.value)


def test_midway_between_poles_is_finite():
    assert math.isfinite(sp.g_function(RabiParams(1.0, 1.0), 0.5, sp.PLUS))


def test_series_cap():
    with pytest.raises(SeriesNoConverge):
        sp.g_series(RabiParams(1.0, 3.0), -0.5, sp.MINUS, n_cap=5)


@pytest.mark.parametrize("delta,g", [(1.0, 1.0), (0.3, 2.0), (5.0, 0.7)])
def test_vectorized_matches_scalar(delta, g):
    p = RabiParams(delta, g)
    xs = np.array([-delta - 0.7, -0.3, 0.5, 1.5])
    gp, gm = sp.g_values(p, xs)
    for x, a, b in zip(xs, gp, gm):
        assert a == pytest.approx(sp.g_function(p, x, sp.PLUS), rel=1e-12)
        assert b == pytest.approx(sp.g_function(p, x, sp.MINUS), rel=1e-12)


def test_single_ground_bracket(oracle_cache):
    p = RabiParams(1.0, 1.0)
    brackets = sp.bracket_roots(p, sp.MINUS, -2.0, -1e-6, 64)
    assert len(brackets) == 1
    a, b = brackets[0]
    x0 = oracle_cache(1.0, 1.0).e0 + 1.0
    assert a <= x0 <= b


def test_empty_range():
    assert sp.bracket_roots(RabiParams(1.0, 1.0), sp.MINUS, 0.3, 0.3) == []


def test_brackets_never_straddle_poles():
    p = RabiParams(0.5, 0.5)
    for a, b in sp.bracket_roots(p, sp.PLUS, -1.0, 3.0):
        assert not any(a < k < b for k in range(0, 4))


def _oracle_levels(p, parity, n_max=80, count=6):
    h = build_hamiltonian(p, n_max).entries
    w, v = np.linalg.eigh(h)
    sign = (-1.0) ** np.arange(n_max + 1)
    out = []
    for e, vec in zip(w[:count], v.T[:count]):
        down, up = vec[0::2], vec[1::2]
        par = np.sum(sign * (up**2 - down**2))
        if par * (1 if parity == sp.PLUS else -1) > 0.5:
            out.append(e)
    return out


def test_plus_parity_roots_are_oracle_levels():
    p = RabiParams(0.5, 0.5)
    levels = _oracle_levels(p, sp.PLUS)
    brackets = sp.bracket_roots(p, sp.PLUS, -1.0, 3.0)
    assert brackets
    for br in brackets:
        root = sp.refine_root(p, sp.PLUS, br)
        assert min(abs(root.energy - e) for e in levels) < 1e-8


def test_refine_root_matches_oracle(oracle_cache):
    p = RabiParams(1.0, 1.0)
    br = sp.bracket_roots(p, sp.MINUS, -2.0, -1e-6, 64)[0]
    root = sp.refine_root(p, sp.MINUS, br)
    assert root.energy == root.x_root - p.g**2
    assert abs(root.energy - oracle_cache(1.0, 1.0).e0) < 1e-8
    assert root.relative_residual < sp.ROOT_TOLERANCE


def test_bracket_invalid():
    p = RabiParams(1.0, 1.0)
    with pytest.raises(BracketInvalid):
        sp.refine_root(p, sp.MINUS, (-0.1, -0.05))


@pytest.mark.parametrize("delta,g", VALIDATION_GRID)
def test_ground_energy_matches_oracle(delta, g, oracle_cache):
    root = sp.ground_solution(RabiParams(delta, g))
    ref = oracle_cache(delta, g)
    assert abs(root.energy - ref.e0) < 1e-7
    assert root.parity == sp.MINUS and ref.parity_expect < -1 + 1e-8


def test_ground_below_both_limits():
    root = sp.ground_solution(RabiParams(1.0, 1.0))
    assert root.parity == sp.MINUS
    assert root.energy < -1.0 and root.energy < -1.0**2


@pytest.mark.parametrize("g", [0.5, 1.0, 2.0])
def test_small_delta_limit(g):
    root = sp.ground_solution(RabiParams(1e-6, g))
    assert root.closed_form is None
    assert abs(root.energy + g * g) < 1e-5


@pytest.mark.parametrize("g", [0.0, 1e-6, 5e-4])
def test_decoupled_closed_form(g):
    root = sp.ground_solution(RabiParams(1.0, g))
    assert root.closed_form == "decoupled"
    assert root.energy == -1.0 and root.parity == sp.MINUS


def test_displaced_closed_form():
    root = sp.ground_solution(RabiParams(1e-12, 1.0))
    assert root.closed_form == "displaced" and root.energy == -1.0


@pytest.mark.parametrize("delta,g", [(0.1, 1.0), (2.0, 3.0), (0.5, 0.2)])
def test_truncation_stability(delta, g):
    p = RabiParams(delta, g)
    x = sp.ground_solution(p).x_root - 0.25
    a = sp.g_function(p, x, sp.MINUS)
    b = sp.g_function(p, x, sp.MINUS, n_cap=2 * sp.N_CAP)
    assert abs(a - b) <= 1e-12 * max(abs(a), 1e-300)


def test_juddian_flag_on_vanishing_residue(monkeypatch):
    p = RabiParams(1.0, 1.0)
    br = sp.bracket_roots(p, sp.MINUS, -2.0, -1e-6, 64)[0]
    monkeypatch.setattr(sp, "pole_residue", lambda *a, **k: 0.0)
    with warnings.catch_warnings(record=True):
        warnings.simplefilter("always")
        root = sp.refine_root(p, sp.MINUS, br, pole_guard=1.0)
    assert root.juddian
