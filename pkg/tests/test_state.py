import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qrabi import spectral as sp
from qrabi.errors import FrameMismatch, TailDivergence
from qrabi.params import RabiParams
from qrabi.state import (FockVector, apply_lowering, apply_raising, build_branch_state,
                         build_branches, coherent_coefficients, inner, stabilized_coefficients)
from qrabi.stats import lab_moments

vectors = st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=30)


@pytest.mark.parametrize("coeffs,expected", [
    ((1, 0, 0), (0, 0)),
    ((0, 1, 0), (1, 0)),
    ((0, 0, 1), (0, math.sqrt(2))),
    ((), ()),
])
def test_lowering(coeffs, expected):
    out = apply_lowering(FockVector(np.array(coeffs, dtype=float)))
    np.testing.assert_allclose(out.coeffs, expected)


@pytest.mark.parametrize("coeffs,expected", [((1,), (0, 1)), ((0, 1), (0, 0, math.sqrt(2)))])
def test_raising(coeffs, expected):
    np.testing.assert_allclose(apply_raising(FockVector(np.array(coeffs, float))).coeffs, expected)


@settings(max_examples=60, deadline=None)
@given(vectors, vectors)
def test_ladder_adjointness(u, w):
    u, w = FockVector(np.array(u)), FockVector(np.array(w))
    left = inner(apply_raising(u), w)
    right = inner(u, apply_lowering(w))
    assert abs(left - right) <= 1e-12 * max(1.0, abs(left))


def test_inner_basics():
    assert inner(FockVector([1.0, 0.0]), FockVector([0.0, 1.0])) == 0.0
    v = FockVector([3.0, 4.0]).normalize()
    assert inner(v, v) == pytest.approx(1.0, abs=1e-15)
    assert inner(FockVector([1.0, 2.0, 3.0]), FockVector([1.0])) == 1.0
    with pytest.raises(FrameMismatch):
        inner(FockVector([1.0], 0.5), FockVector([1.0], 0.0))


def test_addition_pads():
    s = FockVector([1.0]) + FockVector([0.0, 2.0])
    np.testing.assert_array_equal(s.coeffs, [1.0, 2.0])


@pytest.mark.parametrize("delta,g", [(1.0, 1.0), (0.1, 2.0), (2.0, 3.0), (1e-6, 1.0)])
def test_branches_normalized_with_small_tail(delta, g):
    p = RabiParams(delta, g)
    plus, minus = build_branches(p, sp.ground_solution(p))
    for b in (plus, minus):
        assert b.vector.norm == pytest.approx(1.0, abs=1e-12)
        assert b.tail_norm < 1e-10
        assert b.vector.frame_displacement == g


def test_single_branch_matches_pair():
    p = RabiParams(1.0, 1.0)
    root = sp.ground_solution(p)
    plus, minus = build_branches(p, root)
    np.testing.assert_array_equal(build_branch_state(p, root, sp.PLUS).vector.coeffs,
                                  plus.vector.coeffs)
    np.testing.assert_array_equal(build_branch_state(p, root, sp.MINUS).vector.coeffs,
                                  minus.vector.coeffs)
    with pytest.raises(ValueError):
        build_branch_state(p, root, "up")


def test_small_delta_branches_are_coherent():
    # at delta -> 0 the two projections are the lab coherent states |+-g>; in the +g
    # frame one of them is the frame vacuum and the other is |-2g>
    g = 1.0
    p = RabiParams(1e-6, g)
    plus, minus = build_branches(p, sp.ground_solution(p))
    vac = np.abs(minus.vector.coeffs)
    assert abs(vac[0] - 1.0) < 1e-4 and np.max(vac[1:]) < 1e-4
    ref = coherent_coefficients(-2 * g, len(plus.vector) - 1)
    assert np.max(np.abs(plus.vector.coeffs - ref)) < 1e-4
    assert abs(inner(plus.vector, minus.vector)) == pytest.approx(math.exp(-2 * g * g), abs=1e-3)


@pytest.mark.parametrize("delta,g", [(1.0, 1.0), (0.5, 2.0), (2.0, 3.0)])
def test_raw_coefficients_rederivable(delta, g):
    p = RabiParams(delta, g)
    root = sp.ground_solution(p)
    plus, minus = build_branches(p, root)
    t = plus.table

    def sqrt_fact(size):
        return np.exp(0.5 * np.array([math.lgamma(k + 1) for k in range(size)]))

    n = np.arange(len(plus.raw))
    a = (-1.0) ** n * sqrt_fact(len(n)) * t.k[n]
    np.testing.assert_allclose(plus.raw, a, rtol=1e-10, atol=0)
    n = np.arange(len(minus.raw))
    b = sqrt_fact(len(n)) * t.j[n]
    np.testing.assert_allclose(minus.raw, (-1.0) ** n * b, rtol=1e-10, atol=0)


@pytest.mark.parametrize("delta,g", [(1.0, 1.0), (0.1, 2.0), (2.0, 3.0)])
def test_table_recurrence_recheck(delta, g):
    p = RabiParams(delta, g)
    plus, _ = build_branches(p, sp.ground_solution(p))
    assert plus.table.recurrence_residual() < 1e-10


@pytest.mark.parametrize("delta,g", [(1.0, 1.0), (0.5, 2.0), (10.0, 3.0)])
def test_branch_mirror(delta, g):
    # the minus branch is the parity image of the plus branch: (-1)^n coefficients
    # in the -g frame; compare all laboratory moments
    p = RabiParams(delta, g)
    plus, minus = build_branches(p, sp.ground_solution(p))
    n = np.arange(len(plus.vector))
    mirrored = FockVector((-1.0) ** n * plus.vector.coeffs, -g)
    for got, ref in zip(lab_moments(mirrored), lab_moments(minus)):
        assert got == pytest.approx(ref, abs=1e-9)


@pytest.mark.parametrize("delta,g", [(1.0, 1.0), (2.0, 3.0)])
def test_truncation_robustness(delta, g):
    p = RabiParams(delta, g)
    root = sp.ground_solution(p)
    plus, minus = build_branches(p, root)
    u = stabilized_coefficients(p, root)
    longer = int(math.ceil(1.25 * minus.truncation_n))
    assert len(u) >= longer
    n = np.arange(longer)
    raw = (-1.0) ** n * u[:longer] * p.delta / (root.x_root - n)
    ext = FockVector(raw / np.linalg.norm(raw), g)
    for a, b in zip(lab_moments(ext), lab_moments(minus)):
        assert a == pytest.approx(b, abs=1e-9)


def test_tail_divergence_on_tiny_cap():
    p = RabiParams(2.0, 3.0)
    with pytest.raises(TailDivergence):
        build_branches(p, sp.ground_solution(p), n_cap=20)


def test_coherent_coefficients_normalized():
    c = coherent_coefficients(1.7)
    assert np.linalg.norm(c) == pytest.approx(1.0, abs=1e-14)
    assert coherent_coefficients(0.0)[0] == 1.0
