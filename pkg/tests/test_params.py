import math

import pytest

from qrabi.errors import InvalidParameters
from qrabi.params import RabiParams


def test_normalized_storage():
    p = RabiParams.create(2.0, 1.0, omega=2.0)
    assert (p.delta, p.g, p.omega) == (1.0, 0.5, 1.0)


@pytest.mark.parametrize("delta,g", [(0.0, 1.0), (-1.0, 1.0), (1.0, -0.1),
                                     (math.nan, 1.0), (1.0, math.inf)])
def test_rejects_invalid(delta, g):
    with pytest.raises(InvalidParameters):
        RabiParams(delta, g)


def test_rejects_unnormalized_omega():
    with pytest.raises(InvalidParameters):
        RabiParams(1.0, 1.0, omega=2.0)
    with pytest.raises(InvalidParameters):
        RabiParams.create(1.0, 1.0, omega=0.0)


@pytest.mark.parametrize("delta,g,lam", [(2.0, 1.0, 1.0), (8.0, 2.0, 1.0), (1.0, 1.0, math.sqrt(2))])
def test_coupling_lambda(delta, g, lam):
    assert RabiParams(delta, g).coupling_lambda == pytest.approx(lam, rel=1e-15)
