"""Exact ground state of the quantum Rabi model via its spectral G-function.

H = delta*sz + a^dag a + g*sx*(a + a^dag), in units of the field frequency.
"""
from .errors import RabiError
from .params import RabiParams

__version__ = "0.1.0"


def solve(params, **options):
    """Shortcut for :func:`qrabi.solver.solve`."""
    from .solver import solve as _solve

    return _solve(params, **options)


__all__ = ["RabiError", "RabiParams", "__version__", "solve"]
