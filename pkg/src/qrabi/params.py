from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidParameters


@dataclass(frozen=True)
class RabiParams:
    """Model parameters for H = delta*sz + omega*a^dag a + g*sx*(a + a^dag).

    ``delta`` and ``g`` are stored in units of ``omega``; use :meth:`create`
    to normalize raw values.
    """

    delta: float
    g: float
    omega: float = 1.0

    def __post_init__(self):
        for name in ("delta", "g", "omega"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise InvalidParameters(f"{name} must be a finite real, got {value!r}")
        if self.delta <= 0:
            raise InvalidParameters(f"delta must be > 0, got {self.delta}")
        if self.g < 0:
            raise InvalidParameters(f"g must be >= 0, got {self.g}")
        if self.omega != 1.0:
            raise InvalidParameters("store normalized parameters (omega == 1); use RabiParams.create")
        object.__setattr__(self, "delta", float(self.delta))
        object.__setattr__(self, "g", float(self.g))

    @classmethod
    def create(cls, delta, g, omega=1.0):
        if not omega > 0:
            raise InvalidParameters(f"omega must be > 0, got {omega}")
        return cls(delta / omega, g / omega)

    @property
    def coupling_lambda(self):
        """Dimensionless coupling g*sqrt(2/(omega*delta)); the critical value is 1."""
        return self.g * math.sqrt(2.0 / self.delta)
