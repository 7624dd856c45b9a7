"""Exception hierarchy shared by the solver modules."""


class RabiError(Exception):
    """Base class for all solver failures."""

    code = "rabi_error"


class InvalidParameters(RabiError, ValueError):
    code = "invalid_parameters"


class PoleProximity(RabiError):
    code = "pole_proximity"


class ZeroCoupling(RabiError):
    code = "zero_coupling"


class SeriesNoConverge(RabiError):
    code = "series_no_converge"


class BracketInvalid(RabiError):
    code = "bracket_invalid"


class NoRootFound(RabiError):
    code = "no_root_found"


class TailDivergence(RabiError):
    code = "tail_divergence"


class FrameMismatch(RabiError):
    code = "frame_mismatch"


class RootMismatch(RabiError):
    code = "root_mismatch"


class CrossTermViolation(RabiError):
    code = "cross_term_violation"


class ConvergenceFailure(RabiError):
    code = "convergence_failure"


class GridIncomplete(RabiError):
    code = "grid_incomplete"

    def __init__(self, message, columns=()):
        super().__init__(message)
        self.columns = tuple(columns)


class DegenerateFit(RabiError):
    code = "degenerate_fit"


class UnknownField(RabiError, KeyError):
    code = "unknown_field"

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class NonRectangularGrid(RabiError):
    code = "non_rectangular_grid"


class JuddianSuspect(UserWarning):
    """Root coincides with a pole of the spectral function (degenerate point)."""
