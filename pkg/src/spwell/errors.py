"""Exception types raised by the solver stack."""


class SPWellError(Exception):
    """Base class for all spwell errors."""


class ConfigError(SPWellError):
    """Invalid problem configuration (parameter ranges, grid resolution)."""


class DimensionMismatch(SPWellError):
    """Grid functions or operators defined on incompatible grids."""


class NoConvergence(SPWellError):
    """An iterative stage exhausted its budget without meeting tolerance."""


class ConditionViolated(SPWellError):
    """The occupation condition e1 < eps_S fails: the system is trivial.

    When raised by the self-consistent solver, ``trivial_solution`` holds
    the exact fixed point V = 0 so callers can still report it.
    """

    def __init__(self, message, e1=None, eps_S=None, trivial_solution=None):
        super().__init__(message)
        self.e1 = e1
        self.eps_S = eps_S
        self.trivial_solution = trivial_solution


class NegativeSource(SPWellError):
    """Poisson source term has a significantly negative component."""


class AtomOutOfDomain(SPWellError):
    """A point mass of a measure lies outside the open interval (0, L)."""


class BracketError(SPWellError):
    """Root bracketing failed; signals a broken precondition upstream."""


class EmptyWindow(SPWellError):
    """A decay-rate fit window contains too few grid points."""
