"""Exception hierarchy shared across the package.

The CLI maps these onto its exit-code contract:
0 ok, 1 stability condition unsatisfied, 2 input error,
3 infeasible set-points, 4 divergence.
"""


class OscgridError(Exception):
    """Base class for all package errors."""


class InputError(OscgridError):
    """Malformed or inconsistent user input (files, parameters)."""


class DisconnectedGraphError(InputError):
    """The coupling graph is not connected."""


class DegenerateLineError(InputError):
    """A line with r = ell = 0 has no finite admittance."""


class AssumptionViolationError(InputError):
    """Non-uniform ell/r ratio where a uniform ratio is required."""

    def __init__(self, message, offending_edges=()):
        super().__init__(message)
        self.offending_edges = list(offending_edges)


class InfeasibleSetpointsError(OscgridError):
    """The angle solver failed to converge on the given set-points."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DivergenceError(OscgridError):
    """The integrated state became non-finite."""

    def __init__(self, message, last_finite_time=None):
        super().__init__(message)
        self.last_finite_time = last_finite_time


class ChartSingularError(OscgridError):
    """Polar coordinates requested too close to the origin."""
