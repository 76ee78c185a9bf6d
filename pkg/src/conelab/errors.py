"""Exception hierarchy for conelab.

Every failure mode raised by the library derives from ConelabError so callers
can catch one type at the boundary. The subclasses mirror the contract
vocabulary used across the modules: domain/precondition violations, grid
mismatches, resolution ceilings, construction failures and flow breakdowns.
"""


class ConelabError(Exception):
    """Base class for all conelab errors."""


class DomainError(ConelabError, ValueError):
    """Input values outside the documented domain (signs, ranges, shapes)."""


class PreconditionError(ConelabError, ValueError):
    """A documented operation precondition does not hold."""


class GridMismatchError(ConelabError, ValueError):
    """Two objects that must share a grid do not."""


class ResolutionError(ConelabError, RuntimeError):
    """A requested accuracy cannot be met within the allowed grid/step budget."""


class ConstructionError(ConelabError, RuntimeError):
    """An example-metric construction could not satisfy its own invariants."""


class CflError(ConelabError, RuntimeError):
    """Requested time step violates the parabolic CFL cap."""

    def __init__(self, dt: float, dt_max: float):
        self.dt = dt
        self.dt_max = dt_max
        super().__init__(f"dt = {dt:.3e} exceeds parabolic cap {dt_max:.3e}; reduce dt")


class FlowBreakdownError(ConelabError, RuntimeError):
    """The evolving metric stopped being uniformly equivalent to the background.

    Carries the offending time and node so callers can inspect the partial
    trace that led here.
    """

    def __init__(self, t: float, node: int, ratio: float, message: str | None = None):
        self.t = t
        self.node = node
        self.ratio = ratio
        msg = message or (
            f"flow breakdown at t = {t:.6e}, node {node}: equivalence ratio {ratio:.3f}"
        )
        super().__init__(msg)
