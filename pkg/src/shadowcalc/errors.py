"""Exception types raised by the shadow calculus engine.

Every error names the offending cell (vertex, edge, wing or region) so
that failures on generated inputs are diagnosable without a debugger.
"""


class ShadowError(Exception):
    """Base class for all errors raised by this package."""


# ---------------------------------------------------------------- validation

class NonBijectiveAttachment(ShadowError):
    """An edge end map or wing map fails to be a bijection."""


class ValenceViolation(ShadowError):
    """A vertex slot is used by zero or by more than one edge end."""


class DisconnectedSingularSet(ShadowError):
    """The 4-valent graph of vertices and edges is not connected."""


class TraceIncomplete(ShadowError):
    """Region tracing did not reach every (edge, wing) pair."""


class GleamParityError(ShadowError):
    """A gleam is integer on a region with odd Z2-gleam or vice versa."""


# ---------------------------------------------------------------- branchings

class TooManyRegions(ShadowError):
    """Exhaustive branching enumeration refused beyond the region bound."""


class NotBranched(ShadowError):
    """An orientation assignment violates the branching condition."""


class StepBudgetExceeded(ShadowError):
    """The blow-up branching search ran out of moves."""


# --------------------------------------------------------------------- moves

class SiteMismatch(ShadowError):
    """A move site does not exist or does not match the required pattern."""


class UnbranchableInverse(ShadowError):
    """The inverse move would merge regions into a non-branching."""


class ReplayFailure(ShadowError):
    """A move script could not be replayed on the given shadow."""


class CalibrationError(ShadowError):
    """A frozen table is missing or contradicts regenerated data."""


# ------------------------------------------------------------------- algebra

class ScaleMismatch(ShadowError):
    """Cochain arithmetic mixed integer scale with doubled scale."""


class DanglingEdge(ShadowError):
    """A local presentation includes an edge with a wing outside the set."""


class TorsionObstruction(ShadowError):
    """Halving a doubled class is ambiguous in presence of 2-torsion."""


class TorsionCheckFailed(ShadowError):
    """A local module that must be torsion free is not."""


# ------------------------------------------------------------ complex points

class PreconditionViolated(ShadowError):
    """A complex point rewrite was invoked outside its hypotheses."""


class ParityViolation(ShadowError):
    """chi + nu + c1 is odd, so no complex point count can satisfy it."""


class BudgetExceeded(ShadowError):
    """A planner found a solution but emitting it exceeded the budget."""


class PartialFailure(ShadowError):
    """A class realization stopped with a nonzero residual.

    The residual class representative is attached as ``residual``.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class Obstructed(ShadowError):
    """Negative point elimination is impossible: [I-] is a nonzero class."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
