"""Exception hierarchy shared by all spinallab modules."""


class SpinalError(Exception):
    """Base class for all library errors."""


class InvalidParams(SpinalError):
    """Code or channel parameters violate their invariants."""


class LengthMismatch(SpinalError):
    """Bit sequence length is incompatible with the code parameters."""


class OutOfRange(SpinalError):
    """A symbol value falls outside the c-bit alphabet."""


class PlanMismatch(SpinalError):
    """A transmission plan does not fit the code parameters."""


class KindMismatch(SpinalError):
    """Channel input is invalid for the channel kind."""


class MissingSymbols(SpinalError):
    """The received set lacks symbols required by the decoder."""


class Infeasible(SpinalError):
    """Exhaustive decoding was requested beyond the desk-scale guard."""


class OutOfOrderSymbol(SpinalError):
    """A received symbol violates the per-segment prefix rule."""


class NonConvergent(SpinalError):
    """Numerical quadrature failed to reach the requested tolerance."""


class NoConvergence(SpinalError):
    """The plan optimizer hit its symbol cap before meeting the target."""


class DegenerateChannel(SpinalError):
    """The channel has zero capacity; no switch-over threshold exists."""


class BadPermutation(SpinalError):
    """An intra-pass order vector is not a permutation of 1..n/k."""


class EmptyPlan(SpinalError):
    """A transmission plan contains no symbols."""


class TrialTimeout(SpinalError):
    """A rateless trial exceeded the configured symbol cap."""


class ConfigError(SpinalError):
    """Invalid experiment or CLI configuration."""
