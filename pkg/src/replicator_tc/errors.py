"""Exception hierarchy shared by every module.

Validation problems derive from :class:`RejectedInput` (CLI exit code 2),
numerical breakdowns from :class:`NumericFailure` (CLI exit code 3).
"""


class RejectedInput(ValueError):
    """Input violates a documented precondition."""


class DomainError(RejectedInput):
    """Point lies outside the domain on which a field is defined."""


class NumericFailure(ArithmeticError):
    """Base class for failures that happen while computing."""


class DomainEscape(NumericFailure):
    """A trajectory left the declared state space during integration."""

    def __init__(self, message, time=None, state=None):
        super().__init__(message)
        self.time = time
        self.state = state


class StiffnessError(NumericFailure):
    """Adaptive step size collapsed below the allowed floor."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class IntegrationDrift(NumericFailure):
    """A simplex trajectory drifted off the simplex."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class FaceProximityError(NumericFailure):
    """Inverse embedding requested too close to a simplex face."""


class NumericOverflow(NumericFailure):
    """Cumulative payoffs became non-finite or a logit weight underflowed."""


class InfeasibleStepSize(NumericFailure):
    """No step size above the floor satisfies the requested error target."""

    def __init__(self, message, bound_at_floor=None):
        super().__init__(message)
        self.bound_at_floor = bound_at_floor
