"""Exception types raised across the package."""


class InvalidWindowError(ValueError):
    """Time window support not strictly inside (0, T), or containment violated."""


class InvalidConfiguration(ValueError):
    pass


class HypothesisViolation(ValueError):
    """Input outside the range where the estimate being checked is claimed."""


class NoCertifiedMuError(RuntimeError):
    pass


class NumericalSingularityError(RuntimeError):
    pass


class IllPosedControlError(RuntimeError):
    pass


class QuadratureError(RuntimeError):
    pass
