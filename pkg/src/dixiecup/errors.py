"""Exception hierarchy shared by every dixiecup module."""


class DixieError(Exception):
    """Base class for all library errors."""


class InvalidParameter(DixieError, ValueError):
    pass


class UnsupportedOperation(DixieError):
    """The requested operation is not defined for this family or model."""


class DichotomyError(UnsupportedOperation):
    """Raised when a limit constant L_r(alpha; m) is infinite (decaying sequences)."""

    def __init__(self, family, message=None):
        self.family = family
        super().__init__(
            message
            or f"L_r({family.label()}; m) = inf: sequence does not satisfy "
            "sum xi**a_j < inf for any xi in (0, 1)"
        )


class UnclassifiedError(DixieError):
    """An explicit sequence could not be placed on either side of the dichotomy."""


class ToleranceNotMet(DixieError):
    """Quadrature ran out of budget before reaching the requested tolerance."""

    def __init__(self, message, estimate, bound):
        super().__init__(f"{message} (best estimate {estimate!r}, achieved bound {bound!r})")
        self.estimate = estimate
        self.bound = bound


class StateSpaceTooLarge(DixieError):
    pass


class BudgetExceeded(DixieError):
    pass


class NotSorted(DixieError, ValueError):
    pass
