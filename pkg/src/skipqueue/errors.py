"""Exception types shared across the package."""


class HeavyTailError(ValueError):
    """Batch law has no geometric tail certificate, so no limiting regime can be certified."""

    reason = "no limiting solution in the weighted norm"


class InfeasibleError(ValueError):
    """No (delta, epsilon) pair satisfies the column-rate condition."""

    def __init__(self, message, witnesses=None):
        super().__init__(message)
        self.witnesses = witnesses or {}


class ConditionError(ValueError):
    """The averaged decay rate is not positive."""


class TruncationError(RuntimeError):
    """Error budget exceeded: the truncation level is too small."""
