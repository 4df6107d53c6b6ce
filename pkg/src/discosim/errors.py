"""Exception types shared across the simulator."""


class ConfigError(ValueError):
    """Raised when a scenario, frame, or sweep description is invalid."""


class SingularMatrixError(ValueError):
    """Raised when a matrix required to be well conditioned is not.

    Carries the offending condition number in ``cond``.
    """

    def __init__(self, message: str, cond: float):
        super().__init__(f"{message} (condition number {cond:.3e})")
        self.cond = cond
