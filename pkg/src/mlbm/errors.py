"""Exception hierarchy shared by every module of the package."""


class MLBMError(Exception):
    """Base class for all errors raised by mlbm."""


class ValidationError(MLBMError, ValueError):
    pass


class EmptyMatrix(ValidationError):
    pass


class NonFiniteContinuous(ValidationError):
    def __init__(self, i, j):
        super().__init__(f"non-finite continuous cell at row {i}, column {j}")
        self.i, self.j = i, j


class NonBinaryEntry(ValidationError):
    def __init__(self, i, j, value=None):
        msg = f"binary cell at row {i}, column {j} is not 0 or 1"
        if value is not None:
            msg += f" (got {value!r})"
        super().__init__(msg)
        self.i, self.j = i, j


class DimensionMismatch(MLBMError, ValueError):
    pass


class EmptyCluster(MLBMError):
    """A cluster lost (numerically) all of its membership mass.

    ``kind`` is one of ``"row"``, ``"ccol"`` or ``"bcol"``.
    """

    def __init__(self, kind, index, mass=0.0):
        super().__init__(f"empty {kind} cluster {index} (mass={mass:.3g})")
        self.kind, self.index, self.mass = kind, index, mass


class InstanceTooLarge(MLBMError, ValueError):
    pass


class InitFailure(MLBMError):
    pass


class NonFiniteCriterion(MLBMError, FloatingPointError):
    pass


class AllRestartsFailed(MLBMError):
    def __init__(self, failures):
        super().__init__(
            f"all {len(failures)} restarts failed: "
            + "; ".join(str(f) for f in failures[:3])
        )
        self.failures = failures


class LayoutMismatch(MLBMError, ValueError):
    pass


class UnknownLayout(MLBMError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown layout"


class LengthMismatch(MLBMError, ValueError):
    pass


class EmptyInput(MLBMError, ValueError):
    pass
