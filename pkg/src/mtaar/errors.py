"""Exception types. All derive from ``ValueError`` so callers can catch broadly."""


class MtaarError(ValueError):
    pass


class InvalidDimensionError(MtaarError):
    pass


class DimensionMismatchError(MtaarError):
    pass


class ModeOutOfRangeError(MtaarError):
    pass


class NonpositiveProbeError(MtaarError):
    pass


class ZeroDiagonalError(MtaarError):
    pass


class ZeroPivotError(MtaarError):
    pass


class SingularMatrixError(MtaarError):
    pass


class NoBracketError(MtaarError):
    """No sign change found while expanding the bracket for a positive root."""


class RootSolveError(MtaarError):
    """Forward substitution hit a row without a positive root."""


class InvalidProblemError(MtaarError):
    """Solver preconditions (M-tensor, positive data, symmetry) do not hold."""


class NonregularSplittingError(MtaarError):
    pass


class UnknownMethodError(MtaarError):
    pass
