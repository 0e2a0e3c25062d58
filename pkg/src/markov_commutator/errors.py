"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`MarkovCommutatorError`.  Input problems (bad matrices, bad files)
additionally derive from :class:`ValidationError` so that the CLI can map
them to exit code 2.
"""


class MarkovCommutatorError(Exception):
    """Base class for all package errors."""


class ValidationError(MarkovCommutatorError, ValueError):
    """Input does not satisfy a documented precondition."""


class ParseError(ValidationError):
    """A JSON document does not follow the expected schema."""


class NegativeEntry(ValidationError):
    def __init__(self, x, y, value):
        self.x, self.y, self.value = int(x), int(y), float(value)
        super().__init__(f"negative entry P({self.x},{self.y}) = {self.value:.3e}")


class RowSumViolation(ValidationError):
    def __init__(self, x, total):
        self.x, self.total = int(x), float(total)
        super().__init__(f"row {self.x} sums to {self.total!r}, not 1")


class DimensionMismatch(ValidationError):
    pass


class NotIrreducible(ValidationError):
    pass


class NotReversible(ValidationError):
    pass


class NonPositiveMeasure(ValidationError):
    pass


class NotBirthDeath(ValidationError):
    pass


class NotUniplicit(ValidationError):
    pass


class VanishingEigenvectorAt(ValidationError):
    def __init__(self, x0, index):
        self.x0, self.index = int(x0), int(index)
        super().__init__(f"eigenvector {self.index} vanishes at base point {self.x0}")


class UnknownVariant(ValidationError):
    pass


class ZeroUpRate(ValidationError):
    def __init__(self, y):
        self.y = int(y)
        super().__init__(f"P({self.y},{self.y + 1}) = 0: cannot march past row {self.y}")


class SourceNotNormalized(ValidationError):
    pass


class SourceNotSymmetric(ValidationError):
    pass


class InvalidBasePoint(ValidationError):
    pass


class SizeLimitExceeded(ValidationError):
    pass


class NotASymmetry(ValidationError):
    def __init__(self, perm):
        self.perm = tuple(int(v) for v in perm)
        super().__init__(f"{self.perm} is not a symmetry of the kernel")


class InconsistentQuotient(MarkovCommutatorError):
    pass


class NotSurjective(ValidationError):
    pass


class DegenerateImageMeasure(ValidationError):
    def __init__(self, x):
        self.x = int(x)
        super().__init__(f"image measure vanishes at state {self.x}")


class HypConditionViolated(ValidationError):
    pass


class UnknownCase(ValidationError):
    pass


class InternalInconsistency(MarkovCommutatorError):
    """Two independent computations of the same quantity disagree."""


class ConvergenceError(MarkovCommutatorError):
    pass
