"""Exception types shared across the package.

Everything derives from :class:`MvcError` (itself a ``ValueError``) so callers
can catch the whole family with one clause while tests can pin down the exact
failure mode.
"""


class MvcError(ValueError):
    """Base class for all errors raised by this package."""


# --- matrix validation -----------------------------------------------------

class NonSquareError(MvcError):
    """A matrix that must be square is not."""


class NonSymmetricError(MvcError):
    """A matrix that must be symmetric is not (beyond tolerance)."""


class NonFiniteError(MvcError):
    """An array contains NaN or infinity."""


class CholeskyError(MvcError):
    """A constraint matrix is not positive definite, even after the ridge ladder."""


class DimensionMismatchError(MvcError):
    """Two operands have incompatible shapes."""


class DimensionTooLargeError(MvcError):
    """More eigenpairs (or embedding dimensions) requested than the problem has."""


# --- neighborhood graphs / per-view matrix builders ------------------------

class KTooLargeError(MvcError):
    """Neighbor count k is not in [1, n_samples - 1]."""


class SingularLocalGramError(MvcError):
    """A local reconstruction Gram is singular and no ridge was allowed."""


class EmptyClassError(MvcError):
    """A declared class label has no member samples."""


# --- consensus optimizer ----------------------------------------------------

class NonPositiveDenominatorError(MvcError):
    """A view-weight denominator (trace + regularizer) is not strictly positive."""


class RankDeficientGramError(MvcError):
    """A conjugated constraint matrix is rank deficient beyond ridge repair."""


class NonPSDKernelError(MvcError):
    """A kernel matrix has negative eigenvalues beyond tolerance."""


# --- evaluation harness -----------------------------------------------------

class EmptyTrainSetError(MvcError):
    """A split produced no training samples."""


class ClassTooSmallError(MvcError):
    """A class has too few samples to split."""


# --- file formats -----------------------------------------------------------

class MissingFileError(MvcError):
    """A file referenced by a manifest or command line does not exist."""


class InconsistentSampleCountError(MvcError):
    """Views (or views and labels) disagree on the number of samples."""


class ParseError(MvcError):
    """A text input could not be parsed; carries file/line/column context."""

    def __init__(self, message, path=None, line=None, column=None):
        self.path = path
        self.line = line
        self.column = column
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
                if column is not None:
                    where += f":{column}"
            where = f" [{where}]"
        super().__init__(f"{message}{where}")
