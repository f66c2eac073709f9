"""Exception types shared across the package."""


class IdespecError(Exception):
    """Base class for package errors."""


class MarchOverflowError(IdespecError):
    """State magnitude exceeded the overflow guard while marching.

    Carries the failing grid index in ``index``.
    """

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"solution state overflowed at grid index {index}")


class WeylPoleError(IdespecError):
    """Evaluation requested at (or too close to) a pole of the Weyl function."""


class EnumerationIncompleteError(IdespecError):
    """Eigenvalue bracketing lost a root.

    ``suspect_index`` is the 1-based index where the count first disagrees.
    """

    def __init__(self, suspect_index, message=None):
        self.suspect_index = suspect_index
        super().__init__(
            message or f"eigenvalue enumeration incomplete near index {suspect_index}"
        )


class DivergenceError(IdespecError):
    """Coefficient-extraction ladder does not settle.

    Signals a wrong coefficient order, mismatched lower coefficients, or a
    mismatched memory kernel. ``k`` is the failing coefficient order.
    """

    def __init__(self, k, message=None):
        self.k = k
        super().__init__(message or f"extraction ladder diverges at coefficient k={k}")


class ConfigError(IdespecError):
    """Invalid run configuration or input file."""


class LadderMismatchError(ConfigError):
    """Tabulated Weyl samples do not lie on the configured ladder."""
