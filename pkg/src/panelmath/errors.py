"""Exception types shared across the package."""


class PanelMathError(Exception):
    """Base class for all package-specific errors."""


class UnsatisfiableFilter(PanelMathError):
    """A sampling filter admits no valid joint attribute assignment."""


class IncompatibleLayout(PanelMathError):
    """A (problem type, layout attributes) pair is not in the layout tables."""


class OutOfRange(PanelMathError):
    """A value fell outside the supported integer range."""


class NonIntegerDivision(PanelMathError):
    """A division node does not divide exactly."""


class GenerationExhausted(PanelMathError):
    """The restart budget ran out while instantiating a problem."""

    def __init__(self, seed: int, restarts: int):
        super().__init__(f"generation exhausted after {restarts} restarts (seed={seed})")
        self.seed = seed
        self.restarts = restarts


class SchemaViolation(PanelMathError):
    """A serialized document failed validation; `path` points at the field."""

    def __init__(self, path: str, message: str = ""):
        detail = f"{path}: {message}" if message else path
        super().__init__(detail)
        self.path = path


class IncompatiblePanel(PanelMathError):
    """Panel slot ids do not match the layout being rendered."""


class RasterBackendUnavailable(PanelMathError):
    """No raster backend is importable; vector output is still available."""


class MissingDataset(PanelMathError):
    """The dataset directory or manifest does not exist."""


class EmptyResults(PanelMathError):
    """A results file contained no records to aggregate."""
