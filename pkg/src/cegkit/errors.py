"""Exception types shared across the toolkit.

Every error subclasses :class:`CegError` plus the closest builtin so callers
can catch either the package hierarchy or plain ``ValueError``.
"""


class CegError(Exception):
    """Base class for all cegkit errors."""


class MalformedHeader(CegError, ValueError):
    """Container header is invalid (bad magic, dims, or sidecar mismatch)."""


class TruncatedPayload(CegError, ValueError):
    """File payload holds fewer values than the header promises."""


class RangeError(CegError, ValueError):
    """A probability value lies outside [0, 1] beyond tolerance."""


class UnsupportedFormat(CegError, ValueError):
    """File is not the expected PGM flavour."""


class IllegalPixelValue(CegError, ValueError):
    """A mask pixel holds a value outside its legal set."""

    def __init__(self, value: int, offset: int):
        self.value = int(value)
        self.offset = int(offset)
        super().__init__(f"illegal pixel value {self.value} at offset {self.offset}")


class TaxonomyMismatch(CegError, ValueError):
    """Taxonomy classes and probability-map classes do not line up."""


class ShapeMismatch(CegError, ValueError):
    """Rasters that must share a grid have different shapes."""


class DimMismatch(CegError, ValueError):
    """Feature dimensionality does not match classifier weights."""


class NonFiniteInput(CegError, ValueError):
    """Input contains NaN or Inf."""


class ClassOutOfRange(CegError, ValueError):
    """A target label is outside the classifier's class range."""


class StepOutOfRange(CegError, ValueError):
    """Schedule step outside [0, total_steps]."""


class PlacementFailure(CegError, RuntimeError):
    """Synthetic scene generator could not place all instances."""


class ManifestError(CegError, ValueError):
    """Dataset manifest is invalid or references missing files."""


class MissingPrediction(CegError, ValueError):
    """A prediction file required for evaluation does not exist."""


class FixtureError(CegError, ValueError):
    """Loss fixture file is malformed; message names the offending field."""
