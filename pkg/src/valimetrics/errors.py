"""Exception hierarchy shared by all valimetrics modules."""


class ValimetricsError(Exception):
    """Base class for all errors raised by this package."""


# --- pairing / decoding ---

class DecodeError(ValimetricsError):
    """An image file could not be decoded."""


class EmptyIntersection(ValimetricsError):
    """No filename stem is present in both directories."""


# --- jpeg modification ---

class QualityOutOfRange(ValimetricsError):
    """JPEG quality must lie in [1, 100]."""


class EncodeError(ValimetricsError):
    """The JPEG encoder failed on an input image."""


class ZeroEncodedSize(ValimetricsError):
    """Encoded byte count must be positive."""


class EmptySweep(ValimetricsError):
    """A sweep needs at least one quality level."""


# --- quality metrics ---

class DimensionMismatch(ValimetricsError):
    """Operands must have identical dimensions."""


class ImageTooSmall(ValimetricsError):
    """Image is smaller than the metric's window."""


class ZeroVariance(ValimetricsError):
    """A constant image has no defined correlation."""


class MetricUnavailable(ValimetricsError):
    """Inputs required for this metric are absent."""


# --- feature files / perceptual metrics ---

class BadMagic(ValimetricsError):
    """File does not start with the expected magic bytes."""


class TruncatedFile(ValimetricsError):
    """File ends before the header-declared payload."""


class ShapeOverflow(ValimetricsError):
    """Header declares an implausibly large tensor."""


class ExtractorMismatch(ValimetricsError):
    """Feature stacks come from different extractors."""


class ShapeMismatch(ValimetricsError):
    """Feature tensors or weight vectors disagree in shape."""


class TooFewSamples(ValimetricsError):
    """Covariance needs at least two samples."""


class EigenFailure(ValimetricsError):
    """Eigendecomposition produced eigenvalues too negative to be rounding noise."""


class ZeroVector(ValimetricsError):
    """Cosine similarity is undefined for a zero vector."""


# --- performance deltas ---

class ModelMismatch(ValimetricsError):
    """Compared prediction sets must come from the same model."""


class AllIgnored(ValimetricsError):
    """Every reference pixel carries the ignore label."""


# --- analysis ---

class ConstantSeries(ValimetricsError):
    """Correlation is undefined for a constant series."""


class TooFewPoints(ValimetricsError):
    """Correlation needs at least three joined points."""


class EmptyReport(ValimetricsError):
    """Nothing to emit."""


# --- pipeline ---

class ConfigError(ValimetricsError):
    """Run configuration is invalid."""


class IoError(ValimetricsError):
    """Report files could not be written."""
