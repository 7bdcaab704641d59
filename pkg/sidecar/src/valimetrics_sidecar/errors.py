class SidecarError(Exception):
    """Base class for extractor failures."""


class ModelLoadError(SidecarError):
    """The requested network or its weights could not be loaded."""


class SpecError(SidecarError):
    """Invalid extractor specification."""
