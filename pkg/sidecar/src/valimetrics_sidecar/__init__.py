from .errors import ModelLoadError, SidecarError, SpecError
from .extract import export_lpips_weights, extract
from .spec import NETWORK_LAYERS, ExtractorSpec

__all__ = [
    "ExtractorSpec",
    "NETWORK_LAYERS",
    "extract",
    "export_lpips_weights",
    "ModelLoadError",
    "SidecarError",
    "SpecError",
]
