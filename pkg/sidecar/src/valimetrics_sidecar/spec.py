"""Extractor specification with a stable content-derived identifier."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .errors import SpecError

# layer names per supported network, in forward order
NETWORK_LAYERS = {
    "vgg16": ("relu1_2", "relu2_2", "relu3_3", "relu4_3", "relu5_3"),
    "randcnn": ("conv1", "conv2", "conv3", "conv4"),
}


@dataclass(frozen=True)
class ExtractorSpec:
    """What network to run, which layers to keep, and how to resize input.

    ``resize`` is either ``"none"`` (run at native resolution) or
    ``"letterbox:HxW"`` (pad-preserving resize to a fixed canvas).
    """

    network: str = "randcnn"
    layers: tuple[str, ...] = ()
    resize: str = "none"

    def __post_init__(self):
        if self.network not in NETWORK_LAYERS:
            raise SpecError(f"unknown network {self.network!r}; "
                            f"choose from {sorted(NETWORK_LAYERS)}")
        known = NETWORK_LAYERS[self.network]
        layers = self.layers or known
        unknown = [l for l in layers if l not in known]
        if unknown:
            raise SpecError(f"{self.network} has no layers {unknown}; known: {list(known)}")
        if list(layers) != [l for l in known if l in layers]:
            raise SpecError("layers must be given in forward order")
        object.__setattr__(self, "layers", tuple(layers))
        if self.resize != "none":
            if not self.resize.startswith("letterbox:"):
                raise SpecError(f"bad resize policy {self.resize!r}")
            try:
                h, w = self.resize.split(":", 1)[1].split("x")
                if int(h) < 8 or int(w) < 8:
                    raise ValueError
            except ValueError:
                raise SpecError(f"bad resize policy {self.resize!r}") from None

    @property
    def extractor_id(self) -> str:
        canon = f"{self.network}|{','.join(self.layers)}|{self.resize}"
        return f"{self.network}-{hashlib.sha256(canon.encode()).hexdigest()[:12]}"

    @property
    def letterbox_shape(self) -> tuple[int, int] | None:
        if self.resize == "none":
            return None
        h, w = self.resize.split(":", 1)[1].split("x")
        return int(h), int(w)

    def to_dict(self) -> dict:
        return {
            "network": self.network,
            "layers": list(self.layers),
            "resize": self.resize,
            "extractor_id": self.extractor_id,
        }

    @staticmethod
    def default() -> "ExtractorSpec":
        return ExtractorSpec()
