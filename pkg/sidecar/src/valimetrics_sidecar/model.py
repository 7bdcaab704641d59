"""Network construction and single-image feature inference."""

from __future__ import annotations

import numpy as np
import torch
import torch.nn as nn

from .errors import ModelLoadError
from .spec import ExtractorSpec

# fixed init seed: randcnn is a frozen random projection, not a trained net
_RANDCNN_SEED = 716302

# index of the layer's output inside torchvision's vgg16 `features` stack
_VGG16_TAPS = {"relu1_2": 3, "relu2_2": 8, "relu3_3": 15, "relu4_3": 22, "relu5_3": 29}

LAYER_CHANNELS = {
    "vgg16": {"relu1_2": 64, "relu2_2": 128, "relu3_3": 256,
              "relu4_3": 512, "relu5_3": 512},
    "randcnn": {"conv1": 16, "conv2": 32, "conv3": 64, "conv4": 128},
}

_IMAGENET_MEAN = np.array([0.485, 0.456, 0.406], dtype=np.float32)
_IMAGENET_STD = np.array([0.229, 0.224, 0.225], dtype=np.float32)


def _build_randcnn() -> nn.Sequential:
    gen = torch.Generator().manual_seed(_RANDCNN_SEED)
    widths = [3, 16, 32, 64, 128]
    layers: list[nn.Module] = []
    for c_in, c_out in zip(widths, widths[1:]):
        conv = nn.Conv2d(c_in, c_out, kernel_size=3, stride=2, padding=1)
        with torch.no_grad():
            conv.weight.copy_(torch.randn(conv.weight.shape, generator=gen)
                              * (2.0 / (9 * c_in)) ** 0.5)
            conv.bias.zero_()
        layers += [conv, nn.ReLU(inplace=False)]
    return nn.Sequential(*layers)


# tap after each ReLU: indices 1, 3, 5, 7 in the sequential stack
_RANDCNN_TAPS = {"conv1": 1, "conv2": 3, "conv3": 5, "conv4": 7}


def _build_vgg16() -> nn.Sequential:
    try:
        from torchvision.models import VGG16_Weights, vgg16
        net = vgg16(weights=VGG16_Weights.IMAGENET1K_V1)
    except Exception as exc:
        raise ModelLoadError(
            "vgg16 weights unavailable (no local torchvision cache); "
            "use --network randcnn for a weight-free extractor"
        ) from exc
    return net.features


class Extractor:
    """Runs the spec's network and returns the requested layer activations."""

    def __init__(self, spec: ExtractorSpec):
        self.spec = spec
        if spec.network == "vgg16":
            self.net = _build_vgg16()
            taps = _VGG16_TAPS
        else:
            self.net = _build_randcnn()
            taps = _RANDCNN_TAPS
        self.net.eval()
        self.taps = {taps[name]: name for name in spec.layers}
        self.last_tap = max(self.taps)

    def preprocess(self, rgb: np.ndarray) -> torch.Tensor:
        x = rgb.astype(np.float32) / 255.0
        if self.spec.network == "vgg16":
            x = (x - _IMAGENET_MEAN) / _IMAGENET_STD
        box = self.spec.letterbox_shape
        if box is not None:
            x = _letterbox(x, *box)
        return torch.from_numpy(np.ascontiguousarray(x.transpose(2, 0, 1)))[None]

    def run(self, rgb: np.ndarray) -> list[np.ndarray]:
        x = self.preprocess(rgb)
        found = {}
        with torch.no_grad():
            for i, module in enumerate(self.net):
                x = module(x)
                if i in self.taps:
                    found[self.taps[i]] = x[0].numpy().astype(np.float32)
                if i == self.last_tap:
                    break
        return [found[name] for name in self.spec.layers]


def _letterbox(x: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    from PIL import Image

    h, w = x.shape[:2]
    scale = min(out_h / h, out_w / w)
    new_h, new_w = max(1, round(h * scale)), max(1, round(w * scale))
    # resize per channel in float to avoid quantizing normalized values
    resized = np.stack([
        np.asarray(Image.fromarray(x[:, :, c], mode="F").resize(
            (new_w, new_h), Image.BILINEAR))
        for c in range(x.shape[2])
    ], axis=2)
    canvas = np.zeros((out_h, out_w, x.shape[2]), dtype=np.float32)
    top = (out_h - new_h) // 2
    left = (out_w - new_w) // 2
    canvas[top:top + new_h, left:left + new_w] = resized
    return canvas
