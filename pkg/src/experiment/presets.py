"""
Named network architectures.

Bidirectional propagation of errors:
    nn-none     fully connected, no hidden layer
    nn-1x16     one hidden layer of 16 units
    nn-2x16     two hidden layers of 16 units
    nn-4deep    four hidden layers of 200, 100, 60 and 30 units
    cnn-3conv   conv 4 (5x5 stride 1), 8 (5x5 stride 2), 12 (4x4 stride 2), fc 200

Hybrid adversarial networks:
    han-nn-128   one hidden layer of 128 units
    han-infogan  conv 64 (4x4 stride 2, pad 1), conv 128 (4x4 stride 2, pad 1), fc 1024

Hidden layers use ReLU in both directions, the generative output is a
sigmoid image and the discriminative head emits logits. The convolutions
of cnn-3conv are unpadded (28 -> 24 -> 10 -> 4 on MNIST, 32 -> 28 -> 12 -> 5
on CIFAR-10); han-infogan pads by one so each stride halves the image
(28 -> 14 -> 7).
"""

from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Tuple

import numpy as np

from ..data.dataset import NUM_CLASSES
from ..layers.conv import conv_output_size
from ..layers.network import BidirNetwork, network_from_descriptor
from ..tensor.rng import STREAM_INIT, Rng
from ..utils.errors import ConfigError

METHODS = ("biprop", "han")
IMAGE_SHAPES = {"mnist": (1, 28, 28), "cifar10": (3, 32, 32)}

HIDDEN = "relu"
IMAGE_OUT = "sigmoid"
HEAD = "identity"


class ArchitectureBuilder:
    """Builds a layer descriptor list, tracking the per-sample shape as layers are added."""

    def __init__(self, image_shape: Tuple[int, int, int], bias: bool):
        self.image_shape = tuple(image_shape)
        self.bias = bias
        self.shape: Tuple[int, ...] = (int(np.prod(image_shape)),)
        self.layers: List[Dict[str, Any]] = []

    def _act_gen(self) -> str:
        # The first parametric layer produces the image in the generative direction.
        parametric = [spec for spec in self.layers if spec["type"] != "reshape"]
        return IMAGE_OUT if not parametric else HIDDEN

    def add_reshape(self, out_shape: Tuple[int, ...]) -> "ArchitectureBuilder":
        if int(np.prod(out_shape)) != int(np.prod(self.shape)):
            raise ValueError(f"cannot reshape {self.shape} into {out_shape}")
        self.layers.append(
            {"type": "reshape", "in_shape": list(self.shape), "out_shape": list(out_shape)}
        )
        self.shape = tuple(out_shape)
        return self

    def add_dense(
        self,
        units: int,
        act_disc: str = HIDDEN,
        bn_disc: bool = False,
        bn_gen: bool = False,
    ) -> "ArchitectureBuilder":
        """
        Append a fully connected layer, flattening first if needed.

        Args:
            units: Output features
            act_disc: Discriminative activation
            bn_disc: Batch norm on the discriminative output
            bn_gen: Batch norm on the generative output
        """
        if len(self.shape) != 1:
            self.add_reshape((int(np.prod(self.shape)),))
        self.layers.append(
            {
                "type": "dense",
                "in": self.shape[0],
                "out": units,
                "bias": self.bias,
                "act_disc": act_disc,
                "act_gen": self._act_gen(),
                "bn_disc": bn_disc,
                "bn_gen": bn_gen,
            }
        )
        self.shape = (units,)
        return self

    def add_conv(
        self,
        channels: int,
        kernel: int,
        stride: int,
        pad: int = 0,
        act_disc: str = HIDDEN,
        bn_disc: bool = False,
        bn_gen: bool = False,
    ) -> "ArchitectureBuilder":
        if len(self.shape) == 1:
            self.add_reshape(self.image_shape)
        in_channels, height, width = self.shape
        self.layers.append(
            {
                "type": "conv",
                "in_shape": [in_channels, height, width],
                "out_channels": channels,
                "kernel": kernel,
                "stride": stride,
                "pad": pad,
                "bias": self.bias,
                "act_disc": act_disc,
                "act_gen": self._act_gen(),
                "bn_disc": bn_disc,
                "bn_gen": bn_gen,
            }
        )
        self.shape = (
            channels,
            conv_output_size(height, kernel, stride, pad),
            conv_output_size(width, kernel, stride, pad),
        )
        return self

    def add_head(self, n_classes: int, bn_gen: bool = False) -> "ArchitectureBuilder":
        """Final dense layer emitting logits."""
        return self.add_dense(n_classes, act_disc=HEAD, bn_gen=bn_gen)

    def get_layers(self) -> List[Dict[str, Any]]:
        return self.layers


def _fully_connected(hidden: Tuple[int, ...]) -> Callable[[ArchitectureBuilder], None]:
    def build(builder: ArchitectureBuilder) -> None:
        for units in hidden:
            builder.add_dense(units)
        builder.add_head(NUM_CLASSES)

    return build


def _cnn_3conv(builder: ArchitectureBuilder) -> None:
    builder.add_conv(4, 5, 1)
    builder.add_conv(8, 5, 2)
    builder.add_conv(12, 4, 2)
    builder.add_dense(200)
    builder.add_head(NUM_CLASSES)


def _infogan(builder: ArchitectureBuilder) -> None:
    lrelu = "leaky_relu(0.1)"
    builder.add_conv(64, 4, 2, pad=1, act_disc=lrelu)
    builder.add_conv(128, 4, 2, pad=1, act_disc=lrelu, bn_disc=True, bn_gen=True)
    builder.add_dense(1024, act_disc=lrelu, bn_disc=True, bn_gen=True)
    builder.add_head(NUM_CLASSES, bn_gen=True)


@dataclass(frozen=True)
class Preset:
    """A named architecture and the training method it belongs to."""

    name: str
    method: str
    description: str
    build: Callable[[ArchitectureBuilder], None]

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method '{self.method}', expected one of {METHODS}")

    def descriptor(
        self, dataset: str = "mnist", bias: bool = True, dtype: str = "float32"
    ) -> Dict[str, Any]:
        """Architecture descriptor for the dataset's image shape."""
        if dataset not in IMAGE_SHAPES:
            raise ConfigError(f"unknown dataset '{dataset}', expected one of {list(IMAGE_SHAPES)}")
        builder = ArchitectureBuilder(IMAGE_SHAPES[dataset], bias)
        self.build(builder)
        return {
            "name": run_name_stem(self.name, bias),
            "n_classes": NUM_CLASSES,
            "dtype": dtype,
            "layers": builder.get_layers(),
        }


PRESETS: Dict[str, Preset] = {
    preset.name: preset
    for preset in (
        Preset("nn-none", "biprop", "fully connected, no hidden layer", _fully_connected(())),
        Preset("nn-1x16", "biprop", "one hidden layer of 16 units", _fully_connected((16,))),
        Preset("nn-2x16", "biprop", "two hidden layers of 16, 16", _fully_connected((16, 16))),
        Preset(
            "nn-4deep",
            "biprop",
            "four hidden layers of 200, 100, 60, 30",
            _fully_connected((200, 100, 60, 30)),
        ),
        Preset("cnn-3conv", "biprop", "conv 4, 8, 12 then fc 200", _cnn_3conv),
        Preset("han-nn-128", "han", "one hidden layer of 128 units", _fully_connected((128,))),
        Preset("han-infogan", "han", "infoGAN MNIST discriminator shape", _infogan),
    )
}


def run_name_stem(preset: str, bias: bool) -> str:
    return f"{preset}-{'bias' if bias else 'nobias'}"


def get_preset(name: str) -> Preset:
    """
    Look up a preset by name.

    Raises:
        ConfigError: If the name is unknown; the message lists the valid names
    """
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(
            f"unknown preset '{name}', valid presets: {', '.join(PRESETS)}"
        ) from None


def build_network(
    name: str, dataset: str = "mnist", bias: bool = True, seed: int = 0, dtype: str = "float32"
) -> BidirNetwork:
    """Construct a preset network with weights drawn from the seed's init stream."""
    descriptor = get_preset(name).descriptor(dataset, bias, dtype)
    return network_from_descriptor(descriptor, Rng(seed).derive(STREAM_INIT))
