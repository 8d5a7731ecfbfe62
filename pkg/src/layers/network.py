"""Ordered stack of tied layers evaluable as a classifier and as a generator."""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ..utils.errors import CacheError, DimensionError
from .activations import Activation
from .base import DISC, GEN, Grads, LayerCache, TiedLayer
from .conv import SharedConv2D
from .dense import SharedDenseLayer
from .reshape import Reshape


@dataclass
class NetworkCache:
    """Per-call intermediates of a network forward pass."""

    direction: str
    owner: int
    layers: List[LayerCache]
    logits: np.ndarray
    batch: int


class BidirNetwork:
    """
    Undirected network: layers first→last classify, last→first generate.

    Inputs and generated images are flat ``batch×features`` arrays; the
    class side is ``batch×n_classes``. The discriminative output is the
    logits of the last layer; the generative output is the image after the
    output activation of the first parametric layer.
    """

    def __init__(self, layers: List[TiedLayer], n_classes: int, name: Optional[str] = None):
        if not layers:
            raise ValueError("a network needs at least one layer")
        for i, (lower, upper) in enumerate(zip(layers[:-1], layers[1:])):
            if lower.out_shape != upper.in_shape:
                raise DimensionError(
                    f"layer {i} output {lower.out_shape} does not chain into "
                    f"layer {i + 1} input {upper.in_shape}"
                )
        if len(layers[0].in_shape) != 1:
            raise DimensionError("the first layer must take flat input (add a Reshape layer)")
        if layers[-1].out_shape != (n_classes,):
            raise DimensionError(
                f"last layer emits {layers[-1].out_shape}, expected ({n_classes},) classes"
            )

        self.layers = layers
        self.n_classes = n_classes
        self.name = name
        self.output_index = next((i for i, layer in enumerate(layers) if layer.params), None)
        if self.output_index is None:
            raise ValueError("a network needs at least one parametric layer")
        self.dtype = np.dtype(layers[self.output_index].dtype)

    @property
    def in_features(self) -> int:
        return self.layers[0].in_shape[0]

    @property
    def image_shape(self) -> Tuple[int, ...]:
        """Structured per-sample input shape (C, H, W) when known, else the flat shape."""
        first = self.layers[0]
        return first.out_shape if isinstance(first, Reshape) else first.in_shape

    def parameters(self) -> Dict[str, np.ndarray]:
        """Live parameter arrays keyed ``"<layer index>.<name>"``."""
        params = {}
        for i, layer in enumerate(self.layers):
            params.update({f"{i}.{k}": v for k, v in layer.parameters().items()})
        return params

    def buffers(self) -> Dict[str, np.ndarray]:
        buffers = {}
        for i, layer in enumerate(self.layers):
            buffers.update({f"{i}.{k}": v for k, v in layer.buffers().items()})
        return buffers

    def state_dict(self) -> Dict[str, np.ndarray]:
        """Parameters and buffers, in a stable order."""
        state = self.parameters()
        state.update(self.buffers())
        return state

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        """Copy values into the live arrays so weight tying is preserved."""
        own = self.state_dict()
        missing = set(own) - set(state)
        unexpected = set(state) - set(own)
        if missing or unexpected:
            raise KeyError(
                f"state mismatch: missing {sorted(missing)}, unexpected {sorted(unexpected)}"
            )
        for key, target in own.items():
            value = np.asarray(state[key])
            if value.shape != target.shape:
                raise DimensionError(f"{key}: expected shape {target.shape}, got {value.shape}")
            target[...] = value

    def describe(self) -> Dict[str, Any]:
        """Architecture descriptor stored in checkpoints."""
        return {
            "name": self.name,
            "n_classes": self.n_classes,
            "dtype": self.dtype.name,
            "layers": [layer.describe() for layer in self.layers],
        }

    def _check_cache(self, cache: NetworkCache, direction: str) -> None:
        if (
            not isinstance(cache, NetworkCache)
            or cache.owner != id(self)
            or cache.direction != direction
            or len(cache.layers) != len(self.layers)
        ):
            raise CacheError(f"backward_{direction} received a cache from another forward call")

    def forward_disc(self, x: np.ndarray, training: bool = False):
        """
        Classify a batch.

        Args:
            x: Flat inputs of shape (batch, in_features)
            training: Use batch statistics in batch norm

        Returns:
            Tuple of (logits of shape (batch, n_classes), cache)
        """
        if x.ndim != 2 or x.shape[1] != self.in_features:
            raise DimensionError(
                f"forward_disc expects (batch, {self.in_features}), got {tuple(x.shape)}"
            )
        h = np.asarray(x, dtype=self.dtype)
        caches = []
        for layer in self.layers:
            h, cache = layer.forward_disc(h, training)
            caches.append(cache)
        return h, NetworkCache(DISC, id(self), caches, h, x.shape[0])

    def backward_disc(self, cache: NetworkCache, grad_out: np.ndarray) -> Tuple[Grads, np.ndarray]:
        """
        Backpropagate a gradient w.r.t. the logits.

        Returns:
            Tuple of (parameter gradients keyed like ``parameters()``, gradient w.r.t. x)
        """
        self._check_cache(cache, DISC)
        if grad_out.shape != cache.logits.shape:
            raise DimensionError(
                f"gradient shape {grad_out.shape} does not match logits {cache.logits.shape}"
            )
        grads: Grads = {}
        g = grad_out
        for i in reversed(range(len(self.layers))):
            layer_grads, g = self.layers[i].backward_disc(cache.layers[i], g)
            grads.update({f"{i}.{k}": v for k, v in layer_grads.items()})
        return grads, g

    def forward_gen(self, h: np.ndarray, training: bool = False):
        """
        Generate images from class-side vectors (one-hot labels or latent z).

        Returns:
            Tuple of (images of shape (batch, in_features), cache); the
            cache's ``logits`` are the flat pre-activation of the output layer
        """
        if h.ndim != 2 or h.shape[1] != self.n_classes:
            raise DimensionError(
                f"forward_gen expects (batch, {self.n_classes}), got {tuple(h.shape)}"
            )
        out = np.asarray(h, dtype=self.dtype)
        caches: List[Optional[LayerCache]] = [None] * len(self.layers)
        for i in reversed(range(len(self.layers))):
            out, caches[i] = self.layers[i].forward_gen(out, training)
        logits = caches[self.output_index].z.reshape(h.shape[0], -1)
        return out, NetworkCache(GEN, id(self), caches, logits, h.shape[0])

    def backward_gen(
        self, cache: NetworkCache, grad_out: np.ndarray, from_logits: bool = False
    ) -> Tuple[Grads, np.ndarray]:
        """
        Backpropagate through the generative direction.

        Args:
            cache: Cache of the matching ``forward_gen`` call
            grad_out: Gradient w.r.t. the images, or w.r.t. ``cache.logits``
                when ``from_logits`` is set
            from_logits: Skip the output activation's derivative

        Returns:
            Tuple of (parameter gradients, gradient w.r.t. the class-side input);
            the shared weight gradients use the same keys as the discriminative pass
        """
        self._check_cache(cache, GEN)
        if grad_out.shape != (cache.batch, self.in_features):
            raise DimensionError(
                f"gradient shape {grad_out.shape} does not match images "
                f"({cache.batch}, {self.in_features})"
            )
        grads: Grads = {}
        g = grad_out
        for i, layer in enumerate(self.layers):
            if i == self.output_index:
                g = g.reshape(cache.layers[i].out.shape)
                layer_grads, g = layer.backward_gen(cache.layers[i], g, from_logits=from_logits)
            else:
                layer_grads, g = layer.backward_gen(cache.layers[i], g)
            grads.update({f"{i}.{k}": v for k, v in layer_grads.items()})
        return grads, g

    def predict(self, x: np.ndarray, batch_size: int = 1000) -> np.ndarray:
        """Inference-mode logits, evaluated in chunks."""
        chunks = [
            self.forward_disc(x[start : start + batch_size])[0]
            for start in range(0, x.shape[0], batch_size)
        ]
        return np.concatenate(chunks, axis=0)

    def generate(self, h: np.ndarray) -> np.ndarray:
        """Inference-mode generated images."""
        return self.forward_gen(h)[0]


def build_layer(spec: Dict[str, Any], rng=None, dtype=np.float32) -> TiedLayer:
    """Construct one layer from its descriptor (the output of ``describe``)."""
    kind = spec["type"]
    if kind == "reshape":
        return Reshape(tuple(spec["in_shape"]), tuple(spec["out_shape"]))

    common = dict(
        bias=spec.get("bias", True),
        act_disc=Activation.parse(spec.get("act_disc", "relu")),
        act_gen=Activation.parse(spec.get("act_gen", "relu")),
        bn_disc=spec.get("bn_disc", False),
        bn_gen=spec.get("bn_gen", False),
        rng=rng,
        dtype=dtype,
    )
    if kind == "dense":
        return SharedDenseLayer(spec["in"], spec["out"], **common)
    if kind == "conv":
        return SharedConv2D(
            tuple(spec["in_shape"]),
            spec["out_channels"],
            spec["kernel"],
            stride=spec.get("stride", 1),
            pad=spec.get("pad", 0),
            **common,
        )
    raise ValueError(f"unknown layer type '{kind}'")


def network_from_descriptor(descriptor: Dict[str, Any], rng=None) -> BidirNetwork:
    """Rebuild a network from ``BidirNetwork.describe()`` output."""
    dtype = np.dtype(descriptor.get("dtype", "float32"))
    layers = [build_layer(spec, rng, dtype) for spec in descriptor["layers"]]
    return BidirNetwork(layers, descriptor["n_classes"], descriptor.get("name"))
