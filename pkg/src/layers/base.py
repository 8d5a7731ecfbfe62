"""Base classes for layers evaluable in a discriminative and a generative direction."""

from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np

from ..utils.errors import CacheError, DimensionError
from .activations import Activation
from .batchnorm import BatchNorm

DISC = "disc"
GEN = "gen"

Grads = Dict[str, np.ndarray]


@dataclass
class LayerCache:
    """Intermediates of one layer's forward call, consumed by its backward call."""

    direction: str
    linear: Any
    z: np.ndarray
    out: np.ndarray
    bn: Any = None


class TiedLayer:
    """
    Base class for a layer with one parameter store and two directions.

    The discriminative direction maps per-sample shape ``in_shape`` to
    ``out_shape``; the generative direction maps ``out_shape`` back to
    ``in_shape``. Subclasses implement the four forward/backward methods.
    """

    kind = "layer"

    def __init__(self, in_shape: Tuple[int, ...], out_shape: Tuple[int, ...]):
        self.in_shape = tuple(in_shape)
        self.out_shape = tuple(out_shape)
        self.params: Dict[str, np.ndarray] = {}

    def parameters(self) -> Dict[str, np.ndarray]:
        """Live parameter arrays keyed by name; in-place updates are visible to the layer."""
        return dict(self.params)

    def buffers(self) -> Dict[str, np.ndarray]:
        """Live non-trainable state (batch-norm running statistics)."""
        return {}

    def describe(self) -> Dict[str, Any]:
        raise NotImplementedError("Subclasses must implement describe")

    def forward_disc(self, x: np.ndarray, training: bool = False):
        raise NotImplementedError("Subclasses must implement forward_disc")

    def backward_disc(self, cache: LayerCache, grad: np.ndarray) -> Tuple[Grads, np.ndarray]:
        raise NotImplementedError("Subclasses must implement backward_disc")

    def forward_gen(self, h: np.ndarray, training: bool = False):
        raise NotImplementedError("Subclasses must implement forward_gen")

    def backward_gen(
        self, cache: LayerCache, grad: np.ndarray, from_logits: bool = False
    ) -> Tuple[Grads, np.ndarray]:
        raise NotImplementedError("Subclasses must implement backward_gen")


def glorot_uniform(rng, shape, fan_in: int, fan_out: int, dtype) -> np.ndarray:
    """Zero-mean uniform init with limit sqrt(6 / (fan_in + fan_out))."""
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, shape).astype(dtype)


class AffineTiedLayer(TiedLayer):
    """
    Shared weight ``W`` with direction-specific bias, batch norm and activation.

    Per direction the layer computes ``act(bn(linear(x) + b))``. Only ``W``
    is shared; ``b_disc``/``b_gen`` and the two batch-norm instances belong
    to one direction each. Subclasses supply the linear map and its adjoint.
    """

    def __init__(
        self,
        in_shape,
        out_shape,
        bias: bool,
        act_disc: Activation,
        act_gen: Activation,
        bn_disc: bool,
        bn_gen: bool,
        dtype,
    ):
        super().__init__(in_shape, out_shape)
        self.bias = bias
        self.dtype = np.dtype(dtype)
        self.act = {DISC: act_disc, GEN: act_gen}
        out_features, in_features = self.out_shape[0], self.in_shape[0]
        if bias:
            self.params["b_disc"] = np.zeros(out_features, dtype=self.dtype)
            self.params["b_gen"] = np.zeros(in_features, dtype=self.dtype)
        self.bn: Dict[str, Optional[BatchNorm]] = {
            DISC: BatchNorm(out_features, center=bias, dtype=self.dtype) if bn_disc else None,
            GEN: BatchNorm(in_features, center=bias, dtype=self.dtype) if bn_gen else None,
        }

    @property
    def weights(self) -> np.ndarray:
        return self.params["W"]

    def parameters(self) -> Dict[str, np.ndarray]:
        params = dict(self.params)
        for direction, bn in self.bn.items():
            if bn is not None:
                params.update({f"bn_{direction}.{k}": v for k, v in bn.params.items()})
        return params

    def buffers(self) -> Dict[str, np.ndarray]:
        buffers = {}
        for direction, bn in self.bn.items():
            if bn is not None:
                buffers.update({f"bn_{direction}.{k}": v for k, v in bn.buffers.items()})
        return buffers

    def _describe_common(self) -> Dict[str, Any]:
        return {
            "bias": self.bias,
            "act_disc": str(self.act[DISC]),
            "act_gen": str(self.act[GEN]),
            "bn_disc": self.bn[DISC] is not None,
            "bn_gen": self.bn[GEN] is not None,
        }

    # Linear maps: subclasses return (result, linear cache) and the adjoint products.
    def _linear(self, direction: str, x: np.ndarray):
        raise NotImplementedError

    def _linear_backward(self, direction: str, linear_cache, grad: np.ndarray):
        """Return (dW, grad w.r.t. the linear map's input)."""
        raise NotImplementedError

    @staticmethod
    def _expand(v: np.ndarray, ndim: int) -> np.ndarray:
        return v if ndim == 2 else v.reshape((1, -1) + (1,) * (ndim - 2))

    @staticmethod
    def _feature_axes(ndim: int) -> Tuple[int, ...]:
        return (0,) + tuple(range(2, ndim))

    def _forward(self, direction: str, x: np.ndarray, training: bool):
        expected = self.in_shape if direction == DISC else self.out_shape
        if tuple(x.shape[1:]) != expected:
            raise DimensionError(
                f"{self.kind} {direction} input expects per-sample shape {expected}, "
                f"got {tuple(x.shape[1:])}"
            )
        z, linear_cache = self._linear(direction, x)
        bias = self.params.get(f"b_{direction}")
        if bias is not None:
            z = z + self._expand(bias, z.ndim)
        bn_cache = None
        if self.bn[direction] is not None:
            z, bn_cache = self.bn[direction].forward(z, training)
        out = self.act[direction].forward(z)
        return out, LayerCache(direction, linear_cache, z, out, bn_cache)

    def _backward(self, direction: str, cache: LayerCache, grad: np.ndarray, from_logits: bool):
        if not isinstance(cache, LayerCache) or cache.direction != direction:
            raise CacheError(f"{self.kind} backward_{direction} received a mismatched cache")
        if grad.shape != cache.out.shape:
            raise DimensionError(
                f"upstream gradient shape {grad.shape} does not match output {cache.out.shape}"
            )
        g = grad if from_logits else self.act[direction].backward(cache.z, cache.out, grad)

        grads: Grads = {}
        if self.bn[direction] is not None:
            bn_grads, g = self.bn[direction].backward(cache.bn, g)
            grads.update({f"bn_{direction}.{k}": v for k, v in bn_grads.items()})
        if f"b_{direction}" in self.params:
            grads[f"b_{direction}"] = np.sum(g, axis=self._feature_axes(g.ndim))

        d_weights, grad_in = self._linear_backward(direction, cache.linear, g)
        grads["W"] = d_weights
        return grads, grad_in

    def forward_disc(self, x, training=False):
        return self._forward(DISC, x, training)

    def backward_disc(self, cache, grad):
        return self._backward(DISC, cache, grad, from_logits=False)

    def forward_gen(self, h, training=False):
        return self._forward(GEN, h, training)

    def backward_gen(self, cache, grad, from_logits=False):
        return self._backward(GEN, cache, grad, from_logits)
