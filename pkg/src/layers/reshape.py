from typing import Any, Dict

import numpy as np

from ..utils.errors import CacheError, DimensionError
from .base import DISC, GEN, LayerCache, TiedLayer


class Reshape(TiedLayer):
    """Parameter-free layer switching between flat and structured per-sample shapes."""

    kind = "reshape"

    def __init__(self, in_shape, out_shape):
        super().__init__(in_shape, out_shape)
        if int(np.prod(self.in_shape)) != int(np.prod(self.out_shape)):
            raise DimensionError(f"cannot reshape {self.in_shape} into {self.out_shape}")

    def describe(self) -> Dict[str, Any]:
        return {
            "type": self.kind,
            "in_shape": list(self.in_shape),
            "out_shape": list(self.out_shape),
        }

    def _apply(self, direction: str, x: np.ndarray, source, target):
        if tuple(x.shape[1:]) != source:
            raise DimensionError(f"reshape {direction} expects {source}, got {tuple(x.shape[1:])}")
        out = x.reshape((x.shape[0],) + target)
        return out, LayerCache(direction, None, out, out)

    def _check(self, cache, direction):
        if not isinstance(cache, LayerCache) or cache.direction != direction:
            raise CacheError(f"reshape backward_{direction} received a mismatched cache")

    def forward_disc(self, x, training=False):
        return self._apply(DISC, x, self.in_shape, self.out_shape)

    def backward_disc(self, cache, grad):
        self._check(cache, DISC)
        return {}, grad.reshape((grad.shape[0],) + self.in_shape)

    def forward_gen(self, h, training=False):
        return self._apply(GEN, h, self.out_shape, self.in_shape)

    def backward_gen(self, cache, grad, from_logits=False):
        self._check(cache, GEN)
        return {}, grad.reshape((grad.shape[0],) + self.out_shape)
