from typing import Any, Dict

import numpy as np

from ..tensor import ops
from .activations import Activation
from .base import DISC, AffineTiedLayer, glorot_uniform


class SharedDenseLayer(AffineTiedLayer):
    """
    Fully connected layer whose weight matrix serves both directions.

    Discriminative: ``x (N×in) -> x·Wᵀ``; generative: ``h (N×out) -> h·W``,
    with ``W`` of shape (out, in) in both cases.
    """

    kind = "dense"

    def __init__(
        self,
        in_features: int,
        out_features: int,
        bias: bool = True,
        act_disc: Activation = Activation("relu"),
        act_gen: Activation = Activation("relu"),
        bn_disc: bool = False,
        bn_gen: bool = False,
        rng=None,
        dtype=np.float32,
    ):
        super().__init__(
            (in_features,), (out_features,), bias, act_disc, act_gen, bn_disc, bn_gen, dtype
        )
        if rng is None:
            self.params["W"] = np.zeros((out_features, in_features), dtype=self.dtype)
        else:
            self.params["W"] = glorot_uniform(
                rng, (out_features, in_features), in_features, out_features, self.dtype
            )

    @property
    def in_features(self) -> int:
        return self.in_shape[0]

    @property
    def out_features(self) -> int:
        return self.out_shape[0]

    def describe(self) -> Dict[str, Any]:
        return {
            "type": self.kind,
            "in": self.in_features,
            "out": self.out_features,
            **self._describe_common(),
        }

    def _linear(self, direction, x):
        if direction == DISC:
            return ops.matmul(x, self.weights.T), x
        return ops.matmul(x, self.weights), x

    def _linear_backward(self, direction, x, grad):
        if direction == DISC:
            return grad.T @ x, grad @ self.weights
        return x.T @ grad, grad @ self.weights.T
