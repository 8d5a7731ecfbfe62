"""Threshold perceptron whose weight vector is a contrast template of its ideal input."""

import numpy as np

from ..tensor import ops
from .activations import Activation
from .dense import SharedDenseLayer
from .network import BidirNetwork


def ideal_input(w: np.ndarray) -> np.ndarray:
    """Input maximizing w·x over {0,1}ⁿ: active where w is positive."""
    return ops.elementwise("max", np.asarray(w, dtype=np.float64), 0.0)


def threshold_perceptron(w: np.ndarray) -> BidirNetwork:
    """Single bias-free dense unit with threshold activation in both directions."""
    w = np.asarray(w, dtype=np.float64).reshape(1, -1)
    step = Activation("threshold")
    layer = SharedDenseLayer(
        w.shape[1], 1, bias=False, act_disc=step, act_gen=step, dtype=np.float64
    )
    layer.weights[...] = w
    return BidirNetwork([layer], n_classes=1, name="threshold-perceptron")


def reconstruction_fixed_point(w: np.ndarray, x_hat: np.ndarray) -> bool:
    """
    True iff f(wᵀ·f(w·x̂)) reproduces x̂ exactly, f being the threshold activation.
    """
    net = threshold_perceptron(w)
    x_hat = np.asarray(x_hat, dtype=np.float64).reshape(1, -1)
    y, _ = net.forward_disc(x_hat)
    reconstruction, _ = net.forward_gen(y)
    return bool(np.array_equal(reconstruction, x_hat))
