from typing import Dict, Tuple

import numpy as np


class BatchNorm:
    """
    Batch normalization over features (N×F input) or channels (N×C×H×W input).

    Training mode normalizes with batch statistics and updates the running
    statistics; inference mode uses the running statistics. ``center=False``
    drops the ``beta`` offset (used by the bias-free presets).
    """

    def __init__(
        self,
        num_features: int,
        epsilon: float = 1e-5,
        momentum: float = 0.9,
        center: bool = True,
        dtype=np.float32,
    ):
        if not 0.0 < momentum < 1.0:
            raise ValueError(f"momentum must lie in (0, 1), got {momentum}")
        if epsilon <= 0:
            raise ValueError("epsilon must be positive")
        self.num_features = num_features
        self.epsilon = epsilon
        self.momentum = momentum
        self.center = center
        self.params: Dict[str, np.ndarray] = {"gamma": np.ones(num_features, dtype=dtype)}
        if center:
            self.params["beta"] = np.zeros(num_features, dtype=dtype)
        self.buffers: Dict[str, np.ndarray] = {
            "running_mean": np.zeros(num_features, dtype=dtype),
            "running_var": np.ones(num_features, dtype=dtype),
        }

    @staticmethod
    def _axes(x: np.ndarray) -> Tuple[int, ...]:
        return (0,) if x.ndim == 2 else (0, 2, 3)

    def _expand(self, v: np.ndarray, ndim: int) -> np.ndarray:
        return v if ndim == 2 else v.reshape(1, -1, 1, 1)

    def forward(self, x: np.ndarray, training: bool):
        axes = self._axes(x)
        if x.shape[1] != self.num_features:
            raise ValueError(f"batch norm expects {self.num_features} features, got {x.shape[1]}")

        if training:
            mean = x.mean(axis=axes)
            var = x.var(axis=axes)
            m = self.momentum
            self.buffers["running_mean"][...] = m * self.buffers["running_mean"] + (1 - m) * mean
            self.buffers["running_var"][...] = m * self.buffers["running_var"] + (1 - m) * var
        else:
            mean = self.buffers["running_mean"]
            var = self.buffers["running_var"]

        inv_std = 1.0 / np.sqrt(var + self.epsilon)
        x_hat = (x - self._expand(mean, x.ndim)) * self._expand(inv_std, x.ndim)
        out = x_hat * self._expand(self.params["gamma"], x.ndim)
        if self.center:
            out = out + self._expand(self.params["beta"], x.ndim)
        return out, (x_hat, inv_std, training)

    def backward(self, cache, grad: np.ndarray):
        """
        Returns:
            Tuple of (parameter gradients, gradient w.r.t. the input)
        """
        x_hat, inv_std, training = cache
        axes = self._axes(grad)
        grads = {"gamma": np.sum(grad * x_hat, axis=axes)}
        if self.center:
            grads["beta"] = np.sum(grad, axis=axes)

        g_hat = grad * self._expand(self.params["gamma"], grad.ndim)
        if not training:
            return grads, g_hat * self._expand(inv_std, grad.ndim)

        mean_g = self._expand(g_hat.mean(axis=axes), grad.ndim)
        mean_gx = self._expand((g_hat * x_hat).mean(axis=axes), grad.ndim)
        grad_in = (g_hat - mean_g - x_hat * mean_gx) * self._expand(inv_std, grad.ndim)
        return grads, grad_in
