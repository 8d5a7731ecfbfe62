"""White noise static inputs."""

import numpy as np

from ..tensor import ops
from ..tensor.rng import Rng

NOISE_MODES = ("additive", "blend")


def white_noise(rng: Rng, shape) -> np.ndarray:
    """I.i.d. uniform [0, 1) pixels."""
    return ops.sample(rng, "uniform", shape, 0.0, 1.0)


def add_noise(x: np.ndarray, fraction: float, rng: Rng, mode: str = "additive") -> np.ndarray:
    """
    Mix a fraction of white noise into images.

    ``additive``: clip(x + fraction·u, 0, 1); ``blend``: (1 − fraction)·x + fraction·u.

    Raises:
        ValueError: If ``fraction`` is negative or the mode is unknown
    """
    if fraction < 0:
        raise ValueError(f"noise fraction must be non-negative, got {fraction}")
    if mode not in NOISE_MODES:
        raise ValueError(f"unknown noise mode '{mode}', expected one of {NOISE_MODES}")
    if fraction == 0:
        return x.copy()

    u = white_noise(rng, x.shape)
    if mode == "additive":
        mixed = ops.clip(x + fraction * u, 0.0, 1.0)
    else:
        mixed = ops.clip((1.0 - fraction) * x + fraction * u, 0.0, 1.0)
    return mixed.astype(x.dtype, copy=False)
