"""Fast gradient sign method."""

from dataclasses import dataclass

import numpy as np

from ..optim.losses import softmax_cross_entropy
from ..tensor import ops

PRESET_EPSILON = {"mnist": 0.3, "cifar10": 0.03}


@dataclass
class AttackConfig:
    """Max-norm budget and valid pixel range of the attack."""

    epsilon: float
    clip_lo: float = 0.0
    clip_hi: float = 1.0

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be non-negative, got {self.epsilon}")
        if self.clip_lo >= self.clip_hi:
            raise ValueError("clip_lo must be below clip_hi")

    @classmethod
    def for_dataset(cls, name: str) -> "AttackConfig":
        return cls(epsilon=PRESET_EPSILON[name])


def loss_input_gradient(model, x: np.ndarray, y_onehot: np.ndarray) -> np.ndarray:
    """Gradient of the classifier's softmax cross-entropy w.r.t. its input."""
    if not hasattr(model, "backward_disc"):
        raise TypeError(f"{type(model).__name__} does not expose input gradients")
    logits, cache = model.forward_disc(x)
    _, grad_logits = softmax_cross_entropy(logits, y_onehot.astype(logits.dtype))
    _, grad_x = model.backward_disc(cache, grad_logits)
    return grad_x


def fgsm(
    model, x: np.ndarray, y_onehot: np.ndarray, cfg: AttackConfig, batch_size: int = 1000
) -> np.ndarray:
    """
    x_adv = clip(x + ε·sign(∇ₓJ(x, y)), lo, hi), evaluated in chunks.

    Args:
        model: Network exposing ``forward_disc``/``backward_disc``
        x: Clean inputs in [lo, hi]
        y_onehot: True labels
        cfg: Attack budget and pixel range
        batch_size: Chunk size

    Returns:
        Adversarial inputs with the dtype of ``x``
    """
    if cfg.epsilon == 0:
        return x.copy()
    x_adv = np.empty_like(x)
    for start in range(0, x.shape[0], batch_size):
        chunk = slice(start, start + batch_size)
        grad = loss_input_gradient(model, x[chunk], y_onehot[chunk])
        step = cfg.epsilon * ops.sign(grad).astype(x.dtype)
        x_adv[chunk] = ops.clip(x[chunk] + step, cfg.clip_lo, cfg.clip_hi)
    return x_adv
