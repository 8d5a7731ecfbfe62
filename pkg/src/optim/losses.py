"""Loss functions returning (value, gradient w.r.t. the logits or outputs)."""

from typing import Tuple

import numpy as np

from ..layers.activations import sigmoid, softmax


def _log_sigmoid(a: np.ndarray) -> np.ndarray:
    # log(sigmoid(a)) = -log(1 + exp(-a)), computed without overflow
    return -np.logaddexp(0.0, -a)


def softmax_cross_entropy(logits: np.ndarray, labels: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    Mean cross-entropy of softmax(logits) against one-hot labels.

    Returns:
        Tuple of (loss, gradient ``(softmax(logits) - labels) / batch``)

    Raises:
        ValueError: If shapes differ or labels are not one-hot rows
    """
    if logits.shape != labels.shape:
        raise ValueError(f"logits {logits.shape} and labels {labels.shape} differ in shape")
    if not (np.all((labels == 0) | (labels == 1)) and np.all(labels.sum(axis=1) == 1)):
        raise ValueError("labels must be one-hot rows")

    batch = logits.shape[0]
    shifted = logits - np.max(logits, axis=1, keepdims=True)
    log_probs = shifted - np.log(np.sum(np.exp(shifted), axis=1, keepdims=True))
    loss = float(-np.sum(labels * log_probs) / batch)
    grad = (softmax(logits) - labels) / batch
    return loss, grad.astype(logits.dtype, copy=False)


def sigmoid_cross_entropy(logits: np.ndarray, targets: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    Mean elementwise cross-entropy of sigmoid(logits) against targets in [0, 1].

    Returns:
        Tuple of (loss, gradient ``(sigmoid(logits) - targets) / count``)
    """
    if logits.shape != targets.shape:
        raise ValueError(f"logits {logits.shape} and targets {targets.shape} differ in shape")
    if np.any(targets < 0) or np.any(targets > 1):
        raise ValueError("targets must lie in [0, 1]")

    count = logits.size
    per_element = -(targets * _log_sigmoid(logits) + (1 - targets) * _log_sigmoid(-logits))
    grad = (sigmoid(logits) - targets) / count
    return float(np.sum(per_element) / count), grad.astype(logits.dtype, copy=False)


def mse(outputs: np.ndarray, targets: np.ndarray) -> Tuple[float, np.ndarray]:
    """Mean squared error; gradient is w.r.t. ``outputs``."""
    if outputs.shape != targets.shape:
        raise ValueError(f"outputs {outputs.shape} and targets {targets.shape} differ in shape")
    diff = outputs - targets
    return float(np.mean(diff * diff)), (2.0 * diff / diff.size).astype(outputs.dtype, copy=False)


def gan_disc_loss(
    real_logits: np.ndarray, fake_logits: np.ndarray
) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    Discriminator loss -log D(x) - log(1 - D(G(z))), each term averaged over its batch.

    Returns:
        Tuple of (loss, gradient w.r.t. real logits, gradient w.r.t. fake logits)
    """
    loss = -np.mean(_log_sigmoid(real_logits)) - np.mean(_log_sigmoid(-fake_logits))
    grad_real = (sigmoid(real_logits) - 1.0) / real_logits.size
    grad_fake = sigmoid(fake_logits) / fake_logits.size
    return float(loss), grad_real, grad_fake


def gan_gen_loss(fake_logits: np.ndarray) -> Tuple[float, np.ndarray]:
    """Non-saturating generator loss -log D(G(z))."""
    loss = -np.mean(_log_sigmoid(fake_logits))
    grad = (sigmoid(fake_logits) - 1.0) / fake_logits.size
    return float(loss), grad
