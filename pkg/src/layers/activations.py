"""Activation functions with their derivatives."""

import re
from dataclasses import dataclass

import numpy as np

KINDS = ("sigmoid", "softmax", "relu", "leaky_relu", "threshold", "identity")


def sigmoid(a: np.ndarray) -> np.ndarray:
    # Split by sign so exp never overflows.
    out = np.empty_like(a)
    pos = a >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-a[pos]))
    exp_a = np.exp(a[~pos])
    out[~pos] = exp_a / (1.0 + exp_a)
    return out


def softmax(a: np.ndarray) -> np.ndarray:
    shifted = a - np.max(a, axis=1, keepdims=True)
    exp_a = np.exp(shifted)
    return exp_a / np.sum(exp_a, axis=1, keepdims=True)


def threshold(a: np.ndarray) -> np.ndarray:
    """f(a) = 1 if a > 0 else 0."""
    return (a > 0).astype(a.dtype)


@dataclass(frozen=True)
class Activation:
    """Activation kind; ``alpha`` is the negative slope of leaky_relu."""

    kind: str = "identity"
    alpha: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown activation '{self.kind}', expected one of {KINDS}")

    @classmethod
    def parse(cls, text: str) -> "Activation":
        """Parse ``"relu"`` or ``"leaky_relu(0.1)"``."""
        match = re.fullmatch(r"\s*(\w+)\s*(?:\(\s*([-+0-9.eE]+)\s*\))?\s*", text)
        if match is None:
            raise ValueError(f"cannot parse activation '{text}'")
        kind, alpha = match.group(1), match.group(2)
        if kind == "leaky_relu":
            return cls(kind, float(alpha) if alpha is not None else 0.01)
        if alpha is not None:
            raise ValueError(f"activation '{kind}' takes no parameter")
        return cls(kind)

    def __str__(self) -> str:
        if self.kind == "leaky_relu":
            return f"leaky_relu({self.alpha})"
        return self.kind

    def forward(self, a: np.ndarray) -> np.ndarray:
        if self.kind == "identity":
            return a
        if self.kind == "relu":
            return np.maximum(a, 0)
        if self.kind == "leaky_relu":
            return np.where(a > 0, a, self.alpha * a)
        if self.kind == "sigmoid":
            return sigmoid(a)
        if self.kind == "softmax":
            return softmax(a)
        return threshold(a)

    def backward(self, a: np.ndarray, out: np.ndarray, grad: np.ndarray) -> np.ndarray:
        """
        Gradient w.r.t. the pre-activation ``a`` given the gradient w.r.t. ``out``.

        Raises:
            ValueError: For the threshold activation, which is evaluation-only
        """
        if self.kind == "identity":
            return grad
        if self.kind == "relu":
            return grad * (a > 0)
        if self.kind == "leaky_relu":
            return grad * np.where(a > 0, 1.0, self.alpha).astype(grad.dtype)
        if self.kind == "sigmoid":
            return grad * out * (1.0 - out)
        if self.kind == "softmax":
            return out * (grad - np.sum(grad * out, axis=1, keepdims=True))
        raise ValueError("threshold activation has no gradient; use it for evaluation only")
