"""Accuracy and the noise-over-data output rates of a classifier."""

import numpy as np

from ..layers.activations import sigmoid, softmax
from ..tensor import ops
from ..utils.errors import NumericError

HEADS = ("sigmoid", "softmax")


def head_outputs(model, x: np.ndarray, head: str, batch_size: int = 1000) -> np.ndarray:
    """Sigmoid or softmax of the model's logits; both heads read the same logits."""
    logits = model.predict(x, batch_size)
    if head == "sigmoid":
        return sigmoid(logits)
    if head == "softmax":
        return softmax(logits)
    raise ValueError(f"unknown head '{head}', expected one of {HEADS}")


def output_rate(model, x_noise: np.ndarray, x_test: np.ndarray, head: str) -> float:
    """max(head(x_noise)) / max(head(x_test))."""
    if x_noise.shape != x_test.shape:
        raise ValueError(f"noise {x_noise.shape} and test {x_test.shape} shapes differ")
    noise_max = ops.reduce("max", head_outputs(model, x_noise, head))
    test_max = ops.reduce("max", head_outputs(model, x_test, head))
    if test_max == 0:
        raise NumericError("output_rate", f"{head} outputs on test data are all zero")
    return float(noise_max) / float(test_max)


def sigmoid_rate(model, x_noise: np.ndarray, x_test: np.ndarray) -> float:
    """Output-layer activity on noise relative to real data; ideal 0."""
    return output_rate(model, x_noise, x_test, "sigmoid")


def softmax_rate(model, x_noise: np.ndarray, x_test: np.ndarray) -> float:
    """Confidence on noise relative to real data; ideal 1/classes."""
    return output_rate(model, x_noise, x_test, "softmax")


def accuracy(model, x: np.ndarray, y_onehot: np.ndarray, batch_size: int = 1000) -> float:
    """Fraction of samples whose argmax logit equals the argmax label (ties to lowest index)."""
    if x.shape[0] == 0:
        raise ValueError("accuracy of an empty set is undefined")
    predicted = ops.reduce("argmax", model.predict(x, batch_size), axis=1)
    expected = ops.reduce("argmax", y_onehot, axis=1)
    return float(np.mean(predicted == expected))
