"""
Tensor primitives over ``numpy.ndarray``.

Every operation validates shapes and refuses to return non-finite values:
a NaN or infinity raises ``NumericError`` naming the operation.
"""

from typing import Sequence, Tuple, Union

import numpy as np

from ..utils.errors import DimensionError, NumericError, RankError
from .rng import Rng

Tensor = np.ndarray
Scalar = Union[int, float]

ELEMENTWISE_OPS = ("add", "sub", "mul", "max", "clip", "sign")
REDUCE_OPS = ("sum", "max", "argmax")


def check_finite(a: Tensor, op: str) -> Tensor:
    """Raise ``NumericError`` naming ``op`` when ``a`` holds NaN or infinity."""
    if not np.all(np.isfinite(a)):
        bad = int(np.size(a) - np.count_nonzero(np.isfinite(a)))
        raise NumericError(op, f"{bad} of {np.size(a)} values are NaN or infinite")
    return a


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """
    Matrix product of a (m×k) and b (k×n).

    Raises:
        RankError: If either operand is not a matrix
        DimensionError: If inner dimensions disagree
    """
    if a.ndim != 2 or b.ndim != 2:
        raise RankError(f"matmul expects rank-2 operands, got shapes {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul shape mismatch: {a.shape} x {b.shape}")
    return check_finite(a @ b, "matmul")


def transpose(a: Tensor) -> Tensor:
    if a.ndim != 2:
        raise RankError(f"transpose expects a rank-2 tensor, got shape {a.shape}")
    return a.T


def _check_same_shape(op: str, a: Tensor, b) -> None:
    if np.ndim(b) != 0 and np.shape(a) != np.shape(b):
        raise DimensionError(f"{op} shape mismatch: {np.shape(a)} vs {np.shape(b)}")


def elementwise(op: str, a: Tensor, *args) -> Tensor:
    """
    Pointwise operation with optional scalar broadcast.

    Args:
        op: One of add, sub, mul, max (max with a scalar), clip, sign
        a: First operand
        *args: Second operand for add/sub/mul/max, (lo, hi) for clip

    Returns:
        New tensor with the pointwise result
    """
    a = np.asarray(a)
    if op in ("add", "sub", "mul"):
        (b,) = args
        _check_same_shape(op, a, b)
        result = {"add": np.add, "sub": np.subtract, "mul": np.multiply}[op](a, b)
    elif op == "max":
        (scalar,) = args
        if np.ndim(scalar) != 0:
            raise DimensionError("max is defined against a scalar only")
        result = np.maximum(a, scalar)
    elif op == "clip":
        lo, hi = args
        if lo > hi:
            raise ValueError(f"clip bounds inverted: lo={lo} > hi={hi}")
        result = np.clip(a, lo, hi)
    elif op == "sign":
        if args:
            raise TypeError("sign takes no extra arguments")
        result = np.sign(a)
    else:
        raise ValueError(f"unknown elementwise op '{op}', expected one of {ELEMENTWISE_OPS}")
    return check_finite(result, op)


def clip(a: Tensor, lo: float = 0.0, hi: float = 1.0) -> Tensor:
    return elementwise("clip", a, lo, hi)


def sign(a: Tensor) -> Tensor:
    return elementwise("sign", a)


def reduce(op: str, a: Tensor, axis: int = None) -> Tensor:
    """
    Reduce along ``axis`` (whole tensor when None); argmax ties go to the lowest index.

    Raises:
        RankError: If ``axis`` is out of range
        DimensionError: If the reduced axis is empty
    """
    a = np.asarray(a)
    if axis is not None and not -a.ndim <= axis < a.ndim:
        raise RankError(f"axis {axis} out of range for rank {a.ndim}")
    if a.size == 0 or (axis is not None and a.shape[axis] == 0):
        raise DimensionError(f"cannot {op}-reduce an empty axis of shape {a.shape}")
    if op == "sum":
        return np.sum(a, axis=axis)
    if op == "max":
        return np.max(a, axis=axis)
    if op == "argmax":
        return np.argmax(a, axis=axis)
    raise ValueError(f"unknown reduction '{op}', expected one of {REDUCE_OPS}")


def sample(rng: Rng, dist: str, shape: Sequence[int], *params: float) -> Tensor:
    """
    Draw i.i.d. samples.

    Args:
        rng: Random generator
        dist: ``uniform`` with params (lo, hi) or ``normal`` with params (mu, sigma)
        shape: Output shape; every dimension positive
        *params: Distribution parameters; defaults (0, 1) for both

    Returns:
        Float64 tensor of samples; uniform values lie in [lo, hi)
    """
    shape: Tuple[int, ...] = tuple(int(d) for d in shape)
    if any(d <= 0 for d in shape):
        raise ValueError(f"invalid sample shape {shape}")
    first, second = params if params else (0.0, 1.0)
    if dist == "uniform":
        if not first < second:
            raise ValueError(f"uniform requires lo < hi, got ({first}, {second})")
        return rng.uniform(first, second, shape)
    if dist == "normal":
        if second <= 0:
            raise ValueError(f"normal requires sigma > 0, got {second}")
        return rng.normal(first, second, shape)
    raise ValueError(f"unknown distribution '{dist}'")
