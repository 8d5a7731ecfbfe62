"""Central finite-difference gradients for checking hand-derived adjoints."""

from typing import Callable, Iterable, Optional, Tuple

import numpy as np


def numerical_gradient(
    fcn: Callable[[], float],
    array: np.ndarray,
    step: float = 1e-5,
    indices: Optional[Iterable[Tuple[int, ...]]] = None,
) -> np.ndarray:
    """
    Estimate d fcn / d array by central differences, perturbing ``array`` in place.

    Args:
        fcn: Zero-argument function reading ``array`` and returning a scalar
        array: Array perturbed element by element (restored afterwards)
        step: Finite-difference step
        indices: Elements to perturb; all elements when None

    Returns:
        Array shaped like ``array``; entries not perturbed are NaN
    """
    grad = np.full(array.shape, np.nan, dtype=np.float64)
    if indices is None:
        indices = np.ndindex(*array.shape)

    for index in indices:
        original = array[index]
        array[index] = original + step
        f_plus = fcn()
        array[index] = original - step
        f_minus = fcn()
        array[index] = original
        grad[index] = (f_plus - f_minus) / (2.0 * step)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-3) -> float:
    """
    Largest elementwise relative error, ignoring NaN (unperturbed) entries.

    The scale of each entry is max(|analytic|, |numeric|, floor) so that
    vanishing gradients are compared absolutely.
    """
    mask = ~np.isnan(numeric)
    a = np.asarray(analytic, dtype=np.float64)[mask]
    n = numeric[mask]
    if a.size == 0:
        return 0.0
    scale = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
    return float(np.max(np.abs(a - n) / scale))


def sample_indices(shape: Tuple[int, ...], count: int, rng: np.random.Generator):
    """Pick up to ``count`` distinct element indices of an array shape."""
    size = int(np.prod(shape))
    flat = rng.choice(size, size=min(count, size), replace=False)
    return [np.unravel_index(int(i), shape) for i in flat]
