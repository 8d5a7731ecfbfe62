from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from ..utils.errors import DimensionError, NumericError


@dataclass
class AdamState:
    """Moment estimates and hyperparameters of one Adam optimizer."""

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps_hat: float = 1e-8
    t: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(
    state: AdamState, params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray]
) -> None:
    """
    Apply one bias-corrected Adam update in place to every parameter named in ``grads``.

    Args:
        state: Optimizer state; ``t`` increases by one
        params: Live parameter arrays keyed by name
        grads: Gradients for a subset of ``params``

    Raises:
        KeyError: If a gradient names an unknown parameter
        DimensionError: If a gradient's shape differs from its parameter's
        NumericError: If a gradient is not finite
    """
    for name, g in grads.items():
        if name not in params:
            raise KeyError(f"gradient for unknown parameter '{name}'")
        if g.shape != params[name].shape:
            raise DimensionError(f"{name}: gradient {g.shape} vs parameter {params[name].shape}")
        if not np.all(np.isfinite(g)):
            raise NumericError("adam_step", f"gradient of '{name}' is not finite")

    state.t += 1
    bc1 = 1.0 - state.beta1**state.t
    bc2 = 1.0 - state.beta2**state.t
    step_size = state.lr / bc1

    for name, g in grads.items():
        param = params[name]
        if name not in state.m:
            state.m[name] = np.zeros_like(param)
            state.v[name] = np.zeros_like(param)

        m, v = state.m[name], state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)

        denom = np.sqrt(v / bc2) + state.eps_hat
        param -= (step_size * m / denom).astype(param.dtype, copy=False)


class Adam:
    """Adam optimizer over a name-keyed parameter dictionary."""

    def __init__(
        self, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, eps_hat: float = 1e-8
    ):
        if lr < 0:
            raise ValueError("learning rate must be non-negative")
        self.state = AdamState(lr=lr, beta1=beta1, beta2=beta2, eps_hat=eps_hat)

    def step(self, params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray]) -> None:
        adam_step(self.state, params, grads)
