from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np


class Regime(str, Enum):
    """Learning method of a run."""

    BP = "BP"
    BL = "BL"
    BL_THEN_BP = "BL_THEN_BP"

    @classmethod
    def parse(cls, text: str) -> "Regime":
        normalized = text.strip().upper().replace("-", "_").replace(" ", "_")
        try:
            return cls(normalized)
        except ValueError:
            valid = ", ".join(r.value for r in cls)
            raise ValueError(f"unknown regime '{text}', expected one of {valid}") from None


class Mode(str, Enum):
    DISC_ONLY = "disc_only"
    BIDIRECTIONAL = "bidirectional"


@dataclass
class Schedule:
    """Regime and iteration budget; BL_THEN_BP switches at floor(total_iters / 2)."""

    regime: Regime
    total_iters: int
    eval_every: int = 1000

    def __post_init__(self):
        self.regime = Regime(self.regime)
        if self.total_iters < 0:
            raise ValueError("total_iters must be non-negative")
        if self.eval_every <= 0:
            raise ValueError("eval_every must be positive")

    @property
    def switch_iter(self) -> int:
        return self.total_iters // 2

    def mode_at(self, iteration: int) -> Mode:
        """
        Training mode of a 0-based iteration.

        Raises:
            IndexError: If ``iteration`` is outside [0, total_iters)
        """
        if not 0 <= iteration < self.total_iters:
            raise IndexError(f"iteration {iteration} outside [0, {self.total_iters})")
        if self.regime is Regime.BP:
            return Mode.DISC_ONLY
        if self.regime is Regime.BL:
            return Mode.BIDIRECTIONAL
        return Mode.BIDIRECTIONAL if iteration < self.switch_iter else Mode.DISC_ONLY

    def eval_points(self) -> List[int]:
        """Iteration counts after which the network is evaluated."""
        if self.total_iters == 0:
            return [0]
        points = list(range(self.eval_every, self.total_iters + 1, self.eval_every))
        if not points or points[-1] != self.total_iters:
            points.append(self.total_iters)
        return points


@dataclass
class BestCheckpoint:
    """Copy of the network state at the evaluation point with the best test accuracy."""

    best_test_accuracy: Optional[float]
    iteration: int
    snapshot: Dict[str, np.ndarray] = field(default_factory=dict)
    descriptor: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def capture(cls, net, accuracy: Optional[float], iteration: int) -> "BestCheckpoint":
        state = {key: value.copy() for key, value in net.state_dict().items()}
        return cls(accuracy, iteration, state, net.describe())

    def restore(self, net) -> None:
        """Load the snapshot into ``net`` in place."""
        net.load_state_dict(self.snapshot)
