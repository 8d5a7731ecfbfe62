import time
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

METRIC_COLUMNS = ("iteration", "acc_test", "acc_noisy", "acc_adv", "sigmoid_rate", "softmax_rate")


@dataclass
class MetricsReport:
    """Robustness metrics of one evaluation point."""

    iteration: int
    acc_test: float
    acc_noisy: float
    acc_adv: float
    r_sigmoid: float
    r_softmax: float

    def __post_init__(self):
        for name in ("acc_test", "acc_noisy", "acc_adv"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if self.r_sigmoid < 0 or self.r_softmax < 0:
            raise ValueError("rates must be non-negative")

    def to_dict(self) -> Dict[str, Any]:
        """Convert the report to a dictionary keyed by CSV column name."""
        return {
            "iteration": self.iteration,
            "acc_test": self.acc_test,
            "acc_noisy": self.acc_noisy,
            "acc_adv": self.acc_adv,
            "sigmoid_rate": self.r_sigmoid,
            "softmax_rate": self.r_softmax,
        }


@dataclass
class TrainingMetrics:
    """Snapshot of a training loop's bookkeeping."""

    execution_time: float
    iterations: int
    disc_updates: int
    gen_updates: int
    losses: Dict[str, List[float]] = field(default_factory=dict)


class MetricsTracker:
    """Tracks update counts and per-iteration loss series of a training loop."""

    def __init__(self):
        self.start_time: Optional[float] = None
        self.iterations = 0
        self.disc_updates = 0
        self.gen_updates = 0
        self.losses: Dict[str, List[float]] = defaultdict(list)

    def start_tracking(self) -> None:
        """Reset counters and start the clock."""
        self.start_time = time.time()
        self.iterations = 0
        self.disc_updates = 0
        self.gen_updates = 0
        self.losses.clear()

    def increment_iteration(self) -> None:
        self.iterations += 1

    def add_disc_update(self) -> None:
        self.disc_updates += 1

    def add_gen_update(self) -> None:
        self.gen_updates += 1

    def record_loss(self, name: str, value: float) -> None:
        """Append one loss value to the named series."""
        self.losses[name].append(float(value))

    def get_metrics(self) -> TrainingMetrics:
        """Get current metrics."""
        if self.start_time is None:
            raise RuntimeError("Metrics tracking not started")

        return TrainingMetrics(
            execution_time=time.time() - self.start_time,
            iterations=self.iterations,
            disc_updates=self.disc_updates,
            gen_updates=self.gen_updates,
            losses={name: list(values) for name, values in self.losses.items()},
        )
