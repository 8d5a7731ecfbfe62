import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import numpy as np
from tqdm import tqdm

from ..data.dataset import Dataset, minibatches
from ..layers.network import BidirNetwork
from ..tensor.rng import STREAM_SHUFFLE, Rng
from ..utils.errors import NumericError
from ..utils.metrics import MetricsReport, MetricsTracker, TrainingMetrics
from .schedule import BestCheckpoint, Mode, Schedule

logger = logging.getLogger(__name__)

Evaluator = Callable[[BidirNetwork, int], MetricsReport]


@dataclass
class TrainResult:
    """Best checkpoint, evaluation series and loop bookkeeping of one run."""

    best: BestCheckpoint
    history: List[MetricsReport]
    metrics: TrainingMetrics


class TrainerBase:
    """
    Base class for the training regimes.

    Runs the iteration loop, dispatching each iteration to the plain
    discriminative step or to the subclass's bidirectional step according
    to the schedule, evaluating at the schedule's evaluation points and
    keeping the best-test-accuracy snapshot.
    """

    def __init__(
        self,
        net: BidirNetwork,
        schedule: Schedule,
        batch_size: int = 100,
        seed: int = 0,
        evaluator: Optional[Evaluator] = None,
        progress: bool = False,
    ):
        self.net = net
        self.schedule = schedule
        self.batch_size = batch_size
        self.rng = Rng(seed)
        self.evaluator = evaluator
        self.progress = progress
        self.metrics = MetricsTracker()
        self.history: List[MetricsReport] = []
        self.best: Optional[BestCheckpoint] = None

    def discriminative_iteration(self, x: np.ndarray, y: np.ndarray) -> Dict[str, float]:
        """One classifier update; returns named losses."""
        raise NotImplementedError("Subclasses must implement discriminative_iteration")

    def bidirectional_iteration(self, x: np.ndarray, y: np.ndarray) -> Dict[str, float]:
        """One iteration of the regime's bidirectional step; returns named losses."""
        raise NotImplementedError("Subclasses must implement bidirectional_iteration")

    def _record(self, losses: Dict[str, float], iteration: int) -> None:
        for name, value in losses.items():
            if not np.isfinite(value):
                raise NumericError(name, f"loss is {value}", iteration=iteration)
            self.metrics.record_loss(name, value)

    def _evaluate(self, iteration: int) -> None:
        if self.evaluator is None:
            self.best = BestCheckpoint.capture(self.net, None, iteration)
            return
        report = self.evaluator(self.net, iteration)
        self.history.append(report)
        if self.best is None or report.acc_test > self.best.best_test_accuracy:
            self.best = BestCheckpoint.capture(self.net, report.acc_test, iteration)

    def train(self, dataset: Dataset) -> TrainResult:
        """
        Run the full schedule over shuffled mini-batches of ``dataset``.

        Raises:
            NumericError: If any loss or gradient becomes non-finite
        """
        self.metrics.start_tracking()
        self.history = []
        self.best = None
        eval_points = set(self.schedule.eval_points())
        batches = minibatches(dataset, self.batch_size, self.rng.derive(STREAM_SHUFFLE))

        logger.info(
            "Training %s: regime %s, %d iterations, batch %d",
            self.net.name,
            self.schedule.regime.value,
            self.schedule.total_iters,
            self.batch_size,
        )
        iterations = tqdm(
            range(self.schedule.total_iters), disable=not self.progress, desc=self.net.name
        )
        for iteration in iterations:
            x, y = next(batches)
            if self.schedule.mode_at(iteration) is Mode.DISC_ONLY:
                losses = self.discriminative_iteration(x, y)
            else:
                losses = self.bidirectional_iteration(x, y)
            self._record(losses, iteration)
            self.metrics.increment_iteration()

            if iteration + 1 in eval_points:
                self._evaluate(iteration + 1)
                iterations.set_postfix(losses)

        if self.schedule.total_iters == 0:
            self._evaluate(0)

        return TrainResult(self.best, list(self.history), self.metrics.get_metrics())
