import logging

import numpy as np

from ..tensor.rng import STREAM_EVAL_NOISE, Rng
from ..utils.metrics import MetricsReport
from .attacks import AttackConfig, fgsm
from .noise import add_noise, white_noise
from .rates import accuracy, sigmoid_rate, softmax_rate

logger = logging.getLogger(__name__)


class RobustnessEvaluator:
    """
    Computes clean, noisy and adversarial accuracy plus both output rates.

    The noisy test set and the white-noise input are drawn once, at
    construction, from a fixed seed, so every evaluation point sees the
    same inputs.
    """

    def __init__(
        self,
        x_test: np.ndarray,
        y_test: np.ndarray,
        attack: AttackConfig,
        noise_fraction: float = 0.1,
        noise_mode: str = "additive",
        seed: int = 0,
        batch_size: int = 1000,
    ):
        self.x_test = x_test
        self.y_test = y_test
        self.attack = attack
        self.batch_size = batch_size

        rng = Rng(seed).derive(STREAM_EVAL_NOISE)
        self.x_noisy = add_noise(x_test, noise_fraction, rng, noise_mode)
        self.x_noise = white_noise(rng, x_test.shape).astype(x_test.dtype)

    def __call__(self, model, iteration: int) -> MetricsReport:
        x_adv = fgsm(model, self.x_test, self.y_test, self.attack, self.batch_size)
        report = MetricsReport(
            iteration=iteration,
            acc_test=accuracy(model, self.x_test, self.y_test, self.batch_size),
            acc_noisy=accuracy(model, self.x_noisy, self.y_test, self.batch_size),
            acc_adv=accuracy(model, x_adv, self.y_test, self.batch_size),
            r_sigmoid=sigmoid_rate(model, self.x_noise, self.x_test),
            r_softmax=softmax_rate(model, self.x_noise, self.x_test),
        )
        logger.info(
            "iter %d: acc_test=%.4f acc_noisy=%.4f acc_adv=%.4f r_sigmoid=%.4g r_softmax=%.4g",
            iteration,
            report.acc_test,
            report.acc_noisy,
            report.acc_adv,
            report.r_sigmoid,
            report.r_softmax,
        )
        return report
