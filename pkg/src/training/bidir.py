"""Bidirectional propagation of errors: classifier and class-conditioned generator share W."""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..layers.network import BidirNetwork
from ..optim.adam import Adam
from ..optim.losses import mse, sigmoid_cross_entropy, softmax_cross_entropy
from .base import TrainerBase

GENERATOR_LOSSES = ("sigmoid_ce", "mse")


@dataclass
class BidirOptimizers:
    """Separate optimizer states for discriminative and generative updates."""

    disc: Adam
    gen: Adam


def train_iteration_bp(net: BidirNetwork, optimizer, x: np.ndarray, y: np.ndarray) -> float:
    """One discriminative forward/backward/update on (x → y); returns the loss."""
    logits, cache = net.forward_disc(x, training=True)
    loss, grad = softmax_cross_entropy(logits, y.astype(logits.dtype))
    grads, _ = net.backward_disc(cache, grad)
    optimizer.step(net.parameters(), grads)
    return loss


def generative_update(
    net: BidirNetwork, optimizer, x: np.ndarray, y: np.ndarray, loss_kind: str = "sigmoid_ce"
) -> float:
    """One generative update mapping the one-hot labels y back to the images x."""
    images, cache = net.forward_gen(y, training=True)
    targets = x.astype(images.dtype)
    if loss_kind == "sigmoid_ce":
        loss, grad = sigmoid_cross_entropy(cache.logits, targets)
        grads, _ = net.backward_gen(cache, grad, from_logits=True)
    elif loss_kind == "mse":
        loss, grad = mse(images, targets)
        grads, _ = net.backward_gen(cache, grad)
    else:
        raise ValueError(f"unknown generator loss '{loss_kind}', expected {GENERATOR_LOSSES}")
    optimizer.step(net.parameters(), grads)
    return loss


def train_iteration_bl(
    net: BidirNetwork,
    opts: BidirOptimizers,
    x: np.ndarray,
    y: np.ndarray,
    generator_loss: str = "sigmoid_ce",
    gen_first: bool = False,
) -> Tuple[float, float]:
    """
    One bidirectional iteration on the same batch: disc update, then gen update.

    Returns:
        Tuple of (discriminative loss, generative loss)
    """
    if gen_first:
        loss_gen = generative_update(net, opts.gen, x, y, generator_loss)
        loss_disc = train_iteration_bp(net, opts.disc, x, y)
    else:
        loss_disc = train_iteration_bp(net, opts.disc, x, y)
        loss_gen = generative_update(net, opts.gen, x, y, generator_loss)
    return loss_disc, loss_gen


class BiPropTrainer(TrainerBase):
    """Trainer for BP, BL and BL-then-BP with bidirectional propagation of errors."""

    def __init__(
        self,
        net: BidirNetwork,
        schedule,
        opts: BidirOptimizers,
        generator_loss: str = "sigmoid_ce",
        gen_first: bool = False,
        **kwargs,
    ):
        super().__init__(net, schedule, **kwargs)
        if generator_loss not in GENERATOR_LOSSES:
            raise ValueError(f"unknown generator loss '{generator_loss}'")
        self.opts = opts
        self.generator_loss = generator_loss
        self.gen_first = gen_first

    def discriminative_iteration(self, x, y):
        loss = train_iteration_bp(self.net, self.opts.disc, x, y)
        self.metrics.add_disc_update()
        return {"loss_disc": loss}

    def bidirectional_iteration(self, x, y):
        loss_disc, loss_gen = train_iteration_bl(
            self.net, self.opts, x, y, self.generator_loss, self.gen_first
        )
        self.metrics.add_disc_update()
        self.metrics.add_gen_update()
        return {"loss_disc": loss_disc, "loss_gen": loss_gen}
