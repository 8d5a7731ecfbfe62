"""
Hybrid adversarial networks.

The classifier C and the generator G are the two directions of one
BidirNetwork. An ordinary discriminator D is G's adversary. Each
iteration updates C, then D, then G.
"""

import copy
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from ..layers.network import BidirNetwork, network_from_descriptor
from ..optim.adam import Adam
from ..optim.losses import gan_disc_loss, gan_gen_loss
from ..tensor import ops
from ..tensor.rng import STREAM_LATENT, Rng
from .base import TrainerBase
from .bidir import train_iteration_bp

LATENT_DISTRIBUTIONS = ("uniform", "normal")


class LatentSampler:
    """Draws latent vectors z with one entry per class."""

    def __init__(self, rng: Rng, dim: int, distribution: str = "uniform"):
        if dim <= 0:
            raise ValueError("latent dimension must be positive")
        if distribution not in LATENT_DISTRIBUTIONS:
            raise ValueError(f"unknown latent distribution '{distribution}'")
        self.rng = rng
        self.dim = dim
        self.distribution = distribution

    def sample(self, batch: int) -> np.ndarray:
        if batch <= 0:
            raise ValueError("batch must be positive")
        return ops.sample(self.rng, self.distribution, (batch, self.dim), 0.0, 1.0)


def sample_z(sampler: LatentSampler, batch: int) -> np.ndarray:
    """I.i.d. latent batch of shape (batch, dim)."""
    return sampler.sample(batch)


def make_discriminator(hybrid: BidirNetwork, rng: Rng) -> BidirNetwork:
    """
    Adversary with C's discriminative architecture, biases, and a 1-unit head.

    Only its discriminative direction is ever used; its parameters are
    disjoint from the hybrid model's.
    """
    descriptor = copy.deepcopy(hybrid.describe())
    descriptor["name"] = f"{hybrid.name}-adversary"
    descriptor["n_classes"] = 1
    for spec in descriptor["layers"]:
        if spec["type"] != "reshape":
            spec["bias"] = True
    descriptor["layers"][-1]["out"] = 1
    return network_from_descriptor(descriptor, rng)


@dataclass
class HANOptimizers:
    """One optimizer per player; C and G update the same shared weights."""

    classifier: Adam
    discriminator: Adam
    generator: Adam


def han_iteration(
    hybrid: BidirNetwork,
    discriminator: BidirNetwork,
    opts: HANOptimizers,
    x: np.ndarray,
    y: np.ndarray,
    sampler: LatentSampler,
    stats: Optional[Dict[str, float]] = None,
) -> Tuple[float, float, float]:
    """
    Update C on (x → y), then D on real x vs G(z), then G to fool D.

    When ``stats`` is given it receives D's real/fake accuracy before its update.

    Returns:
        Tuple of (classifier loss, discriminator loss, generator loss)
    """
    loss_c = train_iteration_bp(hybrid, opts.classifier, x, y)

    z = sample_z(sampler, x.shape[0])
    fake, gen_cache = hybrid.forward_gen(z, training=True)

    real_logits, real_cache = discriminator.forward_disc(x, training=True)
    fake_logits, fake_cache = discriminator.forward_disc(fake, training=True)
    loss_d, grad_real, grad_fake = gan_disc_loss(real_logits, fake_logits)
    if stats is not None:
        correct = np.count_nonzero(real_logits > 0) + np.count_nonzero(fake_logits <= 0)
        stats["d_accuracy"] = correct / (real_logits.size + fake_logits.size)
    grads_real, _ = discriminator.backward_disc(real_cache, grad_real.astype(real_logits.dtype))
    grads_fake, _ = discriminator.backward_disc(fake_cache, grad_fake.astype(fake_logits.dtype))
    grads_d = {name: grads_real[name] + grads_fake[name] for name in grads_real}
    opts.discriminator.step(discriminator.parameters(), grads_d)

    fake_logits, fake_cache = discriminator.forward_disc(fake, training=True)
    loss_g, grad_fake = gan_gen_loss(fake_logits)
    _, grad_images = discriminator.backward_disc(fake_cache, grad_fake.astype(fake_logits.dtype))
    grads_g, _ = hybrid.backward_gen(gen_cache, grad_images)
    opts.generator.step(hybrid.parameters(), grads_g)

    return loss_c, loss_d, loss_g


class HANTrainer(TrainerBase):
    """Trainer for hybrid adversarial networks under BP, BL and BL-then-BP."""

    def __init__(
        self,
        hybrid: BidirNetwork,
        discriminator: BidirNetwork,
        schedule,
        opts: HANOptimizers,
        latent: str = "uniform",
        **kwargs,
    ):
        super().__init__(hybrid, schedule, **kwargs)
        self.discriminator = discriminator
        self.opts = opts
        self.sampler = LatentSampler(self.rng.derive(STREAM_LATENT), hybrid.n_classes, latent)

    def discriminative_iteration(self, x, y):
        loss = train_iteration_bp(self.net, self.opts.classifier, x, y)
        self.metrics.add_disc_update()
        return {"loss_disc": loss}

    def bidirectional_iteration(self, x, y):
        stats: Dict[str, float] = {}
        loss_c, loss_d, loss_g = han_iteration(
            self.net, self.discriminator, self.opts, x, y, self.sampler, stats
        )
        self.metrics.add_disc_update()
        self.metrics.add_gen_update()
        self.metrics.record_loss("d_accuracy", stats["d_accuracy"])
        return {"loss_disc": loss_c, "loss_d": loss_d, "loss_g": loss_g}
