import numpy as np
import pytest

from src.experiment.presets import ArchitectureBuilder
from src.layers.network import network_from_descriptor
from src.optim.adam import Adam
from src.tensor.rng import Rng
from src.training.bidir import BidirOptimizers, BiPropTrainer
from src.training.han import (
    HANOptimizers,
    HANTrainer,
    LatentSampler,
    han_iteration,
    make_discriminator,
)
from src.training.schedule import Regime, Schedule


def small_hybrid(bias=False, seed=0):
    builder = ArchitectureBuilder((1, 8, 8), bias)
    builder.add_dense(16).add_head(10)
    descriptor = {
        "name": "han-small",
        "n_classes": 10,
        "dtype": "float32",
        "layers": builder.get_layers(),
    }
    return network_from_descriptor(descriptor, Rng(seed))


def optimizers(lr=1e-3):
    return HANOptimizers(Adam(lr=lr), Adam(lr=lr), Adam(lr=lr))


def copy_state(net):
    return {k: v.copy() for k, v in net.state_dict().items()}


class TestLatentSampler:
    def test_shape_and_range(self):
        z = LatentSampler(Rng(0), 10).sample(32)
        assert z.shape == (32, 10)
        assert np.all((z >= 0) & (z < 1))

    def test_deterministic_per_seed(self):
        a = LatentSampler(Rng(3), 10, "normal").sample(5)
        b = LatentSampler(Rng(3), 10, "normal").sample(5)
        assert np.array_equal(a, b)

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            LatentSampler(Rng(0), 0)
        with pytest.raises(ValueError):
            LatentSampler(Rng(0), 10, "cauchy")
        with pytest.raises(ValueError):
            LatentSampler(Rng(0), 10).sample(0)


class TestDiscriminator:
    def test_mirrors_classifier_with_one_output(self):
        hybrid = small_hybrid()
        adversary = make_discriminator(hybrid, Rng(1))
        assert adversary.n_classes == 1
        assert adversary.in_features == hybrid.in_features
        assert len(adversary.layers) == len(hybrid.layers)
        logits = adversary.predict(np.zeros((4, 64), dtype=np.float32))
        assert logits.shape == (4, 1)

    def test_always_has_biases(self):
        adversary = make_discriminator(small_hybrid(bias=False), Rng(1))
        assert all(spec["bias"] for spec in adversary.describe()["layers"])

    def test_parameters_are_disjoint(self):
        hybrid = small_hybrid()
        adversary = make_discriminator(hybrid, Rng(1))
        for theirs in adversary.parameters().values():
            for ours in hybrid.parameters().values():
                assert not np.shares_memory(theirs, ours)


class TestHANIteration:
    def test_losses_are_finite(self, template_dataset):
        hybrid = small_hybrid()
        adversary = make_discriminator(hybrid, Rng(1))
        x, y = template_dataset.images[:32], template_dataset.labels[:32]
        stats = {}
        losses = han_iteration(
            hybrid, adversary, optimizers(), x, y, LatentSampler(Rng(2), 10), stats
        )
        assert len(losses) == 3
        assert all(np.isfinite(loss) for loss in losses)
        assert 0.0 <= stats["d_accuracy"] <= 1.0

    def test_zero_learning_rate_changes_nothing(self, template_dataset):
        hybrid = small_hybrid()
        adversary = make_discriminator(hybrid, Rng(1))
        before_hybrid, before_adversary = copy_state(hybrid), copy_state(adversary)
        x, y = template_dataset.images[:32], template_dataset.labels[:32]
        han_iteration(hybrid, adversary, optimizers(lr=0.0), x, y, LatentSampler(Rng(2), 10))
        for key, value in hybrid.state_dict().items():
            assert np.array_equal(value, before_hybrid[key])
        for key, value in adversary.state_dict().items():
            assert np.array_equal(value, before_adversary[key])

    def test_updates_every_player(self, template_dataset):
        hybrid = small_hybrid(bias=True)
        adversary = make_discriminator(hybrid, Rng(1))
        before_hybrid, before_adversary = copy_state(hybrid), copy_state(adversary)
        opts = optimizers()
        x, y = template_dataset.images[:32], template_dataset.labels[:32]
        han_iteration(hybrid, adversary, opts, x, y, LatentSampler(Rng(2), 10))
        assert opts.classifier.state.t == opts.discriminator.state.t == opts.generator.state.t == 1
        assert not np.array_equal(hybrid.state_dict()["0.W"], before_hybrid["0.W"])
        assert not np.array_equal(hybrid.state_dict()["0.b_gen"], before_hybrid["0.b_gen"])
        assert not np.array_equal(adversary.state_dict()["0.W"], before_adversary["0.W"])


class TestHANTrainer:
    def make_trainer(self, regime, iters, seed=0):
        hybrid = small_hybrid(seed=seed)
        return HANTrainer(
            hybrid,
            make_discriminator(hybrid, Rng(seed + 100)),
            Schedule(regime, iters, 10),
            optimizers(),
            batch_size=50,
            seed=seed,
        )

    def test_update_counts_and_series(self, template_dataset):
        result = self.make_trainer(Regime.BL_THEN_BP, 20).train(template_dataset)
        assert result.metrics.gen_updates == 10
        assert result.metrics.disc_updates == 20
        assert len(result.metrics.losses["loss_d"]) == 10
        assert len(result.metrics.losses["d_accuracy"]) == 10
        assert len(result.metrics.losses["loss_disc"]) == 20

    def test_deterministic(self, template_dataset):
        a = self.make_trainer(Regime.BL, 8, seed=4).train(template_dataset)
        b = self.make_trainer(Regime.BL, 8, seed=4).train(template_dataset)
        assert a.metrics.losses == b.metrics.losses

    def test_frozen_adversary_and_generator_match_bp(self, template_dataset):
        han_net = small_hybrid(seed=2)
        han = HANTrainer(
            han_net,
            make_discriminator(han_net, Rng(102)),
            Schedule(Regime.BL, 30, 10),
            HANOptimizers(Adam(lr=1e-3), Adam(lr=0.0), Adam(lr=0.0)),
            batch_size=50,
            seed=2,
        )
        bp = BiPropTrainer(
            small_hybrid(seed=2),
            Schedule(Regime.BP, 30, 10),
            BidirOptimizers(Adam(lr=1e-3), Adam()),
            batch_size=50,
            seed=2,
        )
        han_losses = han.train(template_dataset).metrics.losses["loss_disc"]
        bp_losses = bp.train(template_dataset).metrics.losses["loss_disc"]
        assert len(han_losses) == 30
        assert han_losses == bp_losses

    def test_bp_regime_leaves_adversary_untouched(self, template_dataset):
        trainer = self.make_trainer(Regime.BP, 20)
        before = copy_state(trainer.discriminator)
        result = trainer.train(template_dataset)
        assert result.metrics.gen_updates == 0
        assert "loss_d" not in result.metrics.losses
        for name, value in trainer.discriminator.state_dict().items():
            assert np.array_equal(value, before[name]), name
