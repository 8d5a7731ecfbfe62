import numpy as np
import pytest

from src.layers.activations import Activation
from src.layers.dense import SharedDenseLayer
from src.layers.network import BidirNetwork
from src.optim.adam import Adam
from src.robustness.rates import accuracy
from src.tensor.rng import Rng
from src.training.bidir import (
    BiPropTrainer,
    BidirOptimizers,
    generative_update,
    train_iteration_bl,
    train_iteration_bp,
)
from src.training.schedule import BestCheckpoint, Mode, Regime, Schedule
from src.utils.errors import NumericError
from src.utils.metrics import MetricsReport


def linear_net(seed=0, features=64):
    layer = SharedDenseLayer(
        features,
        10,
        bias=True,
        act_disc=Activation("identity"),
        act_gen=Activation("sigmoid"),
        rng=Rng(seed),
    )
    return BidirNetwork([layer], 10, name="linear")


def accuracy_evaluator(testset):
    def evaluate(net, iteration):
        acc = accuracy(net, testset.images, testset.labels)
        return MetricsReport(iteration, acc, acc, acc, 0.0, 0.0)

    return evaluate


def scripted_evaluator(accuracies):
    values = iter(accuracies)

    def evaluate(net, iteration):
        acc = next(values)
        return MetricsReport(iteration, acc, acc, acc, 0.0, 0.0)

    return evaluate


class RecordingAdam:
    """Adam that logs its name on every step."""

    def __init__(self, name, calls, lr=1e-2):
        self.name = name
        self.calls = calls
        self.inner = Adam(lr=lr)

    def step(self, params, grads):
        self.calls.append(self.name)
        self.inner.step(params, grads)


def make_trainer(regime, iters, seed=0, evaluator=None, eval_every=10, lr=1e-2, net=None):
    net = net or linear_net(seed)
    opts = BidirOptimizers(Adam(lr=lr), Adam(lr=lr))
    return BiPropTrainer(
        net,
        Schedule(regime, iters, eval_every),
        opts,
        batch_size=50,
        seed=seed,
        evaluator=evaluator,
    )


class TestSchedule:
    def test_regime_parse(self):
        assert Regime.parse("bl-then-bp") is Regime.BL_THEN_BP
        assert Regime.parse(" bp ") is Regime.BP
        with pytest.raises(ValueError):
            Regime.parse("GAN")

    def test_modes(self):
        assert Schedule(Regime.BP, 10).mode_at(3) is Mode.DISC_ONLY
        assert Schedule(Regime.BL, 10).mode_at(9) is Mode.BIDIRECTIONAL

    def test_bl_then_bp_switches_at_half(self):
        schedule = Schedule(Regime.BL_THEN_BP, 7)
        modes = [schedule.mode_at(i) for i in range(7)]
        assert modes[:3] == [Mode.BIDIRECTIONAL] * 3
        assert modes[3:] == [Mode.DISC_ONLY] * 4

    def test_switch_boundary_at_full_scale(self):
        schedule = Schedule(Regime.BL_THEN_BP, 50_000)
        assert schedule.mode_at(24_999) is Mode.BIDIRECTIONAL
        assert schedule.mode_at(25_000) is Mode.DISC_ONLY

    def test_mode_outside_range(self):
        with pytest.raises(IndexError):
            Schedule(Regime.BP, 5).mode_at(5)

    def test_eval_points(self):
        assert Schedule(Regime.BP, 3000, 1000).eval_points() == [1000, 2000, 3000]
        assert Schedule(Regime.BP, 2500, 1000).eval_points() == [1000, 2000, 2500]
        assert Schedule(Regime.BP, 10, 1000).eval_points() == [10]
        assert Schedule(Regime.BP, 0, 1000).eval_points() == [0]

    def test_invalid_schedule(self):
        with pytest.raises(ValueError):
            Schedule(Regime.BP, -1)
        with pytest.raises(ValueError):
            Schedule(Regime.BP, 10, 0)


class TestBestCheckpoint:
    def test_snapshot_is_a_copy(self):
        net = linear_net()
        best = BestCheckpoint.capture(net, 0.5, 10)
        original = net.parameters()["0.W"].copy()
        net.parameters()["0.W"][...] = 0
        best.restore(net)
        assert np.array_equal(net.parameters()["0.W"], original)
        assert best.descriptor == net.describe()


class TestBiPropTrainer:
    def test_bp_learns_templates(self, template_dataset, template_testset):
        trainer = make_trainer(
            Regime.BP, 300, evaluator=accuracy_evaluator(template_testset), eval_every=100
        )
        result = trainer.train(template_dataset)
        assert [r.iteration for r in result.history] == [100, 200, 300]
        assert result.best.best_test_accuracy >= 0.9
        assert result.metrics.disc_updates == 300
        assert result.metrics.gen_updates == 0

    def test_bl_learns_templates(self, template_dataset, template_testset):
        trainer = make_trainer(
            Regime.BL, 300, evaluator=accuracy_evaluator(template_testset), eval_every=100
        )
        result = trainer.train(template_dataset)
        assert result.best.best_test_accuracy >= 0.9
        assert result.metrics.disc_updates == 300
        assert result.metrics.gen_updates == 300
        assert len(result.metrics.losses["loss_gen"]) == 300

    def test_bl_then_bp_update_counts(self, template_dataset):
        result = make_trainer(Regime.BL_THEN_BP, 21).train(template_dataset)
        assert result.metrics.iterations == 21
        assert result.metrics.gen_updates == 10
        assert result.metrics.disc_updates == 21

    def test_best_checkpoint_keeps_first_maximum(self, template_dataset):
        evaluator = scripted_evaluator([0.5, 0.9, 0.9, 0.7])
        result = make_trainer(Regime.BP, 40, evaluator=evaluator).train(template_dataset)
        assert result.best.iteration == 20
        assert result.best.best_test_accuracy == 0.9
        assert len(result.history) == 4

    def test_zero_iterations_evaluates_initial_network(self, template_dataset):
        result = make_trainer(
            Regime.BP, 0, evaluator=scripted_evaluator([0.1])
        ).train(template_dataset)
        assert result.best.iteration == 0
        assert [r.iteration for r in result.history] == [0]

    def test_deterministic(self, template_dataset):
        runs = [make_trainer(Regime.BL, 30, seed=7).train(template_dataset) for _ in range(2)]
        assert runs[0].metrics.losses == runs[1].metrics.losses
        first, second = runs[0].best.snapshot, runs[1].best.snapshot
        assert all(np.array_equal(first[k], second[k]) for k in first)

    def test_different_seeds_differ(self, template_dataset):
        a = make_trainer(Regime.BP, 5, seed=1).train(template_dataset)
        b = make_trainer(Regime.BP, 5, seed=2).train(template_dataset)
        assert a.metrics.losses != b.metrics.losses

    def test_non_finite_weights_raise(self, template_dataset):
        net = linear_net()
        net.parameters()["0.W"][0, 0] = np.nan
        with pytest.raises(NumericError):
            make_trainer(Regime.BP, 3, net=net).train(template_dataset)

    def test_generative_update_reduces_reconstruction_loss(self, template_dataset):
        net = linear_net()
        opt = Adam(lr=1e-2)
        x, y = template_dataset.images[:100], template_dataset.labels[:100]
        first = generative_update(net, opt, x, y)
        for _ in range(50):
            last = generative_update(net, opt, x, y)
        assert last < first

    def test_unknown_generator_loss(self):
        with pytest.raises(ValueError):
            BiPropTrainer(
                linear_net(),
                Schedule(Regime.BL, 1),
                BidirOptimizers(Adam(), Adam()),
                generator_loss="hinge",
            )


class TestIterations:
    def test_bp_loss_trends_down(self, template_dataset):
        net = linear_net()
        opt = Adam()
        x, y = template_dataset.images[:50], template_dataset.labels[:50]
        losses = np.array([train_iteration_bp(net, opt, x, y) for _ in range(200)])
        window = 10
        moving = np.convolve(losses, np.ones(window) / window, mode="valid")
        assert np.mean(np.diff(moving) < 0) >= 0.9

    def test_zero_learning_rate(self, template_dataset):
        net = linear_net()
        before = {k: v.copy() for k, v in net.state_dict().items()}
        x, y = template_dataset.images[:50], template_dataset.labels[:50]
        train_iteration_bl(net, BidirOptimizers(Adam(lr=0.0), Adam(lr=0.0)), x, y)
        assert all(np.array_equal(before[k], v) for k, v in net.state_dict().items())

    def test_gen_first_changes_order(self, template_dataset):
        x, y = template_dataset.images[:50], template_dataset.labels[:50]
        results = []
        for gen_first in (False, True):
            net = linear_net()
            opts = BidirOptimizers(Adam(lr=1e-2), Adam(lr=1e-2))
            results.append(train_iteration_bl(net, opts, x, y, gen_first=gen_first))
        assert results[0][0] != results[1][0]

    @pytest.mark.parametrize(
        "gen_first, order", [(False, ["disc", "gen"]), (True, ["gen", "disc"])]
    )
    def test_bl_update_order(self, template_dataset, gen_first, order):
        x, y = template_dataset.images[:50], template_dataset.labels[:50]
        calls = []
        opts = BidirOptimizers(RecordingAdam("disc", calls), RecordingAdam("gen", calls))
        train_iteration_bl(linear_net(), opts, x, y, gen_first=gen_first)
        assert calls == order

    def test_generated_images_resemble_class_means(self, template_dataset):
        net = linear_net()
        make_trainer(Regime.BL, 300, net=net).train(template_dataset)
        generated = net.generate(np.eye(10, dtype=np.float32))
        labels = np.argmax(template_dataset.labels, axis=1)
        for k in range(10):
            mean = template_dataset.images[labels == k].mean(axis=0)
            r = np.corrcoef(generated[k], mean)[0, 1]
            assert r > 0.3, f"class {k}: r = {r:.3f}"
