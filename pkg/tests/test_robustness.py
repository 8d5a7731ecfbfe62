import numpy as np
import pytest

from src.layers.activations import Activation
from src.layers.dense import SharedDenseLayer
from src.layers.network import BidirNetwork
from src.robustness.attacks import AttackConfig, fgsm, loss_input_gradient
from src.robustness.evaluator import RobustnessEvaluator
from src.robustness.noise import add_noise, white_noise
from src.robustness.rates import accuracy, head_outputs, sigmoid_rate, softmax_rate
from src.tensor.rng import Rng
from src.utils.errors import NumericError


def dense_model(in_features, n_classes, seed=0, dtype=np.float32, hidden=None):
    rng = Rng(seed)
    sizes = [in_features] + ([hidden] if hidden else []) + [n_classes]
    layers = []
    for i, (n_in, n_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        last = i == len(sizes) - 2
        layers.append(
            SharedDenseLayer(
                n_in,
                n_out,
                act_disc=Activation("identity" if last else "relu"),
                act_gen=Activation("sigmoid" if i == 0 else "relu"),
                rng=rng,
                dtype=dtype,
            )
        )
    return BidirNetwork(layers, n_classes, name="dense")


def fixed_model(weights, bias=None):
    """Linear classifier with the given (classes, features) weight matrix."""
    weights = np.asarray(weights, dtype=np.float64)
    layer = SharedDenseLayer(
        weights.shape[1],
        weights.shape[0],
        bias=bias is not None,
        act_disc=Activation("identity"),
        act_gen=Activation("sigmoid"),
        dtype=np.float64,
    )
    layer.params["W"][...] = weights
    if bias is not None:
        layer.params["b_disc"][...] = bias
    return BidirNetwork([layer], weights.shape[0])


class TestFGSM:
    @pytest.mark.parametrize("seed", range(10))
    def test_budget_and_pixel_range(self, seed):
        rng = np.random.default_rng(seed)
        model = dense_model(20, 5, seed=seed, hidden=8)
        x = rng.random((100, 20)).astype(np.float32)
        y = np.eye(5, dtype=np.float32)[rng.integers(0, 5, 100)]
        epsilon = float(rng.uniform(0.01, 0.5))
        x_adv = fgsm(model, x, y, AttackConfig(epsilon), batch_size=30)
        assert x_adv.shape == x.shape and x_adv.dtype == x.dtype
        assert np.max(np.abs(x_adv - x)) <= epsilon + 1e-6
        assert np.all((x_adv >= 0) & (x_adv <= 1))

    def test_zero_epsilon_is_identity(self):
        model = dense_model(6, 3)
        x = np.random.default_rng(0).random((4, 6)).astype(np.float32)
        y = np.eye(3, dtype=np.float32)[[0, 1, 2, 0]]
        assert np.array_equal(fgsm(model, x, y, AttackConfig(0.0)), x)

    def test_scalar_example(self):
        # logits (x, -x); with label 1 the loss falls as x falls, so the step is +epsilon
        model = fixed_model([[1.0], [-1.0]])
        x_adv = fgsm(model, np.array([[0.5]]), np.array([[0.0, 1.0]]), AttackConfig(0.3))
        assert x_adv[0, 0] == pytest.approx(0.8)

    def test_clips_to_pixel_range(self):
        model = fixed_model([[1.0], [-1.0]])
        x_adv = fgsm(model, np.array([[0.9]]), np.array([[0.0, 1.0]]), AttackConfig(0.3))
        assert x_adv[0, 0] == 1.0

    def test_input_gradient_requires_backward(self):
        with pytest.raises(TypeError):
            loss_input_gradient(object(), np.zeros((1, 2)), np.eye(2)[:1])

    def test_negative_epsilon_rejected(self):
        with pytest.raises(ValueError):
            AttackConfig(-0.1)
        assert AttackConfig.for_dataset("mnist").epsilon == 0.3
        assert AttackConfig.for_dataset("cifar10").epsilon == 0.03


class TestNoise:
    def test_white_noise_is_seeded_uniform(self):
        a = white_noise(Rng(5), (100, 10))
        b = white_noise(Rng(5), (100, 10))
        assert np.array_equal(a, b)
        assert np.all((a >= 0) & (a < 1))

    def test_additive_noise_bounded(self):
        x = np.random.default_rng(0).random((50, 10)).astype(np.float32)
        noisy = add_noise(x, 0.1, Rng(1))
        assert noisy.dtype == np.float32
        assert np.all(noisy >= x - 1e-7)
        assert np.all(noisy - x <= 0.1 + 1e-6)
        assert np.all(noisy <= 1.0)

    def test_blend_noise(self):
        x = np.ones((4, 4), dtype=np.float32)
        noisy = add_noise(x, 0.5, Rng(1), mode="blend")
        assert np.all((noisy >= 0.5 - 1e-6) & (noisy <= 1.0))

    def test_zero_fraction_copies(self):
        x = np.full((2, 3), 0.25)
        noisy = add_noise(x, 0.0, Rng(0))
        assert np.array_equal(noisy, x) and noisy is not x

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            add_noise(np.zeros((1, 1)), -0.1, Rng(0))
        with pytest.raises(ValueError):
            add_noise(np.zeros((1, 1)), 0.1, Rng(0), mode="salt")


class TestRates:
    def test_accuracy_ties_break_to_lowest_index(self):
        model = fixed_model(np.zeros((3, 2)))
        x = np.zeros((3, 2))
        y = np.eye(3)
        assert accuracy(model, x, y) == pytest.approx(1 / 3)

    def test_accuracy_of_empty_set(self):
        with pytest.raises(ValueError):
            accuracy(fixed_model(np.eye(2)), np.zeros((0, 2)), np.zeros((0, 2)))

    def test_rates_of_constant_logits(self):
        model = fixed_model(np.zeros((10, 4)))
        x = np.random.default_rng(0).random((5, 4))
        assert sigmoid_rate(model, x, x) == pytest.approx(1.0)
        assert softmax_rate(model, x, x) == pytest.approx(1.0)
        assert head_outputs(model, x, "softmax") == pytest.approx(np.full((5, 10), 0.1))

    def test_rate_compares_noise_to_data(self):
        # one logit equal to the first pixel
        model = fixed_model([[4.0, 0.0], [0.0, 0.0]])
        x_test = np.array([[1.0, 0.0]])
        x_noise = np.array([[0.0, 0.0]])
        expected = 0.5 / (1.0 / (1.0 + np.exp(-4.0)))
        assert sigmoid_rate(model, x_noise, x_test) == pytest.approx(expected)
        assert softmax_rate(model, x_noise, x_test) < 1.0

    def test_rates_need_matching_shapes(self):
        model = fixed_model(np.eye(2))
        with pytest.raises(ValueError):
            sigmoid_rate(model, np.zeros((2, 2)), np.zeros((3, 2)))
        with pytest.raises(ValueError):
            head_outputs(model, np.zeros((1, 2)), "tanh")

    def test_rate_with_saturated_test_outputs(self):
        # sigmoid(-1000) underflows to exactly zero
        model = fixed_model([[-1000.0]])
        with pytest.raises(NumericError):
            sigmoid_rate(model, np.array([[0.0]]), np.array([[1.0]]))


class TestRobustnessEvaluator:
    def test_report(self, template_testset):
        model = dense_model(64, 10, seed=1)
        evaluator = RobustnessEvaluator(
            template_testset.images, template_testset.labels, AttackConfig(0.1), seed=3
        )
        report = evaluator(model, 100)
        assert report.iteration == 100
        assert report.acc_test == accuracy(model, template_testset.images, template_testset.labels)
        assert report.r_sigmoid >= 0 and report.r_softmax >= 0
        assert 0 <= report.acc_adv <= 1

    def test_noise_inputs_fixed_by_seed(self, template_testset):
        def make(seed):
            return RobustnessEvaluator(
                template_testset.images, template_testset.labels, AttackConfig(0.1), seed=seed
            )

        assert np.array_equal(make(3).x_noise, make(3).x_noise)
        assert np.array_equal(make(3).x_noisy, make(3).x_noisy)
        assert not np.array_equal(make(3).x_noise, make(4).x_noise)
        assert make(3).x_noise.dtype == template_testset.images.dtype
