import math

import numpy as np
import pytest

from src.optim.adam import Adam, AdamState, adam_step
from src.optim.losses import (
    gan_disc_loss,
    gan_gen_loss,
    mse,
    sigmoid_cross_entropy,
    softmax_cross_entropy,
)
from src.utils.errors import DimensionError, NumericError
from src.utils.gradcheck import numerical_gradient, relative_error


class TestLosses:
    def test_uniform_logits_give_log_classes(self):
        loss, _ = softmax_cross_entropy(np.zeros((3, 10)), np.eye(10)[[0, 4, 9]])
        assert loss == pytest.approx(math.log(10), abs=1e-12)

    def test_large_margin_drives_loss_to_zero(self):
        logits = np.array([[100.0, 0.0, 0.0]])
        loss, grad = softmax_cross_entropy(logits, np.array([[1.0, 0.0, 0.0]]))
        assert loss < 1e-30
        assert np.all(np.abs(grad) < 1e-30)

    def test_softmax_cross_entropy_finite_differences(self):
        rng = np.random.default_rng(3)
        logits = rng.normal(size=(3, 4))
        labels = np.eye(4)[[1, 3, 0]]
        _, grad = softmax_cross_entropy(logits, labels)
        numeric = numerical_gradient(lambda: softmax_cross_entropy(logits, labels)[0], logits)
        assert relative_error(grad, numeric, floor=1e-6) < 1e-5

    def test_non_one_hot_labels_rejected(self):
        with pytest.raises(ValueError):
            softmax_cross_entropy(np.zeros((1, 3)), np.array([[0.5, 0.5, 0.0]]))

    def test_sigmoid_cross_entropy_symmetric_case(self):
        loss, _ = sigmoid_cross_entropy(np.zeros((2, 3)), np.full((2, 3), 0.5))
        assert loss == pytest.approx(math.log(2), abs=1e-12)

    def test_sigmoid_cross_entropy_stationary_at_targets(self):
        logits = np.array([[-2.0, 0.3, 4.0]])
        targets = 1.0 / (1.0 + np.exp(-logits))
        _, grad = sigmoid_cross_entropy(logits, targets)
        assert np.allclose(grad, 0.0, atol=1e-12)

    def test_sigmoid_cross_entropy_finite_differences(self):
        rng = np.random.default_rng(4)
        logits = rng.normal(size=(3, 5))
        targets = rng.random((3, 5))
        _, grad = sigmoid_cross_entropy(logits, targets)
        numeric = numerical_gradient(lambda: sigmoid_cross_entropy(logits, targets)[0], logits)
        assert relative_error(grad, numeric, floor=1e-6) < 1e-5

    def test_sigmoid_cross_entropy_rejects_targets_outside_unit_interval(self):
        with pytest.raises(ValueError):
            sigmoid_cross_entropy(np.zeros((1, 2)), np.array([[0.0, 1.5]]))

    def test_losses_are_non_negative(self):
        rng = np.random.default_rng(5)
        logits = rng.normal(0, 5, size=(8, 10))
        assert softmax_cross_entropy(logits, np.eye(10)[rng.integers(0, 10, 8)])[0] >= 0
        assert sigmoid_cross_entropy(logits, rng.random((8, 10)))[0] >= 0

    def test_mse(self):
        loss, grad = mse(np.array([[1.0, 3.0]]), np.array([[0.0, 1.0]]))
        assert loss == 2.5
        assert np.array_equal(grad, np.array([[1.0, 2.0]]))

    def test_gan_losses_at_indifferent_discriminator(self):
        loss, grad_real, grad_fake = gan_disc_loss(np.zeros((4, 1)), np.zeros((4, 1)))
        assert loss == pytest.approx(2 * math.log(2))
        assert np.allclose(grad_real, -0.5 / 4)
        assert np.allclose(grad_fake, 0.5 / 4)
        loss_g, grad_g = gan_gen_loss(np.zeros((4, 1)))
        assert loss_g == pytest.approx(math.log(2))
        assert np.all(grad_g < 0)


class TestAdam:
    def test_first_step_closed_form(self):
        params = {"w": np.array([0.0])}
        adam_step(AdamState(lr=1e-3, eps_hat=1e-8), params, {"w": np.array([1.0])})
        assert abs(params["w"][0] - (-1e-3 / (1.0 + 1e-8))) < 1e-12

    def test_first_step_is_sign_symmetric(self):
        up, down = {"w": np.array([0.0])}, {"w": np.array([0.0])}
        adam_step(AdamState(), up, {"w": np.array([0.37])})
        adam_step(AdamState(), down, {"w": np.array([-0.37])})
        assert up["w"][0] == -down["w"][0]

    def test_zero_gradient_leaves_parameters_unchanged(self):
        params = {"w": np.array([1.0, -2.0])}
        state = AdamState()
        for _ in range(5):
            adam_step(state, params, {"w": np.zeros(2)})
        assert np.array_equal(params["w"], np.array([1.0, -2.0]))
        assert state.t == 5
        assert np.all(np.isfinite(state.m["w"])) and np.all(np.isfinite(state.v["w"]))

    def test_deterministic(self):
        results = []
        for _ in range(2):
            params = {"w": np.array([0.5, 0.5])}
            state = AdamState()
            for g in ([0.1, -0.2], [0.3, 0.0], [-1.0, 2.0]):
                adam_step(state, params, {"w": np.array(g)})
            results.append(params["w"].copy())
        assert np.array_equal(results[0], results[1])

    def test_updates_only_named_parameters(self):
        params = {"a": np.array([1.0]), "b": np.array([1.0])}
        Adam().step(params, {"a": np.array([1.0])})
        assert params["a"][0] < 1.0
        assert params["b"][0] == 1.0

    def test_errors(self):
        params = {"w": np.zeros(2)}
        with pytest.raises(DimensionError):
            adam_step(AdamState(), params, {"w": np.zeros(3)})
        with pytest.raises(KeyError):
            adam_step(AdamState(), params, {"v": np.zeros(2)})
        with pytest.raises(NumericError):
            adam_step(AdamState(), params, {"w": np.array([np.nan, 0.0])})
        with pytest.raises(ValueError):
            Adam(lr=-1.0)

    def test_parameters_update_in_place(self):
        weights = np.zeros(3, dtype=np.float32)
        Adam().step({"w": weights}, {"w": np.ones(3, dtype=np.float32)})
        assert weights.dtype == np.float32
        assert np.all(weights < 0)
