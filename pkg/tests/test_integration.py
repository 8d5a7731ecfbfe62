"""
End-to-end runs on the real MNIST files.

Skipped unless $BIDIR_DATA_ROOT points at a directory holding ``mnist/``
with the four standard IDX files.
"""

import os

import pytest

from src.data.dataset import DATA_ROOT_ENV
from src.data.mnist import mnist_paths
from src.experiment import runner
from src.experiment.config import ExperimentConfig


def _mnist_root():
    root = os.environ.get(DATA_ROOT_ENV)
    if not root:
        return None
    paths = mnist_paths(root, "train") + mnist_paths(root, "test")
    return root if all(os.path.exists(path) for path in paths) else None


MNIST_ROOT = _mnist_root()

pytestmark = [
    pytest.mark.integration,
    pytest.mark.slow,
    pytest.mark.skipif(MNIST_ROOT is None, reason=f"set {DATA_ROOT_ENV} to a directory with MNIST"),
]


def run_preset(tmp_path, preset, regime, **overrides):
    config = ExperimentConfig(
        preset=preset,
        bias=False,
        regime=regime,
        data_root=MNIST_ROOT,
        output_dir=str(tmp_path),
        progress=False,
        dump_count=0,
        **overrides,
    )
    return runner.run(config.validate())


@pytest.mark.timeout(3600)
def test_linear_backprop(tmp_path):
    final = run_preset(tmp_path, "nn-none", "BP").final
    assert 0.90 <= final.acc_test <= 0.94
    assert final.acc_adv <= 0.10


@pytest.mark.timeout(3600)
def test_linear_bidirectional(tmp_path):
    final = run_preset(tmp_path, "nn-none", "BL").final
    assert abs(final.acc_test - 0.8781) <= 0.03
    assert final.acc_adv >= 0.45
    assert final.r_sigmoid <= 0.01
    assert final.r_softmax == pytest.approx(1.0, abs=0.05)


@pytest.mark.timeout(3600)
def test_hidden_16_bidirectional_rates(tmp_path):
    final = run_preset(tmp_path, "nn-1x16", "BL").final
    assert abs(final.r_softmax - 0.1) <= 0.05
    assert abs(final.r_sigmoid - 0.5) <= 0.1


@pytest.mark.timeout(3600)
def test_metrics_csv_is_reproducible(tmp_path):
    contents = []
    for name in ("first", "second"):
        result = run_preset(tmp_path / name, "nn-none", "BP", total_iters=2000)
        with open(os.path.join(result.run_dir, runner.METRICS_FILE), "rb") as f:
            contents.append(f.read())
    assert contents[0] == contents[1]


@pytest.mark.timeout(6 * 3600)
def test_hybrid_adversarial_bl_then_bp_beats_bp(tmp_path):
    bp = run_preset(tmp_path, "han-infogan", "BP", total_iters=50_000, eval_every=5000)
    blbp = run_preset(tmp_path, "han-infogan", "BL_THEN_BP", total_iters=50_000, eval_every=5000)
    assert bp.final.acc_test >= 0.97
    assert blbp.final.acc_adv - bp.final.acc_adv >= 0.20
