import gzip
import os
import struct

import numpy as np
import pytest

from src.data.dataset import Dataset, one_hot


def make_templates(rng: np.random.Generator, n_classes: int, shape) -> np.ndarray:
    """One random binary template per class."""
    return (rng.random((n_classes, int(np.prod(shape)))) > 0.6).astype(np.float32)


def make_template_dataset(count: int, shape=(1, 8, 8), seed: int = 0, noise: float = 0.15):
    """Ten-class dataset of noisy copies of fixed class templates, scaled to [0, 1]."""
    rng = np.random.default_rng(seed)
    templates = make_templates(np.random.default_rng(1234), 10, shape)
    labels = np.arange(count) % 10
    rng.shuffle(labels)
    images = templates[labels] + noise * rng.standard_normal((count, templates.shape[1]))
    images = np.clip(images, 0.0, 1.0).astype(np.float32)
    return Dataset(images, one_hot(labels), "templates", tuple(shape))


def write_idx_images(path: str, images: np.ndarray, compress: bool = False) -> None:
    count, rows, cols = images.shape
    data = struct.pack(">IIII", 0x803, count, rows, cols) + images.astype(np.uint8).tobytes()
    _write(path, data, compress)


def write_idx_labels(path: str, labels: np.ndarray, compress: bool = False) -> None:
    data = struct.pack(">II", 0x801, labels.shape[0]) + labels.astype(np.uint8).tobytes()
    _write(path, data, compress)


def _write(path: str, data: bytes, compress: bool) -> None:
    opener = gzip.open if compress else open
    with opener(path, "wb") as f:
        f.write(data)


def write_mnist_root(root: str, train_count: int = 300, test_count: int = 60) -> str:
    """Tiny MNIST-format dataset of 28x28 class templates under ``root/mnist``."""
    os.makedirs(os.path.join(root, "mnist"), exist_ok=True)
    for split, count, seed, names in (
        ("train", train_count, 1, ("train-images-idx3-ubyte", "train-labels-idx1-ubyte")),
        ("test", test_count, 2, ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte")),
    ):
        dataset = make_template_dataset(count, (1, 28, 28), seed=seed)
        pixels = np.round(dataset.images * 255).reshape(count, 28, 28)
        labels = np.argmax(dataset.labels, axis=1)
        write_idx_images(os.path.join(root, "mnist", names[0]), pixels)
        write_idx_labels(os.path.join(root, "mnist", names[1]), labels)
    return root


@pytest.fixture
def template_dataset():
    """600 training samples of 8x8 class templates."""
    return make_template_dataset(600, seed=0)


@pytest.fixture
def template_testset():
    return make_template_dataset(200, seed=1)


@pytest.fixture
def mnist_root(tmp_path):
    """Dataset root holding tiny MNIST-format files."""
    return write_mnist_root(str(tmp_path / "data"))


@pytest.fixture
def rng():
    return np.random.default_rng(42)
