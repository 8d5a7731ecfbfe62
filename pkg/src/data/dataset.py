import logging
import os
from dataclasses import dataclass
from typing import Iterator, Tuple

import numpy as np

from ..tensor.rng import Rng
from ..utils.errors import ConfigError, DataError

logger = logging.getLogger(__name__)

DATASETS = ("mnist", "cifar10")
DATA_ROOT_ENV = "BIDIR_DATA_ROOT"
NUM_CLASSES = 10


@dataclass
class Dataset:
    """Flat images scaled to [0, 1] with one-hot labels."""

    images: np.ndarray
    labels: np.ndarray
    name: str
    image_shape: Tuple[int, int, int]

    def __post_init__(self):
        if self.images.ndim != 2 or self.labels.ndim != 2:
            raise DataError("images and labels must be rank-2 arrays")
        if self.images.shape[0] != self.labels.shape[0]:
            raise DataError(
                f"{self.images.shape[0]} images but {self.labels.shape[0]} labels in {self.name}"
            )
        if self.images.shape[1] != int(np.prod(self.image_shape)):
            raise DataError(f"feature count {self.images.shape[1]} != prod{self.image_shape}")

    def __len__(self) -> int:
        return self.images.shape[0]

    @property
    def n_features(self) -> int:
        return self.images.shape[1]

    @property
    def n_classes(self) -> int:
        return self.labels.shape[1]

    def subset(self, count: int) -> "Dataset":
        """First ``count`` samples."""
        return Dataset(self.images[:count], self.labels[:count], self.name, self.image_shape)


def one_hot(labels: np.ndarray, num_classes: int = NUM_CLASSES, dtype=np.float32) -> np.ndarray:
    encoded = np.zeros((labels.shape[0], num_classes), dtype=dtype)
    encoded[np.arange(labels.shape[0]), labels.astype(np.int64)] = 1
    return encoded


def batches_per_pass(dataset: Dataset, size: int) -> int:
    return len(dataset) // size


def minibatches(dataset: Dataset, size: int, rng: Rng) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """
    Endless stream of shuffled mini-batches.

    Each pass visits a fresh seeded permutation of the dataset; the final
    short batch of a pass is dropped.

    Args:
        dataset: Source dataset
        size: Batch size, 0 < size <= len(dataset)
        rng: Generator driving the shuffles

    Yields:
        Tuples of (images, one-hot labels)
    """
    if size <= 0:
        raise ValueError("mini-batch size must be positive")
    if size > len(dataset):
        raise ValueError(f"mini-batch size {size} exceeds dataset size {len(dataset)}")

    per_pass = batches_per_pass(dataset, size)
    while True:
        order = rng.permutation(len(dataset))
        for b in range(per_pass):
            index = order[b * size : (b + 1) * size]
            yield dataset.images[index], dataset.labels[index]


def resolve_data_root(root: str = None) -> str:
    """Dataset root from the argument, the environment, or ``data/``."""
    return root or os.environ.get(DATA_ROOT_ENV) or "data"


def load_dataset(name: str, split: str, root: str = None) -> Dataset:
    """
    Load a standard split from the dataset root.

    Args:
        name: ``mnist`` or ``cifar10``
        split: ``train`` or ``test``
        root: Dataset root directory; see ``resolve_data_root``
    """
    from .cifar import cifar10_paths, load_cifar10
    from .mnist import load_mnist, mnist_paths

    if split not in ("train", "test"):
        raise ConfigError(f"unknown split '{split}', expected train or test")
    root = resolve_data_root(root)
    if name == "mnist":
        images_path, labels_path = mnist_paths(root, split)
        dataset = load_mnist(images_path, labels_path)
    elif name == "cifar10":
        dataset = load_cifar10(cifar10_paths(root, split))
    else:
        raise ConfigError(f"unknown dataset '{name}', expected one of {DATASETS}")
    logger.info("Loaded %s %s split: %d samples", name, split, len(dataset))
    return dataset
