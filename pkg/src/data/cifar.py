"""Reader for the CIFAR-10 binary batches: 1 label byte + 3072 pixel bytes per record."""

import os
from typing import List, Sequence

import numpy as np

from ..utils.errors import DataError, ParseError
from .dataset import Dataset, NUM_CLASSES, one_hot

IMAGE_SHAPE = (3, 32, 32)
PIXELS = 3 * 32 * 32
RECORD_SIZE = 1 + PIXELS

TRAIN_BATCHES = [f"data_batch_{i}.bin" for i in range(1, 6)]
TEST_BATCHES = ["test_batch.bin"]


def read_cifar_batch(path: str):
    """
    Read one binary batch.

    Returns:
        Tuple of (uint8 pixels of shape (n, 3072) as R, G, B planes, uint8 labels)
    """
    if not os.path.exists(path):
        raise DataError(f"file not found: {path}")
    with open(path, "rb") as f:
        data = f.read()

    remainder = len(data) % RECORD_SIZE
    if remainder or not data:
        raise ParseError(
            f"{path}: size {len(data)} is not a whole number of {RECORD_SIZE}-byte records",
            offset=len(data) - remainder,
        )
    records = np.frombuffer(data, dtype=np.uint8).reshape(-1, RECORD_SIZE)
    labels = records[:, 0]
    bad = np.flatnonzero(labels >= NUM_CLASSES)
    if bad.size:
        raise ParseError(
            f"{path}: label {labels[bad[0]]} out of range", offset=int(bad[0]) * RECORD_SIZE
        )
    return records[:, 1:], labels


def load_cifar10(batch_paths: Sequence[str]) -> Dataset:
    """Concatenate binary batches into one dataset scaled to [0, 1]."""
    if not batch_paths:
        raise DataError("no CIFAR-10 batch files given")
    pixels: List[np.ndarray] = []
    labels: List[np.ndarray] = []
    for path in batch_paths:
        batch_pixels, batch_labels = read_cifar_batch(path)
        pixels.append(batch_pixels)
        labels.append(batch_labels)
    images = np.concatenate(pixels).astype(np.float32) / 255.0
    return Dataset(images, one_hot(np.concatenate(labels)), "cifar10", IMAGE_SHAPE)


def cifar10_paths(root: str, split: str) -> List[str]:
    names = TRAIN_BATCHES if split == "train" else TEST_BATCHES
    return [os.path.join(root, "cifar-10-batches-bin", name) for name in names]
