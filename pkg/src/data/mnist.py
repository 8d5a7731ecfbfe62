"""Reader for the MNIST IDX files (big-endian header, unsigned byte payload)."""

import gzip
import os
import struct
from typing import Tuple

import numpy as np

from ..utils.errors import DataError, ParseError
from .dataset import Dataset, NUM_CLASSES, one_hot

MNIST_IMAGE_MAGIC = 0x00000803
MNIST_LABEL_MAGIC = 0x00000801

FILE_NAMES = {
    "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}


def _read_bytes(path: str) -> bytes:
    if not os.path.exists(path):
        raise DataError(f"file not found: {path}")
    opener = gzip.open if path.endswith(".gz") else open
    with opener(path, "rb") as f:
        return f.read()


def _read_be32(data: bytes, offset: int, path: str) -> int:
    if len(data) < offset + 4:
        raise ParseError(f"{path}: truncated header", offset=len(data))
    (value,) = struct.unpack_from(">I", data, offset)
    return value


def _check_payload(data: bytes, header: int, expected: int, path: str) -> None:
    actual = len(data) - header
    if actual < expected:
        raise ParseError(
            f"{path}: truncated payload, expected {expected} bytes, found {actual}",
            offset=len(data),
        )
    if actual > expected:
        raise ParseError(f"{path}: {actual - expected} trailing bytes", offset=header + expected)


def read_idx_images(path: str) -> np.ndarray:
    """
    Read an IDX image file.

    Returns:
        uint8 array of shape (count, rows, cols)

    Raises:
        ParseError: On a bad magic number or a truncated file
    """
    data = _read_bytes(path)
    magic = _read_be32(data, 0, path)
    if magic != MNIST_IMAGE_MAGIC:
        raise ParseError(f"{path}: magic number mismatch in image file (0x{magic:08x})", offset=0)
    count = _read_be32(data, 4, path)
    rows = _read_be32(data, 8, path)
    cols = _read_be32(data, 12, path)
    _check_payload(data, 16, count * rows * cols, path)
    return np.frombuffer(data, dtype=np.uint8, offset=16).reshape(count, rows, cols)


def read_idx_labels(path: str) -> np.ndarray:
    """
    Read an IDX label file.

    Returns:
        uint8 array of shape (count,)
    """
    data = _read_bytes(path)
    magic = _read_be32(data, 0, path)
    if magic != MNIST_LABEL_MAGIC:
        raise ParseError(f"{path}: magic number mismatch in label file (0x{magic:08x})", offset=0)
    count = _read_be32(data, 4, path)
    _check_payload(data, 8, count, path)
    labels = np.frombuffer(data, dtype=np.uint8, offset=8)
    bad = np.flatnonzero(labels >= NUM_CLASSES)
    if bad.size:
        raise ParseError(f"{path}: label {labels[bad[0]]} out of range", offset=8 + int(bad[0]))
    return labels


def load_mnist(images_path: str, labels_path: str) -> Dataset:
    """
    Load an MNIST split; pixels scaled by 1/255, labels one-hot.

    Raises:
        ParseError: On malformed files or an image/label count mismatch
    """
    images = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if images.shape[0] != labels.shape[0]:
        raise ParseError(
            f"{images.shape[0]} images in {images_path} but {labels.shape[0]} labels "
            f"in {labels_path}",
            offset=4,
        )
    count, rows, cols = images.shape
    flat = images.reshape(count, rows * cols).astype(np.float32) / 255.0
    return Dataset(flat, one_hot(labels), "mnist", (1, rows, cols))


def mnist_paths(root: str, split: str) -> Tuple[str, str]:
    """Standard file paths, preferring uncompressed files over ``.gz``."""
    paths = []
    for name in FILE_NAMES[split]:
        path = os.path.join(root, "mnist", name)
        if not os.path.exists(path) and os.path.exists(path + ".gz"):
            path += ".gz"
        paths.append(path)
    return paths[0], paths[1]
