"""
Lossless image dumps as binary PGM (one channel) and PPM (three channels).

Every image is min-max normalized on its own to 0..255; a constant image
maps to mid-gray 128. A ``.json`` sidecar next to each file records the
rule and the pre-normalization range of every tile.
"""

import json
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..layers.base import AffineTiedLayer
from ..layers.conv import SharedConv2D

logger = logging.getLogger(__name__)

NORMALIZATION = "per-image min-max to 0..255; constant images map to 128"
MID_GRAY = 128


def normalize_image(image: np.ndarray) -> Tuple[np.ndarray, Tuple[float, float]]:
    """Scale one image to uint8; returns it with its original (min, max)."""
    lo, hi = float(np.min(image)), float(np.max(image))
    if hi == lo:
        return np.full(image.shape, MID_GRAY, dtype=np.uint8), (lo, hi)
    scaled = (image.astype(np.float64) - lo) / (hi - lo)
    return np.round(scaled * 255).astype(np.uint8), (lo, hi)


def write_pnm(pixels: np.ndarray, path: str) -> None:
    """
    Write a uint8 (H, W) array as P5 or an (H, W, 3) array as P6.

    Raises:
        ValueError: For any other shape
    """
    if pixels.ndim == 2:
        magic = b"P5"
    elif pixels.ndim == 3 and pixels.shape[2] == 3:
        magic = b"P6"
    else:
        raise ValueError(f"cannot write image of shape {pixels.shape}")
    height, width = pixels.shape[:2]
    with open(path, "wb") as f:
        f.write(magic + f"\n{width} {height}\n255\n".encode("ascii"))
        f.write(np.ascontiguousarray(pixels, dtype=np.uint8).tobytes())


def _to_hwc(image: np.ndarray) -> np.ndarray:
    # (C, H, W) -> (H, W) for one channel, (H, W, 3) for three
    if image.shape[0] == 1:
        return image[0]
    if image.shape[0] == 3:
        return image.transpose(1, 2, 0)
    raise ValueError(f"images need 1 or 3 channels, got {image.shape[0]}")


def _write_sidecar(path: str, ranges: List[Tuple[float, float]], **extra) -> None:
    sidecar = {"normalization": NORMALIZATION, "ranges": [list(r) for r in ranges], **extra}
    with open(path + ".json", "w", encoding="utf-8") as f:
        json.dump(sidecar, f, indent=2, sort_keys=True)
        f.write("\n")


def dump_image_grid(
    images: np.ndarray,
    image_shape: Sequence[int],
    path: str,
    columns: Optional[int] = None,
) -> None:
    """
    Tile flat images into one picture, one row of ``columns`` tiles at a time.

    Args:
        images: Array of shape (count, prod(image_shape))
        image_shape: Per-image (C, H, W) with C of 1 or 3
        path: Output file (``.pgm`` or ``.ppm`` by convention)
        columns: Tiles per row; defaults to all images in one row
    """
    image_shape = tuple(int(d) for d in image_shape)
    if images.ndim != 2 or images.shape[1] != int(np.prod(image_shape)):
        raise ValueError(f"images of shape {images.shape} do not match {image_shape}")
    count = images.shape[0]
    if count == 0:
        raise ValueError("no images to dump")
    columns = count if columns is None else max(1, min(columns, count))
    rows = -(-count // columns)
    channels, height, width = image_shape

    canvas_shape = (rows * height, columns * width) + ((3,) if channels == 3 else ())
    canvas = np.zeros(canvas_shape, dtype=np.uint8)
    ranges = []
    for i, flat in enumerate(images):
        pixels, value_range = normalize_image(flat.reshape(image_shape))
        ranges.append(value_range)
        r, c = divmod(i, columns)
        canvas[r * height : (r + 1) * height, c * width : (c + 1) * width] = _to_hwc(pixels)

    write_pnm(canvas, path)
    _write_sidecar(path, ranges, grid=[rows, columns], tile_shape=list(image_shape))
    logger.debug("Wrote %d-image grid %s", count, path)


def weight_image(layer: AffineTiedLayer, index: int, image_shape: Sequence[int]) -> np.ndarray:
    """
    Weights feeding output unit (dense) or output channel (conv) ``index``.

    Returns:
        A dense row reshaped to ``image_shape``, or the (C_in, k, k) kernel
        of a convolution
    """
    weights = layer.weights
    if not 0 <= index < weights.shape[0]:
        raise IndexError(f"unit {index} outside [0, {weights.shape[0]})")
    if isinstance(layer, SharedConv2D):
        return weights[index]
    return weights[index].reshape(tuple(image_shape))


def dump_weight_image(
    layer: AffineTiedLayer, class_index: int, path: str, image_shape: Sequence[int]
) -> None:
    """Write one unit's incoming weights as an image; e.g. a 784-dim row as 28x28."""
    image = weight_image(layer, class_index, image_shape)
    pixels, value_range = normalize_image(image)
    write_pnm(_to_hwc(pixels), path)
    _write_sidecar(path, [value_range], unit=class_index, tile_shape=list(image.shape))


def dump_weight_grid(layer: AffineTiedLayer, path: str, image_shape: Sequence[int]) -> None:
    """All units of the first layer side by side."""
    images = [weight_image(layer, i, image_shape) for i in range(layer.weights.shape[0])]
    dump_image_grid(
        np.stack([image.reshape(-1) for image in images]), images[0].shape, path, columns=10
    )
