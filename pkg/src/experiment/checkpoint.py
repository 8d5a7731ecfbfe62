"""
Versioned binary checkpoints.

Layout (little-endian)::

    b"BIDIRCKP"  u16 version
    u32 length + UTF-8 JSON architecture descriptor (sorted keys)
    u64 seed  u64 iteration
    u32 tensor count, then per tensor:
        u16 name length + name, u8 rank, rank x u32 dims, float32 data
    u8 optimizer flag; if set:
        u32 optimizer count, then per optimizer:
            u16 name length + name, u64 step, 4 x f64 (lr, beta1, beta2, eps_hat),
            u32 moment count + moments in the tensor encoding ("m.<key>", "v.<key>")
"""

import json
import logging
import struct
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from ..layers.network import BidirNetwork, network_from_descriptor
from ..optim.adam import Adam
from ..utils.errors import CheckpointError

logger = logging.getLogger(__name__)

MAGIC = b"BIDIRCKP"
VERSION = 1

Optimizers = Dict[str, Adam]


@dataclass
class Checkpoint:
    """A loaded checkpoint."""

    net: BidirNetwork
    descriptor: Dict[str, Any]
    seed: int
    iteration: int
    optimizers: Optimizers = field(default_factory=dict)


def _encode_descriptor(descriptor: Dict[str, Any]) -> bytes:
    return json.dumps(descriptor, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _pack_name(name: str) -> bytes:
    encoded = name.encode("utf-8")
    return struct.pack("<H", len(encoded)) + encoded


def _pack_tensor(name: str, value: np.ndarray) -> bytes:
    parts = [_pack_name(name), struct.pack("<B", value.ndim)]
    parts.append(struct.pack(f"<{value.ndim}I", *value.shape))
    parts.append(np.ascontiguousarray(value, dtype="<f4").tobytes())
    return b"".join(parts)


def _normalize_optimizers(optimizer: Union[None, Adam, Optimizers]) -> Optimizers:
    if optimizer is None:
        return {}
    if isinstance(optimizer, Adam):
        return {"optimizer": optimizer}
    return dict(optimizer)


def encode_checkpoint(
    net: BidirNetwork,
    optimizer: Union[None, Adam, Optimizers] = None,
    seed: int = 0,
    iteration: int = 0,
) -> bytes:
    """Serialize a network (and optionally its optimizer states) to bytes."""
    descriptor = _encode_descriptor(net.describe())
    parts: List[bytes] = [MAGIC, struct.pack("<H", VERSION)]
    parts.append(struct.pack("<I", len(descriptor)) + descriptor)
    parts.append(struct.pack("<QQ", seed, iteration))

    state = net.state_dict()
    parts.append(struct.pack("<I", len(state)))
    parts.extend(_pack_tensor(name, value) for name, value in state.items())

    optimizers = _normalize_optimizers(optimizer)
    parts.append(struct.pack("<B", 1 if optimizers else 0))
    if optimizers:
        parts.append(struct.pack("<I", len(optimizers)))
        for name, opt in optimizers.items():
            s = opt.state
            parts.append(_pack_name(name))
            parts.append(struct.pack("<Q4d", s.t, s.lr, s.beta1, s.beta2, s.eps_hat))
            moments = [(f"m.{k}", v) for k, v in s.m.items()]
            moments += [(f"v.{k}", v) for k, v in s.v.items()]
            parts.append(struct.pack("<I", len(moments)))
            parts.extend(_pack_tensor(k, v) for k, v in moments)
    return b"".join(parts)


def save_checkpoint(
    net: BidirNetwork,
    optimizer: Union[None, Adam, Optimizers],
    path: str,
    seed: int = 0,
    iteration: int = 0,
) -> None:
    """
    Write a checkpoint file.

    Args:
        net: Network whose parameters and buffers are stored
        optimizer: None, one Adam optimizer, or a name-keyed dictionary of them
        path: Output file
        seed: Run seed recorded in the header
        iteration: Iteration the state belongs to
    """
    data = encode_checkpoint(net, optimizer, seed, iteration)
    with open(path, "wb") as f:
        f.write(data)
    logger.info("Saved checkpoint %s (%d bytes, iteration %d)", path, len(data), iteration)


class _Reader:
    """Cursor over checkpoint bytes; every short read is a CheckpointError at its offset."""

    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, count: int) -> bytes:
        if self.offset + count > len(self.data):
            raise CheckpointError(
                f"truncated checkpoint: needed {count} bytes, {len(self.data) - self.offset} left",
                offset=self.offset,
            )
        chunk = self.data[self.offset : self.offset + count]
        self.offset += count
        return chunk

    def unpack(self, fmt: str) -> Tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def name(self) -> str:
        (length,) = self.unpack("<H")
        start = self.offset
        try:
            return self.take(length).decode("utf-8")
        except UnicodeDecodeError:
            raise CheckpointError("tensor name is not UTF-8", offset=start) from None

    def tensor(self) -> Tuple[str, np.ndarray]:
        name = self.name()
        (rank,) = self.unpack("<B")
        shape = self.unpack(f"<{rank}I")
        count = int(np.prod(shape, dtype=np.int64))
        values = np.frombuffer(self.take(4 * count), dtype="<f4").reshape(shape)
        return name, values


def decode_checkpoint(
    data: bytes, expected_descriptor: Optional[Dict[str, Any]] = None
) -> Checkpoint:
    """
    Parse checkpoint bytes and rebuild the network.

    Args:
        data: Checkpoint contents
        expected_descriptor: If given, the stored architecture must equal it

    Raises:
        CheckpointError: On a bad magic, unsupported version, truncation,
            trailing bytes, tensor mismatch or architecture mismatch
    """
    reader = _Reader(data)
    if reader.take(len(MAGIC)) != MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic)", offset=0)
    version_offset = reader.offset
    (version,) = reader.unpack("<H")
    if version != VERSION:
        raise CheckpointError(
            f"unsupported checkpoint version {version}, expected {VERSION}", offset=version_offset
        )

    (length,) = reader.unpack("<I")
    descriptor_offset = reader.offset
    try:
        descriptor = json.loads(reader.take(length).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError):
        raise CheckpointError("corrupt architecture descriptor", offset=descriptor_offset) from None
    if expected_descriptor is not None and _encode_descriptor(
        expected_descriptor
    ) != _encode_descriptor(descriptor):
        raise CheckpointError(
            f"architecture mismatch: checkpoint holds '{descriptor.get('name')}', "
            f"expected '{expected_descriptor.get('name')}'",
            offset=descriptor_offset,
        )

    seed, iteration = reader.unpack("<QQ")
    tensors_offset = reader.offset
    (count,) = reader.unpack("<I")
    state = dict(reader.tensor() for _ in range(count))

    try:
        net = network_from_descriptor(descriptor)
        net.load_state_dict(state)
    except (KeyError, ValueError, TypeError) as e:
        raise CheckpointError(f"tensors do not fit the architecture: {e}", tensors_offset) from None

    optimizers: Optimizers = {}
    (flag,) = reader.unpack("<B")
    if flag:
        (n_optimizers,) = reader.unpack("<I")
        for _ in range(n_optimizers):
            name = reader.name()
            step, lr, beta1, beta2, eps_hat = reader.unpack("<Q4d")
            opt = Adam(lr, beta1, beta2, eps_hat)
            opt.state.t = step
            (n_moments,) = reader.unpack("<I")
            for _ in range(n_moments):
                key, value = reader.tensor()
                moment, _, param = key.partition(".")
                target = opt.state.m if moment == "m" else opt.state.v
                target[param] = value.astype(net.dtype)
            optimizers[name] = opt

    if reader.offset != len(data):
        raise CheckpointError("trailing bytes after checkpoint", offset=reader.offset)
    return Checkpoint(net, descriptor, seed, iteration, optimizers)


def load_checkpoint(path: str, expected_descriptor: Optional[Dict[str, Any]] = None) -> Checkpoint:
    """Read a checkpoint file; see ``decode_checkpoint``."""
    try:
        with open(path, "rb") as f:
            data = f.read()
    except FileNotFoundError:
        raise CheckpointError(f"checkpoint not found: {path}") from None
    checkpoint = decode_checkpoint(data, expected_descriptor)
    logger.info("Loaded checkpoint %s (iteration %d)", path, checkpoint.iteration)
    return checkpoint
