from typing import Any, Dict, Tuple

import numpy as np

from .activations import Activation
from .base import DISC, AffineTiedLayer, glorot_uniform


def conv_output_size(size: int, kernel: int, stride: int, pad: int) -> int:
    """Output extent of a strided cross-correlation: floor((size + 2·pad − k) / stride) + 1."""
    if size + 2 * pad < kernel:
        raise ValueError(f"kernel {kernel} larger than padded input {size + 2 * pad}")
    return (size + 2 * pad - kernel) // stride + 1


def im2col(images, filter_h, filter_w, stride=1, pad=0):
    # images: (N, C, H, W) -> (N*out_h*out_w, C*filter_h*filter_w)
    N, C, H, W = images.shape
    out_h = conv_output_size(H, filter_h, stride, pad)
    out_w = conv_output_size(W, filter_w, stride, pad)

    img_padded = np.pad(images, [(0, 0), (0, 0), (pad, pad), (pad, pad)], mode="constant")
    col = np.zeros((N, C, filter_h, filter_w, out_h, out_w), dtype=images.dtype)

    for y in range(filter_h):
        y_max = y + stride * out_h
        for x in range(filter_w):
            x_max = x + stride * out_w
            col[:, :, y, x, :, :] = img_padded[:, :, y:y_max:stride, x:x_max:stride]
    return col.transpose(0, 4, 5, 1, 2, 3).reshape(N * out_h * out_w, -1)


def col2im(col, input_shape, filter_h, filter_w, stride=1, pad=0):
    """Adjoint of ``im2col``: scatter-add columns back into an (N, C, H, W) image."""
    N, C, H, W = input_shape
    out_h = conv_output_size(H, filter_h, stride, pad)
    out_w = conv_output_size(W, filter_w, stride, pad)
    col = col.reshape(N, out_h, out_w, C, filter_h, filter_w).transpose(0, 3, 4, 5, 1, 2)

    img = np.zeros((N, C, H + 2 * pad, W + 2 * pad), dtype=col.dtype)
    for y in range(filter_h):
        y_max = y + stride * out_h
        for x in range(filter_w):
            x_max = x + stride * out_w
            img[:, :, y:y_max:stride, x:x_max:stride] += col[:, :, y, x, :, :]
    return img[:, :, pad : H + pad, pad : W + pad]


class SharedConv2D(AffineTiedLayer):
    """
    Convolution whose kernel store serves both directions.

    Discriminative: strided cross-correlation (N, C_in, H, W) -> (N, C_out, H_out, W_out)
    with ``H_out = floor((H + 2·pad − kh) / stride) + 1``. Generative: the
    transposed convolution with the same kernels, i.e. the exact adjoint of
    the discriminative map, producing exactly (N, C_in, H, W).
    """

    kind = "conv"

    def __init__(
        self,
        in_shape: Tuple[int, int, int],
        out_channels: int,
        kernel_size: int,
        stride: int = 1,
        pad: int = 0,
        bias: bool = True,
        act_disc: Activation = Activation("relu"),
        act_gen: Activation = Activation("relu"),
        bn_disc: bool = False,
        bn_gen: bool = False,
        rng=None,
        dtype=np.float32,
    ):
        if stride <= 0:
            raise ValueError("stride must be positive")
        in_channels, height, width = in_shape
        out_shape = (
            out_channels,
            conv_output_size(height, kernel_size, stride, pad),
            conv_output_size(width, kernel_size, stride, pad),
        )
        super().__init__(in_shape, out_shape, bias, act_disc, act_gen, bn_disc, bn_gen, dtype)
        self.kernel_size = kernel_size
        self.stride = stride
        self.pad = pad

        shape = (out_channels, in_channels, kernel_size, kernel_size)
        if rng is None:
            self.params["W"] = np.zeros(shape, dtype=self.dtype)
        else:
            area = kernel_size * kernel_size
            self.params["W"] = glorot_uniform(
                rng, shape, in_channels * area, out_channels * area, self.dtype
            )

    @property
    def in_channels(self) -> int:
        return self.in_shape[0]

    @property
    def out_channels(self) -> int:
        return self.out_shape[0]

    def describe(self) -> Dict[str, Any]:
        return {
            "type": self.kind,
            "in_shape": list(self.in_shape),
            "out_channels": self.out_channels,
            "kernel": self.kernel_size,
            "stride": self.stride,
            "pad": self.pad,
            **self._describe_common(),
        }

    def _kernel_matrix(self) -> np.ndarray:
        return self.weights.reshape(self.out_channels, -1)

    def _to_rows(self, y: np.ndarray) -> np.ndarray:
        # (N, C_out, H_out, W_out) -> (N*H_out*W_out, C_out)
        return y.transpose(0, 2, 3, 1).reshape(-1, self.out_channels)

    def _from_rows(self, rows: np.ndarray, n: int) -> np.ndarray:
        _, out_h, out_w = self.out_shape
        return rows.reshape(n, out_h, out_w, self.out_channels).transpose(0, 3, 1, 2)

    def _full_in_shape(self, n: int):
        return (n,) + self.in_shape

    def _linear(self, direction, x):
        k = self.kernel_size
        if direction == DISC:
            col = im2col(x, k, k, self.stride, self.pad)
            return self._from_rows(col @ self._kernel_matrix().T, x.shape[0]), col
        rows = self._to_rows(x)
        col = rows @ self._kernel_matrix()
        image = col2im(col, self._full_in_shape(x.shape[0]), k, k, self.stride, self.pad)
        return image, rows

    def _linear_backward(self, direction, linear_cache, grad):
        k = self.kernel_size
        kernel = self._kernel_matrix()
        if direction == DISC:
            col = linear_cache
            grad_rows = self._to_rows(grad)
            d_kernel = grad_rows.T @ col
            grad_col = grad_rows @ kernel
            grad_in = col2im(
                grad_col, self._full_in_shape(grad.shape[0]), k, k, self.stride, self.pad
            )
            return d_kernel.reshape(self.weights.shape), grad_in

        rows = linear_cache
        grad_col = im2col(grad, k, k, self.stride, self.pad)
        d_kernel = rows.T @ grad_col
        grad_in = self._from_rows(grad_col @ kernel.T, grad.shape[0])
        return d_kernel.reshape(self.weights.shape), grad_in
