"""Dense float64 tensors with reverse-mode automatic differentiation.

Every operation records its inputs and a backward rule on the output
tensor; ``Tensor.backward()`` on a scalar loss replays the recording in
reverse topological order. The graph is rebuilt on every forward pass and
may be consumed by exactly one backward pass.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.special import erf

from . import _kernels
from .errors import ConfigError, GraphError, ShapeError

_INV_SQRT2 = 1.0 / np.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum `grad` over the axes that numpy broadcasting expanded."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


class Tensor:
    """A dense n-dimensional float64 array with an optional gradient slot."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward_fn", "_consumed")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self._parents: tuple = ()
        self._backward_fn = None
        self._consumed = False

    @classmethod
    def _from_op(cls, data: np.ndarray, parents: Sequence["Tensor"], backward_fn) -> "Tensor":
        """Record one operation: output node plus its backward rule."""
        out = cls(data)
        if any(p.requires_grad for p in parents):
            out.requires_grad = True
            out._parents = tuple(parents)
            out._backward_fn = backward_fn
        return out

    # -- introspection ---------------------------------------------------

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data.item())

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # -- graph -------------------------------------------------------------

    def _accumulate(self, g: np.ndarray) -> None:
        if self.requires_grad:
            self.grad = g if self.grad is None else self.grad + g

    def backward(self) -> None:
        """Run reverse-mode differentiation from this scalar."""
        if self.data.size != 1:
            raise GraphError(f"backward requires a scalar, got shape {self.shape}")
        if self._consumed:
            raise GraphError("graph already consumed; re-record the forward pass")
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        for node in topo:
            if node._consumed and node._parents:
                raise GraphError("graph already consumed; re-record the forward pass")
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward_fn is not None and node.grad is not None:
                node._backward_fn(node.grad)
        for node in topo:
            if node._parents:
                node._consumed = True
        self._consumed = True

    def detach(self) -> "Tensor":
        """A view of the same data cut off from the graph."""
        return Tensor(self.data)

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other) -> "Tensor":
        other = as_tensor(other)

        def bw(g):
            self._accumulate(_unbroadcast(g, self.shape))
            other._accumulate(_unbroadcast(g, other.shape))

        return Tensor._from_op(self.data + other.data, (self, other), bw)

    __radd__ = __add__

    def __sub__(self, other) -> "Tensor":
        other = as_tensor(other)

        def bw(g):
            self._accumulate(_unbroadcast(g, self.shape))
            other._accumulate(_unbroadcast(-g, other.shape))

        return Tensor._from_op(self.data - other.data, (self, other), bw)

    def __rsub__(self, other) -> "Tensor":
        return as_tensor(other) - self

    def __mul__(self, other) -> "Tensor":
        other = as_tensor(other)

        def bw(g):
            self._accumulate(_unbroadcast(g * other.data, self.shape))
            other._accumulate(_unbroadcast(g * self.data, other.shape))

        return Tensor._from_op(self.data * other.data, (self, other), bw)

    __rmul__ = __mul__

    def __neg__(self) -> "Tensor":
        return Tensor._from_op(-self.data, (self,), lambda g: self._accumulate(-g))

    def __truediv__(self, scalar) -> "Tensor":
        if isinstance(scalar, Tensor):
            raise TypeError("tensor/tensor division is not supported; multiply by a reciprocal")
        return self * (1.0 / float(scalar))

    def __pow__(self, exponent: float) -> "Tensor":
        p = float(exponent)
        return Tensor._from_op(
            self.data**p,
            (self,),
            lambda g: self._accumulate(g * p * self.data ** (p - 1.0)),
        )

    def abs(self) -> "Tensor":
        return Tensor._from_op(
            np.abs(self.data), (self,), lambda g: self._accumulate(g * np.sign(self.data))
        )

    # -- shape manipulation -----------------------------------------------------

    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return Tensor._from_op(
            self.data.reshape(shape), (self,), lambda g: self._accumulate(g.reshape(self.shape))
        )

    def transpose(self, *axes) -> "Tensor":
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        if not axes:
            axes = tuple(range(self.ndim))[::-1]
        inverse = tuple(np.argsort(axes))
        return Tensor._from_op(
            self.data.transpose(axes), (self,), lambda g: self._accumulate(g.transpose(inverse))
        )

    def slice0(self, start: int, stop: Optional[int] = None) -> "Tensor":
        """Slice along axis 0; backward scatters into the full extent."""

        def bw(g):
            full = np.zeros_like(self.data)
            full[start:stop] = g
            self._accumulate(full)

        return Tensor._from_op(self.data[start:stop], (self,), bw)

    # -- reductions ------------------------------------------------------------

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        def bw(g):
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            self._accumulate(np.broadcast_to(g, self.shape).copy())

        return Tensor._from_op(self.data.sum(axis=axis, keepdims=keepdims), (self,), bw)

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        if axis is None:
            count = self.size
        else:
            axes = axis if isinstance(axis, tuple) else (axis,)
            count = int(np.prod([self.shape[a] for a in axes]))
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)

    # -- linear algebra -----------------------------------------------------------

    def matmul(self, other: "Tensor") -> "Tensor":
        other = as_tensor(other)
        if self.ndim < 2 or other.ndim < 2:
            raise ShapeError(f"matmul requires rank>=2 operands, got {self.shape} @ {other.shape}")
        if self.shape[-1] != other.shape[-2]:
            raise ShapeError(f"matmul inner dimensions disagree: {self.shape} @ {other.shape}")
        try:
            data = np.matmul(self.data, other.data)
        except ValueError as exc:
            raise ShapeError(f"matmul broadcast failed: {self.shape} @ {other.shape}") from exc

        def bw(g):
            ga = np.matmul(g, np.swapaxes(other.data, -1, -2))
            gb = np.matmul(np.swapaxes(self.data, -1, -2), g)
            self._accumulate(_unbroadcast(ga, self.shape))
            other._accumulate(_unbroadcast(gb, other.shape))

        return Tensor._from_op(data, (self, other), bw)

    __matmul__ = matmul

    # -- nonlinearities --------------------------------------------------------------

    def gelu(self) -> "Tensor":
        """Exact Gaussian-CDF GELU, x * Phi(x)."""
        cdf = 0.5 * (1.0 + erf(self.data * _INV_SQRT2))

        def bw(g):
            pdf = np.exp(-0.5 * self.data * self.data) * _INV_SQRT_2PI
            self._accumulate(g * (cdf + self.data * pdf))

        return Tensor._from_op(self.data * cdf, (self,), bw)

    def leaky_relu(self, slope: float = 0.2) -> "Tensor":
        return Tensor._from_op(
            np.where(self.data > 0, self.data, slope * self.data),
            (self,),
            lambda g: self._accumulate(g * np.where(self.data > 0, 1.0, slope)),
        )

    def softmax(self, axis: int = -1) -> "Tensor":
        """Numerically stable softmax along `axis` (max-subtraction)."""
        _check_axis(self, axis)
        shifted = self.data - self.data.max(axis=axis, keepdims=True)
        e = np.exp(shifted)
        y = e / e.sum(axis=axis, keepdims=True)

        def bw(g):
            inner = (g * y).sum(axis=axis, keepdims=True)
            self._accumulate(y * (g - inner))

        return Tensor._from_op(y, (self,), bw)

    def log_softmax(self, axis: int = -1) -> "Tensor":
        _check_axis(self, axis)
        m = self.data.max(axis=axis, keepdims=True)
        shifted = self.data - m
        y = shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))

        def bw(g):
            self._accumulate(g - np.exp(y) * g.sum(axis=axis, keepdims=True))

        return Tensor._from_op(y, (self,), bw)

    def layer_norm(self, gain: "Tensor", bias: "Tensor", eps: float = 1e-8) -> "Tensor":
        """Normalize the last axis to zero mean / unit variance, then affine."""
        dim = self.shape[-1]
        if gain.shape != (dim,) or bias.shape != (dim,):
            raise ShapeError(
                f"layer_norm affine parameters must have shape ({dim},), "
                f"got gain {gain.shape} and bias {bias.shape}"
            )
        mu = self.data.mean(axis=-1, keepdims=True)
        xc = self.data - mu
        var = (xc * xc).mean(axis=-1, keepdims=True)
        inv = 1.0 / np.sqrt(var + eps)
        xhat = xc * inv

        def bw(g):
            lead = tuple(range(g.ndim - 1))
            gain._accumulate((g * xhat).sum(axis=lead))
            bias._accumulate(g.sum(axis=lead))
            gx = g * gain.data
            self._accumulate(
                inv
                * (
                    gx
                    - gx.mean(axis=-1, keepdims=True)
                    - xhat * (gx * xhat).mean(axis=-1, keepdims=True)
                )
            )

        return Tensor._from_op(xhat * gain.data + bias.data, (self, gain, bias), bw)

    def dropout(self, rate: float, training: bool, rng: Optional[np.random.Generator] = None) -> "Tensor":
        """Inverted dropout; identity in eval mode or at rate 0."""
        if not 0.0 <= rate < 1.0:
            raise ConfigError(f"dropout rate must be in [0, 1), got {rate}")
        if not training or rate == 0.0:
            return self
        if rng is None:
            raise ConfigError("dropout in training mode requires an rng")
        keep = rng.random(self.shape) >= rate
        mask = keep * (1.0 / (1.0 - rate))
        return Tensor._from_op(self.data * mask, (self,), lambda g: self._accumulate(g * mask))

    # -- indexing ----------------------------------------------------------------------

    def masked_fill(self, mask: np.ndarray, value: float) -> "Tensor":
        """Replace entries where `mask` is true by `value`; their gradient is zero."""
        mask = np.asarray(mask, dtype=bool)

        def bw(g):
            self._accumulate(_unbroadcast(np.where(mask, 0.0, g), self.shape))

        return Tensor._from_op(np.where(mask, value, self.data), (self,), bw)

    def gather_last(self, indices: np.ndarray) -> "Tensor":
        """Pick one entry along the last axis per position: out[...] = x[..., idx[...]]."""
        idx = np.asarray(indices, dtype=np.int64)
        if idx.shape != self.shape[:-1]:
            raise ShapeError(
                f"gather_last indices {idx.shape} must match leading shape {self.shape[:-1]}"
            )
        if idx.size and (idx.min() < 0 or idx.max() >= self.shape[-1]):
            raise IndexError(f"gather_last index out of range for axis of extent {self.shape[-1]}")

        def bw(g):
            full = np.zeros_like(self.data)
            np.put_along_axis(full, idx[..., None], g[..., None], axis=-1)
            self._accumulate(full)

        out_data = np.take_along_axis(self.data, idx[..., None], axis=-1)[..., 0]
        return Tensor._from_op(out_data, (self,), bw)


def as_tensor(value) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def _check_axis(t: Tensor, axis: int) -> None:
    if not -t.ndim <= axis < t.ndim:
        raise ShapeError(f"axis {axis} invalid for shape {t.shape}")


# -- functional aliases ---------------------------------------------------------


def matmul(a: Tensor, b: Tensor) -> Tensor:
    return as_tensor(a).matmul(b)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    return x.softmax(axis)


def log_softmax(x: Tensor, axis: int = -1) -> Tensor:
    return x.log_softmax(axis)


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-8) -> Tensor:
    return x.layer_norm(gain, bias, eps)


def gelu(x: Tensor) -> Tensor:
    return x.gelu()


def leaky_relu(x: Tensor, slope: float = 0.2) -> Tensor:
    return x.leaky_relu(slope)


def dropout(x: Tensor, rate: float, training: bool, rng=None) -> Tensor:
    return x.dropout(rate, training, rng)


def embedding_lookup(table: Tensor, ids: np.ndarray) -> Tensor:
    """Gather rows of `table` by integer id; backward scatter-adds into rows."""
    ids = np.asarray(ids, dtype=np.int64)
    rows = table.shape[0]
    if ids.size and (ids.min() < 0 or ids.max() >= rows):
        bad = np.unravel_index(int(np.argmax((ids < 0) | (ids >= rows))), ids.shape)
        raise IndexError(f"id {ids[bad]} at position {bad} outside table with {rows} rows")

    def bw(g):
        acc = np.zeros_like(table.data)
        _kernels.scatter_add_rows(
            acc,
            np.ascontiguousarray(ids.ravel()),
            np.ascontiguousarray(g.reshape(-1, g.shape[-1])),
        )
        table._accumulate(acc)

    return Tensor._from_op(table.data[ids], (table,), bw)


def masked_fill(x: Tensor, mask: np.ndarray, value: float) -> Tensor:
    return x.masked_fill(mask, value)


def gather_last(x: Tensor, indices: np.ndarray) -> Tensor:
    return x.gather_last(indices)


def normal_param(rng: np.random.Generator, shape: Iterable[int], std: float = 0.02) -> Tensor:
    """Fresh trainable tensor with mean-0 normal entries."""
    return Tensor(rng.normal(0.0, std, size=tuple(shape)), requires_grad=True)


def zeros_param(shape: Iterable[int]) -> Tensor:
    return Tensor(np.zeros(tuple(shape)), requires_grad=True)


def ones_param(shape: Iterable[int]) -> Tensor:
    return Tensor(np.ones(tuple(shape)), requires_grad=True)
