"""Hot numeric kernels with two interchangeable implementations.

Every kernel exists twice: a numba-JIT fused loop and a vectorized numpy
call. The environment variable ``FREQREC_BACKEND`` picks the set at
import time:

    auto  (default)  per-kernel winner measured by benchmarks/bench_kernels.py:
                     numba for scatter_add_rows and adam_update, BLAS-backed
                     numpy for the matmul-family kernels
    numba            every kernel through numba (error if not importable)
    numpy            every kernel through numpy

All kernels take contiguous float64 arrays. The numba kernels are serial
on purpose: scatter_add_rows has write collisions under prange, and the
training loop depends on deterministic accumulation order.
"""

import os

import numpy as np

_NUMBA_PREFERRED = ("scatter_add_rows", "adam_update")

_REQUESTED = os.environ.get("FREQREC_BACKEND", "auto").strip().lower() or "auto"
if _REQUESTED not in ("auto", "numba", "numpy"):
    raise ValueError(
        f"FREQREC_BACKEND must be 'auto', 'numba' or 'numpy', got {_REQUESTED!r}"
    )


def _numpy_matmul2(x, a):
    return x @ a


def _numpy_mat_pair(x, a, b):
    return x @ a, x @ b


def _numpy_mat_fuse(p, q, a, b):
    return p @ a + q @ b


def _numpy_scatter_add_rows(out, ids, vals):
    np.add.at(out, ids, vals)


def _numpy_adam_update(param, grad, m, v, lr, beta1, beta2, eps, bc1, bc2):
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * grad * grad
    param -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)


def _build_numba():
    from numba import njit

    @njit(cache=True)
    def matmul2(x, a):
        rows, inner = x.shape
        cols = a.shape[1]
        out = np.zeros((rows, cols))
        for i in range(rows):
            for n in range(inner):
                xv = x[i, n]
                for k in range(cols):
                    out[i, k] += xv * a[n, k]
        return out

    @njit(cache=True)
    def mat_pair(x, a, b):
        rows, inner = x.shape
        cols = a.shape[1]
        out_a = np.zeros((rows, cols))
        out_b = np.zeros((rows, cols))
        for i in range(rows):
            for n in range(inner):
                xv = x[i, n]
                for k in range(cols):
                    out_a[i, k] += xv * a[n, k]
                    out_b[i, k] += xv * b[n, k]
        return out_a, out_b

    @njit(cache=True)
    def mat_fuse(p, q, a, b):
        rows, inner = p.shape
        cols = a.shape[1]
        out = np.zeros((rows, cols))
        for i in range(rows):
            for n in range(inner):
                pv = p[i, n]
                qv = q[i, n]
                for k in range(cols):
                    out[i, k] += pv * a[n, k] + qv * b[n, k]
        return out

    @njit(cache=True)
    def scatter_add_rows(out, ids, vals):
        for i in range(ids.shape[0]):
            r = ids[i]
            for j in range(vals.shape[1]):
                out[r, j] += vals[i, j]

    @njit(cache=True)
    def adam_update(param, grad, m, v, lr, beta1, beta2, eps, bc1, bc2):
        for i in range(param.shape[0]):
            g = grad[i]
            m[i] = beta1 * m[i] + (1.0 - beta1) * g
            v[i] = beta2 * v[i] + (1.0 - beta2) * g * g
            param[i] -= lr * (m[i] / bc1) / (np.sqrt(v[i] / bc2) + eps)

    return {
        "matmul2": matmul2,
        "mat_pair": mat_pair,
        "mat_fuse": mat_fuse,
        "scatter_add_rows": scatter_add_rows,
        "adam_update": adam_update,
    }


_NUMPY_IMPL = {
    "matmul2": _numpy_matmul2,
    "mat_pair": _numpy_mat_pair,
    "mat_fuse": _numpy_mat_fuse,
    "scatter_add_rows": _numpy_scatter_add_rows,
    "adam_update": _numpy_adam_update,
}


def _select():
    if _REQUESTED == "numpy":
        return "numpy", _NUMPY_IMPL
    try:
        numba_impl = _build_numba()
    except ImportError:
        if _REQUESTED == "numba":
            raise
        return "numpy", _NUMPY_IMPL
    if _REQUESTED == "numba":
        return "numba", numba_impl
    hybrid = dict(_NUMPY_IMPL)
    for name in _NUMBA_PREFERRED:
        hybrid[name] = numba_impl[name]
    return "auto", hybrid


BACKEND, _IMPL = _select()

matmul2 = _IMPL["matmul2"]
mat_pair = _IMPL["mat_pair"]
mat_fuse = _IMPL["mat_fuse"]
scatter_add_rows = _IMPL["scatter_add_rows"]
adam_update = _IMPL["adam_update"]

numpy_impl = _NUMPY_IMPL
