"""Independent finite-difference gradient oracle.

Deliberately knows nothing about the autodiff engine: it evaluates a
scalar-valued callable on perturbed copies of a raw numpy array. Used by
the test suite to cross-check every analytic backward rule.
"""

from __future__ import annotations

from typing import Callable

import numpy as np


def finite_diff_grad(
    f: Callable[[np.ndarray], float], x: np.ndarray, h: float = 1e-5
) -> np.ndarray:
    """Central differences (f(x+h*e_i) - f(x-h*e_i)) / (2h) per element."""
    if h <= 0:
        raise ValueError(f"step size must be positive, got {h}")
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = grad.reshape(-1)
    for i in range(x.size):
        probe = x.copy().reshape(-1)
        probe[i] += h
        f_plus = float(f(probe.reshape(x.shape)))
        probe[i] -= 2 * h
        f_minus = float(f(probe.reshape(x.shape)))
        flat[i] = (f_plus - f_minus) / (2 * h)
    return grad


def max_relative_gap(analytic: np.ndarray, numeric: np.ndarray, atol: float = 1e-5) -> float:
    """Worst-case |a - n| / max(|a|, |n|, floor) over all elements.

    The floor keeps central-difference noise (~1e-10 absolute at h=1e-5 on
    O(1) losses) from dominating the ratio on near-zero components; those
    are still held to `rtol * floor` absolutely.
    """
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), atol)
    return float(np.max(np.abs(a - n) / denom))


def assert_gradients_close(
    analytic: np.ndarray,
    numeric: np.ndarray,
    rtol: float = 1e-4,
    atol: float = 1e-5,
    label: str = "",
) -> None:
    gap = max_relative_gap(analytic, numeric, atol=atol)
    if gap > rtol:
        raise AssertionError(
            f"gradient mismatch{' for ' + label if label else ''}: "
            f"max relative gap {gap:.3e} exceeds {rtol:.1e}"
        )
