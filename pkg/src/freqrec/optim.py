"""Adam optimizer over named parameter tensors."""

from __future__ import annotations

from typing import Dict

import numpy as np

from . import _kernels
from .errors import ShapeError
from .tensor import Tensor


class Adam:
    """Standard Adam with bias-corrected first/second moments.

    Moments are kept per parameter with matching shapes; `step_count`
    increases by exactly one per `step()` call. Parameters whose gradient
    is absent (or zero) are left unchanged.
    """

    def __init__(
        self,
        params: Dict[str, Tensor],
        lr: float = 5e-4,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.first_moment = {k: np.zeros_like(p.data) for k, p in params.items()}
        self.second_moment = {k: np.zeros_like(p.data) for k, p in params.items()}

    def step(self) -> None:
        self.step_count += 1
        bc1 = 1.0 - self.beta1**self.step_count
        bc2 = 1.0 - self.beta2**self.step_count
        for name, p in self.params.items():
            if p.grad is None:
                continue
            if p.grad.shape != p.data.shape:
                raise ShapeError(
                    f"gradient shape {p.grad.shape} does not match parameter "
                    f"{name!r} with shape {p.data.shape}"
                )
            # parameters stay C-contiguous for their lifetime, so the
            # raveled views below write through to the original buffers
            _kernels.adam_update(
                p.data.reshape(-1),
                np.ascontiguousarray(p.grad.reshape(-1)),
                self.first_moment[name].reshape(-1),
                self.second_moment[name].reshape(-1),
                self.lr,
                self.beta1,
                self.beta2,
                self.eps,
                bc1,
                bc2,
            )

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.grad = None
