"""Real-input one-sided DFT and inverse along an arbitrary axis.

A length-L real signal maps to K = floor(L/2)+1 complex coefficients

    real[k] =  sum_n x[n] cos(2*pi*k*n/L)
    imag[k] = -sum_n x[n] sin(2*pi*k*n/L)

(forward unnormalized). The inverse expands the stored coefficients by
conjugate symmetry to all L frequencies, applies the 1/L-normalized
inverse sum, and returns the (exactly real) time signal:

    x[n] = (1/L) * sum_k w_k * (real[k] cos(2*pi*k*n/L) - imag[k] sin(...))

with w_k = 2 for interior coefficients and w_k = 1 at DC and, for even L,
at the Nyquist index. Both directions are linear maps evaluated through
cached basis matrices, so each is its own adjoint rule under transposition
and the pair is differentiable end to end.

The sums are evaluated directly (no FFT); at the sequence lengths this
package targets the basis product is fast enough and keeps the
coefficients bit-comparable to a literal double-loop evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .errors import ShapeError, SpectrumError
from .tensor import Tensor

_REALITY_TOL = 1e-9


@lru_cache(maxsize=None)
def _forward_bases(length: int) -> tuple[np.ndarray, np.ndarray]:
    """(L, K) cosine and negative-sine analysis matrices."""
    k_count = length // 2 + 1
    n = np.arange(length)[:, None]
    k = np.arange(k_count)[None, :]
    angles = 2.0 * np.pi * k * n / length
    sin_b = -np.sin(angles)
    # sin(pi*n) evaluates to ~1e-16 instead of 0; pin the structurally
    # real coefficients (DC, and Nyquist for even lengths) to exact zero
    sin_b[:, 0] = 0.0
    if length % 2 == 0:
        sin_b[:, -1] = 0.0
    return np.cos(angles), sin_b


@lru_cache(maxsize=None)
def _inverse_bases(length: int) -> tuple[np.ndarray, np.ndarray]:
    """(K, L) synthesis matrices carrying the 1/L norm and symmetry weights."""
    k_count = length // 2 + 1
    weights = np.full(k_count, 2.0)
    weights[0] = 1.0
    if length % 2 == 0:
        weights[-1] = 1.0
    n = np.arange(length)[None, :]
    k = np.arange(k_count)[:, None]
    angles = 2.0 * np.pi * k * n / length
    scale = weights[:, None] / length
    isin = -np.sin(angles) * scale
    isin[0, :] = 0.0  # these coefficients multiply sines that vanish exactly
    if length % 2 == 0:
        isin[-1, :] = 0.0
    return np.cos(angles) * scale, isin


@dataclass
class ComplexSpectrum:
    """One-sided DFT coefficients of a real signal, split into parts.

    `real` and `imag` share a shape whose `axis` extent is
    floor(original_length/2)+1. Spectra produced by `rdft` have zero
    imaginary part at DC (and at Nyquist for even lengths); learned
    filters may break that, which the inverse tolerates on request.
    """

    real: Tensor
    imag: Tensor
    axis: int
    original_length: int

    @property
    def coefficient_count(self) -> int:
        return self.original_length // 2 + 1


def _resolve_axis(ndim: int, axis: int) -> int:
    if not -ndim <= axis < ndim:
        raise ShapeError(f"axis {axis} invalid for a rank-{ndim} tensor")
    return axis % ndim


def _to_matrix(data: np.ndarray, axis: int) -> np.ndarray:
    """Move `axis` last and flatten the rest, yielding (M, extent)."""
    moved = np.moveaxis(data, axis, -1)
    return np.ascontiguousarray(moved.reshape(-1, moved.shape[-1])), moved.shape


def _from_matrix(mat: np.ndarray, moved_shape: tuple, axis: int, extent: int) -> np.ndarray:
    out = mat.reshape(moved_shape[:-1] + (extent,))
    return np.moveaxis(out, -1, axis)


def rdft(x: Tensor, axis: int = -1) -> ComplexSpectrum:
    """One-sided DFT of a real tensor along `axis`."""
    axis = _resolve_axis(x.ndim, axis)
    length = x.shape[axis]
    if length < 1:
        raise ShapeError(f"cannot transform an empty axis (shape {x.shape})")
    cos_b, sin_b = _forward_bases(length)
    k_count = cos_b.shape[1]
    mat, moved_shape = _to_matrix(x.data, axis)
    re_mat, im_mat = _kernels.mat_pair(mat, cos_b, sin_b)

    def bw_real(g):
        g_mat, _ = _to_matrix(g, axis)
        x._accumulate(_from_matrix(_kernels.matmul2(g_mat, cos_b.T), moved_shape, axis, length))

    def bw_imag(g):
        g_mat, _ = _to_matrix(g, axis)
        x._accumulate(_from_matrix(_kernels.matmul2(g_mat, sin_b.T), moved_shape, axis, length))

    real = Tensor._from_op(_from_matrix(re_mat, moved_shape, axis, k_count), (x,), bw_real)
    imag = Tensor._from_op(_from_matrix(im_mat, moved_shape, axis, k_count), (x,), bw_imag)
    return ComplexSpectrum(real=real, imag=imag, axis=axis, original_length=length)


def irdft(spectrum: ComplexSpectrum, check_reality: bool = True) -> Tensor:
    """Inverse one-sided DFT, recovering a real signal of the original length.

    With `check_reality` the DC (and even-length Nyquist) imaginary
    coefficients must vanish, as they do for any spectrum of a real
    signal. Filtered spectra may carry nonzero values there; those
    coefficients multiply sine terms that are identically zero, so the
    inverse ignores them (and their gradient is exactly zero). Pass
    `check_reality=False` to accept such spectra.
    """
    axis = spectrum.axis
    length = spectrum.original_length
    real, imag = spectrum.real, spectrum.imag
    k_count = length // 2 + 1
    if real.shape != imag.shape:
        raise SpectrumError(f"real/imag shapes disagree: {real.shape} vs {imag.shape}")
    if real.shape[axis] != k_count:
        raise SpectrumError(
            f"axis {axis} holds {real.shape[axis]} coefficients, expected {k_count} "
            f"for original length {length}"
        )
    if check_reality:
        scale = max(1.0, float(np.abs(real.data).max()), float(np.abs(imag.data).max()))
        dc = np.abs(np.take(imag.data, 0, axis=axis)).max()
        if dc > _REALITY_TOL * scale:
            raise SpectrumError(f"imaginary DC coefficient is {dc:.3e}, expected 0")
        if length % 2 == 0 and length > 1:
            nyq = np.abs(np.take(imag.data, k_count - 1, axis=axis)).max()
            if nyq > _REALITY_TOL * scale:
                raise SpectrumError(f"imaginary Nyquist coefficient is {nyq:.3e}, expected 0")

    icos, isin = _inverse_bases(length)
    re_mat, moved_shape = _to_matrix(real.data, axis)
    im_mat, _ = _to_matrix(imag.data, axis)
    out_mat = _kernels.mat_fuse(re_mat, im_mat, icos, isin)

    def bw(g):
        g_mat, _ = _to_matrix(g, axis)
        g_re, g_im = _kernels.mat_pair(g_mat, icos.T, isin.T)
        real._accumulate(_from_matrix(g_re, moved_shape, axis, k_count))
        imag._accumulate(_from_matrix(g_im, moved_shape, axis, k_count))

    return Tensor._from_op(_from_matrix(out_mat, moved_shape, axis, length), (real, imag), bw)


def spectral_energy(spectrum: ComplexSpectrum) -> float:
    """Symmetry-weighted power: |C_0|^2 [+ |C_{L/2}|^2] + 2*sum of interior |C_k|^2.

    Equals `L * sum(x**2)` for the spectrum of any real signal x
    (Parseval). Summed over all non-transform axes as well.
    """
    length = spectrum.original_length
    k_count = length // 2 + 1
    weights = np.full(k_count, 2.0)
    weights[0] = 1.0
    if length % 2 == 0:
        weights[-1] = 1.0
    shape = [1] * spectrum.real.ndim
    shape[spectrum.axis] = k_count
    w = weights.reshape(shape)
    power = spectrum.real.data**2 + spectrum.imag.data**2
    return float((w * power).sum())
