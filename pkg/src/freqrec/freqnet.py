"""The spectral half of the model: learned filters over two DFT axes.

A FreqMLP is a complex-valued linear layer acting on spectral
coefficients along the feature axis,

    re' = act(W_r re - W_i im + b_r)
    im' = act(W_i re + W_r im + b_i)

i.e. multiplication by the complex matrix W_r + j*W_i plus a complex bias,
with the nonlinearity applied to each part separately. Two dedicated
filters run in the transform/filter/inverse pipeline along different
axes: the global aggregator treats the mini-batch dimension as a signal
(cohort-level rhythms shared across users), while the local refiner
filters each user's own timeline. Their outputs fuse either in parallel
(gamma-weighted sum) or serially (the aggregator output feeds the
refiner), pass the shared feed-forward rule and finally blend with the
attention branch through an alpha-gated residual update.

With W_r = I, W_i = 0, zero biases and identity activation a FreqMLP is
the identity on spectra, making both pipeline stages exact identity maps;
training starts near that transparent point.
"""

from __future__ import annotations

from typing import Dict, Optional

import numpy as np

from .encoder import feed_forward_residual
from .errors import ConfigError, ShapeError
from .spectral import ComplexSpectrum, irdft, rdft
from .tensor import Tensor, normal_param, ones_param, zeros_param

_FILTER_NOISE_STD = 0.02


def _activation(name: str, slope: float):
    if name == "identity":
        return lambda t: t
    if name == "leaky_relu":
        return lambda t: t.leaky_relu(slope)
    if name == "relu":
        return lambda t: t.leaky_relu(0.0)
    if name == "gelu":
        return lambda t: t.gelu()
    raise ConfigError(f"unknown activation {name!r}")


class FreqMLP:
    """Learnable complex linear filter over the feature axis of a spectrum."""

    def __init__(
        self,
        dim: int,
        activation: str = "leaky_relu",
        leaky_slope: float = 0.2,
        rng: Optional[np.random.Generator] = None,
    ):
        self.dim = dim
        self.activation = activation
        self.leaky_slope = leaky_slope
        eye = np.eye(dim)
        if rng is None:
            # exact transparent filter
            self.w_real = Tensor(eye, requires_grad=True)
            self.w_imag = zeros_param((dim, dim))
        else:
            self.w_real = Tensor(
                eye + rng.normal(0.0, _FILTER_NOISE_STD, (dim, dim)), requires_grad=True
            )
            self.w_imag = normal_param(rng, (dim, dim), std=_FILTER_NOISE_STD)
        self.b_real = zeros_param((dim,))
        self.b_imag = zeros_param((dim,))

    @classmethod
    def identity(cls, dim: int) -> "FreqMLP":
        return cls(dim, activation="identity", rng=None)

    def parameters(self, prefix: str = "filter") -> Dict[str, Tensor]:
        return {
            f"{prefix}.w_real": self.w_real,
            f"{prefix}.w_imag": self.w_imag,
            f"{prefix}.b_real": self.b_real,
            f"{prefix}.b_imag": self.b_imag,
        }


def freq_mlp_apply(spectrum: ComplexSpectrum, f: FreqMLP) -> ComplexSpectrum:
    """Filter a spectrum coefficient-wise along the feature axis."""
    if spectrum.real.shape[-1] != f.dim:
        raise ShapeError(
            f"spectrum feature width {spectrum.real.shape[-1]} does not match filter dim {f.dim}"
        )
    act = _activation(f.activation, f.leaky_slope)
    wr_t = f.w_real.transpose()
    wi_t = f.w_imag.transpose()
    re, im = spectrum.real, spectrum.imag
    out_re = act((re @ wr_t) - (im @ wi_t) + f.b_real)
    out_im = act((re @ wi_t) + (im @ wr_t) + f.b_imag)
    return ComplexSpectrum(
        real=out_re, imag=out_im, axis=spectrum.axis, original_length=spectrum.original_length
    )


def global_spectral_aggregator(e: Tensor, f: FreqMLP) -> Tensor:
    """Transform the batch axis, filter, invert: cohort-level smoothing.

    The DFT length is the actual batch size presented, never padded, so
    the output of each row depends on every other row in the batch.
    """
    spectrum = rdft(e, axis=0)
    return irdft(freq_mlp_apply(spectrum, f), check_reality=False)


def local_spectral_refiner(e: Tensor, f: FreqMLP) -> Tensor:
    """The same pipeline along the temporal axis: per-user refinement."""
    spectrum = rdft(e, axis=1)
    return irdft(freq_mlp_apply(spectrum, f), check_reality=False)


class FreqNetBlock:
    """Both spectral filters plus fusion feed-forward and gate weights."""

    def __init__(
        self,
        dim: int,
        ffn_dim: int,
        fusion_mode: str,
        gamma: float,
        alpha: float,
        dropout_rate: float,
        activation: str,
        leaky_slope: float,
        rng: np.random.Generator,
    ):
        if fusion_mode not in ("parallel", "serial"):
            raise ConfigError(f"fusion_mode must be 'parallel' or 'serial', got {fusion_mode!r}")
        if not 0.0 <= gamma <= 1.0 or not 0.0 <= alpha <= 1.0:
            raise ConfigError(f"gamma and alpha must lie in [0, 1], got {gamma}, {alpha}")
        self.fusion_mode = fusion_mode
        self.gamma = gamma
        self.alpha = alpha
        self.dropout_rate = dropout_rate
        self.gsa_filter = FreqMLP(dim, activation, leaky_slope, rng)
        self.lsr_filter = FreqMLP(dim, activation, leaky_slope, rng)
        self.ffn_w1 = normal_param(rng, (dim, ffn_dim))
        self.ffn_b1 = zeros_param((ffn_dim,))
        self.ffn_w2 = normal_param(rng, (ffn_dim, dim))
        self.ffn_b2 = zeros_param((dim,))
        self.ln_gain = ones_param((dim,))
        self.ln_bias = zeros_param((dim,))

    def parameters(self, prefix: str = "freqnet") -> Dict[str, Tensor]:
        params = {
            f"{prefix}.ffn_w1": self.ffn_w1,
            f"{prefix}.ffn_b1": self.ffn_b1,
            f"{prefix}.ffn_w2": self.ffn_w2,
            f"{prefix}.ffn_b2": self.ffn_b2,
            f"{prefix}.ln_gain": self.ln_gain,
            f"{prefix}.ln_bias": self.ln_bias,
        }
        params.update(self.gsa_filter.parameters(f"{prefix}.gsa"))
        params.update(self.lsr_filter.parameters(f"{prefix}.lsr"))
        return params


def freqnet_forward(
    e: Tensor,
    block: FreqNetBlock,
    disable_gsa: bool = False,
    disable_lsr: bool = False,
) -> Tensor:
    """Run both spectral stages and fuse them.

    parallel: FFN((1-gamma)*aggregated + gamma*refined, e)
    serial:   refiner input is e + aggregated; FFN(refined, e)

    A disabled stage becomes a passthrough: its output is replaced by its
    input (in serial mode a disabled aggregator contributes nothing to the
    refiner input, which reduces to e).
    """
    if block.fusion_mode == "parallel":
        aggregated = e if disable_gsa else global_spectral_aggregator(e, block.gsa_filter)
        refined = e if disable_lsr else local_spectral_refiner(e, block.lsr_filter)
        mixed = aggregated * (1.0 - block.gamma) + refined * block.gamma
    else:
        inner = e if disable_gsa else e + global_spectral_aggregator(e, block.gsa_filter)
        mixed = inner if disable_lsr else local_spectral_refiner(inner, block.lsr_filter)
    return feed_forward_residual(
        mixed,
        e,
        block.ffn_w1,
        block.ffn_b1,
        block.ffn_w2,
        block.ffn_b2,
        block.ln_gain,
        block.ln_bias,
    )


def gated_residual_merge(
    x_attention: Tensor,
    x_spectral: Tensor,
    alpha: float,
    ln_gain: Tensor,
    ln_bias: Tensor,
    dropout_rate: float = 0.0,
    training: bool = False,
    rng: Optional[np.random.Generator] = None,
) -> Tensor:
    """Alpha-blend the two branches, then a GELU/dropout residual norm."""
    if not 0.0 <= alpha <= 1.0:
        raise ConfigError(f"alpha must lie in [0, 1], got {alpha}")
    if x_attention.shape != x_spectral.shape:
        raise ShapeError(f"branch shapes disagree: {x_attention.shape} vs {x_spectral.shape}")
    blended = x_attention * (1.0 - alpha) + x_spectral * alpha
    residual = blended.gelu().dropout(dropout_rate, training, rng) + blended
    return residual.layer_norm(ln_gain, ln_bias)
