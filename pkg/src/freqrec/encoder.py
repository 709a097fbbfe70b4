"""Sequence embedding and the causal self-attention branch.

Item ids are embedded (row 0 is the all-zero padding row), shifted by a
learned positional table, layer-normalized and dropped out. The attention
branch runs masked multi-head attention and feeds the residual stream
through the shared position-wise feed-forward rule.
"""

from __future__ import annotations

from typing import Dict, Optional

import numpy as np

from .errors import ShapeError
from .tensor import (
    Tensor,
    embedding_lookup,
    normal_param,
    ones_param,
    zeros_param,
)

_MASKED_SCORE = -1e9


class EmbeddingBlock:
    """Item + positional embedding tables with their layer norm."""

    def __init__(
        self,
        item_count: int,
        dim: int,
        max_len: int,
        dropout_rate: float,
        rng: np.random.Generator,
    ):
        self.item_count = item_count
        self.dim = dim
        self.max_len = max_len
        self.dropout_rate = dropout_rate
        self.item_table = normal_param(rng, (item_count + 1, dim))
        self.item_table.data[0, :] = 0.0  # padding row carries no signal
        self.position_table = normal_param(rng, (max_len, dim))
        self.ln_gain = ones_param((dim,))
        self.ln_bias = zeros_param((dim,))

    def parameters(self, prefix: str = "embed") -> Dict[str, Tensor]:
        return {
            f"{prefix}.item_table": self.item_table,
            f"{prefix}.position_table": self.position_table,
            f"{prefix}.ln_gain": self.ln_gain,
            f"{prefix}.ln_bias": self.ln_bias,
        }


def embed_sequence(
    ids: np.ndarray,
    block: EmbeddingBlock,
    training: bool = False,
    rng: Optional[np.random.Generator] = None,
) -> Tensor:
    """dropout(layer_norm(item_lookup + positional)) for a batch of id rows."""
    ids = np.asarray(ids, dtype=np.int64)
    if ids.ndim != 2 or ids.shape[1] != block.max_len:
        raise ShapeError(f"ids must be (batch, {block.max_len}), got {ids.shape}")
    e = embedding_lookup(block.item_table, ids) + block.position_table
    e = e.layer_norm(block.ln_gain, block.ln_bias)
    return e.dropout(block.dropout_rate, training, rng)


class AttentionBlock:
    """One multi-head causal attention layer plus its feed-forward stage."""

    def __init__(self, dim: int, head_count: int, ffn_dim: int, rng: np.random.Generator):
        if dim % head_count != 0:
            raise ShapeError(f"head_count {head_count} must divide dim {dim}")
        self.dim = dim
        self.head_count = head_count
        self.head_dim = dim // head_count
        self.w_query = normal_param(rng, (dim, dim))
        self.w_key = normal_param(rng, (dim, dim))
        self.w_value = normal_param(rng, (dim, dim))
        self.w_out = normal_param(rng, (dim, dim))
        self.ffn_w1 = normal_param(rng, (dim, ffn_dim))
        self.ffn_b1 = zeros_param((ffn_dim,))
        self.ffn_w2 = normal_param(rng, (ffn_dim, dim))
        self.ffn_b2 = zeros_param((dim,))
        self.ln_gain = ones_param((dim,))
        self.ln_bias = zeros_param((dim,))

    def parameters(self, prefix: str = "attn") -> Dict[str, Tensor]:
        return {
            f"{prefix}.w_query": self.w_query,
            f"{prefix}.w_key": self.w_key,
            f"{prefix}.w_value": self.w_value,
            f"{prefix}.w_out": self.w_out,
            f"{prefix}.ffn_w1": self.ffn_w1,
            f"{prefix}.ffn_b1": self.ffn_b1,
            f"{prefix}.ffn_w2": self.ffn_w2,
            f"{prefix}.ffn_b2": self.ffn_b2,
            f"{prefix}.ln_gain": self.ln_gain,
            f"{prefix}.ln_bias": self.ln_bias,
        }


def feed_forward_residual(
    x: Tensor,
    extra: Optional[Tensor],
    w1: Tensor,
    b1: Tensor,
    w2: Tensor,
    b2: Tensor,
    ln_gain: Tensor,
    ln_bias: Tensor,
) -> Tensor:
    """The uniform two-argument feed-forward rule.

    layer_norm(pointwise_ffn(x) + x + extra); `extra` joins the residual
    stream and may be omitted (the single-argument form).
    """
    hidden = ((x @ w1) + b1).gelu() @ w2 + b2
    resid = hidden + x
    if extra is not None:
        resid = resid + extra
    return resid.layer_norm(ln_gain, ln_bias)


def attention_masks(pad_mask: np.ndarray) -> np.ndarray:
    """Boolean (B, 1, L, L) mask, true where attention is disallowed.

    Combines strict causality (queries never see later positions) with
    key-side padding (real positions never attend to padding).
    """
    pad_mask = np.asarray(pad_mask, dtype=bool)
    batch, length = pad_mask.shape
    causal = np.triu(np.ones((length, length), dtype=bool), k=1)
    key_pad = ~pad_mask[:, None, None, :]
    return causal[None, None, :, :] | key_pad


def self_attention_branch(
    e: Tensor,
    block: AttentionBlock,
    pad_mask: np.ndarray,
    training: bool = False,
    rng: Optional[np.random.Generator] = None,
) -> Tensor:
    """Masked multi-head attention over `e`, then the feed-forward stage."""
    batch, length, dim = e.shape
    if dim != block.dim:
        raise ShapeError(f"input feature width {dim} does not match block dim {block.dim}")
    heads, head_dim = block.head_count, block.head_dim

    def split(x: Tensor) -> Tensor:
        return x.reshape(batch, length, heads, head_dim).transpose(0, 2, 1, 3)

    q = split(e @ block.w_query)
    k = split(e @ block.w_key)
    v = split(e @ block.w_value)
    scores = (q @ k.transpose(0, 1, 3, 2)) * (1.0 / np.sqrt(head_dim))
    scores = scores.masked_fill(attention_masks(pad_mask), _MASKED_SCORE)
    weights = scores.softmax(axis=-1)
    context = (weights @ v).transpose(0, 2, 1, 3).reshape(batch, length, dim)
    attended = context @ block.w_out
    return feed_forward_residual(
        attended + e,
        None,
        block.ffn_w1,
        block.ffn_b1,
        block.ffn_w2,
        block.ffn_b2,
        block.ln_gain,
        block.ln_bias,
    )
