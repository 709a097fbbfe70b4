"""The full recommender: embedding, two branches, gate, scoring, loss."""

from __future__ import annotations

from typing import Dict, Optional

import numpy as np

from .config import AblationSpec, ModelConfig
from .encoder import AttentionBlock, EmbeddingBlock, embed_sequence, self_attention_branch
from .errors import ShapeError
from .freqnet import FreqNetBlock, freqnet_forward, gated_residual_merge
from .loss import cross_entropy, frequency_loss, total_loss
from .tensor import Tensor, embedding_lookup, ones_param, zeros_param


class FreqRec:
    """Dual-path sequential recommender over a fixed item vocabulary."""

    def __init__(
        self,
        config: ModelConfig,
        item_count: int,
        rng: Optional[np.random.Generator] = None,
        ablation: Optional[AblationSpec] = None,
    ):
        config.validate()
        if item_count < 1:
            raise ShapeError(f"item_count must be >= 1, got {item_count}")
        self.config = config
        self.item_count = item_count
        self.ablation = (ablation or AblationSpec()).validate()
        rng = rng if rng is not None else np.random.default_rng(config.seed)
        ffn_dim = config.resolved_ffn_dim()
        self.embedding = EmbeddingBlock(item_count, config.dim, config.max_len, config.dropout, rng)
        self.attention_blocks = [
            AttentionBlock(config.dim, config.heads, ffn_dim, rng) for _ in range(config.layers)
        ]
        self.freqnet = FreqNetBlock(
            dim=config.dim,
            ffn_dim=ffn_dim,
            fusion_mode=config.fusion,
            gamma=config.gamma,
            alpha=config.alpha,
            dropout_rate=config.dropout,
            activation=config.activation,
            leaky_slope=config.leaky_slope,
            rng=rng,
        )
        self.merge_ln_gain = ones_param((config.dim,))
        self.merge_ln_bias = zeros_param((config.dim,))

    # -- parameter access -------------------------------------------------

    def parameters(self) -> Dict[str, Tensor]:
        params = self.embedding.parameters("embed")
        for i, block in enumerate(self.attention_blocks):
            params.update(block.parameters(f"attn{i}"))
        params.update(self.freqnet.parameters("freqnet"))
        params["merge.ln_gain"] = self.merge_ln_gain
        params["merge.ln_bias"] = self.merge_ln_bias
        return params

    def zero_padding_row(self) -> None:
        """Keep the padding embedding silent; call after every update."""
        self.embedding.item_table.data[0, :] = 0.0

    def effective_alpha(self) -> float:
        if self.ablation.disable_sa:
            return 1.0
        return self.config.alpha

    def effective_beta(self) -> float:
        if self.ablation.disable_freq_loss:
            return 1.0
        if self.ablation.disable_ce_loss:
            return 0.0
        return self.config.beta

    # -- forward ------------------------------------------------------------

    def forward(
        self,
        input_ids: np.ndarray,
        training: bool = False,
        rng: Optional[np.random.Generator] = None,
    ) -> Tensor:
        """Hidden states (batch, max_len, dim) for a batch of id rows."""
        input_ids = np.asarray(input_ids, dtype=np.int64)
        pad_mask = input_ids != 0
        e = embed_sequence(input_ids, self.embedding, training, rng)
        x_attn = e
        for block in self.attention_blocks:
            x_attn = self_attention_branch(x_attn, block, pad_mask, training, rng)
        x_freq = freqnet_forward(
            e,
            self.freqnet,
            disable_gsa=self.ablation.disable_gsa,
            disable_lsr=self.ablation.disable_lsr,
        )
        return gated_residual_merge(
            x_attn,
            x_freq,
            self.effective_alpha(),
            self.merge_ln_gain,
            self.merge_ln_bias,
            dropout_rate=self.config.dropout,
            training=training,
            rng=rng,
        )

    def scores(self, hidden: Tensor) -> Tensor:
        """Similarity of hidden states against all real items (ids 1..V)."""
        return hidden @ self.embedding.item_table.slice0(1).transpose()

    def predict_scores(self, input_ids: np.ndarray) -> np.ndarray:
        """Eval-mode scores at the final position, (batch, item_count)."""
        hidden = self.forward(input_ids, training=False)
        last = hidden.data[:, -1, :]
        return last @ self.embedding.item_table.data[1:].T

    # -- objective ------------------------------------------------------------

    def batch_loss(
        self,
        input_ids: np.ndarray,
        target_ids: np.ndarray,
        valid_mask: np.ndarray,
        training: bool = True,
        rng: Optional[np.random.Generator] = None,
    ) -> tuple[Tensor, float, float]:
        """Total loss tensor plus the raw (ce, lf) values for logging.

        At the exact blend endpoints the unused term is skipped entirely,
        so beta=1 training is bit-identical to an objective without the
        spectral term (and symmetrically for beta=0).
        """
        hidden = self.forward(input_ids, training=training, rng=rng)
        beta = self.effective_beta()
        table = self.embedding.item_table
        ce = lf = None
        if beta > 0.0:
            ce = cross_entropy(hidden, table, target_ids, valid_mask)
        if beta < 1.0:
            target_emb = embedding_lookup(table, target_ids)
            if self.config.detach_target:
                target_emb = target_emb.detach()
            lf = frequency_loss(hidden, target_emb, self.config.distance)
        if ce is None:
            return lf, 0.0, lf.item()
        if lf is None:
            return ce, ce.item(), 0.0
        return total_loss(ce, lf, beta), ce.item(), lf.item()
