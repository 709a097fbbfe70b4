"""freqrec: dual-path spectral sequential recommender with its own autodiff engine."""

from ._kernels import BACKEND
from .config import AblationSpec, ModelConfig
from .data import (
    Batch,
    InteractionDataset,
    generate_synthetic,
    leave_one_out_split,
    load_interactions,
    make_batches,
    sparsity_buckets,
    write_interactions,
)
from .errors import (
    ConfigError,
    DataFormatError,
    FreqRecError,
    GraphError,
    ShapeError,
    SpectrumError,
)
from .evaluation import MetricsReport, evaluate, hr_at_k, ndcg_at_k, rank_of_target, run_ablation
from .freqnet import (
    FreqMLP,
    FreqNetBlock,
    freq_mlp_apply,
    freqnet_forward,
    gated_residual_merge,
    global_spectral_aggregator,
    local_spectral_refiner,
)
from .gradcheck import finite_diff_grad
from .loss import cross_entropy, distance, frequency_loss, total_loss
from .model import FreqRec
from .optim import Adam
from .spectral import ComplexSpectrum, irdft, rdft, spectral_energy
from .tensor import Tensor, embedding_lookup
from .training import TrainLog, graft_freq_loss, grid_search, train

__version__ = "0.1.0"

__all__ = [
    "AblationSpec",
    "Adam",
    "BACKEND",
    "Batch",
    "ComplexSpectrum",
    "ConfigError",
    "DataFormatError",
    "FreqMLP",
    "FreqNetBlock",
    "FreqRec",
    "FreqRecError",
    "GraphError",
    "InteractionDataset",
    "MetricsReport",
    "ModelConfig",
    "ShapeError",
    "SpectrumError",
    "Tensor",
    "TrainLog",
    "cross_entropy",
    "distance",
    "embedding_lookup",
    "evaluate",
    "finite_diff_grad",
    "freq_mlp_apply",
    "freqnet_forward",
    "frequency_loss",
    "gated_residual_merge",
    "generate_synthetic",
    "global_spectral_aggregator",
    "graft_freq_loss",
    "grid_search",
    "hr_at_k",
    "irdft",
    "leave_one_out_split",
    "load_interactions",
    "local_spectral_refiner",
    "make_batches",
    "ndcg_at_k",
    "rank_of_target",
    "rdft",
    "run_ablation",
    "sparsity_buckets",
    "spectral_energy",
    "total_loss",
    "train",
    "write_interactions",
]
