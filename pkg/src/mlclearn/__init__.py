"""Multi-label classification toolkit: surrogate-loss learners for the
Hamming / subset / ranking measures, generalization-bound evaluation, and
executable certification of the inter-loss inequalities."""

from .losses import (
    BaseLoss,
    HAMMING,
    RANKING,
    SUBSET,
    hamming_loss_01,
    ranking_loss_01,
    subset_loss_01,
    surrogate_hamming,
    surrogate_ranking,
    surrogate_subgrad,
    surrogate_subset,
)
from .linear import LinearModel, classify_sign, load_model, oracle_threshold, save_model, score
from .data import Dataset, load_dense_csv, load_multilabel_svm, make_folds, normalize_zscore
from .optim import TrainConfig, batch_reference_train, objective, svrg_bb_train

__version__ = "0.1.0"

__all__ = [
    "BaseLoss",
    "HAMMING",
    "SUBSET",
    "RANKING",
    "hamming_loss_01",
    "subset_loss_01",
    "ranking_loss_01",
    "surrogate_hamming",
    "surrogate_subset",
    "surrogate_ranking",
    "surrogate_subgrad",
    "LinearModel",
    "classify_sign",
    "score",
    "oracle_threshold",
    "save_model",
    "load_model",
    "Dataset",
    "load_multilabel_svm",
    "load_dense_csv",
    "normalize_zscore",
    "make_folds",
    "TrainConfig",
    "objective",
    "svrg_bb_train",
    "batch_reference_train",
    "__version__",
]
