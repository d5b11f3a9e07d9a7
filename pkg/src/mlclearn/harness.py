"""Experiment harness: metric evaluation, single training runs, and
k-fold cross-validation over a regularization grid.

Reports embed the fully resolved configuration and seed; CSV bodies are
rendered with shortest round-trip decimals so equal configurations
produce byte-identical output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, fit_zscore, make_folds
from .errors import InvalidInputError
from .linear import LinearModel, score_matrix
from .losses import BaseLoss
from .optim import TrainConfig, TrainTrace, svrg_bb_train

DEFAULT_LAMBDA_GRID = (1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0)
MEASURES = ("hamming", "subset_accuracy", "ranking")
# lower is better for losses, higher for accuracy
_MEASURE_SIGN = {"hamming": 1.0, "subset_accuracy": -1.0, "ranking": 1.0}


@dataclass(frozen=True)
class Metrics:
    hamming: float
    subset_accuracy: float
    ranking: float | None
    ranking_degenerate: int
    oracle_hamming: float  # diagnostic: best prefix-threshold Hamming loss

    def as_dict(self) -> dict:
        return {
            "hamming": self.hamming,
            "subset_accuracy": self.subset_accuracy,
            "ranking": self.ranking,
            "ranking_degenerate": self.ranking_degenerate,
            "oracle_hamming": self.oracle_hamming,
        }


def evaluate_model(model: LinearModel, dataset: Dataset) -> Metrics:
    """Mean Hamming loss, subset accuracy and ranking loss of the sign
    classifier over the dataset; ranking averages skip degenerate rows."""
    F = score_matrix(model, dataset.dense_features())
    Y = dataset.labels
    pred = np.where(F > 0.0, 1.0, -1.0)
    mism = pred != Y
    hamming = float(mism.mean())
    subset_acc = float(1.0 - mism.any(axis=1).mean())

    c = dataset.n_labels
    posmask = Y > 0
    npos = posmask.sum(axis=1)
    nondeg = (npos > 0) & (npos < c)
    degenerate = int(np.sum(~nondeg))
    if degenerate < dataset.n_samples:
        pairmask = posmask[:, :, None] & ~posmask[:, None, :]
        comp = F[:, :, None] <= F[:, None, :]
        pair_counts = np.where(nondeg, npos * (c - npos), 1)
        per_row = (comp & pairmask).sum(axis=(1, 2)) / pair_counts
        ranking = float(per_row[nondeg].mean())
    else:
        ranking = None

    order = np.argsort(-F, axis=1, kind="stable")
    sorted_pos = np.take_along_axis(posmask, order, axis=1)
    deltas = np.where(sorted_pos, -1, 1)
    prefix = np.concatenate(
        [np.zeros((Y.shape[0], 1), dtype=int), np.cumsum(deltas, axis=1)], axis=1
    ) + npos[:, None]
    oracle = float(prefix.min(axis=1).mean() / c)
    return Metrics(hamming, subset_acc, ranking, degenerate, oracle)


@dataclass(frozen=True)
class ExperimentSpec:
    learner: str = "hamming"
    lambda_grid: tuple = DEFAULT_LAMBDA_GRID
    folds: int = 3
    seed: int = 0
    eta0: float = 0.05
    inner_steps: int | None = None
    outer_epochs: int = 30
    base_loss: str = "hinge"
    normalization: str = "per-fold"  # per-fold | full | none
    include_bias: bool = False

    def __post_init__(self):
        if not self.lambda_grid:
            raise InvalidInputError("lambda grid must be nonempty")
        if self.folds < 2:
            raise InvalidInputError("need k >= 2 folds")
        if self.normalization not in ("per-fold", "full", "none"):
            raise InvalidInputError(f"unknown normalization {self.normalization!r}")

    def train_config(self, lam: float) -> TrainConfig:
        return TrainConfig(
            learner=self.learner,
            lam=lam,
            eta0=self.eta0,
            inner_steps=self.inner_steps,
            outer_epochs=self.outer_epochs,
            seed=self.seed,
            base_loss=BaseLoss.from_name(self.base_loss),
            include_bias=self.include_bias,
        )

    def resolved(self) -> dict:
        return {
            "learner": self.learner,
            "lambda_grid": list(self.lambda_grid),
            "folds": self.folds,
            "seed": self.seed,
            "eta0": self.eta0,
            "inner_steps": self.inner_steps,
            "outer_epochs": self.outer_epochs,
            "base_loss": self.base_loss,
            "normalization": self.normalization,
            "include_bias": self.include_bias,
        }


def run_train(
    dataset: Dataset, config: TrainConfig, test_dataset: Dataset | None = None
) -> tuple[LinearModel, TrainTrace, dict]:
    """Train on the full dataset; returns the model, its trace and a
    metrics dict (train metrics, plus test metrics when a split is given)."""
    model, trace = svrg_bb_train(dataset, config)
    out = {"train": evaluate_model(model, dataset).as_dict()}
    if test_dataset is not None:
        out["test"] = evaluate_model(model, test_dataset).as_dict()
    return model, trace, out


@dataclass
class CvCell:
    fold: int
    lam: float
    train_objective: float
    metrics: Metrics


@dataclass
class CvReport:
    dataset_name: str
    cells: list[CvCell]
    per_lambda: dict  # lam -> measure -> (mean, std)
    selected_lambda: dict  # measure -> lam
    summary: dict  # measure -> {lambda, mean, std}
    config: dict
    fold_seed: int

    def to_csv(self, learner: str | None = None) -> str:
        learner = learner or self.config["learner"]
        lines = ["dataset,learner,lambda,fold,hamming,subset_acc,ranking,degenerate_count"]
        for cell in sorted(self.cells, key=lambda cl: (cl.fold, cl.lam)):
            ranking = "" if cell.metrics.ranking is None else repr(cell.metrics.ranking)
            lines.append(
                f"{self.dataset_name},{learner},{cell.lam!r},{cell.fold},"
                f"{cell.metrics.hamming!r},{cell.metrics.subset_accuracy!r},"
                f"{ranking},{cell.metrics.ranking_degenerate}"
            )
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset_name,
            "config": self.config,
            "fold_seed": self.fold_seed,
            "cells": [
                {
                    "fold": cell.fold,
                    "lambda": cell.lam,
                    "train_objective": cell.train_objective,
                    **cell.metrics.as_dict(),
                }
                for cell in sorted(self.cells, key=lambda cl: (cl.fold, cl.lam))
            ],
            "per_lambda": {
                repr(lam): {m: {"mean": mv[0], "std": mv[1]} for m, mv in inner.items()}
                for lam, inner in sorted(self.per_lambda.items())
            },
            "selected_lambda": self.selected_lambda,
            "summary": self.summary,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def select_lambda(per_lambda: dict, measure: str) -> float:
    """Best grid point for one measure over per-λ mean values: smallest
    loss / largest accuracy, ties to the smaller λ."""
    sign = _MEASURE_SIGN[measure]
    best = None
    for lam in sorted(per_lambda):
        mean = per_lambda[lam][measure][0]
        if mean is None:
            continue
        key = sign * mean
        if best is None or key < best[0] - 1e-15:
            best = (key, lam)
    if best is None:
        raise InvalidInputError(f"no finite values for measure {measure!r}")
    return best[1]


def _mean_std(values: list) -> tuple:
    vals = [v for v in values if v is not None]
    if not vals:
        return None, None
    arr = np.asarray(vals, dtype=float)
    return float(arr.mean()), float(arr.std())  # population std over folds


def run_cv(dataset: Dataset, spec: ExperimentSpec, dataset_name: str = "dataset") -> CvReport:
    """k-fold cross-validation over the λ grid.

    Per fold: normalization stats are fit on the train part only (default
    mode), every λ is trained on the train part and scored on the
    held-out part. 'full' mode normalizes the whole dataset once up
    front, matching the common published setup at the cost of leaking
    feature moments across the split.
    """
    if spec.normalization == "full":
        working, _ = _normalize_full(dataset)
    else:
        working = dataset
    plan = make_folds(dataset.n_samples, spec.folds, spec.seed)

    cells = []
    for fold in range(spec.folds):
        train = working.subset(plan.train_indices(fold))
        test = working.subset(plan.test_indices(fold))
        if spec.normalization == "per-fold":
            stats = fit_zscore(train)
            train = stats.apply(train)
            test = stats.apply(test)
        for lam in spec.lambda_grid:
            config = spec.train_config(lam)
            model, trace = svrg_bb_train(train, config)
            metrics = evaluate_model(model, test)
            cells.append(CvCell(fold, lam, trace.rows[-1].objective, metrics))

    per_lambda = {}
    for lam in spec.lambda_grid:
        fold_cells = [cl for cl in cells if cl.lam == lam]
        per_lambda[lam] = {
            "hamming": _mean_std([cl.metrics.hamming for cl in fold_cells]),
            "subset_accuracy": _mean_std(
                [cl.metrics.subset_accuracy for cl in fold_cells]
            ),
            "ranking": _mean_std([cl.metrics.ranking for cl in fold_cells]),
        }
    selected = {m: select_lambda(per_lambda, m) for m in MEASURES}
    summary = {
        m: {
            "lambda": selected[m],
            "mean": per_lambda[selected[m]][m][0],
            "std": per_lambda[selected[m]][m][1],
        }
        for m in MEASURES
    }
    return CvReport(
        dataset_name=dataset_name,
        cells=cells,
        per_lambda=per_lambda,
        selected_lambda=selected,
        summary=summary,
        config=spec.resolved(),
        fold_seed=spec.seed,
    )


def _normalize_full(dataset: Dataset):
    stats = fit_zscore(dataset)
    return stats.apply(dataset), stats
