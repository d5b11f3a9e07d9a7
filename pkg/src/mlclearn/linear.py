"""Linear score models, sign classification, the oracle prefix-threshold
rule, and a round-trip-exact text serialization format.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InvalidInputError, ParseError
from .losses import as_label_vector, as_score_vector

MODEL_MAGIC = "mlclearn-linear-model"
MODEL_VERSION = 1


@dataclass(frozen=True)
class LinearModel:
    """Weight matrix W of shape (p, c): scores are W^T x.

    When ``include_bias`` is set, the last row of W multiplies an implicit
    constant-1 feature appended to raw inputs of dimension p - 1. The
    bias row is part of the Frobenius norm.
    """

    weights: np.ndarray
    include_bias: bool = False

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2 or w.size == 0:
            raise InvalidInputError("weights must be a nonempty 2-d matrix")
        if not np.all(np.isfinite(w)):
            raise InvalidInputError("weights must be finite")
        object.__setattr__(self, "weights", w)

    @property
    def n_inputs(self) -> int:
        """Dimension of raw feature vectors accepted by score()."""
        return self.weights.shape[0] - (1 if self.include_bias else 0)

    @property
    def n_labels(self) -> int:
        return self.weights.shape[1]

    def norm(self) -> float:
        """Frobenius norm of W, i.e. sqrt(sum_j ||w_j||^2)."""
        return float(np.linalg.norm(self.weights))

    def augment(self, X: np.ndarray) -> np.ndarray:
        """Append the constant-1 column when the model carries a bias row."""
        X = np.asarray(X, dtype=float)
        if not self.include_bias:
            return X
        if X.ndim == 1:
            return np.concatenate([X, [1.0]])
        return np.hstack([X, np.ones((X.shape[0], 1))])

    @classmethod
    def zeros(cls, n_inputs: int, n_labels: int, include_bias: bool = False):
        p = n_inputs + (1 if include_bias else 0)
        return cls(np.zeros((p, n_labels)), include_bias)


def score(model: LinearModel, x) -> np.ndarray:
    """W^T x for a single raw feature vector."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != model.n_inputs:
        raise DimensionMismatchError(
            f"expected feature vector of length {model.n_inputs}, got shape {x.shape}"
        )
    return model.augment(x) @ model.weights


def score_matrix(model: LinearModel, X) -> np.ndarray:
    """Row-wise scores X W for an (n, d) feature matrix."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.n_inputs:
        raise DimensionMismatchError(
            f"expected (n, {model.n_inputs}) feature matrix, got shape {X.shape}"
        )
    return model.augment(X) @ model.weights


def classify_sign(f) -> np.ndarray:
    """sgn with sgn(0) = -1 (and -0.0 treated as 0)."""
    f = as_score_vector(f)
    return np.where(f > 0.0, 1.0, -1.0)


@dataclass(frozen=True)
class ThresholdSplit:
    """A prefix split of the score-sorted label list: the k top-scored
    labels are predicted relevant."""

    k: int
    order: np.ndarray  # label indices sorted by non-ascending score

    def prediction(self) -> np.ndarray:
        pred = np.full(self.order.shape[0], -1.0)
        pred[self.order[: self.k]] = 1.0
        return pred


def oracle_threshold(f, y) -> tuple[ThresholdSplit, np.ndarray, float]:
    """Best-Hamming prefix split of the score-sorted labels.

    Sorts labels by score non-ascending (ties stable by label index),
    evaluates all c + 1 prefix splits against the true labels and returns
    the split with minimal Hamming loss (ties to the smallest k), its
    prediction, and the achieved loss. Evaluation-only oracle: it reads
    the true labels.
    """
    f = as_score_vector(f)
    y = as_label_vector(y)
    if f.shape[0] != y.shape[0]:
        raise DimensionMismatchError(
            f"score length {f.shape[0]} != label length {y.shape[0]}"
        )
    c = f.shape[0]
    order = np.argsort(-f, kind="stable")
    sorted_pos = y[order] > 0
    # mism[k] = label disagreements when the top k are predicted relevant
    deltas = np.where(sorted_pos, -1, 1)
    mism = np.concatenate([[0], np.cumsum(deltas)]) + int(np.sum(sorted_pos))
    k = int(np.argmin(mism))  # argmin takes the first minimum: smallest k
    split = ThresholdSplit(k, order)
    return split, split.prediction(), float(mism[k]) / c


def dump_model(model: LinearModel) -> str:
    """Text serialization; float cells use the shortest round-trip decimal."""
    lines = [
        f"{MODEL_MAGIC} v{MODEL_VERSION}",
        f"d {model.weights.shape[0]}",
        f"c {model.n_labels}",
        f"bias {1 if model.include_bias else 0}",
    ]
    for row in model.weights:
        lines.append(" ".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def parse_model(text: str) -> LinearModel:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(MODEL_MAGIC):
        raise ParseError("not a linear model file", line=1)
    try:
        d = int(lines[1].split()[1])
        c = int(lines[2].split()[1])
        bias = bool(int(lines[3].split()[1]))
    except (IndexError, ValueError) as exc:
        raise ParseError(f"bad model header: {exc}") from exc
    if len(lines) < 4 + d:
        raise ParseError(f"expected {d} weight rows, found {len(lines) - 4}")
    w = np.empty((d, c))
    for i in range(d):
        cells = lines[4 + i].split()
        if len(cells) != c:
            raise ParseError(f"expected {c} values, found {len(cells)}", line=5 + i)
        try:
            w[i] = [float(v) for v in cells]
        except ValueError as exc:
            raise ParseError(str(exc), line=5 + i) from exc
    return LinearModel(w, bias)


def save_model(model: LinearModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_model(model))


def load_model(path) -> LinearModel:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_model(fh.read())
