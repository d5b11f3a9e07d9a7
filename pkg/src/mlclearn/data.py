"""Dataset ingestion (sparse multi-label svm text and dense CSV pairs),
z-score normalization with reusable statistics, and seeded k-fold plans.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import InvalidInputError, ParseError


@dataclass
class Dataset:
    """Sparse feature matrix (n, d) paired with a dense +/-1 label matrix
    (n, c). Immutable by convention once constructed."""

    features: sp.csr_matrix
    labels: np.ndarray
    feature_names: list[str] | None = None
    label_names: list[str] | None = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if not sp.issparse(self.features):
            self.features = sp.csr_matrix(np.asarray(self.features, dtype=float))
        else:
            self.features = self.features.tocsr().astype(float)
        self.labels = np.asarray(self.labels, dtype=float)
        if self.labels.ndim != 2:
            raise InvalidInputError("labels must be a 2-d matrix")
        if self.features.shape[0] != self.labels.shape[0]:
            raise InvalidInputError(
                f"feature rows {self.features.shape[0]} != label rows "
                f"{self.labels.shape[0]}"
            )
        if min(*self.features.shape, self.labels.shape[1]) < 1:
            raise InvalidInputError("n, d and c must all be >= 1")
        if not np.all(np.abs(self.labels) == 1.0):
            raise InvalidInputError("label entries must be exactly -1 or +1")

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_labels(self) -> int:
        return self.labels.shape[1]

    def dense_features(self) -> np.ndarray:
        return np.asarray(self.features.todense(), dtype=float)

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        return Dataset(
            self.features[rows],
            self.labels[rows],
            self.feature_names,
            self.label_names,
            dict(self.provenance, subset=len(rows)),
        )

    def degenerate_mask(self) -> np.ndarray:
        """True for rows with no relevant or no irrelevant label."""
        pos = (self.labels > 0).sum(axis=1)
        return (pos == 0) | (pos == self.n_labels)


def _strip_comment(line: str) -> str:
    hash_pos = line.find("#")
    return line if hash_pos < 0 else line[:hash_pos]


def load_multilabel_svm(path, n_features=None, n_labels=None) -> Dataset:
    """Parse the sparse multi-label text format.

    Each data line is ``l1,l2,... idx:val idx:val ...`` where the leading
    comma-separated integers are the 0-based relevant label ids and the
    0-based feature indices are strictly increasing within a row. A line
    whose first token contains ':' (e.g. one starting with whitespace)
    has no relevant labels. '#' starts a comment; blank lines are skipped.
    """
    rows, cols, vals = [], [], []
    label_sets: list[list[int]] = []
    max_feat = -1
    max_label = -1
    with open(path, "r", encoding="utf-8", newline=None) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = _strip_comment(raw.rstrip("\r\n"))
            if not line.strip():
                continue
            has_label_field = not line[0].isspace()
            tokens = line.split()
            labels_here: list[int] = []
            if has_label_field and tokens and ":" not in tokens[0]:
                label_tok = tokens.pop(0)
                for part in label_tok.split(","):
                    if not part:
                        continue
                    try:
                        lab = int(part)
                    except ValueError as exc:
                        raise ParseError(f"bad label id {part!r}", line=lineno) from exc
                    if lab < 0:
                        raise ParseError(f"negative label id {lab}", line=lineno)
                    if n_labels is not None and lab >= n_labels:
                        raise ParseError(
                            f"label id {lab} out of range for c={n_labels}",
                            line=lineno,
                        )
                    labels_here.append(lab)
                    max_label = max(max_label, lab)
            i = len(label_sets)
            prev_idx = -1
            for tok in tokens:
                try:
                    idx_s, val_s = tok.split(":", 1)
                    idx = int(idx_s)
                    val = float(val_s)
                except ValueError as exc:
                    raise ParseError(f"bad feature token {tok!r}", line=lineno) from exc
                if idx < 0:
                    raise ParseError(f"negative feature index {idx}", line=lineno)
                if idx <= prev_idx:
                    raise ParseError(
                        f"feature index {idx} not strictly increasing", line=lineno
                    )
                if n_features is not None and idx >= n_features:
                    raise ParseError(
                        f"feature index {idx} out of range for d={n_features}",
                        line=lineno,
                    )
                if not np.isfinite(val):
                    raise ParseError(f"non-finite feature value {val_s}", line=lineno)
                prev_idx = idx
                rows.append(i)
                cols.append(idx)
                vals.append(val)
                max_feat = max(max_feat, idx)
            label_sets.append(labels_here)

    n = len(label_sets)
    if n == 0:
        raise ParseError("no data lines in file")
    d = n_features if n_features is not None else max_feat + 1
    c = n_labels if n_labels is not None else max_label + 1
    if d < 1:
        raise ParseError("no feature indices seen and n_features not given")
    if c < 1:
        raise ParseError("no label ids seen and n_labels not given")
    X = sp.csr_matrix(
        (np.array(vals, dtype=float), (rows, cols)), shape=(n, d)
    )
    Y = np.full((n, c), -1.0)
    for i, labs in enumerate(label_sets):
        Y[i, labs] = 1.0
    return Dataset(X, Y, provenance={"source": str(path), "format": "multilabel-svm"})


def save_multilabel_svm(ds: Dataset, path) -> None:
    """Serialize in the same text grammar; values use shortest round-trip
    decimals so that load(save(ds)) reproduces the nonzeros bit-exactly."""
    X = ds.features.tocsr()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i in range(ds.n_samples):
            labs = np.flatnonzero(ds.labels[i] > 0)
            label_field = ",".join(str(j) for j in labs)
            start, end = X.indptr[i], X.indptr[i + 1]
            feats = " ".join(
                f"{X.indices[k]}:{repr(float(X.data[k]))}" for k in range(start, end)
            )
            if label_field:
                line = f"{label_field} {feats}".rstrip()
            elif feats:
                line = f" {feats}"
            else:
                line = ","  # empty label list marker keeps the row countable
            fh.write(line + "\n")


def load_dense_csv(features_path, labels_path, map_zero_one=False) -> Dataset:
    """Dense ingestion from a feature CSV and a label CSV with equal row
    counts. Label cells must be -1/+1, or 0/1 with ``map_zero_one``."""

    def read_matrix(path, what):
        out = []
        width = None
        with open(path, "r", encoding="utf-8", newline=None) as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line:
                    continue
                cells = [cell.strip() for cell in line.split(",")]
                if width is None:
                    width = len(cells)
                elif len(cells) != width:
                    raise ParseError(
                        f"ragged {what} row: {len(cells)} cells, expected {width}",
                        line=lineno,
                    )
                try:
                    out.append([float(cell) for cell in cells])
                except ValueError as exc:
                    raise ParseError(f"non-numeric {what} cell: {exc}", line=lineno) from exc
        if not out:
            raise ParseError(f"empty {what} file")
        return np.array(out)

    X = read_matrix(features_path, "feature")
    Y = read_matrix(labels_path, "label")
    if X.shape[0] != Y.shape[0]:
        raise ParseError(
            f"feature rows {X.shape[0]} != label rows {Y.shape[0]}"
        )
    if map_zero_one:
        if not np.all(np.isin(Y, (0.0, 1.0))):
            raise ParseError("labels must be 0/1 under map_zero_one")
        Y = np.where(Y > 0, 1.0, -1.0)
    elif not np.all(np.abs(Y) == 1.0):
        raise ParseError("labels must be -1/+1 (pass map_zero_one for 0/1 files)")
    return Dataset(
        sp.csr_matrix(X),
        Y,
        provenance={
            "source": str(features_path),
            "labels_source": str(labels_path),
            "format": "dense-csv",
        },
    )


@dataclass(frozen=True)
class NormalizationStats:
    """Per-feature mean and multiplicative scale fitted on one dataset and
    reusable on another (held-out folds never contribute to the fit)."""

    mean: np.ndarray
    scale: np.ndarray  # 1/std, or 0 for (near-)constant features

    def apply(self, ds: Dataset) -> Dataset:
        if ds.n_features != self.mean.shape[0]:
            raise InvalidInputError(
                f"stats fitted for d={self.mean.shape[0]}, dataset has d={ds.n_features}"
            )
        X = (ds.dense_features() - self.mean) * self.scale
        return Dataset(
            sp.csr_matrix(X),
            ds.labels,
            ds.feature_names,
            ds.label_names,
            dict(ds.provenance, normalized="zscore"),
        )


def fit_zscore(ds: Dataset, std_floor: float = 1e-12) -> NormalizationStats:
    if ds.n_samples < 2:
        raise InvalidInputError("need at least 2 rows to fit normalization stats")
    X = ds.dense_features()
    mean = X.mean(axis=0)
    std = X.std(axis=0)  # population std, divide-by-n
    safe = np.where(std < std_floor, 1.0, std)
    scale = np.where(std < std_floor, 0.0, 1.0 / safe)
    return NormalizationStats(mean, scale)


def normalize_zscore(ds: Dataset) -> tuple[Dataset, NormalizationStats]:
    """Center to mean 0 and scale to unit deviation per feature; constant
    features end up identically 0."""
    stats = fit_zscore(ds)
    return stats.apply(ds), stats


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: np.ndarray
    seed: int

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)


def make_folds(n: int, k: int, seed: int) -> FoldPlan:
    """Seeded uniform shuffle + round-robin assignment; fold sizes differ
    by at most one."""
    if k < 2:
        raise InvalidInputError("need k >= 2 folds")
    if k > n:
        raise InvalidInputError(f"k={k} folds need at least that many samples, got n={n}")
    rng = np.random.Generator(np.random.PCG64(seed))
    perm = rng.permutation(n)
    assignments = np.empty(n, dtype=int)
    assignments[perm] = np.arange(n) % k
    return FoldPlan(k, assignments, seed)
