"""Base margin losses, the three 0/1 multi-label measures, their convex
surrogates, and subgradients of the surrogates w.r.t. the score vector.

Labels are dense +/-1 vectors. A sample is *degenerate* for ranking
purposes when it has no relevant or no irrelevant label; ranking
quantities return ``None`` for such samples and callers are expected to
exclude them from averages (counting how many were skipped).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import DegenerateSampleError, DimensionMismatchError, InvalidInputError

_LN2 = math.log(2.0)

HAMMING = "hamming"
SUBSET = "subset"
RANKING = "ranking"
SURROGATE_KINDS = (HAMMING, SUBSET, RANKING)


@dataclass(frozen=True)
class BaseLoss:
    """Descriptor of a pointwise margin loss ell(u).

    Attributes
    ----------
    kind : one of "hinge", "logistic_ln", "logistic_log2".
    rho : Lipschitz constant of ell.
    bound : upper bound of ell over the evaluation domain. Defaults to
        ell(0), i.e. the supremum over nonnegative margins (ell is
        non-increasing); widen it explicitly when scores may produce
        negative margins and a valid bound is needed.
    upper_bounds_01 : whether ell(u) >= [[sgn(u) != 1]] for all u. Holds
        for hinge and base-2 logistic; the natural-log logistic fails it
        (ln 2 < 1 at u = 0) and is rejected by checks that rely on it.
    """

    kind: str
    rho: float
    bound: float
    upper_bounds_01: bool

    @classmethod
    def hinge(cls, bound: float = 1.0) -> "BaseLoss":
        return cls("hinge", 1.0, bound, True)

    @classmethod
    def logistic_ln(cls, bound: float = _LN2) -> "BaseLoss":
        return cls("logistic_ln", 1.0, bound, False)

    @classmethod
    def logistic_log2(cls, bound: float = 1.0) -> "BaseLoss":
        return cls("logistic_log2", 1.0 / _LN2, bound, True)

    @classmethod
    def from_name(cls, name: str, bound: float | None = None) -> "BaseLoss":
        makers = {
            "hinge": cls.hinge,
            "logistic_ln": cls.logistic_ln,
            "logistic_log2": cls.logistic_log2,
        }
        if name not in makers:
            raise InvalidInputError(f"unknown base loss {name!r}")
        return makers[name]() if bound is None else makers[name](bound)

    def value(self, u):
        """ell(u), elementwise over arrays."""
        u = np.asarray(u, dtype=float)
        if self.kind == "hinge":
            return np.maximum(0.0, 1.0 - u)
        if self.kind == "logistic_ln":
            return np.logaddexp(0.0, -u)
        return np.logaddexp(0.0, -u) / _LN2

    def subgrad(self, u):
        """An element of the subdifferential of ell at u, elementwise.

        The hinge kink at u = 1 resolves to 0 (the sparser choice); the
        logistic variants are differentiable everywhere.
        """
        u = np.asarray(u, dtype=float)
        if self.kind == "hinge":
            return np.where(u < 1.0, -1.0, 0.0)
        if self.kind == "logistic_ln":
            return -expit(-u)
        return -expit(-u) / _LN2


def base_loss_value(loss: BaseLoss, u: float) -> float:
    if not np.isfinite(u):
        raise InvalidInputError(f"margin must be finite, got {u!r}")
    return float(loss.value(u))


def base_loss_subgrad(loss: BaseLoss, u: float) -> float:
    if not np.isfinite(u):
        raise InvalidInputError(f"margin must be finite, got {u!r}")
    return float(loss.subgrad(u))


def as_label_vector(y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size == 0:
        raise InvalidInputError("label vector must be 1-d and nonempty")
    if not np.all(np.abs(y) == 1.0):
        raise InvalidInputError("label entries must be exactly -1 or +1")
    return y


def as_score_vector(f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.ndim != 1 or f.size == 0:
        raise InvalidInputError("score vector must be 1-d and nonempty")
    if not np.all(np.isfinite(f)):
        raise InvalidInputError("scores must be finite")
    return f


def _paired(f, y):
    f = as_score_vector(f)
    y = as_label_vector(y)
    if f.shape[0] != y.shape[0]:
        raise DimensionMismatchError(
            f"score length {f.shape[0]} != label length {y.shape[0]}"
        )
    return f, y


def _paired_labels(pred, y):
    pred = as_label_vector(pred)
    y = as_label_vector(y)
    if pred.shape[0] != y.shape[0]:
        raise DimensionMismatchError(
            f"prediction length {pred.shape[0]} != label length {y.shape[0]}"
        )
    return pred, y


def pos_neg_sets(y) -> tuple[np.ndarray, np.ndarray]:
    """Indices of relevant (+1) and irrelevant (-1) labels."""
    y = as_label_vector(y)
    return np.flatnonzero(y > 0), np.flatnonzero(y < 0)


def is_degenerate(y) -> bool:
    """True when the sample has no relevant or no irrelevant label."""
    pos, neg = pos_neg_sets(y)
    return pos.size == 0 or neg.size == 0


def hamming_loss_01(pred, y) -> float:
    """Fraction of labels predicted incorrectly."""
    pred, y = _paired_labels(pred, y)
    return float(np.mean(pred != y))


def subset_loss_01(pred, y) -> float:
    """1 if any label is predicted incorrectly, else 0."""
    pred, y = _paired_labels(pred, y)
    return float(np.any(pred != y))


def ranking_loss_01(f, y) -> float | None:
    """Fraction of (relevant, irrelevant) pairs ranked wrongly.

    A tie f_p == f_q counts as a violated pair. Returns None for
    degenerate samples.
    """
    f, y = _paired(f, y)
    pos, neg = pos_neg_sets(y)
    if pos.size == 0 or neg.size == 0:
        return None
    violated = f[pos][:, None] <= f[neg][None, :]
    return float(np.mean(violated))


def surrogate_hamming(f, y, loss: BaseLoss) -> float:
    """(1/c) sum_j ell(y_j f_j)."""
    f, y = _paired(f, y)
    return float(np.mean(loss.value(y * f)))


def surrogate_subset(f, y, loss: BaseLoss) -> float:
    """max_j ell(y_j f_j)."""
    f, y = _paired(f, y)
    return float(np.max(loss.value(y * f)))


def surrogate_ranking(f, y, loss: BaseLoss) -> float | None:
    """Mean of ell(f_p - f_q) over (relevant, irrelevant) pairs, or None."""
    f, y = _paired(f, y)
    pos, neg = pos_neg_sets(y)
    if pos.size == 0 or neg.size == 0:
        return None
    diffs = f[pos][:, None] - f[neg][None, :]
    return float(np.mean(loss.value(diffs)))


def surrogate_subgrad(kind: str, f, y, loss: BaseLoss) -> np.ndarray:
    """A subgradient of the chosen surrogate w.r.t. the score vector.

    hamming: g_j = y_j ell'(y_j f_j) / c.
    subset: the gradient of the argmax term only (ties break to the
        smallest label index).
    ranking: +/- ell'(f_p - f_q) / (|Y+||Y-|) accumulated onto the pair
        positions; raises DegenerateSampleError on degenerate labels.
    """
    f, y = _paired(f, y)
    c = f.shape[0]
    if kind == HAMMING:
        return y * loss.subgrad(y * f) / c
    if kind == SUBSET:
        vals = loss.value(y * f)
        j = int(np.argmax(vals))
        g = np.zeros(c)
        g[j] = y[j] * float(loss.subgrad(y[j] * f[j]))
        return g
    if kind == RANKING:
        pos, neg = pos_neg_sets(y)
        if pos.size == 0 or neg.size == 0:
            raise DegenerateSampleError(
                "ranking subgradient undefined without both relevant and "
                "irrelevant labels"
            )
        diffs = f[pos][:, None] - f[neg][None, :]
        dl = loss.subgrad(diffs) / (pos.size * neg.size)
        g = np.zeros(c)
        g[pos] = dl.sum(axis=1)
        g[neg] = -dl.sum(axis=0)
        return g
    raise InvalidInputError(f"unknown surrogate kind {kind!r}")


def empirical_loss_bound(f, y, loss: BaseLoss, kind: str = HAMMING) -> float:
    """Max of ell over the margins a (score, label) pair actually produces.

    Diagnostic companion to BaseLoss.bound: the realized supremum of the
    base loss over y_j f_j (hamming/subset) or f_p - f_q (ranking).
    """
    f, y = _paired(f, y)
    if kind == RANKING:
        pos, neg = pos_neg_sets(y)
        if pos.size == 0 or neg.size == 0:
            raise DegenerateSampleError("no ranking margins on degenerate sample")
        margins = (f[pos][:, None] - f[neg][None, :]).ravel()
    else:
        margins = y * f
    return float(np.max(loss.value(margins)))
