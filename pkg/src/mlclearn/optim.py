"""Regularized ERM for the three surrogate objectives.

Two solvers share one objective definition:

* ``svrg_bb_train``: stochastic variance-reduced gradient whose outer-epoch
  step size is set by a Barzilai-Borwein estimate
  eta_s = ||dW||_F^2 / (d * Tr(dW^T dG)), with a zero-weight start,
  a full-gradient anchor per epoch and m inner corrected steps.
* ``batch_reference_train``: deterministic full-batch subgradient descent
  with eta_t = eta0 / sqrt(t + 1), kept as an independent optimization
  oracle for cross-checking.

The per-sample objective is g_i(W) = L(W^T x_i, y_i) + lambda ||W||_F^2,
so every per-sample gradient carries the 2*lambda*W term. Samples that
are degenerate for the ranking surrogate are excluded and the average
renormalized over the remaining count.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .data import Dataset
from .errors import DivergedError, InvalidInputError
from .linear import LinearModel
from .losses import HAMMING, RANKING, SUBSET, SURROGATE_KINDS, BaseLoss

ETA_MIN = 1e-8
ETA_MAX = 1e3
BB_DENOM_EPS = 1e-12
DIVERGENCE_FACTOR = 1e6


@dataclass(frozen=True)
class TrainConfig:
    learner: str = HAMMING
    lam: float = 1e-3
    eta0: float = 0.05
    inner_steps: int | None = None  # m; None means 2 * n_effective
    outer_epochs: int = 30
    seed: int = 0
    base_loss: BaseLoss = field(default_factory=BaseLoss.hinge)
    include_bias: bool = False
    grad_norm_stop: float | None = None  # e.g. 1e-6 to stop on flat epochs

    def __post_init__(self):
        if self.learner not in SURROGATE_KINDS:
            raise InvalidInputError(f"unknown learner {self.learner!r}")
        if self.lam < 0:
            raise InvalidInputError("lambda must be >= 0")
        if self.eta0 <= 0:
            raise InvalidInputError("eta0 must be > 0")
        if self.inner_steps is not None and self.inner_steps < 1:
            raise InvalidInputError("inner_steps must be >= 1")
        if self.outer_epochs < 1:
            raise InvalidInputError("outer_epochs must be >= 1")

    def with_lam(self, lam: float) -> "TrainConfig":
        return replace(self, lam=lam)


@dataclass(frozen=True)
class TraceRow:
    epoch: int
    eta: float
    objective: float
    grad_norm: float


@dataclass
class TrainTrace:
    rows: list[TraceRow] = field(default_factory=list)

    def append(self, epoch, eta, objective, grad_norm):
        self.rows.append(TraceRow(epoch, float(eta), float(objective), float(grad_norm)))

    def objectives(self) -> list[float]:
        return [r.objective for r in self.rows]

    def to_csv(self) -> str:
        lines = ["epoch,eta,objective,grad_norm"]
        for r in self.rows:
            lines.append(f"{r.epoch},{r.eta!r},{r.objective!r},{r.grad_norm!r}")
        return "\n".join(lines) + "\n"


def bb_step_size(
    dW: np.ndarray,
    dG: np.ndarray,
    dim: int,
    prev_eta: float,
    eta_min: float = ETA_MIN,
    eta_max: float = ETA_MAX,
) -> float:
    """||dW||_F^2 / (dim * Tr(dW^T dG)), falling back to the previous step
    when the curvature denominator is <= 1e-12 and clipping to
    [eta_min, eta_max]."""
    denom = float(np.sum(dW * dG))
    if denom > BB_DENOM_EPS:
        eta = float(np.sum(dW * dW)) / (dim * denom)
    else:
        eta = prev_eta
    return float(np.clip(eta, eta_min, eta_max))


class _Problem:
    """Dense working copy of one training problem: features (augmented
    with the bias column when configured), labels, the active sample set
    and the surrogate-specific row subgradients."""

    # The BB estimate reads curvature off anchor differences; on piecewise
    # flat losses that sees only the 2*lambda regularizer and explodes the
    # step. The scale at which one corrected inner step stays stable is
    # 1/(s * max_i ||x_i||^2) with s the row-subgradient sensitivity to the
    # scores: 1/c for the averaged surrogate, 1 for the max and pairwise
    # forms. That caps eta on top of the static clamp.

    def __init__(self, dataset: Dataset, config: TrainConfig):
        X = dataset.dense_features()
        if config.include_bias:
            X = np.hstack([X, np.ones((X.shape[0], 1))])
        self.X = X
        self.Y = dataset.labels
        self.config = config
        self.loss = config.base_loss
        self.c = dataset.n_labels
        if config.learner == RANKING:
            self.active = np.flatnonzero(~dataset.degenerate_mask())
            # per-active-row relevant / irrelevant index lists
            self.pos = [np.flatnonzero(self.Y[i] > 0) for i in self.active]
            self.neg = [np.flatnonzero(self.Y[i] < 0) for i in self.active]
            self._pos_of = {int(i): k for k, i in enumerate(self.active)}
        else:
            self.active = np.arange(X.shape[0])
        if self.active.size == 0:
            raise InvalidInputError(
                "no usable samples: every row is degenerate for the ranking surrogate"
            )
        self.n_effective = int(self.active.size)
        sq = np.einsum("ij,ij->i", X[self.active], X[self.active])
        sensitivity = 1.0 / self.c if config.learner == HAMMING else 1.0
        self.eta_cap = float(
            min(ETA_MAX, 1.0 / max(sensitivity * np.max(sq), 1e-30))
        )

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def zero_weights(self) -> np.ndarray:
        return np.zeros((self.dim, self.c))

    def model(self, W: np.ndarray) -> LinearModel:
        return LinearModel(W, self.config.include_bias)

    def objective(self, W: np.ndarray) -> float:
        lam = self.config.lam
        reg = lam * float(np.sum(W * W))
        F = self.X[self.active] @ W
        Y = self.Y[self.active]
        if self.config.learner == HAMMING:
            data = float(np.mean(self.loss.value(Y * F)))
        elif self.config.learner == SUBSET:
            data = float(np.mean(np.max(self.loss.value(Y * F), axis=1)))
        else:
            per_row = np.empty(self.n_effective)
            for k in range(self.n_effective):
                diffs = F[k, self.pos[k]][:, None] - F[k, self.neg[k]][None, :]
                per_row[k] = np.mean(self.loss.value(diffs))
            data = float(np.mean(per_row))
        return data + reg

    def _subgrad_rows(self, F: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """Loss-part subgradient rows dL/df for the active samples."""
        if self.config.learner == HAMMING:
            return Y * self.loss.subgrad(Y * F) / self.c
        if self.config.learner == SUBSET:
            U = Y * F
            vals = self.loss.value(U)
            j = np.argmax(vals, axis=1)
            rows = np.arange(F.shape[0])
            G = np.zeros_like(F)
            G[rows, j] = Y[rows, j] * self.loss.subgrad(U[rows, j])
            return G
        G = np.zeros_like(F)
        for k in range(F.shape[0]):
            pos, neg = self.pos[k], self.neg[k]
            diffs = F[k, pos][:, None] - F[k, neg][None, :]
            dl = self.loss.subgrad(diffs) / (pos.size * neg.size)
            G[k, pos] = dl.sum(axis=1)
            G[k, neg] = -dl.sum(axis=0)
        return G

    def full_gradient(self, W: np.ndarray) -> np.ndarray:
        Xa = self.X[self.active]
        F = Xa @ W
        G_rows = self._subgrad_rows(F, self.Y[self.active])
        return Xa.T @ G_rows / self.n_effective + 2.0 * self.config.lam * W

    def row_loss_subgrad(self, W: np.ndarray, i: int) -> np.ndarray:
        """Loss-part subgradient dL(W^T x_i, y_i)/df as a length-c row."""
        f = self.X[i] @ W
        y = self.Y[i]
        if self.config.learner == HAMMING:
            return y * self.loss.subgrad(y * f) / self.c
        if self.config.learner == SUBSET:
            u = y * f
            vals = self.loss.value(u)
            j = int(np.argmax(vals))
            g = np.zeros(self.c)
            g[j] = y[j] * float(self.loss.subgrad(u[j]))
            return g
        k = self._pos_of[int(i)]
        pos, neg = self.pos[k], self.neg[k]
        diffs = f[pos][:, None] - f[neg][None, :]
        dl = self.loss.subgrad(diffs) / (pos.size * neg.size)
        g = np.zeros(self.c)
        g[pos] = dl.sum(axis=1)
        g[neg] = -dl.sum(axis=0)
        return g


def objective(model: LinearModel, dataset: Dataset, config: TrainConfig) -> float:
    """(1/n) sum_i L(W^T x_i, y_i) + lambda ||W||_F^2 over usable samples."""
    prob = _Problem(dataset, config)
    _check_model(model, prob)
    return prob.objective(model.weights)


def full_gradient(model: LinearModel, dataset: Dataset, config: TrainConfig) -> np.ndarray:
    """Averaged per-sample subgradient of g_i, shape (d, c)."""
    prob = _Problem(dataset, config)
    _check_model(model, prob)
    return prob.full_gradient(model.weights)


def _check_model(model: LinearModel, prob: _Problem):
    if model.weights.shape != (prob.dim, prob.c):
        raise InvalidInputError(
            f"model shape {model.weights.shape} does not match problem "
            f"({prob.dim}, {prob.c})"
        )


def _check_divergence(obj: float, initial: float, trace: TrainTrace):
    limit = DIVERGENCE_FACTOR * max(initial, np.finfo(float).tiny)
    if not np.isfinite(obj) or obj > limit:
        raise DivergedError(
            f"objective {obj} exceeded {DIVERGENCE_FACTOR:g} x initial {initial}",
            trace=trace,
        )


def svrg_bb_train(
    dataset: Dataset,
    config: TrainConfig,
    first_step_hook=None,
) -> tuple[LinearModel, TrainTrace]:
    """Variance-reduced training with Barzilai-Borwein outer step sizes.

    Starts from the zero matrix. Each outer epoch s computes the full
    gradient G_s at the anchor; for s >= 1 the step size becomes
    eta_s = ||dW||_F^2 / (d * Tr(dW^T dG)) with dW, dG the anchor and
    full-gradient differences (previous eta is reused when the
    curvature denominator is <= 1e-12, and eta is clipped to
    [1e-8, 1e3]). The inner loop takes m uniformly seeded sample picks
    and applies the corrected update
    W <- W - eta_s * (grad_i(W) - grad_i(anchor) + G_s); the last inner
    iterate becomes the next anchor.

    ``first_step_hook(s, eta, G, W_anchor, W_after_first_step)``, when
    given, is called right after the first inner update of each epoch.
    Since the first pick's correction cancels at the anchor, that update
    is exactly W_anchor - eta * G.
    """
    prob = _Problem(dataset, config)
    lam = config.lam
    m = config.inner_steps or 2 * prob.n_effective
    rng = np.random.Generator(np.random.PCG64(config.seed))
    trace = TrainTrace()

    W_anchor = prob.zero_weights()
    initial_obj = prob.objective(W_anchor)
    eta = min(config.eta0, prob.eta_cap)
    W_prev = None
    G_prev = None

    for s in range(config.outer_epochs):
        G = prob.full_gradient(W_anchor)
        obj = prob.objective(W_anchor)
        _check_divergence(obj, initial_obj, trace)
        if s > 0:
            eta = bb_step_size(
                W_anchor - W_prev, G - G_prev, prob.dim, eta, eta_max=prob.eta_cap
            )
        grad_norm = float(np.linalg.norm(G))
        trace.append(s, eta, obj, grad_norm)
        if config.grad_norm_stop is not None and grad_norm < config.grad_norm_stop:
            break

        W = W_anchor.copy()
        picks = rng.integers(0, prob.n_effective, size=m)
        for t in range(m):
            i = int(prob.active[picks[t]])
            g_cur = prob.row_loss_subgrad(W, i)
            g_anchor = prob.row_loss_subgrad(W_anchor, i)
            step = np.outer(prob.X[i], g_cur - g_anchor)
            step += 2.0 * lam * (W - W_anchor)
            step += G
            W -= eta * step
            if t == 0 and first_step_hook is not None:
                first_step_hook(s, eta, G, W_anchor.copy(), W.copy())
        W_prev = W_anchor
        G_prev = G
        W_anchor = W

    final_obj = prob.objective(W_anchor)
    _check_divergence(final_obj, initial_obj, trace)
    return prob.model(W_anchor), trace


def batch_reference_train(
    dataset: Dataset,
    config: TrainConfig,
    iters: int = 400,
) -> tuple[LinearModel, TrainTrace]:
    """Full-batch subgradient descent with eta_t = eta0 / sqrt(t + 1).

    Deterministic; returns the iterate with the best objective seen,
    which is the standard certificate for diminishing-step subgradient
    methods. Used as the independent optimization oracle.
    """
    if iters < 1:
        raise InvalidInputError("iters must be >= 1")
    prob = _Problem(dataset, config)
    trace = TrainTrace()
    W = prob.zero_weights()
    initial_obj = prob.objective(W)
    best_obj = initial_obj
    best_W = W.copy()
    for t in range(iters):
        G = prob.full_gradient(W)
        obj = prob.objective(W)
        _check_divergence(obj, initial_obj, trace)
        eta = config.eta0 / np.sqrt(t + 1.0)
        trace.append(t, eta, obj, float(np.linalg.norm(G)))
        if obj < best_obj:
            best_obj = obj
            best_W = W.copy()
        W = W - eta * G
    final_obj = prob.objective(W)
    _check_divergence(final_obj, initial_obj, trace)
    if final_obj < best_obj:
        best_W = W
    return prob.model(best_W), trace
