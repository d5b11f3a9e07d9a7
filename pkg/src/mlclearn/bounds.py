"""Closed-form generalization-bound evaluation.

Every bound instantiates one base inequality

    R <= multiplier * empirical_risk
         + 2*sqrt(2) * mu * sqrt(c * Lambda^2 * r^2 / n)
         + 3 * M * sqrt(log(2/delta) / (2n))

with (mu, M, multiplier) patterns specific to which surrogate was
optimized and which measure is being bounded. The catalog below carries
the published patterns; ``base_bound`` is the single evaluation path so
the catalog stays a thin dispatch. Logarithms are natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import InvalidInputError
from .linear import LinearModel
from .losses import HAMMING, RANKING, SUBSET

SQRT8 = 2.0 * math.sqrt(2.0)


def lipschitz_of(kind: str, rho: float, c: int) -> float:
    """Lipschitz constant of the composed surrogate w.r.t. the score
    vector as used by the bound formulas: rho/sqrt(c) for the averaged
    form, rho for the max and pairwise forms."""
    if rho <= 0:
        raise InvalidInputError("rho must be > 0")
    if c < 1:
        raise InvalidInputError("c must be >= 1")
    if kind == HAMMING:
        return rho / math.sqrt(c)
    if kind in (SUBSET, RANKING):
        return rho
    raise InvalidInputError(f"unknown surrogate kind {kind!r}")


@dataclass(frozen=True)
class BoundQuery:
    mu: float
    M: float
    c: int
    n: int
    Lambda: float
    r: float
    delta: float
    empirical_risk: float
    multiplier: float = 1.0

    def __post_init__(self):
        if self.n < 1 or self.c < 1:
            raise InvalidInputError("n and c must be >= 1")
        if not (0.0 < self.delta < 1.0):
            raise InvalidInputError("delta must lie in (0, 1)")
        if self.Lambda <= 0 or self.r <= 0:
            raise InvalidInputError("Lambda and r must be > 0")
        if self.mu < 0 or self.M < 0 or self.empirical_risk < 0:
            raise InvalidInputError("mu, M and empirical_risk must be >= 0")


@dataclass(frozen=True)
class BoundReport:
    bound_name: str
    total: float
    risk_term: float
    complexity_term: float
    confidence_term: float

    def as_dict(self) -> dict:
        return {
            "bound_name": self.bound_name,
            "total": self.total,
            "risk_term": self.risk_term,
            "complexity_term": self.complexity_term,
            "confidence_term": self.confidence_term,
        }


def base_bound(q: BoundQuery, name: str = "base") -> BoundReport:
    risk = q.multiplier * q.empirical_risk
    complexity = SQRT8 * q.mu * math.sqrt(q.c * q.Lambda**2 * q.r**2 / q.n)
    confidence = 3.0 * q.M * math.sqrt(math.log(2.0 / q.delta) / (2.0 * q.n))
    total = risk + complexity + confidence
    return BoundReport(name, total, risk, complexity, confidence)


@dataclass(frozen=True)
class BoundForm:
    """(mu, M, multiplier) pattern of one published bound, as functions
    of the base-loss constants and the label count."""

    description: str
    mu_of: object
    M_of: object
    mult_of: object
    fixed_rho: float | None = None  # corollaries pin rho (hinge: 1)


NAMED_BOUNDS: dict[str, BoundForm] = {
    "Ah_hamming": BoundForm(
        "optimize the averaged surrogate, bound on Hamming loss",
        lambda rho, c: rho / math.sqrt(c),
        lambda B, c: B,
        lambda c: 1.0,
    ),
    "Ah_subset": BoundForm(
        "optimize the averaged surrogate, bound on subset loss",
        lambda rho, c: rho * math.sqrt(c),
        lambda B, c: B * c,
        lambda c: float(c),
    ),
    "Ah_ranking": BoundForm(
        "optimize the averaged surrogate, bound on ranking loss",
        lambda rho, c: rho * math.sqrt(c),
        lambda B, c: B * c,
        lambda c: float(c),
    ),
    "As_subset_hamming": BoundForm(
        "optimize the max surrogate, bound on subset and Hamming loss",
        lambda rho, c: rho,
        lambda B, c: B,
        lambda c: 1.0,
    ),
    "As_ranking": BoundForm(
        "optimize the max surrogate, bound on ranking loss",
        lambda rho, c: rho,
        lambda B, c: B,
        lambda c: 1.0,
    ),
    "Ar_ranking": BoundForm(
        "optimize the pairwise surrogate, bound on ranking loss",
        lambda rho, c: rho,
        lambda B, c: B,
        lambda c: 1.0,
    ),
    "Ar_hamming": BoundForm(
        "optimize the pairwise surrogate, bound on Hamming loss",
        lambda rho, c: rho * c,
        lambda B, c: B * c,
        lambda c: float(c),
    ),
    "Ar_subset": BoundForm(
        "optimize the pairwise surrogate, bound on subset loss",
        lambda rho, c: rho * c**2,
        lambda B, c: B * c**2,
        lambda c: float(c**2),
    ),
    "BR_hamming": BoundForm(
        "binary relevance (hinge): Hamming-loss bound",
        lambda rho, c: rho / math.sqrt(c),
        lambda B, c: B,
        lambda c: 1.0,
        fixed_rho=1.0,
    ),
    "RankSVM_ranking": BoundForm(
        "pairwise hinge ranker: ranking-loss bound",
        lambda rho, c: rho,
        lambda B, c: B,
        lambda c: 1.0,
        fixed_rho=1.0,
    ),
}


def named_bound(
    name: str,
    *,
    rho: float,
    B: float,
    c: int,
    n: int,
    Lambda: float,
    r: float,
    delta: float,
    empirical_risk: float,
) -> BoundReport:
    if name not in NAMED_BOUNDS:
        raise InvalidInputError(
            f"unknown bound {name!r}; known: {sorted(NAMED_BOUNDS)}"
        )
    form = NAMED_BOUNDS[name]
    rho_eff = form.fixed_rho if form.fixed_rho is not None else rho
    q = BoundQuery(
        mu=form.mu_of(rho_eff, c),
        M=form.M_of(B, c),
        c=c,
        n=n,
        Lambda=Lambda,
        r=r,
        delta=delta,
        empirical_risk=empirical_risk,
        multiplier=form.mult_of(c),
    )
    return base_bound(q, name=name)


def bounds_sweep(
    names: list[str],
    *,
    rho: float,
    B: float,
    Lambda: float,
    r: float,
    delta: float,
    empirical_risk: float,
    c_values=None,
    n_values=None,
    c: int | None = None,
    n: int | None = None,
) -> list[dict]:
    """Evaluate named bounds over a range of c (fixed n) or n (fixed c);
    one row per grid point with the term breakdown of every bound."""
    if (c_values is None) == (n_values is None):
        raise InvalidInputError("pass exactly one of c_values or n_values")
    rows = []
    if c_values is not None:
        if n is None:
            raise InvalidInputError("sweeping c requires a fixed n")
        grid = [("c", int(cv), int(cv), n) for cv in c_values]
    else:
        if c is None:
            raise InvalidInputError("sweeping n requires a fixed c")
        grid = [("n", int(nv), c, int(nv)) for nv in n_values]
    for axis, value, c_eff, n_eff in grid:
        row = {axis: value}
        for name in names:
            rep = named_bound(
                name,
                rho=rho,
                B=B,
                c=c_eff,
                n=n_eff,
                Lambda=Lambda,
                r=r,
                delta=delta,
                empirical_risk=empirical_risk,
            )
            row[f"{name}.total"] = rep.total
            row[f"{name}.risk"] = rep.risk_term
            row[f"{name}.complexity"] = rep.complexity_term
            row[f"{name}.confidence"] = rep.confidence_term
        rows.append(row)
    return rows


def rademacher_kernel_estimate(
    kernel_trace: float, c: int, Lambda: float, n: int, r: float | None = None
) -> tuple[float, float]:
    """Complexity of the norm-ball hypothesis class via the kernel trace.

    exact = Lambda * sqrt(c * Tr(K)) / n. relaxed substitutes
    Tr(K) <= n r^2, giving sqrt(c Lambda^2 r^2 / n); without an explicit
    r the tight value r^2 = Tr(K)/n is used and the two coincide.
    """
    if kernel_trace < 0:
        raise InvalidInputError("kernel trace must be >= 0")
    if n < 1 or c < 1:
        raise InvalidInputError("n and c must be >= 1")
    if Lambda < 0:
        raise InvalidInputError("Lambda must be >= 0")
    exact = Lambda * math.sqrt(c * kernel_trace) / n
    r2 = r * r if r is not None else kernel_trace / n
    relaxed = math.sqrt(c * Lambda**2 * r2 / n)
    return exact, relaxed


@dataclass(frozen=True)
class HypothesisStats:
    """Realized counterparts of the a-priori bound constants. Diagnostic:
    a norm read off a trained model is not a valid a-priori Lambda."""

    lambda_realized: float
    r_empirical: float
    kernel_trace: float


def hypothesis_stats(
    model: LinearModel, dataset: Dataset, kernel: str = "linear", gamma: float | None = None
) -> HypothesisStats:
    if kernel == "rbf":
        # kappa(x, x) = exp(-gamma * 0) = 1 regardless of gamma
        return HypothesisStats(model.norm(), 1.0, float(dataset.n_samples))
    if kernel != "linear":
        raise InvalidInputError(f"unknown kernel {kernel!r}")
    X = model.augment(dataset.dense_features())
    sq_norms = np.einsum("ij,ij->i", X, X)
    return HypothesisStats(
        model.norm(),
        float(np.sqrt(np.max(sq_norms))),
        float(np.sum(sq_norms)),
    )
