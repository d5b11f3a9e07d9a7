"""Executable certification of the inter-loss inequalities.

Per-case checkers return explicit verdicts for every link of the three
inequality chains (hamming<->subset, hamming<->ranking incl. the tighter
cardinality-ratio constants, subset<->ranking). The fuzz campaign
evaluates the same links vectorized over batches of random and
adversarial cases; block-wise seeding makes reports identical for any
worker count.

Slack convention: slack = rhs - lhs; a link holds when slack >= -1e-9
(float summation order in the surrogate averages motivates the
tolerance; the inequalities are exact in real arithmetic).
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .linear import classify_sign, oracle_threshold
from .losses import (
    BaseLoss,
    hamming_loss_01,
    pos_neg_sets,
    ranking_loss_01,
    subset_loss_01,
    surrogate_hamming,
    surrogate_ranking,
    surrogate_subset,
)

SLACK_TOL = -1e-9
BLOCK_CASES = 50_000
MAX_RECORDED_FAILURES = 10
WORKERS_ENV_VAR = "MLC_WORKERS"

# canonical link ids; the two chains around the sign classifier share the
# "c*hamming01<=c*hamming_surrogate" and "subset01<=subset_surrogate" links
HAMMING_SUBSET_LINKS = (
    "hamming01<=subset01",
    "subset01<=subset_surrogate",
    "subset01<=c*hamming01",
    "c*hamming01<=c*hamming_surrogate",
)
HAMMING_RANKING_LINKS = (
    "ranking01<=c*hamming01",
    "c*hamming01<=c*hamming_surrogate",
    "oracle_hamming01<=c*ranking01",
    "c*ranking01<=c*ranking_surrogate",
    "ranking01<=(c/min_cardinality)*hamming01",
    "oracle_hamming01<=max_cardinality*ranking01",
)
SUBSET_RANKING_LINKS = (
    "ranking01<=subset01",
    "subset01<=subset_surrogate",
    "oracle_subset01<=c^2*ranking01",
    "c^2*ranking01<=c^2*ranking_surrogate",
)
ALL_LINKS = tuple(
    dict.fromkeys(HAMMING_SUBSET_LINKS + HAMMING_RANKING_LINKS + SUBSET_RANKING_LINKS)
)
RANKING_DEPENDENT_LINKS = frozenset(HAMMING_RANKING_LINKS[:1] + HAMMING_RANKING_LINKS[2:] + (
    "ranking01<=subset01",
    "oracle_subset01<=c^2*ranking01",
    "c^2*ranking01<=c^2*ranking_surrogate",
))


@dataclass(frozen=True)
class RelationVerdict:
    inequality_id: str
    lhs: float
    rhs: float
    slack: float
    holds: bool

    @staticmethod
    def of(inequality_id: str, lhs: float, rhs: float) -> "RelationVerdict":
        slack = rhs - lhs
        return RelationVerdict(inequality_id, lhs, rhs, slack, slack >= SLACK_TOL)


@dataclass
class RelationCase:
    """One (score, label) pair with every derived quantity cached."""

    scores: np.ndarray
    labels: np.ndarray
    base_loss: BaseLoss
    sign_pred: np.ndarray = field(init=False)
    hamming01: float = field(init=False)
    subset01: float = field(init=False)
    ranking01: float | None = field(init=False)
    oracle_hamming01: float = field(init=False)
    oracle_subset01: float = field(init=False)
    sur_hamming: float = field(init=False)
    sur_subset: float = field(init=False)
    sur_ranking: float | None = field(init=False)
    n_pos: int = field(init=False)
    n_neg: int = field(init=False)

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=float)
        self.labels = np.asarray(self.labels, dtype=float)
        self.sign_pred = classify_sign(self.scores)
        self.hamming01 = hamming_loss_01(self.sign_pred, self.labels)
        self.subset01 = subset_loss_01(self.sign_pred, self.labels)
        self.ranking01 = ranking_loss_01(self.scores, self.labels)
        _, oracle_pred, oracle_loss = oracle_threshold(self.scores, self.labels)
        self.oracle_hamming01 = oracle_loss
        self.oracle_subset01 = subset_loss_01(oracle_pred, self.labels)
        self.sur_hamming = surrogate_hamming(self.scores, self.labels, self.base_loss)
        self.sur_subset = surrogate_subset(self.scores, self.labels, self.base_loss)
        self.sur_ranking = surrogate_ranking(self.scores, self.labels, self.base_loss)
        pos, neg = pos_neg_sets(self.labels)
        self.n_pos, self.n_neg = int(pos.size), int(neg.size)

    @property
    def c(self) -> int:
        return int(self.labels.shape[0])

    @property
    def degenerate(self) -> bool:
        return self.n_pos == 0 or self.n_neg == 0

    def to_dict(self) -> dict:
        return {
            "scores": [float(v) for v in self.scores],
            "labels": [int(v) for v in self.labels],
            "base_loss": self.base_loss.kind,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "RelationCase":
        return cls(
            np.asarray(payload["scores"], dtype=float),
            np.asarray(payload["labels"], dtype=float),
            BaseLoss.from_name(payload.get("base_loss", "hinge")),
        )


def _require_dominating(loss: BaseLoss, allow_non_dominating: bool):
    if not loss.upper_bounds_01 and not allow_non_dominating:
        raise InvalidInputError(
            f"base loss {loss.kind!r} does not dominate the 0/1 loss; the "
            "surrogate links are not guaranteed (pass allow_non_dominating "
            "to run them anyway)"
        )


def check_hamming_subset(case: RelationCase, allow_non_dominating=False) -> list[RelationVerdict]:
    _require_dominating(case.base_loss, allow_non_dominating)
    c = case.c
    return [
        RelationVerdict.of("hamming01<=subset01", case.hamming01, case.subset01),
        RelationVerdict.of("subset01<=subset_surrogate", case.subset01, case.sur_subset),
        RelationVerdict.of("subset01<=c*hamming01", case.subset01, c * case.hamming01),
        RelationVerdict.of(
            "c*hamming01<=c*hamming_surrogate", c * case.hamming01, c * case.sur_hamming
        ),
    ]


def check_hamming_ranking(case: RelationCase, allow_non_dominating=False) -> list[RelationVerdict]:
    """The six links tying ranking to Hamming, including the tighter
    cardinality-ratio constants c/min{|Y+|,|Y-|} and max{|Y+|,|Y-|}.
    Degenerate cases have no ranking loss: empty verdict list."""
    _require_dominating(case.base_loss, allow_non_dominating)
    if case.degenerate:
        return []
    c = case.c
    r01 = case.ranking01
    min_pn = min(case.n_pos, case.n_neg)
    max_pn = max(case.n_pos, case.n_neg)
    return [
        RelationVerdict.of("ranking01<=c*hamming01", r01, c * case.hamming01),
        RelationVerdict.of(
            "c*hamming01<=c*hamming_surrogate", c * case.hamming01, c * case.sur_hamming
        ),
        RelationVerdict.of(
            "oracle_hamming01<=c*ranking01", case.oracle_hamming01, c * r01
        ),
        RelationVerdict.of(
            "c*ranking01<=c*ranking_surrogate", c * r01, c * case.sur_ranking
        ),
        RelationVerdict.of(
            "ranking01<=(c/min_cardinality)*hamming01",
            r01,
            c / min_pn * case.hamming01,
        ),
        RelationVerdict.of(
            "oracle_hamming01<=max_cardinality*ranking01",
            case.oracle_hamming01,
            max_pn * r01,
        ),
    ]


def check_subset_ranking(case: RelationCase, allow_non_dominating=False) -> list[RelationVerdict]:
    _require_dominating(case.base_loss, allow_non_dominating)
    if case.degenerate:
        return []
    c = case.c
    r01 = case.ranking01
    return [
        RelationVerdict.of("ranking01<=subset01", r01, case.subset01),
        RelationVerdict.of("subset01<=subset_surrogate", case.subset01, case.sur_subset),
        RelationVerdict.of(
            "oracle_subset01<=c^2*ranking01", case.oracle_subset01, c**2 * r01
        ),
        RelationVerdict.of(
            "c^2*ranking01<=c^2*ranking_surrogate", c**2 * r01, c**2 * case.sur_ranking
        ),
    ]


def check_all(case: RelationCase, allow_non_dominating=False) -> list[RelationVerdict]:
    return (
        check_hamming_subset(case, allow_non_dominating)
        + check_hamming_ranking(case, allow_non_dominating)
        + check_subset_ranking(case, allow_non_dominating)
    )


@dataclass(frozen=True)
class FuzzConfig:
    cases: int = 100_000
    c_min: int = 1
    c_max: int = 12
    score_dist: str = "mixed"  # normal | adversarial | mixed
    seed: int = 0
    base_loss: BaseLoss = field(default_factory=BaseLoss.hinge)
    adversarial_share: float = 0.2  # of cases, in mixed mode
    allow_non_dominating: bool = False

    def __post_init__(self):
        if self.cases < 1:
            raise InvalidInputError("cases must be >= 1")
        if not (1 <= self.c_min <= self.c_max):
            raise InvalidInputError("need 1 <= c_min <= c_max")
        if self.score_dist not in ("normal", "adversarial", "mixed"):
            raise InvalidInputError(f"unknown score_dist {self.score_dist!r}")
        _require_dominating(self.base_loss, self.allow_non_dominating)


@dataclass
class CampaignSummary:
    cases: int
    degenerate: int
    violations: dict
    min_slack: dict
    failures: list
    config: dict
    elapsed_seconds: float

    @property
    def total_violations(self) -> int:
        return sum(self.violations.values())

    def to_dict(self) -> dict:
        return {
            "cases": self.cases,
            "degenerate": self.degenerate,
            "total_violations": self.total_violations,
            "violations": self.violations,
            "min_slack": {k: repr(v) for k, v in self.min_slack.items()},
            "failures": self.failures,
            "config": self.config,
            "elapsed_seconds": round(self.elapsed_seconds, 3),
        }

    def to_json(self) -> str:
        payload = self.to_dict()
        payload.pop("elapsed_seconds")  # keep report bytes run-independent
        return json.dumps(payload, indent=2, sort_keys=True)


# grid of awkward score values: exact zeros, denormal-ish offsets, values
# near the hinge kink, and few enough distinct points that ties are common
ADVERSARIAL_GRID = np.array(
    [0.0, 2.0**-40, -(2.0**-40), 1e-9, -1e-9, 1e-3, -1e-3, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0]
)


def _link_slacks(F: np.ndarray, Y: np.ndarray, loss: BaseLoss) -> dict[str, np.ndarray]:
    """Vectorized slack arrays for every link over a batch at one label
    count. Ranking-dependent links carry NaN on degenerate rows."""
    B, c = F.shape
    pred = np.where(F > 0.0, 1.0, -1.0)
    mism = pred != Y
    h01 = mism.mean(axis=1)
    s01 = mism.any(axis=1).astype(float)
    U = Y * F
    V = loss.value(U)
    Lh = V.mean(axis=1)
    Ls = V.max(axis=1)

    posmask = Y > 0
    npos = posmask.sum(axis=1)
    nneg = c - npos
    nondeg = (npos > 0) & (nneg > 0)
    pairmask = posmask[:, :, None] & ~posmask[:, None, :]
    n_pairs = np.where(nondeg, npos * nneg, 1)
    comp = F[:, :, None] <= F[:, None, :]
    r01 = np.where(nondeg, (comp & pairmask).sum(axis=(1, 2)) / n_pairs, np.nan)
    D = F[:, :, None] - F[:, None, :]
    Lr = np.where(nondeg, (loss.value(D) * pairmask).sum(axis=(1, 2)) / n_pairs, np.nan)

    order = np.argsort(-F, axis=1, kind="stable")
    sorted_pos = np.take_along_axis(posmask, order, axis=1)
    deltas = np.where(sorted_pos, -1, 1)
    prefix_mism = np.concatenate(
        [np.zeros((B, 1), dtype=int), np.cumsum(deltas, axis=1)], axis=1
    ) + npos[:, None]
    oracle_mism = prefix_mism.min(axis=1)
    oracle_h01 = oracle_mism / c
    oracle_s01 = (oracle_mism > 0).astype(float)

    min_pn = np.where(nondeg, np.minimum(npos, nneg), 1)
    max_pn = np.maximum(npos, nneg)

    return {
        "hamming01<=subset01": s01 - h01,
        "subset01<=subset_surrogate": Ls - s01,
        "subset01<=c*hamming01": c * h01 - s01,
        "c*hamming01<=c*hamming_surrogate": c * Lh - c * h01,
        "ranking01<=c*hamming01": c * h01 - r01,
        "oracle_hamming01<=c*ranking01": c * r01 - oracle_h01,
        "c*ranking01<=c*ranking_surrogate": c * Lr - c * r01,
        "ranking01<=(c/min_cardinality)*hamming01": c / min_pn * h01 - r01,
        "oracle_hamming01<=max_cardinality*ranking01": max_pn * r01 - oracle_h01,
        "ranking01<=subset01": s01 - r01,
        "oracle_subset01<=c^2*ranking01": c**2 * r01 - oracle_s01,
        "c^2*ranking01<=c^2*ranking_surrogate": c**2 * Lr - c**2 * r01,
    }


def _sample_scores(rng: np.random.Generator, count: int, c: int, dist: str, adv_share: float):
    if dist == "normal":
        return rng.standard_normal((count, c))
    if dist == "adversarial":
        return rng.choice(ADVERSARIAL_GRID, size=(count, c))
    n_adv = int(round(adv_share * count))
    F = rng.standard_normal((count, c))
    if n_adv:
        F[:n_adv] = rng.choice(ADVERSARIAL_GRID, size=(n_adv, c))
    return F


def _run_block(block_seed: np.random.SeedSequence, cases: int, config: FuzzConfig):
    rng = np.random.Generator(np.random.PCG64(block_seed))
    cs = rng.integers(config.c_min, config.c_max + 1, size=cases)
    violations = {link: 0 for link in ALL_LINKS}
    min_slack = {link: np.inf for link in ALL_LINKS}
    failures = []
    degenerate = 0
    for c in np.unique(cs):
        count = int(np.sum(cs == c))
        F = _sample_scores(rng, count, int(c), config.score_dist, config.adversarial_share)
        Y = np.where(rng.random((count, int(c))) < 0.5, 1.0, -1.0)
        slacks = _link_slacks(F, Y, config.base_loss)
        npos = (Y > 0).sum(axis=1)
        degenerate += int(np.sum((npos == 0) | (npos == c)))
        for link, arr in slacks.items():
            valid_idx = np.flatnonzero(~np.isnan(arr))
            if valid_idx.size == 0:
                continue
            vals = arr[valid_idx]
            min_slack[link] = min(min_slack[link], float(vals.min()))
            bad_idx = valid_idx[vals < SLACK_TOL]
            if bad_idx.size:
                violations[link] += int(bad_idx.size)
                for idx in bad_idx[:MAX_RECORDED_FAILURES]:
                    failures.append(
                        {
                            "inequality_id": link,
                            "slack": float(arr[idx]),
                            "case": RelationCase(
                                F[idx], Y[idx], config.base_loss
                            ).to_dict(),
                        }
                    )
    return violations, min_slack, failures, degenerate


def default_worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV_VAR, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def fuzz_campaign(config: FuzzConfig, workers: int | None = None) -> CampaignSummary:
    """Run the inequality links over `config.cases` random cases.

    Work is split into fixed-size blocks with seeds derived from the
    campaign seed, so the report is byte-identical for any worker count.
    """
    start = time.monotonic()
    if workers is None:
        workers = default_worker_count()
    n_blocks = (config.cases + BLOCK_CASES - 1) // BLOCK_CASES
    block_sizes = [
        min(BLOCK_CASES, config.cases - i * BLOCK_CASES) for i in range(n_blocks)
    ]
    block_seeds = np.random.SeedSequence(config.seed).spawn(n_blocks)

    if workers > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(
                pool.map(
                    lambda args: _run_block(args[0], args[1], config),
                    zip(block_seeds, block_sizes),
                )
            )
    else:
        results = [
            _run_block(seed, size, config)
            for seed, size in zip(block_seeds, block_sizes)
        ]

    violations = {link: 0 for link in ALL_LINKS}
    min_slack = {link: np.inf for link in ALL_LINKS}
    failures = []
    degenerate = 0
    for block_violations, block_min, block_failures, block_deg in results:
        for link in ALL_LINKS:
            violations[link] += block_violations[link]
            min_slack[link] = min(min_slack[link], block_min[link])
        failures.extend(block_failures)
        degenerate += block_deg
    failures = failures[:MAX_RECORDED_FAILURES]

    return CampaignSummary(
        cases=config.cases,
        degenerate=degenerate,
        violations=violations,
        min_slack={k: (v if np.isfinite(v) else None) for k, v in min_slack.items()},
        failures=failures,
        config={
            "cases": config.cases,
            "c_min": config.c_min,
            "c_max": config.c_max,
            "score_dist": config.score_dist,
            "seed": config.seed,
            "base_loss": config.base_loss.kind,
            "adversarial_share": config.adversarial_share,
        },
        elapsed_seconds=time.monotonic() - start,
    )


def replay_case(payload: dict, allow_non_dominating=False) -> list[RelationVerdict]:
    """Re-run all checkers on a serialized case (the --repro path)."""
    case = RelationCase.from_dict(payload)
    return check_all(case, allow_non_dominating=allow_non_dominating)
