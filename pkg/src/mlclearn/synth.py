"""Deterministic synthetic multi-label datasets.

Two generative families cover the regimes the benchmark suite needs:

* ``independent_labels_dataset``: each label has its own noisy linear
  mechanism with a controlled positive rate. Labels are conditionally
  near-independent; the per-label structure is what an averaged
  (per-label) objective exploits best.
* ``topic_prototype_dataset``: samples belong to latent topics, each
  carrying a fixed label prototype that mixes a small pool of common
  labels with topic-specific rare labels. Exact-match performance then
  hinges on getting rare labels right, which rewards objectives that
  focus on the worst label of each sample.

``benchmark_stand_in`` maps the label-space scale of the public
benchmark datasets (which this environment cannot download) onto these
generators with fixed seeds, so experiment trends can be reproduced at
desk scale. Stand-ins match label counts and rough label statistics,
not the original feature distributions.
"""

from __future__ import annotations

import numpy as np

from .data import Dataset
from .errors import InvalidInputError


def independent_labels_dataset(
    n: int,
    d: int,
    c: int,
    seed: int,
    positive_rates=None,
    noise: float = 0.6,
    feature_scale: float = 1.0,
) -> Dataset:
    """Per-label noisy linear mechanisms thresholded at the empirical
    quantile that realizes each label's positive rate."""
    rng = np.random.Generator(np.random.PCG64(seed))
    if positive_rates is None:
        positive_rates = rng.uniform(0.2, 0.45, size=c)
    positive_rates = np.broadcast_to(np.asarray(positive_rates, float), (c,))
    if np.any((positive_rates <= 0) | (positive_rates >= 1)):
        raise InvalidInputError("positive rates must lie in (0, 1)")
    X = feature_scale * rng.standard_normal((n, d)) / np.sqrt(d)
    U = rng.standard_normal((d, c))
    Z = X @ U + noise * rng.standard_normal((n, c))
    tau = np.array([np.quantile(Z[:, j], 1.0 - positive_rates[j]) for j in range(c)])
    Y = np.where(Z > tau, 1.0, -1.0)
    _deduplicate_degenerate(Y, rng, allow_all_negative=True)
    return Dataset(
        X,
        Y,
        provenance={"generator": "independent_labels", "seed": int(seed), "n": n, "d": d, "c": c},
    )


def topic_prototype_dataset(
    n: int,
    d: int,
    c: int,
    seed: int,
    n_topics: int = 30,
    common_labels: int = 6,
    common_per_topic: int = 1,
    rare_per_topic: int = 2,
    noise: float = 0.55,
    feature_scale: float = 1.0,
) -> Dataset:
    """Latent-topic generator with prototype label sets.

    Labels [0, common_labels) form the common pool; the rest are rare
    and owned by single topics (wrapping around when topics need more
    rare labels than exist). Features are noisy topic centroids.
    """
    if common_labels >= c:
        raise InvalidInputError("need rare labels: common_labels < c")
    rng = np.random.Generator(np.random.PCG64(seed))
    prototypes = np.full((n_topics, c), -1.0)
    rare_pool = np.arange(common_labels, c)
    rare_cursor = 0
    for k in range(n_topics):
        commons = rng.choice(common_labels, size=min(common_per_topic, common_labels), replace=False)
        prototypes[k, commons] = 1.0
        for _ in range(rare_per_topic):
            prototypes[k, rare_pool[rare_cursor % rare_pool.size]] = 1.0
            rare_cursor += 1
    centroids = feature_scale * rng.standard_normal((n_topics, d)) / np.sqrt(d)
    topics = rng.integers(0, n_topics, size=n)
    X = centroids[topics] + noise * feature_scale * rng.standard_normal((n, d)) / np.sqrt(d)
    Y = prototypes[topics].copy()
    _deduplicate_degenerate(Y, rng, allow_all_negative=True)
    return Dataset(
        X,
        Y,
        provenance={
            "generator": "topic_prototype",
            "seed": int(seed),
            "n": n,
            "d": d,
            "c": c,
            "n_topics": n_topics,
        },
    )


def topic_documents_dataset(
    n: int,
    d: int,
    c: int,
    seed: int,
    n_topics: int = 32,
    common_labels: int = 7,
    rare_per_topic: int = 3,
    background_fraction: float = 0.25,
    core_fraction: float = 0.15,
    cross_talk: float = 0.3,
    phantom_blocks: int = 2,
    strength_sigma: float = 1.0,
    gamma_shape: float = 3.0,
) -> Dataset:
    """Nonnegative term-frequency features with per-label evidence blocks.

    The vocabulary splits into a shared background block, per-topic core
    term blocks (evidence for the topic's common label) and one term
    block per rare label. A document carries its topic's core terms plus
    each of its rare labels' blocks scaled by an independent lognormal
    per-(document, label) strength, so single labels can have faint
    evidence; phantom blocks borrowed from other labels at
    ``cross_talk`` intensity supply false-positive pressure. Per-label
    evidence noise is independent within a document, which is exactly
    the regime where per-label (averaged) training scatters its misses
    across documents while worst-label (max) training concentrates them.
    Nonnegative features leave room for implicit thresholds (negative
    background weights), so rare labels are learnable for a no-intercept
    sign classifier; run these datasets unnormalized.
    """
    if common_labels >= c:
        raise InvalidInputError("need rare labels: common_labels < c")
    rng = np.random.Generator(np.random.PCG64(seed))
    prototypes = np.full((n_topics, c), -1.0)
    rare_pool = np.arange(common_labels, c)
    cursor = 0
    topic_rares = []
    for k in range(n_topics):
        prototypes[k, rng.choice(common_labels)] = 1.0
        mine = []
        for _ in range(rare_per_topic):
            j = int(rare_pool[cursor % rare_pool.size])
            cursor += 1
            prototypes[k, j] = 1.0
            mine.append(j)
        topic_rares.append(np.array(mine))

    n_bg = int(background_fraction * d)
    n_core = int(core_fraction * d)
    n_rare = c - common_labels
    d_label = (d - n_bg - n_core) // n_rare
    if d_label < 1:
        raise InvalidInputError("vocabulary too small for one block per rare label")
    bg_profile = rng.uniform(0.8, 1.2, size=n_bg)
    core_centroids = rng.uniform(0.5, 2.0, size=(n_topics, n_core))
    label_profiles = rng.uniform(0.8, 2.0, size=(n_rare, d_label))

    def label_block(j: int) -> slice:
        start = n_bg + n_core + (j - common_labels) * d_label
        return slice(start, start + d_label)

    def gamma(*shape):
        return rng.gamma(gamma_shape, 1.0 / gamma_shape, size=shape)

    topics = rng.integers(0, n_topics, size=n)
    X = np.zeros((n, d))
    X[:, :n_bg] = bg_profile * gamma(n, n_bg)
    X[:, n_bg : n_bg + n_core] = core_centroids[topics] * gamma(n, n_core)
    for i in range(n):
        k = topics[i]
        for j in topic_rares[k]:
            strength = np.exp(
                strength_sigma * rng.standard_normal() - 0.5 * strength_sigma**2
            )
            X[i, label_block(j)] = (
                strength * label_profiles[j - common_labels] * gamma(d_label)
            )
        phantoms = rng.choice(n_rare, size=phantom_blocks, replace=False) + common_labels
        for j in phantoms:
            if prototypes[k, j] < 0:
                X[i, label_block(j)] += (
                    cross_talk * label_profiles[j - common_labels] * gamma(d_label)
                )

    Y = prototypes[topics].copy()
    _deduplicate_degenerate(Y, rng, allow_all_negative=True)
    return Dataset(
        X,
        Y,
        provenance={
            "generator": "topic_documents",
            "seed": int(seed),
            "n": n,
            "d": d,
            "c": c,
            "n_topics": n_topics,
        },
    )


def _deduplicate_degenerate(Y: np.ndarray, rng: np.random.Generator, allow_all_negative: bool):
    """All-positive rows break ranking metrics everywhere; flip one
    random label down. All-negative rows are fine (empty label sets
    exist in the real corpora) unless disallowed."""
    n, c = Y.shape
    for i in range(n):
        if np.all(Y[i] > 0):
            Y[i, rng.integers(0, c)] = -1.0
        elif not allow_all_negative and np.all(Y[i] < 0):
            Y[i, rng.integers(0, c)] = 1.0


STAND_IN_SEED = 20240 + 6


def benchmark_stand_in(name: str, seed: int | None = None) -> Dataset:
    """Desk-scale synthetic stand-ins keyed by the benchmark dataset
    whose label-space scale they mirror."""
    seed = STAND_IN_SEED if seed is None else seed
    makers = {
        # small label spaces: per-label structure dominates
        "emotions": lambda s: independent_labels_dataset(
            593, 72, 6, s, positive_rates=np.linspace(0.25, 0.4, 6),
            noise=0.4, feature_scale=3.0,
        ),
        "image": lambda s: independent_labels_dataset(
            1000, 120, 5, s, positive_rates=np.linspace(0.2, 0.32, 5),
            noise=0.45, feature_scale=3.0,
        ),
        "scene": lambda s: topic_prototype_dataset(
            1200, 150, 6, s, n_topics=8, common_labels=3,
            common_per_topic=1, rare_per_topic=1, noise=1.4,
        ),
        # large label spaces: rare-label prototypes dominate exact match;
        # nonnegative term features, meant to run unnormalized
        "bibtex": lambda s: topic_documents_dataset(
            1400, 320, 159, s, n_topics=48, common_labels=9, rare_per_topic=3,
        ),
        "rcv1-subset1": lambda s: topic_documents_dataset(
            1200, 260, 101, s, n_topics=32, common_labels=7, rare_per_topic=3,
        ),
    }
    if name not in makers:
        raise InvalidInputError(f"unknown stand-in {name!r}; known: {sorted(makers)}")
    ds = makers[name](seed)
    ds.provenance["stand_in_for"] = name
    return ds
