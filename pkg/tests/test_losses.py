import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mlclearn.errors import (
    DegenerateSampleError,
    DimensionMismatchError,
    InvalidInputError,
)
from mlclearn.losses import (
    HAMMING,
    RANKING,
    SUBSET,
    BaseLoss,
    base_loss_subgrad,
    base_loss_value,
    empirical_loss_bound,
    hamming_loss_01,
    ranking_loss_01,
    subset_loss_01,
    surrogate_hamming,
    surrogate_ranking,
    surrogate_subgrad,
    surrogate_subset,
)

HINGE = BaseLoss.hinge()
LOG_LN = BaseLoss.logistic_ln()
LOG2 = BaseLoss.logistic_log2()


class TestBaseLoss:
    def test_hinge_values(self):
        assert base_loss_value(HINGE, 1.0) == 0.0
        assert base_loss_value(HINGE, -1.0) == 2.0  # max(0, 1 - (-1))
        assert base_loss_value(HINGE, 3.0) == 0.0

    def test_logistic_values(self):
        assert base_loss_value(LOG2, 0.0) == pytest.approx(1.0)  # log2(2)
        assert base_loss_value(LOG_LN, 0.0) == pytest.approx(math.log(2.0))

    def test_subgrads(self):
        assert base_loss_subgrad(HINGE, 0.0) == -1.0
        assert base_loss_subgrad(HINGE, 1.0) == 0.0  # kink resolved to 0
        assert base_loss_subgrad(HINGE, 2.0) == 0.0
        # derivative of ln(1 + e^-u) at 0 is -e^0 / (1 + e^0) = -1/2
        assert base_loss_subgrad(LOG_LN, 0.0) == pytest.approx(-0.5)
        assert base_loss_subgrad(LOG2, 0.0) == pytest.approx(-0.5 / math.log(2.0))

    def test_nonfinite_rejected(self):
        for bad in (float("nan"), float("inf"), -float("inf")):
            with pytest.raises(InvalidInputError):
                base_loss_value(HINGE, bad)
            with pytest.raises(InvalidInputError):
                base_loss_subgrad(LOG_LN, bad)

    def test_rho_constants(self):
        assert HINGE.rho == 1.0
        assert LOG_LN.rho == 1.0
        assert LOG2.rho == pytest.approx(1.0 / math.log(2.0))

    def test_upper_bounds_01_flag(self):
        assert HINGE.upper_bounds_01
        assert LOG2.upper_bounds_01
        assert not LOG_LN.upper_bounds_01

    def test_logistic_stable_at_extreme_margins(self):
        assert np.isfinite(base_loss_value(LOG_LN, -800.0))
        assert base_loss_value(LOG_LN, -800.0) == pytest.approx(800.0)
        assert base_loss_value(LOG_LN, 800.0) == 0.0

    @given(st.floats(-50, 50), st.floats(-50, 50))
    def test_lipschitz_in_u(self, u1, u2):
        for loss in (HINGE, LOG_LN, LOG2):
            lhs = abs(base_loss_value(loss, u1) - base_loss_value(loss, u2))
            assert lhs <= loss.rho * abs(u1 - u2) + 1e-12

    @given(st.floats(-30, 30))
    def test_dominates_01_when_flagged(self, u):
        zero_one = 1.0 if u <= 0 else 0.0  # sgn(u) != 1 iff u <= 0
        for loss in (HINGE, LOG2):
            assert base_loss_value(loss, u) >= zero_one - 1e-12

    def test_from_name(self):
        assert BaseLoss.from_name("hinge") == HINGE
        assert BaseLoss.from_name("hinge", bound=3.0).bound == 3.0
        with pytest.raises(InvalidInputError):
            BaseLoss.from_name("huber")


class TestZeroOneMeasures:
    def test_hamming_examples(self):
        y = np.array([1.0, -1.0, 1.0])
        assert hamming_loss_01(y, y) == 0.0
        assert hamming_loss_01([1, 1, -1], y) == pytest.approx(2.0 / 3.0)
        y4 = np.array([1.0, -1.0, 1.0, -1.0])
        assert hamming_loss_01(-y4, y4) == 1.0

    def test_subset_examples(self):
        y = np.array([1.0, -1.0, 1.0])
        assert subset_loss_01(y, y) == 0.0
        assert subset_loss_01([1, 1, -1], y) == 1.0
        assert subset_loss_01([-1], [-1]) == 0.0

    def test_ranking_examples(self):
        # pair (0,1) violated (0.5 <= 0.7), pair (0,2) not
        assert ranking_loss_01([0.5, 0.7, 0.1], [1, -1, -1]) == 0.5
        # all relevant strictly above all irrelevant
        assert ranking_loss_01([2.0, 1.5, 0.1], [1, 1, -1]) == 0.0
        assert ranking_loss_01([0.3, 0.4], [1, 1]) is None
        assert ranking_loss_01([0.3, 0.4], [-1, -1]) is None

    def test_ranking_tie_counts_as_violation(self):
        assert ranking_loss_01([0.5, 0.5], [1, -1]) == 1.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            hamming_loss_01([1, -1], [1, -1, 1])
        with pytest.raises(DimensionMismatchError):
            ranking_loss_01([0.1, 0.2], [1, -1, 1])

    def test_label_validation(self):
        with pytest.raises(InvalidInputError):
            hamming_loss_01([1, 0], [1, -1])

    @given(st.integers(1, 10), st.integers(0, 2**32 - 1))
    @settings(max_examples=50)
    def test_ranking_invariant_under_monotone_transform(self, c, seed):
        rng = np.random.Generator(np.random.PCG64(seed))
        f = rng.standard_normal(c)
        y = np.where(rng.standard_normal(c) > 0, 1.0, -1.0)
        base = ranking_loss_01(f, y)
        for transform in (lambda v: 3.0 * v + 2.0, np.tanh, lambda v: v**3):
            assert ranking_loss_01(transform(f), y) == base


class TestSurrogates:
    def test_hamming_surrogate_examples(self):
        assert surrogate_hamming([0.5, -2.0], [1, -1], HINGE) == pytest.approx(0.25)
        assert surrogate_hamming([2.0, -3.0], [1, -1], HINGE) == 0.0
        assert surrogate_hamming([0.0, 0.0, 0.0], [1, -1, 1], HINGE) == 1.0

    def test_subset_surrogate_examples(self):
        assert surrogate_subset([0.5, -2.0], [1, -1], HINGE) == pytest.approx(0.5)
        assert surrogate_subset([2.0, -3.0], [1, -1], HINGE) == 0.0
        assert surrogate_subset([0.0, 0.0], [1, -1], HINGE) == 1.0

    def test_ranking_surrogate_examples(self):
        assert surrogate_ranking([2.1, 0.0], [1, -1], HINGE) == 0.0
        # pair hinges: ell(-0.2) = 1.2 and ell(0.4) = 0.6
        assert surrogate_ranking([0.5, 0.7, 0.1], [1, -1, -1], HINGE) == pytest.approx(0.9)
        assert surrogate_ranking([0.5, 0.7], [-1, -1], HINGE) is None

    def test_subset_dominates_hamming_surrogate(self):
        rng = np.random.Generator(np.random.PCG64(11))
        for _ in range(200):
            c = int(rng.integers(1, 9))
            f = rng.standard_normal(c)
            y = np.where(rng.standard_normal(c) > 0, 1.0, -1.0)
            assert surrogate_subset(f, y, HINGE) >= surrogate_hamming(f, y, HINGE)

    @pytest.mark.parametrize("loss", [HINGE, LOG2])
    def test_surrogates_dominate_01(self, loss):
        rng = np.random.Generator(np.random.PCG64(5))
        for _ in range(300):
            c = int(rng.integers(1, 9))
            f = rng.standard_normal(c)
            y = np.where(rng.standard_normal(c) > 0, 1.0, -1.0)
            pred = np.where(f > 0, 1.0, -1.0)
            assert hamming_loss_01(pred, y) <= surrogate_hamming(f, y, loss) + 1e-9
            assert subset_loss_01(pred, y) <= surrogate_subset(f, y, loss) + 1e-9
            r01 = ranking_loss_01(f, y)
            if r01 is not None:
                assert r01 <= surrogate_ranking(f, y, loss) + 1e-9

    @pytest.mark.parametrize("loss", [HINGE, LOG_LN, LOG2])
    def test_lipschitz_sampling(self, loss):
        # surrogate-level Lipschitz constants: rho/sqrt(c) for the mean
        # form, rho for the max form, rho * sqrt(2/min{|Y+|,|Y-|}) for the
        # pairwise form (the mean over pairs only controls the score-gap
        # DIFFERENCES, which costs a factor sqrt(2); see
        # test_ranking_needs_the_sqrt2_factor).
        rng = np.random.Generator(np.random.PCG64(17))
        for _ in range(200):
            c = int(rng.integers(1, 12))
            y = np.where(rng.standard_normal(c) > 0, 1.0, -1.0)
            f1 = 3.0 * rng.standard_normal(c)
            f2 = 3.0 * rng.standard_normal(c)
            dist = float(np.linalg.norm(f1 - f2))
            dh = abs(surrogate_hamming(f1, y, loss) - surrogate_hamming(f2, y, loss))
            assert dh <= loss.rho / math.sqrt(c) * dist + 1e-9
            ds = abs(surrogate_subset(f1, y, loss) - surrogate_subset(f2, y, loss))
            assert ds <= loss.rho * dist + 1e-9
            r1 = surrogate_ranking(f1, y, loss)
            if r1 is not None:
                n_pos = int(np.sum(y > 0))
                n_neg = c - n_pos
                ranking_rho = loss.rho * math.sqrt(2.0 / min(n_pos, n_neg))
                dr = abs(r1 - surrogate_ranking(f2, y, loss))
                assert dr <= ranking_rho * dist + 1e-9

    def test_ranking_needs_the_sqrt2_factor(self):
        # With one relevant and one irrelevant label the pairwise surrogate
        # moves by ell(f1 - f2) shifts of twice the per-score perturbation:
        # a plain-rho constant is unattainable, the sharp one is rho*sqrt(2).
        y = np.array([1.0, -1.0])
        f1 = np.array([0.0, 0.0])
        f2 = np.array([-0.3, 0.3])
        diff = abs(
            surrogate_ranking(f1, y, HINGE) - surrogate_ranking(f2, y, HINGE)
        )
        dist = float(np.linalg.norm(f1 - f2))
        assert diff / dist == pytest.approx(math.sqrt(2.0))

    def test_bounded_by_B_on_its_domain(self):
        # hinge: ell(u) <= B exactly when u >= 1 - B
        B = 2.5
        loss = BaseLoss.hinge(bound=B)
        rng = np.random.Generator(np.random.PCG64(23))
        for _ in range(200):
            c = int(rng.integers(2, 8))
            y = np.where(rng.standard_normal(c) > 0, 1.0, -1.0)
            margins = rng.uniform(1.0 - B, 4.0, size=c)
            f = margins * y  # y_j f_j = margin_j in the ell <= B region
            assert surrogate_hamming(f, y, loss) <= B + 1e-12
            assert surrogate_subset(f, y, loss) <= B + 1e-12

    def test_empirical_bound_diagnostic(self):
        f = np.array([0.5, -2.0])
        y = np.array([1.0, -1.0])
        assert empirical_loss_bound(f, y, HINGE) == pytest.approx(0.5)
        assert empirical_loss_bound([0.5, 0.7], [1, -1], HINGE, RANKING) == pytest.approx(1.2)


def _fd_subgrad(kind, f, y, loss, h=1e-6):
    g = np.zeros(len(f))
    for j in range(len(f)):
        fp = np.array(f, dtype=float)
        fm = np.array(f, dtype=float)
        fp[j] += h
        fm[j] -= h
        val = {
            HAMMING: surrogate_hamming,
            SUBSET: surrogate_subset,
            RANKING: surrogate_ranking,
        }[kind]
        g[j] = (val(fp, y, loss) - val(fm, y, loss)) / (2 * h)
    return g


def _hinge_smooth(kind, f, y, margin=1e-3):
    """True when f is at least `margin` away from every hinge kink and,
    for the subset surrogate, from argmax ties."""
    f = np.asarray(f, float)
    y = np.asarray(y, float)
    u = y * f
    if kind == RANKING:
        pos = np.flatnonzero(y > 0)
        neg = np.flatnonzero(y < 0)
        if pos.size == 0 or neg.size == 0:
            return False
        diffs = (f[pos][:, None] - f[neg][None, :]).ravel()
        return bool(np.all(np.abs(diffs - 1.0) > margin))
    ok = np.all(np.abs(u - 1.0) > margin)
    if kind == SUBSET:
        vals = np.maximum(0.0, 1.0 - u)
        top = np.sort(vals)[::-1]
        if len(top) > 1 and top[0] - top[1] < margin:
            return False
    return bool(ok)


class TestSurrogateSubgradients:
    def test_flat_region_gives_zero(self):
        f = np.array([2.0, -3.0])
        y = np.array([1.0, -1.0])
        for kind in (HAMMING, SUBSET, RANKING):
            assert np.all(surrogate_subgrad(kind, f, y, HINGE) == 0.0)

    def test_subset_active_term(self):
        # ell(y2 f2) = ell(-2) = 3 is the max; d/df2 max(0, 1 + f2) = +1
        g = surrogate_subgrad(SUBSET, [0.5, 2.0], [1.0, -1.0], HINGE)
        assert np.allclose(g, [0.0, 1.0])

    def test_subset_tie_breaks_to_smallest_index(self):
        g = surrogate_subgrad(SUBSET, [0.0, 0.0], [1.0, 1.0], HINGE)
        assert np.allclose(g, [-1.0, 0.0])

    def test_hamming_formula(self):
        g = surrogate_subgrad(HAMMING, [0.5, 2.0], [1.0, -1.0], HINGE)
        # both margins active: y_j * ell'(y_j f_j) / c = [-1/2, +1/2]
        assert np.allclose(g, [-0.5, 0.5])

    def test_ranking_degenerate_raises(self):
        with pytest.raises(DegenerateSampleError):
            surrogate_subgrad(RANKING, [0.1, 0.2], [1.0, 1.0], HINGE)

    @pytest.mark.parametrize("kind", [HAMMING, SUBSET, RANKING])
    @pytest.mark.parametrize("loss", [HINGE, LOG_LN, LOG2])
    def test_matches_central_differences(self, kind, loss):
        rng = np.random.Generator(np.random.PCG64(97))
        checked = 0
        while checked < 25:
            c = int(rng.integers(2, 7))
            f = 2.0 * rng.standard_normal(c)
            y = np.where(rng.standard_normal(c) > 0, 1.0, -1.0)
            pos = np.sum(y > 0)
            if kind == RANKING and (pos == 0 or pos == c):
                continue
            if loss.kind == "hinge" and not _hinge_smooth(kind, f, y):
                continue
            if loss.kind != "hinge" and kind == SUBSET:
                vals = loss.value(y * f)
                top = np.sort(vals)[::-1]
                if len(top) > 1 and top[0] - top[1] < 1e-3:
                    continue
            analytic = surrogate_subgrad(kind, f, y, loss)
            fd = _fd_subgrad(kind, f, y, loss)
            denom = max(np.linalg.norm(fd), 1e-8)
            assert np.linalg.norm(analytic - fd) / denom < 1e-5
            checked += 1
