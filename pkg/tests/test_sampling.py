from __future__ import annotations

from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genmine import (
    InvalidInputError,
    UniqueVariantLog,
    mh_acceptance,
    mh_chain,
    mh_chain_candidate,
    mh_sample,
    naive_sample,
)

VA, VB, VC = ("a",), ("b",), ("c",)


def constant_draw(variant):
    return lambda rng: variant


def categorical_draw(variants, probs):
    variants = list(variants)
    probs = np.asarray(probs, dtype=float)

    def draw(rng):
        return variants[int(rng.choice(len(variants), p=probs))]

    return draw


class TestNaiveSample:
    def test_deterministic_generator_yields_singleton(self):
        lp = UniqueVariantLog((("a", "b"),))
        result = naive_sample(constant_draw(("a", "b")), lp, k=5, rng=np.random.default_rng(0))
        assert result.v_hat_s == {("a", "b")}
        assert result.v_hat_u == frozenset()
        assert result.draw_count == 5

    def test_k_one(self):
        lp = UniqueVariantLog((VA,))
        result = naive_sample(constant_draw(VB), lp, k=1, rng=np.random.default_rng(0))
        assert len(result.v_hat_s) == 1
        assert result.v_hat_u == {VB}

    def test_union_observed_flag(self):
        lp = UniqueVariantLog((VA, VB))
        result = naive_sample(
            constant_draw(VC), lp, k=3, rng=np.random.default_rng(0), union_observed=True
        )
        assert result.v_hat_s == {VA, VB, VC}
        assert result.v_hat_u == {VC}

    def test_invalid_k(self):
        with pytest.raises(InvalidInputError):
            naive_sample(constant_draw(VA), UniqueVariantLog((VA,)), 0, np.random.default_rng(0))

    @given(st.integers(min_value=1, max_value=200), st.integers(min_value=0, max_value=999))
    @settings(max_examples=50, deadline=None)
    def test_uniqueness_bound_and_unobserved_identity(self, k, seed):
        lp = UniqueVariantLog((VA, VB))
        draw = categorical_draw([VA, VB, VC], [0.4, 0.3, 0.3])
        result = naive_sample(draw, lp, k, np.random.default_rng(seed))
        assert len(result.v_hat_s) <= k
        assert result.v_hat_u == result.v_hat_s - {VA, VB}
        assert not (result.v_hat_u & {VA, VB})


class TestMhAcceptance:
    def test_equal_probabilities(self):
        assert mh_acceptance(0.37, 0.37) == 1.0

    def test_worked_ratio(self):
        assert mh_acceptance(0.9, 0.8) == pytest.approx(1 / 9 / 0.25)
        assert mh_acceptance(0.9, 0.8) == pytest.approx(0.4444, abs=1e-4)

    def test_better_proposal_always_accepted(self):
        assert mh_acceptance(0.8, 0.9) == 1.0

    def test_monotone_in_proposal(self):
        values = [mh_acceptance(0.7, p) for p in (0.1, 0.3, 0.5, 0.7, 0.9)]
        assert values == sorted(values)

    @pytest.mark.parametrize("bad", [0.0, 1.0, -0.1, 1.7])
    def test_boundary_rejected(self, bad):
        with pytest.raises(InvalidInputError):
            mh_acceptance(bad, 0.5)
        with pytest.raises(InvalidInputError):
            mh_acceptance(0.5, bad)


class TestMhChain:
    def test_constant_scorer_degenerates_to_generator(self):
        # alpha = 1 always: the chain just tracks the latest proposal
        draw = categorical_draw([VA, VB], [0.5, 0.5])
        rng = np.random.default_rng(3)
        finals = [mh_chain(draw, lambda v: 0.5, VA, 40, rng)[0] for _ in range(300)]
        freq = Counter(finals)
        assert abs(freq[VA] / 300 - 0.5) < 0.1

    def test_oracle_discriminator_recovers_target(self):
        # known target P, proposals Q, oracle D = P/(P+Q): stationary dist is P
        target = {VA: 0.7, VB: 0.2, VC: 0.1}
        proposal = {VA: 1 / 3, VB: 1 / 3, VC: 1 / 3}
        draw = categorical_draw(list(target), list(proposal.values()))
        d_p = lambda v: target[v] / (target[v] + proposal[v])
        rng = np.random.default_rng(11)
        inits = list(target)
        n = 2000
        finals = [
            mh_chain_candidate(draw, d_p, inits[i % 3], 500, rng.spawn(1)[0])[0]
            for i in range(n)
        ]
        freq = Counter(finals)
        tv = 0.5 * sum(abs(freq[v] / n - p) for v, p in target.items())
        assert tv < 0.05

    def test_strict_pseudocode_emits_raw_proposal(self):
        # the literal pseudocode emits an unevaluated fresh draw: distribution Q
        target = {VA: 0.7, VB: 0.2, VC: 0.1}
        proposal = {VA: 1 / 3, VB: 1 / 3, VC: 1 / 3}
        draw = categorical_draw(list(target), list(proposal.values()))
        d_p = lambda v: target[v] / (target[v] + proposal[v])
        rng = np.random.default_rng(11)
        inits = list(target)
        n = 2000
        finals = [
            mh_chain_candidate(
                draw, d_p, inits[i % 3], 500, rng.spawn(1)[0], strict_pseudocode=True
            )[0]
            for i in range(n)
        ]
        freq = Counter(finals)
        tv = 0.5 * sum(abs(freq[v] / n - p) for v, p in target.items())
        assert tv > 0.05  # fails the recovery bound, documenting the deviation


class TestMhSample:
    def _setup(self):
        lp = UniqueVariantLog((VA, VB))
        lp_e = UniqueVariantLog((VA,))
        draw = categorical_draw([VA, VB, VC], [0.5, 0.3, 0.2])
        d_p = lambda v: 0.5
        return lp, lp_e, draw, d_p

    def test_terminates_on_finite_support(self):
        lp, lp_e, draw, d_p = self._setup()
        result = mh_sample(draw, d_p, lp, lp_e, patience=30, kappa=5,
                           rng=np.random.default_rng(0))
        assert result.v_hat_s <= {VA, VB, VC}
        assert result.v_hat_u == result.v_hat_s - {VA, VB}

    def test_acceptance_rate_is_one_for_constant_scorer(self):
        lp, lp_e, draw, d_p = self._setup()
        result = mh_sample(draw, d_p, lp, lp_e, patience=10, kappa=5,
                           rng=np.random.default_rng(1))
        assert result.acceptance_rate == 1.0

    def test_deterministic_per_seed(self):
        lp, lp_e, draw, d_p = self._setup()
        r1 = mh_sample(draw, d_p, lp, lp_e, patience=20, kappa=5,
                       rng=np.random.default_rng(7))
        r2 = mh_sample(draw, d_p, lp, lp_e, patience=20, kappa=5,
                       rng=np.random.default_rng(7))
        assert r1 == r2

    def test_empty_holdout_rejected(self):
        lp, _, draw, d_p = self._setup()
        with pytest.raises(InvalidInputError):
            mh_sample(draw, d_p, lp, UniqueVariantLog(()), rng=np.random.default_rng(0))

    def test_draw_count_matches_chains(self):
        lp, lp_e, draw, d_p = self._setup()
        result = mh_sample(draw, d_p, lp, lp_e, patience=4, kappa=6,
                           rng=np.random.default_rng(2))
        assert result.draw_count % 6 == 0
