import math
from fractions import Fraction

import numpy as np
import pytest

from sleepcomb.adversaries import RandomAdversary
from sleepcomb.core import per_action_regret, run_game
from sleepcomb.errors import InvalidInstance, ProtocolViolation
from sleepcomb.labels import make_action
from sleepcomb.learners import (
    FollowAwakeLeader,
    LearnerConfig,
    LearnerKind,
    RandomAwake,
    SleepingHedge,
    default_eta,
    make_learner,
)
from sleepcomb.problems import KSubsets

A = make_action("a0")
B = make_action("a1")
C = make_action("a2")


class TestSleepingHedge:
    def test_uniform_start(self):
        hedge = SleepingHedge(eta=0.5, seed=0)
        assert list(hedge.probabilities([A, B, C])) == pytest.approx([1 / 3] * 3)

    def test_update_and_expected_loss(self):
        hedge = SleepingHedge(eta=math.log(2), seed=0)
        hedge.choose([A, B])
        expected = hedge.observe({A: 1, B: 0})
        assert expected == pytest.approx(0.5)
        assert hedge.last_expected_loss == pytest.approx(0.5)
        # Weights 1/2 and 1, renormalized to total 2.
        assert hedge.relative_weight(A) == pytest.approx(2 / 3)
        assert hedge.relative_weight(B) == pytest.approx(4 / 3)
        assert list(hedge.probabilities([A, B])) == pytest.approx([1 / 3, 2 / 3])

    def test_matches_mix_loss_decay_of_sleeping_weights(self):
        hedge = SleepingHedge(eta=math.log(2), seed=0)
        hedge.choose([A, B])
        hedge.observe({A: 1, B: 0})
        # A decays to 1/2, B stays 1, sleeping C decays by the mix factor 3/4.
        decayed = np.array([0.5, 1.0, 0.75])
        assert list(hedge.probabilities([A, B, C])) == pytest.approx(list(decayed / decayed.sum()))

    def test_sleeping_action_keeps_weight(self):
        hedge = SleepingHedge(eta=1.0, seed=3)
        for losses in ({A: 1, B: 0}, {A: 0, B: 1}, {A: 1, B: 1}):
            hedge.choose(list(losses))
            hedge.observe(losses)
        assert hedge.log_weight(C) == 0.0
        assert hedge.relative_weight(A) + hedge.relative_weight(B) == pytest.approx(2.0)

    def test_total_weight_is_conserved(self):
        hedge = SleepingHedge(eta=0.3, seed=1)
        hedge.choose([A, C])
        hedge.observe({A: Fraction(1, 2), C: 0})
        asleep = hedge.log_weight(C)
        hedge.choose([A, B])
        hedge.observe({A: 1, B: 0})
        hedge.choose([A, B])
        hedge.observe({A: 0, B: 1})
        assert hedge.log_weight(C) == asleep
        total = sum(hedge.relative_weight(x) for x in (A, B, C))
        assert total == pytest.approx(3.0)

    def test_observe_before_choose(self):
        with pytest.raises(ProtocolViolation):
            SleepingHedge(eta=1.0, seed=0).observe({A: 0})

    def test_reproducible_choices(self):
        def trace(seed):
            hedge = SleepingHedge(eta=0.2, seed=seed)
            picks = []
            for t in range(20):
                losses = {A: t % 2, B: (t + 1) % 2, C: Fraction(1, 2)}
                picks.append(hedge.choose([A, B, C]))
                hedge.observe(losses)
            return picks

        assert trace(5) == trace(5)

    def test_rejects_bad_eta(self):
        with pytest.raises(InvalidInstance):
            SleepingHedge(eta=0, seed=0)


def _worst_per_action_regret(horizon, seed):
    """Largest expected per-action regret of Hedge on a 5-action sleeping game."""
    instance = KSubsets.anonymous(1, 5)
    hedge = SleepingHedge(default_eta(5, horizon), seed)
    history = run_game(instance, RandomAdversary(instance.ground, seed), hedge, horizon)
    return max(
        float(per_action_regret(history, action, expected=True))
        for action in instance.enumerate()
    )


@pytest.mark.integration
class TestSleepingHedgeRegretGrowth:
    HORIZONS = [2**k for k in range(3, 13)]
    SEEDS = range(4)

    def test_per_action_regret_is_sublinear(self):
        # Regret floored at 1 for the log scale.
        regrets = [
            np.mean([max(_worst_per_action_regret(horizon, seed), 1.0) for seed in self.SEEDS])
            for horizon in self.HORIZONS
        ]
        slope, _ = np.polyfit(np.log(self.HORIZONS), np.log(regrets), 1)
        assert slope < 0.8, f"log-log regret slope {slope:.3f}"


class TestFollowAwakeLeader:
    def test_ties_go_to_label_order(self):
        assert FollowAwakeLeader().choose([C, B, A]) == A

    def test_follows_cumulative_awake_loss(self):
        ftl = FollowAwakeLeader()
        ftl.observe({A: 1, B: 0})
        assert ftl.choose([A, B]) == B
        ftl.observe({B: 2, C: 0})
        assert ftl.choose([A, B, C]) == C
        assert ftl.choose([A, B]) == A
        assert ftl.cumulative == {A: 1, B: 2, C: 0}


class TestRandomAwake:
    def test_reproducible(self):
        learner, other = RandomAwake(seed=9), RandomAwake(seed=9)
        picks = [learner.choose([A, B, C]) for _ in range(30)]
        assert picks == [other.choose([A, B, C]) for _ in range(30)]
        assert set(picks) <= {A, B, C}

    def test_expected_loss_is_mean(self):
        assert RandomAwake(seed=0).observe({A: 1, B: 0}) == Fraction(1, 2)


class TestLearnerConfig:
    def test_seed_required_for_randomized(self):
        with pytest.raises(InvalidInstance):
            LearnerConfig(LearnerKind.HEDGE)
        with pytest.raises(InvalidInstance):
            LearnerConfig("random")

    def test_ftl_needs_no_seed(self):
        assert isinstance(make_learner(LearnerConfig("ftl"), None, 10), FollowAwakeLeader)

    @pytest.mark.parametrize("field", ["eta", "loss_scale"])
    def test_rejects_non_positive(self, field):
        with pytest.raises(InvalidInstance):
            LearnerConfig(LearnerKind.HEDGE, seed=0, **{field: 0})

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            LearnerConfig("exp4", seed=0)

    def test_hedge_uses_default_eta(self):
        learner = make_learner(LearnerConfig(LearnerKind.HEDGE, seed=1), 6, 100)
        assert isinstance(learner, SleepingHedge)
        assert learner.eta == pytest.approx(default_eta(6, 100))

    def test_explicit_eta_wins(self):
        learner = make_learner(LearnerConfig(LearnerKind.HEDGE, eta=0.7, seed=1), 6, 100)
        assert learner.eta == 0.7

    def test_random_learner(self):
        assert isinstance(make_learner(LearnerConfig("random", seed=2), 4, 4), RandomAwake)


class TestDefaultEta:
    def test_formula(self):
        assert default_eta(4, 50) == pytest.approx(math.sqrt(8 * math.log(4) / 50))

    def test_scale_and_small_n(self):
        assert default_eta(1, 8, loss_scale=2.0) == pytest.approx(
            math.sqrt(8 * math.log(2) / 8) / 2
        )
