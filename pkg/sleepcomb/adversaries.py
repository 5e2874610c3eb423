"""Stock adversaries for ``run_game``.

``ScriptedAdversary`` replays a fixed list of rounds. ``RandomAdversary`` puts
each element to sleep independently and draws rational losses with denominator
100, so every ledger built from its rounds is exact.
"""

from fractions import Fraction
from typing import AbstractSet, Iterable, Optional, Sequence, Tuple

import numpy as np

from sleepcomb import config
from sleepcomb.core import Adversary, GameHistory, LossFunction, LossRange
from sleepcomb.errors import InvalidInstance
from sleepcomb.labels import GroundSet, Label, SleepingSet
from sleepcomb.logging import get_logger

logger = get_logger(__name__)

LOSS_DENOMINATOR = 100


class ScriptedAdversary(Adversary):
    """Replays ``rounds`` in order; asking for more rounds is an error."""

    def __init__(self, rounds: Sequence[Tuple[AbstractSet[Label], LossFunction]]):
        self.rounds = [(frozenset(sleeping), losses) for sleeping, losses in rounds]

    def next_round(
        self, t: int, history: GameHistory
    ) -> Tuple[SleepingSet, LossFunction]:
        if not 1 <= t <= len(self.rounds):
            raise InvalidInstance(
                f"Scripted adversary has {len(self.rounds)} rounds, asked for round {t}"
            )
        return self.rounds[t - 1]


def random_losses(
    labels: Iterable[Label],
    rng: np.random.Generator,
    loss_range: LossRange = LossRange.UNIT,
) -> LossFunction:
    """Rational losses with denominator 100, uniform over the declared range."""
    low = loss_range.low * LOSS_DENOMINATOR
    high = loss_range.high * LOSS_DENOMINATOR
    values = {
        label: Fraction(int(rng.integers(low, high + 1)), LOSS_DENOMINATOR)
        for label in labels
    }
    return LossFunction(values, loss_range)


class RandomAdversary(Adversary):
    """Oblivious random sleeping sets and losses.

    Each element outside ``never_sleep`` sleeps with probability
    ``sleep_probability``; elements in ``always_sleep`` never wake. Losses are
    drawn only for awake elements.
    """

    def __init__(
        self,
        ground: GroundSet,
        seed: int,
        loss_range: LossRange = LossRange.UNIT,
        sleep_probability: Optional[float] = None,
        always_sleep: AbstractSet[Label] = frozenset(),
        never_sleep: AbstractSet[Label] = frozenset(),
    ):
        self.ground = ground
        self.loss_range = loss_range
        self.sleep_probability = (
            config.current().sleep_probability
            if sleep_probability is None
            else sleep_probability
        )
        if not 0.0 <= self.sleep_probability < 1.0:
            raise InvalidInstance("sleep_probability must lie in [0, 1)")
        self.always_sleep = frozenset(always_sleep)
        self.never_sleep = frozenset(never_sleep)
        self.rng = np.random.default_rng(seed)
        logger.debug(
            "Random adversary over %d elements, sleep probability %.3f, seed %d",
            ground.d,
            self.sleep_probability,
            seed,
        )

    def next_round(
        self, t: int, history: GameHistory
    ) -> Tuple[SleepingSet, LossFunction]:
        draws = self.rng.random(self.ground.d)
        sleeping = frozenset(
            label
            for label, draw in zip(self.ground, draws)
            if label in self.always_sleep
            or (label not in self.never_sleep and draw < self.sleep_probability)
        )
        awake = [label for label in self.ground if label not in sleeping]
        return sleeping, random_losses(awake, self.rng, self.loss_range)
