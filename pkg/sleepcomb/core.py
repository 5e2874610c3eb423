"""Game protocol and regret accounting for online sleeping combinatorial optimization.

A game runs for T rounds. In each round the adversary fixes a sleeping set and
a loss function, the learner sees the sleeping set and plays an awake action (or
the round is skipped when nothing is awake), and the losses of all awake
elements are revealed.

Two regret notions are computed from a finished ``GameHistory``:

- per-action regret against V, summed only over rounds where V was awake;
- ranking regret against a fixed ranking, whose policy plays the highest-ranked
  awake action every round.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from itertools import permutations
from numbers import Real
from types import MappingProxyType
from typing import (
    TYPE_CHECKING,
    AbstractSet,
    Iterator,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
)

from sleepcomb import config
from sleepcomb.errors import (
    InvalidInstance,
    MissingLoss,
    NoAwakeAction,
    ProtocolViolation,
    TooLarge,
)
from sleepcomb.labels import Action, Label, SleepingSet, action_key, format_action
from sleepcomb.logging import VERBOSE_LEVEL, get_logger

if TYPE_CHECKING:
    from sleepcomb.problems import ProblemInstance

logger = get_logger(__name__)


class LossRange(Enum):
    """Declared range of element losses."""

    SIGNED = "[-1,1]"
    UNIT = "[0,1]"

    @property
    def low(self) -> int:
        return -1 if self is LossRange.SIGNED else 0

    @property
    def high(self) -> int:
        return 1

    def admits(self, value: Real) -> bool:
        return self.low <= value <= self.high


@dataclass(frozen=True)
class LossFunction:
    """Element losses for one round.

    Only awake elements carry values; asking for any other element raises
    ``MissingLoss``.
    """

    values: Mapping[Label, Real]
    loss_range: LossRange = LossRange.SIGNED

    def __post_init__(self) -> None:
        values = dict(self.values)
        for label, value in values.items():
            if not self.loss_range.admits(value):
                raise InvalidInstance(
                    f"Loss {value} of {label} outside declared range "
                    f"{self.loss_range.value}"
                )
        object.__setattr__(self, "values", MappingProxyType(values))

    def __getitem__(self, label: Label) -> Real:
        try:
            return self.values[label]
        except KeyError:
            raise MissingLoss(f"No loss for element {label}") from None

    def __contains__(self, label: object) -> bool:
        return label in self.values

    def __len__(self) -> int:
        return len(self.values)

    def labels(self) -> AbstractSet[Label]:
        return self.values.keys()


def action_loss(action: AbstractSet[Label], losses: LossFunction) -> Real:
    """Sum of the element losses of ``action``.

    Raises:
        MissingLoss: If some member has no loss value.
    """
    return sum((losses[label] for label in action_key(action)), 0)


@dataclass(frozen=True)
class RoundRecord:
    """One round of a game.

    ``action`` is ``None`` for a skipped round. ``expected_loss`` is filled in by
    randomized learners with the expectation of their sampled loss.
    """

    index: int
    sleeping: SleepingSet
    action: Optional[Action]
    losses: LossFunction
    expected_loss: Optional[Real] = None

    @property
    def skipped(self) -> bool:
        return self.action is None

    @property
    def algo_loss(self) -> Optional[Real]:
        if self.action is None:
            return None
        return action_loss(self.action, self.losses)

    def is_awake(self, action: AbstractSet[Label]) -> bool:
        return self.sleeping.isdisjoint(action)


@dataclass
class GameHistory:
    """Ordered record of a game's rounds."""

    rounds: List[RoundRecord] = field(default_factory=list)

    def append(self, record: RoundRecord) -> None:
        if record.action is not None and not record.is_awake(record.action):
            raise ProtocolViolation(
                f"Round {record.index}: played action {format_action(record.action)} "
                "contains sleeping elements"
            )
        self.rounds.append(record)

    def __iter__(self) -> Iterator[RoundRecord]:
        return iter(self.rounds)

    def __len__(self) -> int:
        return len(self.rounds)

    def __getitem__(self, item: int) -> RoundRecord:
        return self.rounds[item]

    def played(self) -> Iterator[RoundRecord]:
        return (record for record in self.rounds if not record.skipped)

    def total_loss(self, expected: bool = False) -> Real:
        """Algorithm loss over non-skipped rounds."""
        return sum((_charged(record, expected) for record in self.played()), 0)

    def skipped_count(self) -> int:
        return sum(1 for record in self.rounds if record.skipped)


def _charged(record: RoundRecord, expected: bool) -> Real:
    if expected and record.expected_loss is not None:
        return record.expected_loss
    return record.algo_loss


def awake_set(
    instance: "ProblemInstance", sleeping: AbstractSet[Label], cap: Optional[int] = None
) -> List[Action]:
    """All actions of ``instance`` disjoint from ``sleeping``, label-ordered.

    Raises:
        TooLarge: If more than ``cap`` actions are awake.
    """
    return instance.awake_actions(frozenset(sleeping), cap=cap)


def per_action_regret(
    history: GameHistory, action: AbstractSet[Label], expected: bool = False
) -> Real:
    """Regret against ``action`` over the rounds in which it was awake.

    Skipped rounds contribute nothing. With ``expected=True`` randomized
    learners are charged their expected rather than their sampled loss.
    """
    return sum(
        (
            _charged(record, expected) - action_loss(action, record.losses)
            for record in history.played()
            if record.is_awake(action)
        ),
        0,
    )


@dataclass(frozen=True)
class Ranking:
    """An explicit ranked prefix of actions.

    Actions not in ``order`` rank below it in label-lexicographic order; that
    completion needs an instance to enumerate the awake set.
    """

    order: Tuple[Action, ...]

    def __post_init__(self) -> None:
        order = tuple(frozenset(action) for action in self.order)
        if len(set(order)) != len(order):
            raise InvalidInstance("Ranking lists an action more than once")
        object.__setattr__(self, "order", order)

    def validate(self, instance: "ProblemInstance") -> None:
        for action in self.order:
            if not instance.contains(action):
                raise InvalidInstance(
                    f"Ranked action {format_action(action)} is not in the decision set"
                )

    def top_awake(
        self,
        sleeping: AbstractSet[Label],
        instance: Optional["ProblemInstance"] = None,
    ) -> Optional[Action]:
        """Highest-ranked awake action, or ``None`` if nothing is awake."""
        for action in self.order:
            if sleeping.isdisjoint(action):
                return action
        if instance is None:
            return None
        awake = instance.awake_actions(frozenset(sleeping))
        return awake[0] if awake else None


def ranking_loss(
    history: GameHistory,
    ranking: Ranking,
    instance: Optional["ProblemInstance"] = None,
) -> Real:
    """Loss of the policy playing the top-ranked awake action each round.

    Raises:
        NoAwakeAction: If a non-skipped round has no awake action in the
            ranking (and no instance was given to complete it).
    """
    total = 0
    for record in history.played():
        top = ranking.top_awake(record.sleeping, instance)
        if top is None:
            raise NoAwakeAction(
                f"Ranking has no awake action in round {record.index}"
            )
        total += action_loss(top, record.losses)
    return total


def ranking_regret(
    history: GameHistory,
    ranking: Ranking,
    instance: Optional["ProblemInstance"] = None,
) -> Real:
    """Algorithm loss on non-skipped rounds minus the ranking's loss."""
    return history.total_loss() - ranking_loss(history, ranking, instance)


def best_ranking_bruteforce(
    history: GameHistory, instance: "ProblemInstance", cap: Optional[int] = None
) -> Tuple[Ranking, Real]:
    """Exhaustive search for the ranking with least loss on ``history``.

    Permutations are scanned in label-lexicographic order and only a strictly
    better one replaces the incumbent, so ties go to the lexicographically first.

    Raises:
        TooLarge: If the decision set has more actions than the permutation cap.
    """
    limit = config.current().permutation_cap if cap is None else cap
    actions = instance.enumerate()
    if len(actions) > limit:
        raise TooLarge(
            f"Ranking search over {len(actions)} actions exceeds cap {limit}", limit
        )

    # Per played round: the loss of each action, or None when it sleeps.
    table = [
        [
            action_loss(action, record.losses) if record.is_awake(action) else None
            for action in actions
        ]
        for record in history.played()
    ]

    best_perm: Optional[Tuple[int, ...]] = None
    best_value: Optional[Real] = None
    for perm in permutations(range(len(actions))):
        value = sum((next(row[i] for i in perm if row[i] is not None) for row in table), 0)
        if best_value is None or value < best_value:
            best_perm, best_value = perm, value

    assert best_perm is not None
    ranking = Ranking(tuple(actions[i] for i in best_perm))
    logger.debug("Best ranking over %d actions: loss %s", len(actions), best_value)
    return ranking, best_value


class Adversary(ABC):
    """Chooses the sleeping set and losses of each round.

    Both are fixed before the learner acts; an adaptive adversary may read the
    history of earlier rounds.
    """

    @abstractmethod
    def next_round(
        self, t: int, history: GameHistory
    ) -> Tuple[SleepingSet, LossFunction]:
        """Sleeping set and awake-element losses for round ``t`` (1-based)."""


class Learner(ABC):
    """A sleeping learner over an explicitly enumerated awake set."""

    @abstractmethod
    def choose(self, awake: Sequence[Action]) -> Action:
        """Pick one of ``awake`` (non-empty, label-ordered)."""

    @abstractmethod
    def observe(self, action_losses: Mapping[Action, Real]) -> Optional[Real]:
        """Take the losses of every awake action for the round just played.

        Returns the learner's expected loss for the round when it randomizes,
        otherwise ``None``.
        """


def run_game(
    instance: "ProblemInstance",
    adversary: Adversary,
    learner: Learner,
    rounds: int,
    cap: Optional[int] = None,
) -> GameHistory:
    """Play ``rounds`` rounds between ``adversary`` and ``learner``.

    Raises:
        InvalidInstance: If ``rounds`` < 1 or a sleeping set leaves the ground set.
        ProtocolViolation: If the learner plays a non-awake or non-member action.
    """
    if rounds < 1:
        raise InvalidInstance(f"A game needs at least one round, got {rounds}")

    ground = instance.ground.members
    history = GameHistory()
    for t in range(1, rounds + 1):
        sleeping, losses = adversary.next_round(t, history)
        sleeping = frozenset(sleeping)
        if not sleeping <= ground:
            raise InvalidInstance(f"Round {t}: sleeping set leaves the ground set")

        awake = instance.awake_actions(sleeping, cap=cap)
        if not awake:
            logger.debug("Round %d skipped: no awake action", t)
            history.append(RoundRecord(t, sleeping, None, losses))
            continue

        choice = frozenset(learner.choose(awake))
        action_losses = {action: action_loss(action, losses) for action in awake}
        if choice not in action_losses:
            raise ProtocolViolation(
                f"Round {t}: learner played {format_action(choice)}, "
                "which is not an awake member of the decision set"
            )
        expected = learner.observe(action_losses)
        history.append(RoundRecord(t, sleeping, choice, losses, expected))

    logger.log(
        VERBOSE_LEVEL,
        "Game over %d rounds: %d skipped, loss %s",
        rounds,
        history.skipped_count(),
        history.total_loss(),
    )
    return history
