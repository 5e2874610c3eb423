"""The two reductions and the comparator constructions behind them.

``PerActionWrapper`` turns any sleeping learner on the extended instance (a
ranking-regret learner) into a per-action regret learner on the base
instance. Round t is tagged with a bit pattern: the base sleeping set is
joined by the distinguished elements of the opposite bits, so only derived
actions carrying the round's pattern are awake, and the inner learner's
choice is projected back with pi.

``DisjunctionLearner`` learns disjunctions online from a per-action learner on a
hard instance. Input x puts (i, 1 - x(i)) to sleep; the prediction is 1 iff the
played action avoids F. Element losses are chosen so that an action of exactly
n+1 elements loses 1 iff its prediction is wrong.

``build_dphi`` gives, for a disjunction phi, the m+1 actions of which exactly
one is awake in every round, and whose loss is then phi's mistake.
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from numbers import Real
from typing import AbstractSet, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from sleepcomb.core import (
    Adversary,
    GameHistory,
    Learner,
    LossFunction,
    LossRange,
    Ranking,
    RoundRecord,
    action_loss,
    per_action_regret,
)
from sleepcomb.disjunctions import Disjunction, LabeledStream, evaluate, mistakes
from sleepcomb.errors import (
    ConstructionDefect,
    InvalidInstance,
    NoAwakeAction,
    NoneAwake,
    NotUnique,
    ProtocolViolation,
    UnsupportedLossRange,
)
from sleepcomb.extensible import ExtendedInstance, extend
from sleepcomb.hard_instances import HardInstance, build_hard
from sleepcomb.labels import F, T, Action, Label, SleepingSet, Tag, format_action
from sleepcomb.learners import SleepingHedge, default_eta
from sleepcomb.logging import VERBOSE_LEVEL, get_logger
from sleepcomb.problems import Family, ProblemInstance

logger = get_logger(__name__)

Bits = Tuple[int, ...]
_PendingPrediction = Tuple[Bits, SleepingSet, List[Action], Action, int]


def bits_for_horizon(horizon: int) -> int:
    """max(1, ceil(log2 T))."""
    if horizon < 1:
        raise InvalidInstance(f"Horizon must be >= 1, got {horizon}")
    return max(1, (horizon - 1).bit_length())


def round_bits(t: int, p: int) -> Bits:
    """t - 1 in p bits, least significant first."""
    return tuple(((t - 1) >> i) & 1 for i in range(p))


def draw_pattern(rng: np.random.Generator, p: int) -> Bits:
    return tuple(int(b) for b in rng.integers(0, 2, size=p))


class WrapperMode(str, Enum):
    DETERMINISTIC = "det"
    IID = "iid"


@dataclass
class _PendingRound:
    sleeping: SleepingSet
    derived_sleeping: SleepingSet
    awake: List[Action]
    chosen: Optional[Action]


class PerActionWrapper:
    """Per-action regret learner on ``base`` driven by an inner learner on its extension.

    Args:
        base: The base instance.
        horizon: Number of rounds T.
        inner_factory: Builds the inner learner from the extended instance.
        mode: Deterministic round encodings or i.i.d. random patterns.
        seed: Seed for i.i.d. patterns.
        p_multiplier: In i.i.d. mode p = p_multiplier * max(1, ceil(log2 T)).
        cap: Enumeration cap for derived awake sets.
    """

    def __init__(
        self,
        base: ProblemInstance,
        horizon: int,
        inner_factory: Callable[[ExtendedInstance], Learner],
        mode: WrapperMode = WrapperMode.DETERMINISTIC,
        seed: Optional[int] = None,
        p_multiplier: int = 2,
        cap: Optional[int] = None,
    ):
        self.mode = WrapperMode(mode)
        bits = bits_for_horizon(horizon)
        if self.mode is WrapperMode.IID:
            if seed is None:
                raise InvalidInstance("The i.i.d. wrapper needs a seed")
            if p_multiplier < 1:
                raise InvalidInstance(f"p_multiplier must be >= 1, got {p_multiplier}")
            bits *= p_multiplier
        self.horizon = horizon
        self.ext = extend(base, bits)
        self.inner = inner_factory(self.ext)
        self.rng = np.random.default_rng(seed)
        self.cap = cap
        self.t = 0
        self.patterns: List[Bits] = []
        self.base_history = GameHistory()
        self.derived_history = GameHistory()
        self._pending: Optional[_PendingRound] = None
        self._bests: List[Optional[Action]] = []
        logger.debug("Per-action wrapper: mode %s, p=%d, T=%d", self.mode.value, bits, horizon)

    @property
    def p(self) -> int:
        return self.ext.p

    def hindsight_bests(self) -> List[Optional[Action]]:
        """Per-round best base actions, extended as rounds are recorded."""
        recorded = self.base_history.rounds[len(self._bests) :]
        self._bests.extend(hindsight_bests(self.ext.base, GameHistory(list(recorded))))
        return self._bests

    def _next_pattern(self) -> Bits:
        if self.mode is WrapperMode.DETERMINISTIC:
            return round_bits(self.t, self.p)
        return draw_pattern(self.rng, self.p)

    def pa_step(self, sleeping: AbstractSet[Label]) -> Optional[Action]:
        """Start a round: pick the base action to play, or ``None`` to skip.

        Raises:
            ProtocolViolation: Past the horizon, on a step without a feed, or if
                the inner learner plays a non-awake action.
            InvalidInstance: If ``sleeping`` leaves the base ground set.
        """
        if self._pending is not None:
            raise ProtocolViolation("pa_step() called twice without pa_feed()")
        if self.t >= self.horizon:
            raise ProtocolViolation(f"Wrapper horizon {self.horizon} exhausted")
        sleeping = frozenset(sleeping)
        if not sleeping <= self.ext.base.ground.members:
            raise InvalidInstance("Sleeping set leaves the base ground set")

        self.t += 1
        bits = self._next_pattern()
        self.patterns.append(bits)
        derived_sleeping = sleeping | self.ext.opposite_bits(bits) | self.ext.permanently_sleeping
        awake = self.ext.derived.awake_actions(derived_sleeping, self.cap)
        chosen = None
        if awake:
            chosen = frozenset(self.inner.choose(awake))
            if chosen not in set(awake):
                raise ProtocolViolation(
                    f"Round {self.t}: inner learner played {format_action(chosen)}, "
                    "which is not awake in the derived instance"
                )
        self._pending = _PendingRound(sleeping, derived_sleeping, awake, chosen)
        return None if chosen is None else self.ext.pi(chosen)

    def pa_feed(self, losses: LossFunction) -> LossFunction:
        """Finish the round: forward the losses to the inner learner.

        Returns the derived loss function (base losses, 0 on awake bit elements).

        Raises:
            UnsupportedLossRange: If any base loss is negative.
        """
        pending = self._pending
        if pending is None:
            raise ProtocolViolation("pa_feed() called before pa_step()")
        for label in losses.labels():
            if losses[label] < 0:
                raise UnsupportedLossRange(
                    f"Per-action reduction needs losses in [0,1]; {label} has {losses[label]}"
                )
        values: Dict[Label, Real] = dict(losses.values)
        for label in self.ext.distinguished:
            if label not in pending.derived_sleeping:
                values[label] = 0
        derived = LossFunction(values, LossRange.UNIT)

        expected = None
        if pending.chosen is not None:
            expected = self.inner.observe(
                {action: action_loss(action, derived) for action in pending.awake}
            )
        played = None if pending.chosen is None else self.ext.pi(pending.chosen)
        self.base_history.append(RoundRecord(self.t, pending.sleeping, played, losses))
        self.derived_history.append(
            RoundRecord(self.t, pending.derived_sleeping, pending.chosen, derived, expected)
        )
        self._pending = None
        return derived


def run_per_action(wrapper: PerActionWrapper, adversary: Adversary) -> GameHistory:
    """Play the wrapper against ``adversary`` for its full horizon."""
    for t in range(1, wrapper.horizon + 1):
        sleeping, losses = adversary.next_round(t, wrapper.base_history)
        wrapper.pa_step(sleeping)
        wrapper.pa_feed(losses)
    logger.log(
        VERBOSE_LEVEL,
        "Per-action reduction over %d rounds: %d skipped",
        wrapper.horizon,
        wrapper.base_history.skipped_count(),
    )
    return wrapper.base_history


def hindsight_bests(instance: ProblemInstance, history: GameHistory) -> List[Optional[Action]]:
    """Per round, the awake action of least loss (ties label-lexicographic)."""
    bests: List[Optional[Action]] = []
    for record in history:
        found = instance.min_loss_awake_bruteforce(record.sleeping, record.losses)
        bests.append(None if found is None else found[0])
    return bests


def build_comparator_ranking(
    ext: ExtendedInstance,
    history: GameHistory,
    action: Action,
    patterns: Sequence[Bits],
    bests: Optional[Sequence[Optional[Action]]] = None,
) -> Ranking:
    """The ranking whose top awake derived action at round t carries V_t*.

    V_t* is ``action`` when it is awake at round t and otherwise the awake base
    action of least loss (ties label-lexicographic). Entry t is V_t* joined with
    round t's bit pattern; rounds with no awake base action get no entry, and
    repeated entries keep their first position. ``bests`` may carry the
    per-round minimizers from ``hindsight_bests``.
    """
    if len(patterns) != len(history):
        raise InvalidInstance("Need one bit pattern per recorded round")
    if bests is None:
        bests = hindsight_bests(ext.base, history)
    order: Dict[Action, None] = {}
    for record, bits, fallback in zip(history, patterns, bests):
        best = action if record.is_awake(action) else fallback
        if best is None:
            continue
        order.setdefault(ext.lift(bits, best))
    return Ranking(tuple(order))


def comparator_for_wrapper(wrapper: PerActionWrapper, action: Action) -> Ranking:
    return build_comparator_ranking(
        wrapper.ext, wrapper.base_history, action, wrapper.patterns, wrapper.hindsight_bests()
    )


def pattern_collision_frequency(
    horizon: int, trials: int, p_multiplier: int = 2, seed: int = 0
) -> float:
    """Fraction of trials in which some bit pattern repeats within T rounds."""
    p = p_multiplier * bits_for_horizon(horizon)
    rng = np.random.default_rng(seed)
    collisions = 0
    for _ in range(trials):
        seen = set()
        for _ in range(horizon):
            pattern = draw_pattern(rng, p)
            if pattern in seen:
                collisions += 1
                break
            seen.add(pattern)
    return collisions / trials


def collision_union_bound(horizon: int, p: int) -> float:
    """T(T-1) / 2^(p+1): the union bound on a repeated pattern."""
    return horizon * (horizon - 1) / 2 ** (p + 1)


def disjunction_losses(
    elements: AbstractSet[Label], n: int, label: int
) -> LossFunction:
    """Losses for the awake ``elements`` after seeing label y.

    Every element other than F loses (1-y)/(n+1); F loses y - n(1-y)/(n+1).
    """
    share = Fraction(1 - label, n + 1)
    values = {e: (label - n * share if e == F else share) for e in elements}
    return LossFunction(values, LossRange.SIGNED)


@dataclass
class DisjunctionRun:
    """Ledger of an online disjunction-learning game."""

    n: int
    history: GameHistory = field(default_factory=GameHistory)
    inputs: List[Tuple[int, ...]] = field(default_factory=list)
    labels: List[int] = field(default_factory=list)
    predictions: List[int] = field(default_factory=list)

    @property
    def mistakes(self) -> int:
        return sum(int(p != y) for p, y in zip(self.predictions, self.labels))

    def stream(self) -> LabeledStream:
        return LabeledStream(self.n, tuple(self.inputs), tuple(self.labels))

    def regret(self, phi: Disjunction) -> int:
        """Mistakes of the learner minus mistakes of ``phi``."""
        return self.mistakes - mistakes(phi, self.stream())


class DisjunctionLearner:
    """Online disjunction learner driven by a sleeping per-action learner.

    Args:
        n: Number of variables.
        family: Hard-instance family the inner learner plays on.
        inner: Inner learner; defaults to Sleeping Hedge with eta tuned for
            per-action losses spanning n+1.
        horizon: Expected number of rounds, for the default eta.
        seed: Seed for the default inner learner.
    """

    def __init__(
        self,
        n: int,
        family: Family = Family.K_SUBSETS,
        inner: Optional[Learner] = None,
        horizon: int = 1000,
        seed: int = 0,
        eta: Optional[float] = None,
        hard: Optional[HardInstance] = None,
    ):
        self.n = n
        self.hard = build_hard(family, n) if hard is None else hard
        if inner is None:
            if eta is None:
                eta = default_eta(self.hard.instance.size(), horizon, loss_scale=n + 1)
            inner = SleepingHedge(eta, seed)
        self.inner = inner
        self.run = DisjunctionRun(n)
        self._pending: Optional[_PendingPrediction] = None

    def disj_predict(self, x: Sequence[int]) -> int:
        """Predict the label of ``x``.

        Raises:
            NoAwakeAction: If nothing is awake (a defect of the hard instance).
        """
        x = tuple(int(b) for b in x)
        if len(x) != self.n or any(b not in (0, 1) for b in x):
            raise InvalidInstance(f"Expected {self.n} bits, got {x}")
        if self._pending is not None:
            raise ProtocolViolation("disj_predict() called twice without disj_update()")
        sleeping = input_sleeping_set(x)
        awake = self.hard.instance.awake_actions(sleeping)
        if not awake:
            raise NoAwakeAction(f"No awake action for input {x}; hard instance is defective")
        chosen = frozenset(self.inner.choose(awake))
        if chosen not in set(awake):
            raise ProtocolViolation(f"Inner learner played non-awake {format_action(chosen)}")
        prediction = int(F not in chosen)
        self._pending = (x, sleeping, awake, chosen, prediction)
        return prediction

    def disj_update(self, label: int) -> LossFunction:
        """Reveal the true label and feed the inner learner its losses."""
        if self._pending is None:
            raise ProtocolViolation("disj_update() called before disj_predict()")
        if label not in (0, 1):
            raise InvalidInstance(f"Label must be a bit, got {label}")
        x, sleeping, awake, chosen, prediction = self._pending
        losses = disjunction_losses(self.hard.instance.ground.members - sleeping, self.n, label)
        expected = self.inner.observe({action: action_loss(action, losses) for action in awake})
        t = len(self.run.history) + 1
        self.run.history.append(RoundRecord(t, sleeping, chosen, losses, expected))
        self.run.inputs.append(x)
        self.run.labels.append(label)
        self.run.predictions.append(prediction)
        self._pending = None
        return losses


def input_sleeping_set(x: Sequence[int]) -> SleepingSet:
    """{(i, 1 - x(i))}: the tagged elements that disagree with ``x``."""
    return frozenset(Label.tagged(i, 1 - int(b)) for i, b in enumerate(x, start=1))


def run_disjunction(learner: DisjunctionLearner, stream: LabeledStream) -> DisjunctionRun:
    if stream.n != learner.n:
        raise InvalidInstance(f"Stream has n={stream.n}, learner expects {learner.n}")
    for x, y in stream:
        learner.disj_predict(x)
        learner.disj_update(y)
    logger.log(
        VERBOSE_LEVEL,
        "Disjunction game over %d rounds: %d mistakes",
        len(stream),
        learner.run.mistakes,
    )
    return learner.run


def build_dphi(phi: Disjunction, n: int) -> List[Action]:
    """The m+1 actions D_phi for a disjunction with m relevant indices."""
    if phi.n != n:
        raise InvalidInstance(f"Disjunction is over {phi.n} variables, expected {n}")
    relevant = phi.relevant
    signs = [int(i in phi.positive) for i in relevant]
    filler = [Label.tagged(i, Tag.STAR) for i in range(1, n + 1) if i not in relevant]

    actions = []
    for j in range(len(relevant) + 1):
        # Literals before j are false, literal j is true, later ones are free.
        labels = [Label.tagged(relevant[k], 1 - signs[k]) for k in range(j)]
        if j < len(relevant):
            labels.append(Label.tagged(relevant[j], signs[j]))
            labels += [Label.tagged(i, Tag.STAR) for i in relevant[j + 1 :]]
            labels.append(T)
        else:
            labels.append(F)
        actions.append(frozenset(labels + filler))
    return actions


def verify_dphi_round(phi: Disjunction, x: Sequence[int]) -> Tuple[Action, bool]:
    """The unique awake member of D_phi for input ``x`` and whether it holds T.

    Raises:
        NotUnique: If several members are awake.
        NoneAwake: If no member is awake.
        ConstructionDefect: If T-membership disagrees with phi(x).
    """
    sleeping = input_sleeping_set(x)
    awake = [action for action in build_dphi(phi, phi.n) if sleeping.isdisjoint(action)]
    if not awake:
        raise NoneAwake(f"No member of D_phi awake for phi={phi}, x={tuple(x)}")
    if len(awake) > 1:
        raise NotUnique(f"{len(awake)} members of D_phi awake for phi={phi}, x={tuple(x)}")
    has_true = T in awake[0]
    if has_true != bool(evaluate(phi, x)):
        raise ConstructionDefect(f"T-membership disagrees with phi={phi} on x={tuple(x)}")
    return awake[0], has_true


def disjunction_ranking(phi: Disjunction, n: int) -> Ranking:
    """D_phi ranked on top; the remaining actions follow in label order."""
    return Ranking(tuple(build_dphi(phi, n)))


def dphi_regret_sum(run: DisjunctionRun, phi: Disjunction) -> Real:
    """Sum of per-action regrets of the inner learner over D_phi."""
    return sum(
        (per_action_regret(run.history, action) for action in build_dphi(phi, run.n)), 0
    )
