"""Sleeping learners over explicitly enumerated awake sets.

- ``SleepingHedge``: multiplicative weights with the specialists update. Awake
  actions are reweighted by exp(-eta * loss) and renormalized so that their
  total weight is unchanged; sleeping actions keep their weight. Weights live
  in the log domain and are created lazily at log-weight 0.
- ``FollowAwakeLeader``: plays the awake action with least cumulative loss
  over the rounds it was awake.
- ``RandomAwake``: uniform over the awake actions.

Example:
    >>> learner = make_learner(LearnerConfig(LearnerKind.FTL), n_actions=6, horizon=10)
"""

import math
from dataclasses import dataclass
from enum import Enum
from numbers import Real
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from sleepcomb.core import Learner
from sleepcomb.errors import InvalidInstance, ProtocolViolation
from sleepcomb.labels import Action, action_key
from sleepcomb.logging import get_logger

logger = get_logger(__name__)


def default_eta(n_actions: int, horizon: int, loss_scale: float = 1.0) -> float:
    """sqrt(8 ln N / T) / scale, with N at least 2."""
    return math.sqrt(8.0 * math.log(max(n_actions, 2)) / max(horizon, 1)) / loss_scale


class SleepingHedge(Learner):
    """Specialists-style Hedge over actions seen awake so far.

    Sleeping weights stay fixed and awake weights are renormalized to their old
    total, which is the rule that decays sleeping weights by exp(-eta * mix loss)
    of the algorithm, up to a common factor that cancels in every probability.
    """

    def __init__(self, eta: float, seed: int):
        if not eta > 0:
            raise InvalidInstance(f"eta must be positive, got {eta}")
        self.eta = float(eta)
        self.rng = np.random.default_rng(seed)
        self.log_weights: Dict[Action, float] = {}
        self._awake: List[Action] = []
        self._probabilities: Optional[np.ndarray] = None
        self.last_expected_loss: Optional[float] = None

    def log_weight(self, action: Action) -> float:
        return self.log_weights.get(action, 0.0)

    def relative_weight(self, action: Action) -> float:
        return math.exp(self.log_weight(action))

    def probabilities(self, awake: Sequence[Action]) -> np.ndarray:
        logs = np.array([self.log_weight(action) for action in awake])
        return np.exp(logs - logsumexp(logs))

    def choose(self, awake: Sequence[Action]) -> Action:
        self._awake = list(awake)
        self._probabilities = self.probabilities(self._awake)
        index = self.rng.choice(len(self._awake), p=self._probabilities)
        return self._awake[index]

    def observe(self, action_losses: Mapping[Action, Real]) -> Optional[Real]:
        if self._probabilities is None:
            raise ProtocolViolation("observe() called before choose()")
        losses = np.array([float(action_losses[action]) for action in self._awake])
        logs = np.array([self.log_weight(action) for action in self._awake])
        updated = logs - self.eta * losses
        # Renormalize so the awake actions keep their total weight.
        updated += logsumexp(logs) - logsumexp(updated)
        for action, value in zip(self._awake, updated):
            self.log_weights[action] = float(value)

        self.last_expected_loss = float(self._probabilities @ losses)
        self._probabilities = None
        return self.last_expected_loss


class FollowAwakeLeader(Learner):
    """Least cumulative awake loss; ties go to the label-lexicographically first."""

    def __init__(self):
        self.cumulative: Dict[Action, Real] = {}

    def choose(self, awake: Sequence[Action]) -> Action:
        return min(awake, key=lambda action: (self.cumulative.get(action, 0), action_key(action)))

    def observe(self, action_losses: Mapping[Action, Real]) -> Optional[Real]:
        for action, loss in action_losses.items():
            self.cumulative[action] = self.cumulative.get(action, 0) + loss
        return None


class RandomAwake(Learner):
    """Uniform choice among the awake actions."""

    def __init__(self, seed: int):
        self.rng = np.random.default_rng(seed)

    def choose(self, awake: Sequence[Action]) -> Action:
        return awake[int(self.rng.integers(len(awake)))]

    def observe(self, action_losses: Mapping[Action, Real]) -> Optional[Real]:
        return sum(action_losses.values(), 0) / len(action_losses)


class LearnerKind(str, Enum):
    HEDGE = "hedge"
    FTL = "ftl"
    RANDOM = "random"


@dataclass(frozen=True)
class LearnerConfig:
    """Which learner to build and how.

    Attributes:
        kind: Learner family.
        eta: Hedge learning rate; ``None`` picks ``default_eta``.
        seed: Seed for randomized learners (required for hedge and random).
        loss_scale: Spread of per-action losses, used by the default eta.
    """

    kind: LearnerKind
    eta: Optional[float] = None
    seed: Optional[int] = None
    loss_scale: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", LearnerKind(self.kind))
        if self.eta is not None and not self.eta > 0:
            raise InvalidInstance(f"eta must be positive, got {self.eta}")
        if not self.loss_scale > 0:
            raise InvalidInstance(f"loss_scale must be positive, got {self.loss_scale}")
        if self.kind is not LearnerKind.FTL and self.seed is None:
            raise InvalidInstance(f"The {self.kind.value} learner needs a seed")


def make_learner(
    settings: LearnerConfig, n_actions: Optional[int], horizon: int
) -> Learner:
    """Build the learner described by ``settings``."""
    if settings.kind is LearnerKind.FTL:
        return FollowAwakeLeader()
    if settings.kind is LearnerKind.RANDOM:
        return RandomAwake(settings.seed)

    eta = settings.eta
    if eta is None:
        if n_actions is None:
            logger.warning("Action count unavailable; default eta assumes N=2")
            n_actions = 2
        eta = default_eta(n_actions, horizon, settings.loss_scale)
    logger.debug("Sleeping Hedge with eta=%.6f (N=%s, T=%d)", eta, n_actions, horizon)
    return SleepingHedge(eta, settings.seed)
