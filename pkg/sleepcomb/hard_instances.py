"""Hard instances for the six families and their property verifiers.

A hard instance with parameter n labels 3n+2 of its elements with

    (1,0), (1,1), (1,*), ..., (n,0), (n,1), (n,*), F, T

and satisfies two properties:

- heaviness: every action has at least n+1 elements;
- richness: for every pattern s in {0,1,*}^n x {F,T} the action
  {(1,s_1), ..., (n,s_n), s_{n+1}} is in D.

The constructions, with the element count d of each:

    shortest-path       chain s -> v1 -> ... -> vn -> t; stage i carries three
                        parallel edges (i,0),(i,1),(i,*), the last stage F,T   d = 3n+2
    spanning-tree       the same chain, undirected                             d = 3n+2
    k-subsets           k = n+1 over the 3n+2 labels                           d = 3n+2
    truncated-perm      complete bipartite, k = n+1 left and m = 3n+2 right
                        nodes; the remaining edges are anonymous               d = (n+1)(3n+2)
    bipartite-matching  n node pairs with three parallel edges, one pair
                        with two (F,T)                                         d = 3n+2
    min-cut             n+1 parallel s-t paths; path i runs (i,0),(i,1),(i,*)
                        in series, the last path F,T                           d = 3n+2

Heaviness is checked on the charged basis by default, counting every element
of an action. ``literal=True`` counts only the labeled elements; the
truncated-permutation instance fails that stricter reading through matchings
made of anonymous edges.

Usage:
    from sleepcomb.hard_instances import build_hard, verify_heaviness
    hard = build_hard(Family.SHORTEST_PATH, 2)
    assert verify_heaviness(hard)
"""

from dataclasses import dataclass, replace
from itertools import product
from typing import FrozenSet, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from sleepcomb import config
from sleepcomb.core import LossFunction, LossRange
from sleepcomb.errors import InvalidInstance, TooLarge, UnsupportedLossRange
from sleepcomb.graphs import Graph
from sleepcomb.labels import (
    F,
    T,
    Action,
    Label,
    Tag,
    format_action,
    special_labels,
)
from sleepcomb.logging import get_logger
from sleepcomb.problems import (
    BipartiteMatching,
    Family,
    KSubsets,
    MinCut,
    ProblemInstance,
    ShortestPath,
    SpanningTree,
    TruncatedPerm,
    spot_check_actions,
)

logger = get_logger(__name__)

# d <= SIZE_CONSTANT * n^2 for every n >= 1.
SIZE_CONSTANTS = {
    Family.SHORTEST_PATH: 5,
    Family.SPANNING_TREE: 5,
    Family.K_SUBSETS: 5,
    Family.TRUNCATED_PERM: 10,
    Family.BIPARTITE_MATCHING: 5,
    Family.MIN_CUT: 5,
}


@dataclass(frozen=True)
class HardInstance:
    """A problem instance with its 3n+2 labeled special elements.

    Elements carry their pattern labels directly, so the bijection between the
    special elements and the pattern labels is the identity.
    """

    instance: ProblemInstance
    n: int
    special: Tuple[Label, ...]
    background: FrozenSet[Label] = frozenset()

    @property
    def family(self) -> Family:
        return self.instance.family

    @property
    def special_set(self) -> FrozenSet[Label]:
        return frozenset(self.special)

    def bijection(self) -> dict:
        return {label: label for label in self.special}

    def validate(self) -> None:
        """Check the size invariants of a hard instance.

        Raises:
            InvalidInstance: If U_s has the wrong size or is not in the ground
                set, or d exceeds the family's quadratic bound.
        """
        if len(self.special) != 3 * self.n + 2:
            raise InvalidInstance(
                f"Hard instance with n={self.n} needs {3 * self.n + 2} special "
                f"elements, has {len(self.special)}"
            )
        if not self.special_set <= self.instance.ground.members:
            raise InvalidInstance("Special elements must belong to the ground set")
        d = self.instance.ground.d
        bound = SIZE_CONSTANTS[self.family] * self.n * self.n
        if not 3 * self.n + 2 <= d <= bound:
            raise InvalidInstance(f"d={d} outside [3n+2, {bound}] for n={self.n}")

    def with_instance(self, instance: ProblemInstance) -> "HardInstance":
        """Same labeling over a modified instance (no validation)."""
        return replace(self, instance=instance)


def pattern_action(tags: Sequence[Tag], final: Label) -> Action:
    """The action {(1,tags[0]), ..., (n,tags[n-1]), final}."""
    if final not in (F, T):
        raise InvalidInstance(f"Pattern must end in F or T, got {final}")
    return frozenset(
        [Label.tagged(i, tag) for i, tag in enumerate(tags, start=1)] + [final]
    )


def iter_patterns(n: int) -> Iterator[Action]:
    for tags in product(Tag, repeat=n):
        for final in (F, T):
            yield pattern_action(tags, final)


def _stage_edges(n: int, prefix: str = "v") -> Tuple[List[Tuple[str, str, Label]], str, str]:
    nodes = ["s"] + [f"{prefix}{i}" for i in range(1, n + 1)] + ["t"]
    edges = [
        (nodes[i - 1], nodes[i], Label.tagged(i, tag))
        for i in range(1, n + 1)
        for tag in Tag
    ]
    edges += [(nodes[n], "t", F), (nodes[n], "t", T)]
    return edges, "s", "t"


def _truncated_perm(n: int) -> Tuple[TruncatedPerm, FrozenSet[Label]]:
    left = [f"u{i}" for i in range(1, n + 2)]
    right = [f"v{i}_{tag}" for i in range(1, n + 1) for tag in ("0", "1", "star")]
    right += ["vF", "vT"]
    special = {
        (f"u{i}", f"v{i}_{name}"): Label.tagged(i, tag)
        for i in range(1, n + 1)
        for tag, name in zip(Tag, ("0", "1", "star"))
    }
    special[(left[-1], "vF")] = F
    special[(left[-1], "vT")] = T

    edges = []
    background = []
    for u in left:
        for v in right:
            label = special.get((u, v))
            if label is None:
                label = Label.anonymous(len(background))
                background.append(label)
            edges.append((u, v, label))
    graph = Graph.build(False, edges, nodes=left + right)
    return TruncatedPerm(graph, left, right), frozenset(background)


def _matching_pairs(n: int) -> BipartiteMatching:
    edges = [
        (f"a{i}", f"b{i}", Label.tagged(i, tag))
        for i in range(1, n + 1)
        for tag in Tag
    ]
    edges += [(f"a{n + 1}", f"b{n + 1}", F), (f"a{n + 1}", f"b{n + 1}", T)]
    return BipartiteMatching(Graph.build(False, edges))


def _parallel_paths(n: int) -> MinCut:
    edges = []
    for i in range(1, n + 1):
        hops = ["s", f"x{i}_1", f"x{i}_2", "t"]
        edges += [
            (hops[j], hops[j + 1], Label.tagged(i, tag))
            for j, tag in enumerate(Tag)
        ]
    edges += [("s", "y", F), ("y", "t", T)]
    return MinCut(Graph.build(False, edges, "s", "t"))


def build_hard(family: Family, n: int) -> HardInstance:
    """Build the hard instance of ``family`` with parameter ``n``.

    Raises:
        InvalidInstance: If n < 1.
    """
    if n < 1:
        raise InvalidInstance(f"Hard instances need n >= 1, got {n}")
    family = Family(family)
    background: FrozenSet[Label] = frozenset()

    if family is Family.SHORTEST_PATH:
        edges, s, t = _stage_edges(n)
        instance: ProblemInstance = ShortestPath(Graph.build(True, edges, s, t))
    elif family is Family.SPANNING_TREE:
        edges, _, _ = _stage_edges(n)
        instance = SpanningTree(Graph.build(False, edges))
    elif family is Family.K_SUBSETS:
        instance = KSubsets(n + 1, special_labels(n))
    elif family is Family.TRUNCATED_PERM:
        instance, background = _truncated_perm(n)
    elif family is Family.BIPARTITE_MATCHING:
        instance = _matching_pairs(n)
    else:
        instance = _parallel_paths(n)

    hard = HardInstance(instance, n, special_labels(n), background)
    hard.validate()
    logger.debug("Built hard %s", instance.describe())
    return hard


@dataclass(frozen=True)
class VerificationResult:
    """Outcome of a property check.

    ``mode`` is ``exhaustive``, ``solver`` (exact, through the family's
    optimizer) or ``sampled`` (spot checks only).
    """

    name: str
    holds: bool
    mode: str
    checked: int
    counterexample: Optional[Action] = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.holds

    @property
    def verdict(self) -> str:
        return "PASS" if self.holds else "FAIL"

    def format(self) -> str:
        line = f"{self.name}: {self.verdict} ({self.mode}, {self.checked} checked)"
        if self.counterexample is not None:
            line += f" counterexample={format_action(self.counterexample)}"
        if self.detail:
            line += f" {self.detail}"
        return line


def _counted(hard: HardInstance, action: Action, literal: bool) -> int:
    return len(action & hard.special_set) if literal else len(action)


def verify_heaviness(
    hard: HardInstance, literal: bool = False, cap: Optional[int] = None
) -> VerificationResult:
    """Check that every action has at least n+1 counted elements.

    Exhaustive when D is enumerable; otherwise the family's solver minimizes the
    count directly (unit loss on counted elements), and failing that random
    awake subsets are spot-checked.
    """
    name = "heaviness (literal)" if literal else "heaviness"
    need = hard.n + 1
    try:
        actions = hard.instance.enumerate(cap)
    except TooLarge as e:
        logger.info("%s: %s; minimizing with the solver instead", name, e)
        return _heaviness_by_solver(hard, literal, name, cap)

    for action in actions:
        if _counted(hard, action, literal) < need:
            return VerificationResult(name, False, "exhaustive", len(actions), action)
    return VerificationResult(name, True, "exhaustive", len(actions))


def _heaviness_by_solver(
    hard: HardInstance, literal: bool, name: str, cap: Optional[int]
) -> VerificationResult:
    counted = hard.special_set if literal else hard.instance.ground.members
    losses = LossFunction(
        {label: int(label in counted) for label in hard.instance.ground},
        LossRange.UNIT,
    )
    try:
        best = hard.instance.min_loss_awake(frozenset(), losses)
    except (TooLarge, UnsupportedLossRange) as e:
        logger.warning("%s: solver unavailable (%s); falling back to sampling", name, e)
        return _heaviness_sampled(hard, literal, name, cap)
    if best is None:
        return VerificationResult(name, True, "solver", 1, detail="empty decision set")
    action, value = best
    if value < hard.n + 1:
        return VerificationResult(name, False, "solver", 1, action, f"min count {value}")
    return VerificationResult(name, True, "solver", 1, detail=f"min count {value}")


def _heaviness_sampled(
    hard: HardInstance, literal: bool, name: str, cap: Optional[int]
) -> VerificationResult:
    rng = np.random.default_rng(0)
    attempts = config.current().sample_budget
    checked = 0
    for action in spot_check_actions(hard.instance, rng, attempts, cap=cap):
        checked += 1
        if _counted(hard, action, literal) < hard.n + 1:
            return VerificationResult(name, False, "sampled", checked, action)
    return VerificationResult(name, True, "sampled", checked)


def verify_richness(hard: HardInstance) -> VerificationResult:
    """Check that all 2 * 3^n pattern actions are in D.

    Raises:
        TooLarge: If n exceeds the configured richness limit.
    """
    limit = config.current().richness_max_n
    if hard.n > limit:
        raise TooLarge(f"Richness check over 2*3^{hard.n} patterns exceeds n <= {limit}", limit)
    checked = 0
    for action in iter_patterns(hard.n):
        checked += 1
        if not hard.instance.contains(action):
            return VerificationResult("richness", False, "exhaustive", checked, action)
    return VerificationResult("richness", True, "exhaustive", checked)


def action_sizes(hard: HardInstance, cap: Optional[int] = None) -> FrozenSet[int]:
    """Distinct action sizes in D."""
    return frozenset(len(action) for action in hard.instance.enumerate(cap))
