"""Extensible structure: grafting p bit positions onto an instance.

``extend(base, p)`` builds a derived instance (U', D') with 2p distinguished
elements ``b1:0, b1:1, ..., bp:0, bp:1`` and a projection pi from D' back to D
such that

1. pi(V') is a subset of V' & U and a member of D, for every V' in D' made of
   base and distinguished elements with at most p distinguished ones;
2. {b1:x1, ..., bp:xp} | V is in D' for every bit pattern x and every V in D.

Per family:

    shortest-path       chain of p stages of two parallel edges ending at s;
                        the chain head is the new source
    spanning-tree       the same chain hung off the first node
    k-subsets           k' = k + p over U | L; pi keeps the first k labels
    truncated-perm      p new left nodes, 2p new right nodes; only the edges
                        u_i - v_{i,b} are distinguished, the rest sleep forever
    bipartite-matching  p new node pairs with two parallel edges each
    min-cut             p series gadgets s - w_i - t

``paper_mincut_gadget=True`` builds the min-cut extension from 2p parallel s-t
edges instead; the bit edge left out of a pattern keeps s and t connected, so
property 2 fails and ``verify_property2`` reports the counterexample.
"""

from dataclasses import dataclass
from itertools import product
from typing import Collection, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from sleepcomb import config
from sleepcomb.errors import InvalidInstance, TooLarge
from sleepcomb.graphs import Graph
from sleepcomb.hard_instances import VerificationResult
from sleepcomb.labels import Action, Label, LabelKind, format_action
from sleepcomb.logging import get_logger
from sleepcomb.problems import (
    BipartiteMatching,
    Family,
    GraphProblem,
    KSubsets,
    MinCut,
    ProblemInstance,
    ShortestPath,
    SpanningTree,
    TruncatedPerm,
    spot_check_actions,
)

logger = get_logger(__name__)


def bit_labels(p: int) -> Tuple[Label, ...]:
    return tuple(Label.bit(i, b) for i in range(1, p + 1) for b in (0, 1))


def bit_action(bits: Sequence[int]) -> Action:
    """{b1:bits[0], ..., bp:bits[p-1]}."""
    return frozenset(Label.bit(i, int(b)) for i, b in enumerate(bits, start=1))


@dataclass(frozen=True)
class ExtendedInstance:
    """A base instance, its extension and the projection between them.

    Attributes:
        base: The instance (U, D).
        derived: The instance (U', D').
        p: Number of bit positions.
        permanently_sleeping: U' minus U and the distinguished elements.
        keep: For k-subsets, the base k; pi keeps the ``keep`` smallest
            labels of V' & U. ``None`` means pi(V') = V' & U.
    """

    base: ProblemInstance
    derived: ProblemInstance
    p: int
    permanently_sleeping: FrozenSet[Label] = frozenset()
    keep: Optional[int] = None

    @property
    def distinguished(self) -> Tuple[Label, ...]:
        return bit_labels(self.p)

    @property
    def distinguished_set(self) -> FrozenSet[Label]:
        return frozenset(self.distinguished)

    def pi(self, action: Action) -> Action:
        """Project a derived action onto the base instance."""
        inside = action & self.base.ground.members
        if self.keep is None:
            return inside
        return frozenset(sorted(inside)[: self.keep])

    def lift(self, bits: Sequence[int], action: Action) -> Action:
        if len(bits) != self.p:
            raise InvalidInstance(f"Expected {self.p} bits, got {len(bits)}")
        return bit_action(bits) | action

    def opposite_bits(self, bits: Sequence[int]) -> FrozenSet[Label]:
        """The distinguished elements that must sleep for pattern ``bits``."""
        return frozenset(Label.bit(i, 1 - int(b)) for i, b in enumerate(bits, start=1))

    def in_projection_domain(self, action: Action) -> bool:
        allowed = self.base.ground.members | self.distinguished_set
        return action <= allowed and len(action & self.distinguished_set) <= self.p


def _fresh_names(prefix: str, count: int, taken: Collection[str]) -> List[str]:
    while any(f"{prefix}{i}" in taken for i in range(1, count + 1)):
        prefix = "_" + prefix
    return [f"{prefix}{i}" for i in range(1, count + 1)]


def _chain(p: int, nodes: Sequence[str], anchor: str) -> Tuple[List[str], list]:
    """p chain nodes, stage i from node i to node i+1 (the last to ``anchor``)."""
    chain = _fresh_names("ext", p, nodes)
    stops = chain + [anchor]
    edges = [
        (stops[i - 1], stops[i], Label.bit(i, b)) for i in range(1, p + 1) for b in (0, 1)
    ]
    return chain, edges


def _base_edges(graph: Graph) -> list:
    return [(e.u, e.v, e.label) for e in graph.edges]


def _extend_truncated_perm(
    base: TruncatedPerm, p: int
) -> Tuple[TruncatedPerm, FrozenSet[Label]]:
    taken = set(base.graph.nodes)
    new_left = _fresh_names("ext_u", p, taken)
    new_right = [
        f"{name}_{b}" for name in _fresh_names("ext_v", p, taken) for b in (0, 1)
    ]
    left = list(base.left) + new_left
    right = list(base.right) + new_right
    bits = {
        (new_left[i - 1], new_right[2 * (i - 1) + b]): Label.bit(i, b)
        for i in range(1, p + 1)
        for b in (0, 1)
    }
    next_id = 1 + max(
        (label.index for label in base.ground if label.kind is LabelKind.ANONYMOUS),
        default=-1,
    )
    edges = []
    sleeping = []
    for u in left:
        for v in right:
            if (u, v) in base.pairs:
                label = base.pairs[(u, v)].label
            elif (u, v) in bits:
                label = bits[(u, v)]
            else:
                label = Label.anonymous(next_id)
                next_id += 1
                sleeping.append(label)
            edges.append((u, v, label))
    graph = Graph.build(False, edges, nodes=left + right)
    return TruncatedPerm(graph, left, right, base.loss_range), frozenset(sleeping)


def extend(
    base: ProblemInstance, p: int, paper_mincut_gadget: bool = False
) -> ExtendedInstance:
    """Build the extensible structure of ``base`` with ``p`` bit positions.

    Raises:
        InvalidInstance: If p < 1 or the base already uses bit labels.
    """
    if p < 1:
        raise InvalidInstance(f"Extensions need p >= 1, got {p}")
    if any(label.kind is LabelKind.BIT for label in base.ground):
        raise InvalidInstance("Base instance already contains bit labels")

    family = base.family
    permanently_sleeping: FrozenSet[Label] = frozenset()
    keep = None

    if family is Family.K_SUBSETS:
        assert isinstance(base, KSubsets)
        derived: ProblemInstance = KSubsets(
            base.k + p, list(base.ground) + list(bit_labels(p)), base.loss_range
        )
        keep = base.k
    elif family is Family.TRUNCATED_PERM:
        assert isinstance(base, TruncatedPerm)
        derived, permanently_sleeping = _extend_truncated_perm(base, p)
    else:
        assert isinstance(base, GraphProblem)
        graph = base.graph
        edges = _base_edges(graph)
        if family is Family.SHORTEST_PATH:
            chain, extra = _chain(p, graph.nodes, graph.source)
            derived = ShortestPath(
                Graph.build(True, edges + extra, chain[0], graph.sink, nodes=graph.nodes),
                base.loss_range,
            )
        elif family is Family.SPANNING_TREE:
            _, extra = _chain(p, graph.nodes, graph.nodes[0])
            derived = SpanningTree(
                Graph.build(False, edges + extra, nodes=graph.nodes), base.loss_range
            )
        elif family is Family.BIPARTITE_MATCHING:
            left = _fresh_names("ext_a", p, graph.nodes)
            right = _fresh_names("ext_b", p, graph.nodes)
            extra = [
                (left[i - 1], right[i - 1], Label.bit(i, b))
                for i in range(1, p + 1)
                for b in (0, 1)
            ]
            derived = BipartiteMatching(
                Graph.build(False, edges + extra, nodes=graph.nodes), base.loss_range
            )
        else:
            s, t = graph.source, graph.sink
            if paper_mincut_gadget:
                extra = [(s, t, label) for label in bit_labels(p)]
            else:
                middle = _fresh_names("ext_w", p, graph.nodes)
                extra = []
                for i in range(1, p + 1):
                    extra.append((s, middle[i - 1], Label.bit(i, 0)))
                    extra.append((middle[i - 1], t, Label.bit(i, 1)))
            derived = MinCut(
                Graph.build(graph.directed, edges + extra, s, t, nodes=graph.nodes),
                base.loss_range,
            )

    ext = ExtendedInstance(base, derived, p, permanently_sleeping, keep)
    logger.debug(
        "Extended %s with p=%d: %s, %d permanently sleeping",
        base.describe(),
        p,
        derived.describe(),
        len(permanently_sleeping),
    )
    return ext


def _projection_domain(ext: ExtendedInstance, cap: Optional[int]) -> Tuple[Iterator[Action], str]:
    try:
        actions = ext.derived.awake_actions(ext.permanently_sleeping, cap)
        return iter(actions), "exhaustive"
    except TooLarge as e:
        logger.warning("Property 1: %s; spot-checking instead", e)
        rng = np.random.default_rng(0)
        attempts = config.current().sample_budget
        return (
            spot_check_actions(ext.derived, rng, attempts, ext.permanently_sleeping, cap),
            "sampled",
        )


def verify_property1(ext: ExtendedInstance, cap: Optional[int] = None) -> VerificationResult:
    """Check pi(V') is inside V' & U and in D over pi's required domain."""
    actions, mode = _projection_domain(ext, cap)
    checked = 0
    for action in actions:
        if not ext.in_projection_domain(action):
            continue
        checked += 1
        image = ext.pi(action)
        if not image <= action & ext.base.ground.members:
            return VerificationResult(
                "property1", False, mode, checked, action, "projection leaves V' & U"
            )
        if not ext.base.contains(image):
            return VerificationResult(
                "property1",
                False,
                mode,
                checked,
                action,
                f"projection {format_action(image)} not in D",
            )
    return VerificationResult("property1", True, mode, checked)


def _bit_patterns(p: int) -> Tuple[Iterable[Tuple[int, ...]], bool]:
    settings = config.current()
    if p <= settings.property2_max_p:
        return product((0, 1), repeat=p), True
    rng = np.random.default_rng(0)
    samples = rng.integers(0, 2, size=(settings.sample_budget, p))
    return (tuple(int(b) for b in row) for row in samples), False


def verify_property2(ext: ExtendedInstance, cap: Optional[int] = None) -> VerificationResult:
    """Check every bit pattern joined with every base action is in D'."""
    exhaustive = True
    try:
        base_actions: List[Action] = ext.base.enumerate(cap)
    except TooLarge as e:
        logger.warning("Property 2: %s; spot-checking base actions", e)
        rng = np.random.default_rng(0)
        attempts = config.current().sample_budget
        base_actions = list(dict.fromkeys(spot_check_actions(ext.base, rng, attempts, cap=cap)))
        exhaustive = False

    patterns, all_patterns = _bit_patterns(ext.p)
    if not all_patterns:
        logger.warning("Property 2: p=%d, sampling bit patterns", ext.p)
    mode = "exhaustive" if exhaustive and all_patterns else "sampled"

    checked = 0
    for bits in patterns:
        for action in base_actions:
            checked += 1
            lifted = ext.lift(bits, action)
            if not ext.derived.contains(lifted):
                return VerificationResult("property2", False, mode, checked, lifted)
    return VerificationResult("property2", True, mode, checked)
