"""The six problem families and their offline solvers.

Each family is a ``ProblemInstance`` subclass that answers three questions about
its decision set D:

- ``contains(V)``: is the action a member of D?
- ``awake_actions(S)``: which members avoid the sleeping set S? Awake actions
  are generated directly from the awake elements, so a derived instance whose
  full D is too large can still be played once its permanently sleeping
  elements are removed.
- ``min_loss_awake(S, losses)``: an awake member of least total loss, from the
  family's own solver.

Solvers:

    shortest-path       DAG relaxation (any losses) or Dijkstra (nonnegative)
    spanning-tree       Kruskal on the awake edges
    k-subsets           the k smallest awake losses
    truncated-perm      min-cost assignment on the awake edges
    bipartite-matching  enumeration of maximal matchings
    min-cut             max-flow min-cut, sleeping edges of infinite capacity

Ties between equal-loss actions are broken by label order where the solver
scans elements (DAG relaxation, Kruskal, k-subsets, enumeration); flow and
assignment solvers are deterministic but return whichever optimum they find.
"""

from abc import ABC, abstractmethod
from enum import Enum
from itertools import combinations
from math import comb, perm
from numbers import Real
from typing import (
    AbstractSet,
    ClassVar,
    Dict,
    FrozenSet,
    Iterable,
    Iterator,
    List,
    Optional,
    Sequence,
    Tuple,
)

import networkx as nx
import numpy as np
from networkx.algorithms.flow import edmonds_karp
from scipy.optimize import linear_sum_assignment

from sleepcomb import config
from sleepcomb.core import LossFunction, LossRange, action_loss
from sleepcomb.errors import InvalidInstance, TooLarge, UnsupportedLossRange
from sleepcomb.graphs import Edge, Graph
from sleepcomb.labels import Action, GroundSet, Label, action_key
from sleepcomb.logging import get_logger

logger = get_logger(__name__)

Solution = Optional[Tuple[Action, Real]]


class Family(str, Enum):
    SHORTEST_PATH = "shortest-path"
    SPANNING_TREE = "spanning-tree"
    K_SUBSETS = "k-subsets"
    TRUNCATED_PERM = "truncated-perm"
    BIPARTITE_MATCHING = "bipartite-matching"
    MIN_CUT = "min-cut"

    @classmethod
    def parse(cls, text: str) -> "Family":
        try:
            return cls(text)
        except ValueError:
            choices = ", ".join(family.value for family in cls)
            raise InvalidInstance(
                f"Unknown family {text!r}; choose one of {choices}"
            ) from None


class SearchBudget:
    """Counts raw candidates examined by one enumeration."""

    def __init__(self, limit: Optional[int] = None):
        self.limit = config.current().search_cap if limit is None else limit
        self.spent = 0

    def spend(self, amount: int = 1) -> None:
        self.spent += amount
        if self.spent > self.limit:
            raise TooLarge(
                f"Enumeration examined more than {self.limit} candidates", self.limit
            )

    def require(self, amount: int, what: str) -> None:
        if amount > self.limit:
            raise TooLarge(
                f"{what}: {amount} candidates exceed the search cap {self.limit}",
                self.limit,
            )


class ProblemInstance(ABC):
    """A ground set plus the decision-set oracle of one problem family."""

    family: ClassVar[Family]

    def __init__(self, ground: GroundSet, loss_range: LossRange = LossRange.SIGNED):
        self.ground = ground
        self.loss_range = loss_range

    @abstractmethod
    def contains(self, action: AbstractSet[Label]) -> bool:
        """Whether ``action`` is a member of the decision set."""

    @abstractmethod
    def _awake_candidates(
        self, awake: FrozenSet[Label], budget: SearchBudget
    ) -> Iterator[Action]:
        """Every member of D built from ``awake`` elements only."""

    @abstractmethod
    def min_loss_awake(
        self, sleeping: AbstractSet[Label], losses: LossFunction
    ) -> Solution:
        """An awake action of least loss and its loss, or ``None``."""

    def awake_actions(
        self, sleeping: AbstractSet[Label] = frozenset(), cap: Optional[int] = None
    ) -> List[Action]:
        """Members of D disjoint from ``sleeping``, in label-lexicographic order.

        Raises:
            TooLarge: If more than ``cap`` actions are awake, or the search for
                them examines more candidates than the configured search cap.
        """
        limit = config.resolve_enum_cap(cap)
        awake = self.ground.members - frozenset(sleeping)
        found: List[Action] = []
        for action in self._awake_candidates(awake, SearchBudget()):
            found.append(action)
            if len(found) > limit:
                raise TooLarge(
                    f"{self.describe()} has more than {limit} awake actions", limit
                )
        found.sort(key=action_key)
        return found

    def enumerate(self, cap: Optional[int] = None) -> List[Action]:
        """All of D in label-lexicographic order."""
        limit = config.resolve_enum_cap(cap)
        known = self.count()
        if known is not None and known > limit:
            raise TooLarge(f"{self.describe()} has {known} actions, cap is {limit}", limit)
        return self.awake_actions(frozenset(), cap)

    def count(self) -> Optional[int]:
        """|D| when it has a closed form, else None."""
        return None

    def size(self, cap: Optional[int] = None) -> int:
        known = self.count()
        return len(self.enumerate(cap)) if known is None else known

    def min_loss_awake_bruteforce(
        self,
        sleeping: AbstractSet[Label],
        losses: LossFunction,
        cap: Optional[int] = None,
    ) -> Solution:
        """Enumeration oracle; ties go to the label-lexicographically first action."""
        awake = self.awake_actions(sleeping, cap)
        if not awake:
            return None
        best = min(awake, key=lambda action: (action_loss(action, losses), action_key(action)))
        return best, action_loss(best, losses)

    def describe(self) -> str:
        return f"{self.family.value} instance (d={self.ground.d})"

    def _require_nonnegative(
        self, labels: Iterable[Label], losses: LossFunction
    ) -> None:
        for label in labels:
            if losses[label] < 0:
                raise UnsupportedLossRange(
                    f"The {self.family.value} solver needs nonnegative losses; "
                    f"{label} has {losses[label]}"
                )

    def _awake_labels(self, sleeping: AbstractSet[Label]) -> List[Label]:
        return [label for label in self.ground if label not in sleeping]


class GraphProblem(ProblemInstance):
    """A family whose ground set is the edge set of a graph."""

    def __init__(self, graph: Graph, loss_range: LossRange = LossRange.SIGNED):
        if not graph.edges:
            raise InvalidInstance("Graph instances need at least one edge")
        super().__init__(GroundSet(graph.labels), loss_range)
        self.graph = graph

    def _edges(self, labels: Iterable[Label]) -> List[Edge]:
        return [self.graph.edge(label) for label in sorted(labels)]

    def describe(self) -> str:
        return (
            f"{self.family.value} instance "
            f"({len(self.graph.nodes)} nodes, {len(self.graph.edges)} edges)"
        )


class ShortestPath(GraphProblem):
    """Simple directed s-t paths."""

    family = Family.SHORTEST_PATH

    def __init__(self, graph: Graph, loss_range: Optional[LossRange] = None):
        if not graph.directed:
            raise InvalidInstance("Shortest path instances need a directed graph")
        if graph.source is None or graph.sink is None:
            raise InvalidInstance("Shortest path instances need a source and a sink")
        self.acyclic = nx.is_directed_acyclic_graph(graph.to_networkx())
        if loss_range is None:
            loss_range = LossRange.SIGNED if self.acyclic else LossRange.UNIT
        super().__init__(graph, loss_range)
        self._order = list(nx.topological_sort(graph.to_networkx())) if self.acyclic else []
        self._out: Dict[str, List[Edge]] = {node: [] for node in graph.nodes}
        for edge in sorted(graph.edges, key=lambda e: e.label):
            self._out[edge.u].append(edge)

    def contains(self, action: AbstractSet[Label]) -> bool:
        if not action <= self.ground.members:
            return False
        remaining = set(action)
        node = self.graph.source
        visited = {node}
        while node != self.graph.sink:
            step = [e for e in self._out[node] if e.label in remaining]
            if len(step) != 1:
                return False
            remaining.discard(step[0].label)
            node = step[0].v
            if node in visited:
                return False
            visited.add(node)
        return not remaining

    def _awake_candidates(
        self, awake: FrozenSet[Label], budget: SearchBudget
    ) -> Iterator[Action]:
        graph = self.graph.to_networkx(awake)
        for path in nx.all_simple_edge_paths(graph, self.graph.source, self.graph.sink):
            budget.spend()
            yield frozenset(key for _, _, key in path)

    def min_loss_awake(
        self, sleeping: AbstractSet[Label], losses: LossFunction
    ) -> Solution:
        awake = set(self._awake_labels(sleeping))
        if self.acyclic:
            path = self._relax_dag(awake, losses)
        else:
            self._require_nonnegative(awake, losses)
            path = self._dijkstra(awake, losses)
        if path is None:
            return None
        return path, action_loss(path, losses)

    def _relax_dag(self, awake: AbstractSet[Label], losses: LossFunction) -> Optional[Action]:
        dist: Dict[str, Real] = {self.graph.source: 0}
        pred: Dict[str, Edge] = {}
        for node in self._order:
            if node not in dist:
                continue
            for edge in self._out[node]:
                if edge.label not in awake:
                    continue
                candidate = dist[node] + losses[edge.label]
                if edge.v not in dist or candidate < dist[edge.v]:
                    dist[edge.v] = candidate
                    pred[edge.v] = edge
        if self.graph.sink not in dist:
            return None
        labels = []
        node = self.graph.sink
        while node != self.graph.source:
            labels.append(pred[node].label)
            node = pred[node].u
        return frozenset(labels)

    def _dijkstra(self, awake: AbstractSet[Label], losses: LossFunction) -> Optional[Action]:
        # Parallel edges collapse to the cheapest, lowest label first.
        simple = nx.DiGraph()
        simple.add_nodes_from(self.graph.nodes)
        for edge in self._edges(awake):
            weight = losses[edge.label]
            if not simple.has_edge(edge.u, edge.v) or weight < simple[edge.u][edge.v]["weight"]:
                simple.add_edge(edge.u, edge.v, weight=weight, label=edge.label)
        try:
            nodes = nx.dijkstra_path(simple, self.graph.source, self.graph.sink)
        except nx.NetworkXNoPath:
            return None
        return frozenset(simple[u][v]["label"] for u, v in zip(nodes, nodes[1:]))


class SpanningTree(GraphProblem):
    """Spanning trees of a connected undirected multigraph."""

    family = Family.SPANNING_TREE

    def __init__(self, graph: Graph, loss_range: LossRange = LossRange.SIGNED):
        if graph.directed:
            raise InvalidInstance("Spanning tree instances need an undirected graph")
        super().__init__(graph, loss_range)
        if not nx.is_connected(graph.to_networkx()):
            raise InvalidInstance("Spanning tree instances need a connected graph")
        self.tree_size = len(graph.nodes) - 1

    def contains(self, action: AbstractSet[Label]) -> bool:
        if len(action) != self.tree_size or not action <= self.ground.members:
            return False
        components = nx.utils.UnionFind(self.graph.nodes)
        for edge in self._edges(action):
            if components[edge.u] == components[edge.v]:
                return False
            components.union(edge.u, edge.v)
        return True

    def _awake_candidates(
        self, awake: FrozenSet[Label], budget: SearchBudget
    ) -> Iterator[Action]:
        budget.require(comb(len(awake), self.tree_size), "spanning tree search")
        for candidate in combinations(sorted(awake), self.tree_size):
            budget.spend()
            action = frozenset(candidate)
            if self.contains(action):
                yield action

    def min_loss_awake(
        self, sleeping: AbstractSet[Label], losses: LossFunction
    ) -> Solution:
        awake = self._awake_labels(sleeping)
        graph = nx.MultiGraph()
        graph.add_nodes_from(self.graph.nodes)
        for edge in self._edges(awake):
            graph.add_edge(edge.u, edge.v, key=edge.label, weight=losses[edge.label])
        if not nx.is_connected(graph):
            return None
        tree = frozenset(
            key
            for _, _, key in nx.minimum_spanning_edges(
                graph, algorithm="kruskal", weight="weight", keys=True, data=False
            )
        )
        return tree, action_loss(tree, losses)


class KSubsets(ProblemInstance):
    """All k-element subsets of the ground set."""

    family = Family.K_SUBSETS

    def __init__(
        self, k: int, elements: Sequence[Label], loss_range: LossRange = LossRange.SIGNED
    ):
        super().__init__(GroundSet(elements), loss_range)
        if not 1 <= k <= self.ground.d:
            raise InvalidInstance(f"k must lie in [1, {self.ground.d}], got {k}")
        self.k = k

    @classmethod
    def anonymous(cls, k: int, d: int) -> "KSubsets":
        return cls(k, [Label.anonymous(i) for i in range(d)])

    def contains(self, action: AbstractSet[Label]) -> bool:
        return len(action) == self.k and action <= self.ground.members

    def _awake_candidates(
        self, awake: FrozenSet[Label], budget: SearchBudget
    ) -> Iterator[Action]:
        budget.require(comb(len(awake), self.k), "k-subset search")
        for candidate in combinations(sorted(awake), self.k):
            yield frozenset(candidate)

    def min_loss_awake(
        self, sleeping: AbstractSet[Label], losses: LossFunction
    ) -> Solution:
        awake = self._awake_labels(sleeping)
        if len(awake) < self.k:
            return None
        chosen = frozenset(sorted(awake, key=lambda label: (losses[label], label))[: self.k])
        return chosen, action_loss(chosen, losses)

    def count(self) -> Optional[int]:
        return comb(self.ground.d, self.k)

    def describe(self) -> str:
        return f"k-subsets instance (k={self.k}, d={self.ground.d})"


def _is_matching(edges: Iterable[Edge]) -> bool:
    covered = set()
    for edge in edges:
        if edge.u in covered or edge.v in covered:
            return False
        covered.update((edge.u, edge.v))
    return True


class MatchingProblem(GraphProblem):
    """Maximal matchings: no edge of the full graph can be added."""

    def __init__(self, graph: Graph, loss_range: LossRange = LossRange.SIGNED):
        if graph.directed:
            raise InvalidInstance("Matching instances need an undirected graph")
        if not nx.is_bipartite(nx.Graph(graph.to_networkx())):
            raise InvalidInstance("Matching instances need a bipartite graph")
        super().__init__(graph, loss_range)

    def contains(self, action: AbstractSet[Label]) -> bool:
        if not action <= self.ground.members:
            return False
        chosen = self._edges(action)
        return _is_matching(chosen) and self._is_maximal(chosen)

    def _is_maximal(self, chosen: Iterable[Edge]) -> bool:
        covered = set()
        for edge in chosen:
            covered.update((edge.u, edge.v))
        return all(edge.u in covered or edge.v in covered for edge in self.graph.edges)

    def _awake_candidates(
        self, awake: FrozenSet[Label], budget: SearchBudget
    ) -> Iterator[Action]:
        edges = self._edges(awake)

        def extend(start: int, covered: FrozenSet[str], chosen: Tuple[Edge, ...]):
            if self._is_maximal(chosen):
                yield frozenset(edge.label for edge in chosen)
            for i in range(start, len(edges)):
                edge = edges[i]
                if edge.u in covered or edge.v in covered:
                    continue
                budget.spend()
                yield from extend(i + 1, covered | {edge.u, edge.v}, chosen + (edge,))

        return extend(0, frozenset(), ())


class BipartiteMatching(MatchingProblem):
    """Maximal matchings of a bipartite multigraph, solved by enumeration."""

    family = Family.BIPARTITE_MATCHING

    def min_loss_awake(
        self, sleeping: AbstractSet[Label], losses: LossFunction
    ) -> Solution:
        return self.min_loss_awake_bruteforce(sleeping, losses)


class TruncatedPerm(MatchingProblem):
    """k-truncated permutations: maximal matchings of a complete bipartite graph.

    With k left and m >= k right nodes every maximal matching matches all k left
    nodes, so D is the set of injective maps from the left side to the right.
    """

    family = Family.TRUNCATED_PERM

    def __init__(
        self,
        graph: Graph,
        left: Sequence[str],
        right: Sequence[str],
        loss_range: LossRange = LossRange.SIGNED,
    ):
        self.left = tuple(left)
        self.right = tuple(right)
        if not 1 <= len(self.left) <= len(self.right):
            raise InvalidInstance(
                f"Need 1 <= k <= m, got k={len(self.left)}, m={len(self.right)}"
            )
        if set(self.left) & set(self.right) or set(graph.nodes) != set(self.left + self.right):
            raise InvalidInstance("Left and right sides must partition the nodes")
        pairs: Dict[Tuple[str, str], Edge] = {}
        for edge in graph.edges:
            pair = (edge.u, edge.v) if edge.u in self.left else (edge.v, edge.u)
            if pair[0] not in self.left or pair[1] not in self.right or pair in pairs:
                raise InvalidInstance(
                    "Truncated permutations need a simple complete bipartite graph"
                )
            pairs[pair] = edge
        if len(pairs) != len(self.left) * len(self.right):
            raise InvalidInstance("Truncated permutations need a complete bipartite graph")
        super().__init__(graph, loss_range)
        self.pairs = pairs

    @classmethod
    def complete(cls, k: int, m: int) -> "TruncatedPerm":
        left = [f"u{i}" for i in range(1, k + 1)]
        right = [f"v{j}" for j in range(1, m + 1)]
        edges = [
            (u, v, Label.anonymous(i * m + j))
            for i, u in enumerate(left)
            for j, v in enumerate(right)
        ]
        return cls(Graph.build(False, edges, nodes=left + right), left, right)

    @property
    def k(self) -> int:
        return len(self.left)

    @property
    def m(self) -> int:
        return len(self.right)

    def _awake_candidates(
        self, awake: FrozenSet[Label], budget: SearchBudget
    ) -> Iterator[Action]:
        options = [
            [self.pairs[(u, v)] for v in self.right if self.pairs[(u, v)].label in awake]
            for u in self.left
        ]

        def extend(row: int, used: FrozenSet[str], chosen: Tuple[Label, ...]):
            if row == len(options):
                yield frozenset(chosen)
                return
            for edge in options[row]:
                other = edge.v if edge.u == self.left[row] else edge.u
                if other in used:
                    continue
                budget.spend()
                yield from extend(row + 1, used | {other}, chosen + (edge.label,))

        return extend(0, frozenset(), ())

    def min_loss_awake(
        self, sleeping: AbstractSet[Label], losses: LossFunction
    ) -> Solution:
        awake = set(self._awake_labels(sleeping))
        if not awake:
            return None
        scale = max(abs(float(losses[label])) for label in awake) + 1.0
        # Any assignment through a sleeping edge costs more than every awake one.
        sentinel = 2.0 * self.k * scale
        costs = np.full((self.k, self.m), sentinel)
        for i, u in enumerate(self.left):
            for j, v in enumerate(self.right):
                label = self.pairs[(u, v)].label
                if label in awake:
                    costs[i, j] = float(losses[label]) + scale
        rows, cols = linear_sum_assignment(costs)
        chosen = [self.pairs[(self.left[i], self.right[j])].label for i, j in zip(rows, cols)]
        if any(label not in awake for label in chosen):
            return None
        action = frozenset(chosen)
        return action, action_loss(action, losses)

    def count(self) -> Optional[int]:
        return perm(self.m, self.k)

    def describe(self) -> str:
        return f"truncated-perm instance (k={self.k}, m={self.m})"


class MinCut(GraphProblem):
    """Edge sets whose removal disconnects the source from the sink."""

    family = Family.MIN_CUT

    def __init__(self, graph: Graph, loss_range: LossRange = LossRange.UNIT):
        if graph.source is None or graph.sink is None:
            raise InvalidInstance("Min cut instances need a source and a sink")
        super().__init__(graph, loss_range)
        self._adjacent: Dict[str, List[Tuple[str, Label]]] = {
            node: [] for node in graph.nodes
        }
        for edge in graph.edges:
            self._adjacent[edge.u].append((edge.v, edge.label))
            if not graph.directed:
                self._adjacent[edge.v].append((edge.u, edge.label))

    def disconnects(self, removed: AbstractSet[Label]) -> bool:
        reached = {self.graph.source}
        frontier = [self.graph.source]
        while frontier:
            node = frontier.pop()
            for neighbor, label in self._adjacent[node]:
                if label in removed or neighbor in reached:
                    continue
                if neighbor == self.graph.sink:
                    return False
                reached.add(neighbor)
                frontier.append(neighbor)
        return True

    def contains(self, action: AbstractSet[Label]) -> bool:
        return action <= self.ground.members and self.disconnects(action)

    def _awake_candidates(
        self, awake: FrozenSet[Label], budget: SearchBudget
    ) -> Iterator[Action]:
        budget.require(2 ** len(awake), "cut search")
        ordered = sorted(awake)
        for size in range(len(ordered) + 1):
            for candidate in combinations(ordered, size):
                budget.spend()
                action = frozenset(candidate)
                if self.disconnects(action):
                    yield action

    def min_loss_awake(
        self, sleeping: AbstractSet[Label], losses: LossFunction
    ) -> Solution:
        awake = set(self._awake_labels(sleeping))
        self._require_nonnegative(awake, losses)
        network = nx.DiGraph()
        network.add_nodes_from(self.graph.nodes)
        # Sleeping edges get no capacity attribute, which networkx reads as
        # infinite. Parallel awake arcs add up.
        infinite = set()
        for edge in self.graph.edges:
            arcs = [(edge.u, edge.v)]
            if not self.graph.directed:
                arcs.append((edge.v, edge.u))
            for u, v in arcs:
                if edge.label not in awake:
                    infinite.add((u, v))
                    network.add_edge(u, v)
                    network[u][v].pop("capacity", None)
                elif (u, v) not in infinite:
                    current = network[u][v]["capacity"] if network.has_edge(u, v) else 0
                    network.add_edge(u, v, capacity=current + losses[edge.label])
        try:
            _, (reachable, _) = nx.minimum_cut(
                network, self.graph.source, self.graph.sink, flow_func=edmonds_karp
            )
        except nx.NetworkXUnbounded:
            return None
        cut = frozenset(
            edge.label
            for edge in self.graph.edges
            if (edge.u in reachable) != (edge.v in reachable)
            and (not self.graph.directed or edge.u in reachable)
        )
        if not cut <= awake:
            return None
        return cut, action_loss(cut, losses)


FAMILY_CLASSES = {
    Family.SHORTEST_PATH: ShortestPath,
    Family.SPANNING_TREE: SpanningTree,
    Family.K_SUBSETS: KSubsets,
    Family.TRUNCATED_PERM: TruncatedPerm,
    Family.BIPARTITE_MATCHING: BipartiteMatching,
    Family.MIN_CUT: MinCut,
}


def contains(instance: ProblemInstance, action: AbstractSet[Label]) -> bool:
    return instance.contains(frozenset(action))


def enumerate_actions(instance: ProblemInstance, cap: Optional[int] = None) -> List[Action]:
    return instance.enumerate(cap)


def min_loss_awake(
    instance: ProblemInstance, sleeping: AbstractSet[Label], losses: LossFunction
) -> Solution:
    return instance.min_loss_awake(frozenset(sleeping), losses)


def _random_edges(
    rng: np.random.Generator, count: int, extra: int
) -> List[Tuple[str, str]]:
    """A backbone path n0 -> ... -> n{count-1} plus ``extra`` random edges."""
    pairs = [(f"n{i}", f"n{i + 1}") for i in range(count - 1)]
    for _ in range(extra):
        u, v = rng.choice(count, size=2, replace=False)
        pairs.append((f"n{u}", f"n{v}"))
    return pairs


def _labeled(pairs: Sequence[Tuple[str, str]]) -> List[Tuple[str, str, Label]]:
    return [(u, v, Label.anonymous(i)) for i, (u, v) in enumerate(pairs)]


def random_instance(family: Family, rng: np.random.Generator) -> ProblemInstance:
    """A small random instance of ``family`` whose D is cheap to enumerate."""
    if family is Family.K_SUBSETS:
        d = int(rng.integers(3, 8))
        return KSubsets.anonymous(int(rng.integers(1, d + 1)), d)
    if family is Family.TRUNCATED_PERM:
        k = int(rng.integers(1, 4))
        return TruncatedPerm.complete(k, int(rng.integers(k, 5)))
    if family is Family.BIPARTITE_MATCHING:
        left, right = int(rng.integers(2, 4)), int(rng.integers(2, 4))
        pairs = [
            (f"l{rng.integers(left)}", f"r{rng.integers(right)}")
            for _ in range(int(rng.integers(2, 7)))
        ]
        return BipartiteMatching(Graph.build(False, _labeled(pairs)))

    count = int(rng.integers(3, 6))
    pairs = _random_edges(rng, count, int(rng.integers(1, 5)))
    source, sink = "n0", f"n{count - 1}"
    if family is Family.SHORTEST_PATH:
        return ShortestPath(Graph.build(True, _labeled(pairs), source, sink))
    if family is Family.SPANNING_TREE:
        return SpanningTree(Graph.build(False, _labeled(pairs)))
    if family is Family.MIN_CUT:
        directed = bool(rng.integers(2))
        return MinCut(Graph.build(directed, _labeled(pairs), source, sink))
    raise InvalidInstance(f"No random generator for {family}")


def spot_check_actions(
    instance: ProblemInstance,
    rng: np.random.Generator,
    attempts: int,
    always_sleeping: AbstractSet[Label] = frozenset(),
    cap: Optional[int] = None,
) -> Iterator[Action]:
    """Awake actions under random half-asleep sleeping sets.

    Used when D is too large to enumerate; attempts whose awake set is still
    too large are skipped.
    """
    ground = instance.ground.elements
    for _ in range(attempts):
        draws = rng.random(len(ground))
        sleeping = frozenset(
            label for label, draw in zip(ground, draws) if draw < 0.5
        ) | frozenset(always_sleeping)
        try:
            actions = instance.awake_actions(sleeping, cap)
        except TooLarge:
            continue
        yield from actions
