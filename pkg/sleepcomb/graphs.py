"""Edge-labeled multigraphs and their text format.

Every edge carries a ``Label`` that is also its ground-set element, so parallel
edges are told apart by label. Graphs are immutable; ``with_edge`` and
``without_edge`` return modified copies.

Text format, one record per line (``#`` starts a comment)::

    directed
    s s
    t t
    edge s v1 1:0
    edge v1 t F
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import networkx as nx

from sleepcomb.errors import InvalidInstance
from sleepcomb.labels import Label, parse_label
from sleepcomb.logging import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class Edge:
    u: str
    v: str
    label: Label


@dataclass(frozen=True)
class Graph:
    """A directed or undirected multigraph with labeled edges.

    Attributes:
        directed: Whether edges run from ``u`` to ``v`` only.
        nodes: Node ids in insertion order.
        edges: Edges in insertion order.
        source: Designated source (or first partner), if any.
        sink: Designated sink (or second partner), if any.
    """

    directed: bool
    nodes: Tuple[str, ...]
    edges: Tuple[Edge, ...]
    source: Optional[str] = None
    sink: Optional[str] = None
    _by_label: Dict[Label, Edge] = field(
        init=False, repr=False, compare=False, hash=False
    )

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))
        node_set = set(self.nodes)
        if len(node_set) != len(self.nodes):
            raise InvalidInstance("Graph has duplicate node ids")
        by_label: Dict[Label, Edge] = {}
        for edge in self.edges:
            if edge.label in by_label:
                raise InvalidInstance(f"Duplicate edge label {edge.label}")
            if edge.u not in node_set or edge.v not in node_set:
                raise InvalidInstance(f"Edge {edge.label} has an unknown endpoint")
            if edge.u == edge.v:
                raise InvalidInstance(f"Edge {edge.label} is a self-loop")
            by_label[edge.label] = edge
        for role, node in (("source", self.source), ("sink", self.sink)):
            if node is not None and node not in node_set:
                raise InvalidInstance(f"Designated {role} {node!r} is not a node")
        if self.source is not None and self.source == self.sink:
            raise InvalidInstance("Source and sink must differ")
        object.__setattr__(self, "_by_label", by_label)

    @classmethod
    def build(
        cls,
        directed: bool,
        edges: Iterable[Tuple[str, str, Label]],
        source: Optional[str] = None,
        sink: Optional[str] = None,
        nodes: Iterable[str] = (),
    ) -> "Graph":
        """Build a graph whose nodes are ``nodes``, then edge endpoints in order."""
        edge_list = [Edge(u, v, label) for u, v, label in edges]
        order: Dict[str, None] = dict.fromkeys(nodes)
        for edge in edge_list:
            order.setdefault(edge.u)
            order.setdefault(edge.v)
        for node in (source, sink):
            if node is not None:
                order.setdefault(node)
        return cls(directed, tuple(order), tuple(edge_list), source, sink)

    @property
    def labels(self) -> Tuple[Label, ...]:
        return tuple(edge.label for edge in self.edges)

    def edge(self, label: Label) -> Edge:
        try:
            return self._by_label[label]
        except KeyError:
            raise InvalidInstance(f"No edge labeled {label}") from None

    def has_edge(self, label: Label) -> bool:
        return label in self._by_label

    def with_edge(self, u: str, v: str, label: Label) -> "Graph":
        if self.has_edge(label):
            raise InvalidInstance(f"Edge label {label} is already in use")
        nodes = self.nodes + tuple(node for node in (u, v) if node not in self.nodes)
        return Graph(
            self.directed,
            tuple(dict.fromkeys(nodes)),
            self.edges + (Edge(u, v, label),),
            self.source,
            self.sink,
        )

    def without_edge(self, label: Label) -> "Graph":
        if not self.has_edge(label):
            raise InvalidInstance(f"No edge labeled {label}")
        return Graph(
            self.directed,
            self.nodes,
            tuple(edge for edge in self.edges if edge.label != label),
            self.source,
            self.sink,
        )

    def to_networkx(self, labels: Optional[Iterable[Label]] = None) -> nx.MultiGraph:
        """Multigraph on all nodes, keyed by label, restricted to ``labels``."""
        graph = nx.MultiDiGraph() if self.directed else nx.MultiGraph()
        graph.add_nodes_from(self.nodes)
        edges = self.edges if labels is None else [self.edge(x) for x in labels]
        for edge in edges:
            graph.add_edge(edge.u, edge.v, key=edge.label)
        return graph


def parse_graph(text: str) -> Graph:
    """Parse the graph text format.

    Raises:
        InvalidInstance: On unknown records, a missing header or bad labels.
    """
    directed: Optional[bool] = None
    source = sink = None
    edges: List[Tuple[str, str, Label]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if directed is None:
            if fields != ["directed"] and fields != ["undirected"]:
                raise InvalidInstance(
                    f"Line {lineno}: expected 'directed' or 'undirected' header"
                )
            directed = fields[0] == "directed"
        elif fields[0] == "s" and len(fields) == 2:
            source = fields[1]
        elif fields[0] == "t" and len(fields) == 2:
            sink = fields[1]
        elif fields[0] == "edge" and len(fields) == 4:
            edges.append((fields[1], fields[2], parse_label(fields[3])))
        else:
            raise InvalidInstance(f"Line {lineno}: cannot parse {line!r}")
    if directed is None:
        raise InvalidInstance("Graph file is empty")
    return Graph.build(directed, edges, source, sink)


def dump_graph(graph: Graph) -> str:
    lines = ["directed" if graph.directed else "undirected"]
    if graph.source is not None:
        lines.append(f"s {graph.source}")
    if graph.sink is not None:
        lines.append(f"t {graph.sink}")
    lines.extend(f"edge {e.u} {e.v} {e.label}" for e in graph.edges)
    return "\n".join(lines) + "\n"


def load_graph(path: str) -> Graph:
    logger.debug("Loading graph from %s", path)
    with open(path, "r", encoding="utf-8") as f:
        return parse_graph(f.read())


def save_graph(graph: Graph, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(dump_graph(graph))
