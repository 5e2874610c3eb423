from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sleepcomb.adversaries import random_losses
from sleepcomb.core import LossFunction, LossRange
from sleepcomb.errors import InvalidInstance, TooLarge, UnsupportedLossRange
from sleepcomb.graphs import Graph, dump_graph, load_graph, parse_graph, save_graph
from sleepcomb.hard_instances import build_hard
from sleepcomb.labels import F, T, Label, make_action, parse_label
from sleepcomb.problems import (
    BipartiteMatching,
    Family,
    KSubsets,
    MinCut,
    ShortestPath,
    SpanningTree,
    TruncatedPerm,
    contains,
    enumerate_actions,
    min_loss_awake,
    random_instance,
)

GRAPH_TEXT = """\
# two stages
directed
s s
t t
edge s v1 1:0
edge s v1 1:1
edge v1 t F   # final stage
edge v1 t T
"""


def anon(*ids):
    return frozenset(Label.anonymous(i) for i in ids)


def anon_edges(pairs):
    return [(u, v, Label.anonymous(i)) for i, (u, v) in enumerate(pairs)]


def _random_round(instance, rng):
    sleeping = frozenset(label for label in instance.ground if rng.random() < 0.25)
    awake = [label for label in instance.ground if label not in sleeping]
    return sleeping, random_losses(awake, rng, instance.loss_range)


class TestGraph:
    def test_parse(self):
        graph = parse_graph(GRAPH_TEXT)
        assert graph.directed
        assert graph.source == "s" and graph.sink == "t"
        assert graph.nodes == ("s", "v1", "t")
        assert [str(label) for label in graph.labels] == ["1:0", "1:1", "F", "T"]

    def test_dump_and_reparse(self):
        graph = parse_graph(GRAPH_TEXT)
        assert parse_graph(dump_graph(graph)) == graph

    def test_file_round_trip(self, temp_workspace):
        path = f"{temp_workspace}/g.txt"
        graph = build_hard(Family.MIN_CUT, 1).instance.graph
        save_graph(graph, path)
        loaded = load_graph(path)
        assert loaded.edges == graph.edges
        assert set(loaded.nodes) == set(graph.nodes)
        assert (loaded.source, loaded.sink) == ("s", "t")

    @pytest.mark.parametrize(
        "text",
        [
            "",
            "edge a b a1\n",
            "directed\nedge a b a1\nedge b c a1\n",
            "directed\nedge a a a1\n",
            "directed\ns a\nt a\nedge a b a1\n",
            "directed\nnode a\n",
            "undirected\nedge a b 0:1\n",
        ],
    )
    def test_parse_errors(self, text):
        with pytest.raises(InvalidInstance):
            parse_graph(text)

    def test_with_and_without_edge(self):
        graph = parse_graph(GRAPH_TEXT)
        shortcut = graph.with_edge("s", "t", Label.anonymous(0))
        assert shortcut.has_edge(Label.anonymous(0))
        assert not graph.has_edge(Label.anonymous(0))
        assert not shortcut.without_edge(Label.anonymous(0)).has_edge(Label.anonymous(0))
        with pytest.raises(InvalidInstance):
            graph.without_edge(Label.anonymous(9))

    def test_with_edge_rejects_used_label(self):
        graph = parse_graph(GRAPH_TEXT)
        with pytest.raises(InvalidInstance, match="already in use"):
            graph.with_edge("s", "t", parse_label("F"))

    def test_to_networkx_keys_are_labels(self):
        graph = parse_graph(GRAPH_TEXT)
        nxg = graph.to_networkx([F, T])
        assert nxg.number_of_edges() == 2
        assert set(key for _, _, key in nxg.edges(keys=True)) == {F, T}


class TestContains:
    def test_k_subsets(self):
        instance = KSubsets.anonymous(2, 4)
        assert contains(instance, anon(0, 3))
        assert not contains(instance, anon(0))
        assert not contains(instance, anon(0, 7))

    def test_shortest_path(self):
        instance = build_hard(Family.SHORTEST_PATH, 1).instance
        assert contains(instance, make_action("1:0", "T"))
        assert not contains(instance, make_action("1:0", "1:1"))
        assert not contains(instance, make_action("1:0"))
        assert not contains(instance, make_action("1:0", "T", "F"))

    def test_min_cut_single_branch(self):
        instance = build_hard(Family.MIN_CUT, 1).instance
        assert not contains(instance, make_action("1:0"))
        assert contains(instance, make_action("1:0", "F"))
        assert contains(instance, make_action("1:0", "1:1", "F", "T"))

    def test_spanning_tree(self):
        instance = build_hard(Family.SPANNING_TREE, 1).instance
        assert contains(instance, make_action("1:*", "F"))
        assert not contains(instance, make_action("1:0", "1:1"))

    def test_maximal_matching(self):
        edges = [("a", "x"), ("a", "y"), ("b", "y")]
        instance = BipartiteMatching(Graph.build(False, anon_edges(edges)))
        assert contains(instance, anon(0, 2))
        assert contains(instance, anon(1))
        assert not contains(instance, anon(0))
        assert not contains(instance, anon(1, 2))

    def test_truncated_perm(self):
        instance = TruncatedPerm.complete(2, 3)
        def pairs(*chosen):
            return frozenset(instance.pairs[pair].label for pair in chosen)

        assert contains(instance, pairs(("u1", "v1"), ("u2", "v3")))
        assert not contains(instance, pairs(("u1", "v1"), ("u2", "v1")))
        assert not contains(instance, pairs(("u1", "v1")))


class TestEnumerate:
    def test_hard_k_subsets(self):
        assert len(enumerate_actions(build_hard(Family.K_SUBSETS, 1).instance)) == 10

    def test_hard_shortest_path(self):
        actions = enumerate_actions(build_hard(Family.SHORTEST_PATH, 1).instance)
        assert len(actions) == 6
        assert all(len(action) == 2 for action in actions)

    def test_single_edge_spanning_tree(self):
        instance = SpanningTree(Graph.build(False, [("a", "b", Label.anonymous(0))]))
        assert enumerate_actions(instance) == [anon(0)]

    def test_truncated_perm_count(self):
        instance = TruncatedPerm.complete(2, 4)
        assert instance.count() == 12
        assert len(instance.enumerate()) == 12

    def test_min_cut_includes_non_minimal_cuts(self):
        instance = build_hard(Family.MIN_CUT, 1).instance
        # (2^3 - 1) choices on the first branch times (2^2 - 1) on the second.
        assert len(instance.enumerate()) == 21

    def test_cyclic_paths_are_simple(self):
        graph = Graph.build(
            True,
            [
                ("s", "a", Label.anonymous(0)),
                ("a", "b", Label.anonymous(1)),
                ("b", "a", Label.anonymous(2)),
                ("a", "t", Label.anonymous(3)),
                ("b", "t", Label.anonymous(4)),
            ],
            "s",
            "t",
        )
        instance = ShortestPath(graph)
        assert not instance.acyclic
        assert instance.loss_range is LossRange.UNIT
        assert instance.enumerate() == [anon(0, 1, 4), anon(0, 3)]

    def test_cap_uses_closed_form_count(self):
        with pytest.raises(TooLarge):
            KSubsets.anonymous(5, 20).enumerate(cap=100)

    def test_sorted_and_deterministic(self):
        instance = build_hard(Family.BIPARTITE_MATCHING, 2).instance
        first = instance.enumerate()
        assert first == instance.enumerate()
        assert first == sorted(first, key=lambda a: tuple(sorted(a)))

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), family=st.sampled_from(list(Family)))
    def test_contains_agrees_with_enumerate(self, seed, family):
        instance = random_instance(family, np.random.default_rng(seed))
        ground = list(instance.ground)
        if len(ground) > 10:
            return
        members = set(instance.enumerate())
        for size in range(len(ground) + 1):
            for subset in combinations(ground, size):
                action = frozenset(subset)
                assert contains(instance, action) == (action in members)


class TestMinLossAwake:
    def test_two_smallest(self):
        instance = KSubsets.anonymous(2, 4)
        losses = LossFunction({Label.anonymous(i): Fraction(i + 1, 10) for i in range(4)})
        action, value = min_loss_awake(instance, frozenset(), losses)
        assert action == anon(0, 1)
        assert value == Fraction(3, 10)

    def test_all_zero_losses(self):
        instance = build_hard(Family.SPANNING_TREE, 2).instance
        losses = LossFunction({label: 0 for label in instance.ground})
        action, value = min_loss_awake(instance, frozenset(), losses)
        assert value == 0
        assert instance.contains(action)

    def test_nothing_awake(self):
        instance = build_hard(Family.SHORTEST_PATH, 1).instance
        sleeping = make_action("1:0", "1:1", "1:*")
        losses = LossFunction({F: 0, T: 0})
        assert min_loss_awake(instance, sleeping, losses) is None

    def test_negative_losses_on_dag(self):
        instance = build_hard(Family.SHORTEST_PATH, 1).instance
        losses = LossFunction(
            {x: Fraction(-1, 2) if x == T else Fraction(1, 4) for x in instance.ground}
        )
        action, value = min_loss_awake(instance, frozenset(), losses)
        assert T in action
        assert value == Fraction(-1, 4)

    def test_min_cut_rejects_negative_losses(self):
        instance = build_hard(Family.MIN_CUT, 1).instance
        losses = LossFunction({label: Fraction(-1, 2) for label in instance.ground})
        with pytest.raises(UnsupportedLossRange):
            min_loss_awake(instance, frozenset(), losses)

    def test_min_cut_sleeping_edges_cannot_be_cut(self):
        instance = build_hard(Family.MIN_CUT, 1).instance
        sleeping = make_action("F", "T")
        losses = LossFunction({label: 0 for label in instance.ground if label not in sleeping})
        assert min_loss_awake(instance, sleeping, losses) is None

    def test_min_cut_avoids_expensive_edges(self):
        instance = build_hard(Family.MIN_CUT, 1).instance
        values = {"1:0": 1, "1:1": "1/10", "1:*": 1, "F": "1/2", "T": "1/5"}
        losses = LossFunction({parse_label(k): Fraction(v) for k, v in values.items()})
        action, value = min_loss_awake(instance, frozenset(), losses)
        assert action == make_action("1:1", "T")
        assert value == Fraction(3, 10)

    def test_truncated_perm_respects_sleeping(self):
        instance = TruncatedPerm.complete(2, 2)
        cheap = instance.pairs[("u1", "v1")].label
        losses = LossFunction({label: 0 for label in instance.ground if label != cheap})
        action, _ = min_loss_awake(instance, frozenset([cheap]), losses)
        assert cheap not in action
        assert instance.contains(action)

    @pytest.mark.parametrize("family", list(Family))
    def test_solver_matches_enumeration(self, family):
        rng = np.random.default_rng(2024)
        for _ in range(100):
            instance = random_instance(family, rng)
            sleeping, losses = _random_round(instance, rng)
            solved = instance.min_loss_awake(sleeping, losses)
            brute = instance.min_loss_awake_bruteforce(sleeping, losses)
            assert (solved is None) == (brute is None)
            if solved is None:
                continue
            action, value = solved
            assert value == brute[1]
            assert instance.contains(action)
            assert sleeping.isdisjoint(action)


class TestInstanceValidation:
    def test_k_range(self):
        with pytest.raises(InvalidInstance):
            KSubsets.anonymous(5, 4)

    def test_spanning_tree_needs_connected(self):
        graph = Graph.build(False, anon_edges([("a", "b"), ("c", "d")]))
        with pytest.raises(InvalidInstance):
            SpanningTree(graph)

    def test_shortest_path_needs_direction(self):
        graph = Graph.build(False, [("s", "t", Label.anonymous(0))], "s", "t")
        with pytest.raises(InvalidInstance):
            ShortestPath(graph)

    def test_matching_needs_bipartite(self):
        triangle = anon_edges([("a", "b"), ("b", "c"), ("c", "a")])
        with pytest.raises(InvalidInstance):
            BipartiteMatching(Graph.build(False, triangle))

    def test_truncated_perm_needs_complete_graph(self):
        graph = Graph.build(False, [("u1", "v1", Label.anonymous(0))], nodes=["u1", "v1", "v2"])
        with pytest.raises(InvalidInstance):
            TruncatedPerm(graph, ["u1"], ["v1", "v2"])

    def test_min_cut_needs_terminals(self):
        with pytest.raises(InvalidInstance):
            MinCut(Graph.build(False, [("a", "b", Label.anonymous(0))]))

    def test_family_parse(self):
        assert Family.parse("min-cut") is Family.MIN_CUT
        with pytest.raises(InvalidInstance):
            Family.parse("max-cut")
