import itertools

import pytest

from knitting.partition import PartitionGraph, PartitionMethod, _better, _limits, bisect, fiedler_order, partition


def _clique_chain(cliques: int, size: int = 4, bridge: float = 0.1):
    vertices = list(range(cliques * size))
    edges = []
    for c in range(cliques):
        members = range(c * size, (c + 1) * size)
        edges += [(a, b, 1.0) for a, b in itertools.combinations(members, 2)]
        if c + 1 < cliques:
            edges.append(((c + 1) * size - 1, (c + 1) * size, bridge))
    return PartitionGraph.build(vertices, edges), [frozenset(range(c * size, (c + 1) * size)) for c in range(cliques)]


def _exhaustive_bisection(graph: PartitionGraph, fraction: float, imbalance: float) -> float:
    limit_a, limit_b = _limits(graph, fraction, imbalance)
    vertices = list(graph.vertices)
    best = None
    for size in range(1, len(vertices)):
        for side in itertools.combinations(vertices, size):
            side = frozenset(side)
            load_a = sum(graph.weights[v] for v in side)
            load_b = sum(graph.weights.values()) - load_a
            if load_a > limit_a + 1e-12 or load_b > limit_b + 1e-12:
                continue
            cut = graph.cut_weight(side)
            best = cut if best is None else min(best, cut)
    return best


def test_bisect_splits_two_cliques():
    graph, cliques = _clique_chain(2)

    side_a, side_b = bisect(graph, seed=5)

    assert {side_a, side_b} == set(cliques)
    assert graph.cut_weight(side_a) == pytest.approx(0.1)


@pytest.mark.parametrize("seed", range(5))
def test_bisect_matches_exhaustive_search(seed):
    graph, _ = _clique_chain(2)

    side_a, _ = bisect(graph, seed=seed)

    assert graph.cut_weight(side_a) == pytest.approx(_exhaustive_bisection(graph, 0.5, 0.03))


def test_bisect_respects_balance_limits():
    graph, _ = _clique_chain(3)
    limit_a, limit_b = _limits(graph, 0.5, 0.03)

    side_a, side_b = bisect(graph, imbalance=0.03, seed=1)

    assert side_a and side_b
    assert side_a | side_b == frozenset(graph.vertices)
    assert len(side_a) <= limit_a + 1e-12
    assert len(side_b) <= limit_b + 1e-12


def test_bisect_cuts_the_lightest_edge():
    graph = PartitionGraph.build(["a", "b", "c"], [("a", "b", 1.0), ("b", "c", 2.0)])

    side_a, side_b = bisect(graph, seed=0)

    assert frozenset({"a"}) in (side_a, side_b)


def test_vertex_weights_shape_the_limits():
    graph = PartitionGraph.build(["a", "b", "c"], [], {"a": 4, "b": 1, "c": 1})

    limit_a, limit_b = _limits(graph, 0.5, 0.03)

    assert limit_a == pytest.approx(7.0)
    assert limit_b == pytest.approx(7.0)


def test_bisect_is_deterministic():
    graph, _ = _clique_chain(3, bridge=1.0)

    assert bisect(graph, seed=11) == bisect(graph, seed=11)


def test_bisect_needs_two_vertices():
    with pytest.raises(ValueError):
        bisect(PartitionGraph.build([0], []))


def test_three_way_partition_finds_cliques():
    graph, cliques = _clique_chain(3)

    parts = partition(graph, num_parts=3, seed=2)

    assert parts == sorted(cliques, key=min)


def test_partition_caps_parts_at_vertex_count():
    graph = PartitionGraph.build([0, 1], [(0, 1, 1.0)])

    assert partition(graph, num_parts=4) == [frozenset({0}), frozenset({1})]


def test_partition_of_single_vertex():
    assert partition(PartitionGraph.build([3], []), num_parts=2) == [frozenset({3})]


def test_cut_weight_merges_parallel_edges():
    graph = PartitionGraph.build([0, 1], [(0, 1, 1.5), (1, 0, 2.0), (0, 0, 9.0)])

    assert graph.cut_weight(frozenset({0})) == pytest.approx(3.5)


def _path(n: int) -> PartitionGraph:
    return PartitionGraph.build(range(n), [(i, i + 1, 1.0) for i in range(n - 1)])


def test_fiedler_order_follows_a_path():
    assert fiedler_order(_path(6)) == [0, 1, 2, 3, 4, 5]


def test_equal_cuts_prefer_the_balanced_split():
    assert _better((1.0, 0.5), (1.0, 1.0))
    assert not _better((1.0, 1.0), (1.0, 0.5))
    assert _better((0.5, 3.0), (1.0, 0.0))
    assert _better((1.0, 0.0), None)


def test_spectral_bisection_of_a_path_hits_the_target():
    side_a, side_b = bisect(_path(6), method=PartitionMethod.SPECTRAL)

    assert side_a == frozenset({0, 1, 2})
    assert side_b == frozenset({3, 4, 5})


def test_spectral_bisection_follows_the_fraction():
    side_a, _ = bisect(_path(6), fraction=1 / 3, method=PartitionMethod.SPECTRAL)

    assert side_a == frozenset({0, 1})


def test_shares_set_part_weights():
    parts = partition(_path(6), num_parts=2, method=PartitionMethod.SPECTRAL, shares=[1, 2])

    assert parts == [frozenset({0, 1}), frozenset({2, 3, 4, 5})]


@pytest.mark.parametrize("method", ["fm", "spectral"])
def test_three_way_partition_finds_cliques_with_either_method(method):
    graph, cliques = _clique_chain(3)

    assert partition(graph, num_parts=3, seed=2, method=method) == sorted(cliques, key=min)


@pytest.mark.parametrize("shares", [[1], [1, 0], [1, -2]])
def test_partition_rejects_bad_shares(shares):
    with pytest.raises(ValueError):
        partition(_path(4), num_parts=2, shares=shares)
