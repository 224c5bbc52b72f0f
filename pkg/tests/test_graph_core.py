import networkx as nx
import numpy as np
import pytest

from errors import InvariantViolation, NoLeftElement
from graph_core import (
    NONADJACENT_REJECTION_SHARE, GraphProperty, LeftElement, MultiGraph, SelectionKernel, check_property, degree_density,
    degree_histogram, kernel_applicable, sample_degree_proportional_prefix, sample_left_element,
    scan_structure, to_networkx,
)
from random_stream import RandomStream


def triangle() -> MultiGraph:
    return MultiGraph(3, [(0, 1), (1, 2), (2, 0)])


def random_multigraph(seed: int) -> MultiGraph:
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 14))
    g = MultiGraph(n)
    for _ in range(int(rng.integers(0, 2 * n))):
        u, v = rng.choice(n, size=2, replace=False)
        g.add_edge(int(u), int(v))
    return g


DRAWS = 100_000


def assert_frequencies(counts, expected, draws: int = DRAWS) -> None:
    """Every cell within three standard errors of its expected share."""
    expected = np.asarray(expected, dtype=float)
    stderr = np.sqrt(expected * (1 - expected) / draws)
    assert np.all(np.abs(np.asarray(counts) / draws - expected) <= 3 * stderr)


def tally(g: MultiGraph, kernel: SelectionKernel, seed: int, cells, key=lambda left: left.vertices):
    rng = RandomStream(seed)
    index = {cell: i for i, cell in enumerate(cells)}
    counts = np.zeros(len(cells), dtype=int)
    for _ in range(DRAWS):
        counts[index[key(sample_left_element(g, kernel, rng))]] += 1
    return counts


class TestMultiGraph:
    def test_add_edge_updates_degrees_and_multiplicity(self, debug_checks):
        g = MultiGraph(3)
        g.add_edge(0, 1)
        index = g.add_edge(0, 1)
        assert index == 1
        assert g.degree == [2, 2, 0]
        assert g.multiplicity(1, 0) == 2
        assert g.has_edge(0, 1) and not g.has_edge(0, 2)
        assert sum(g.degree) == 2 * g.m

    def test_loop_rejected_unless_allowed(self):
        with pytest.raises(ValueError):
            MultiGraph(2).add_edge(1, 1)
        g = MultiGraph(2, allow_loops=True)
        g.add_edge(1, 1)
        assert g.degree == [0, 2]

    def test_edge_outside_vertex_range_rejected(self):
        with pytest.raises(ValueError):
            MultiGraph(2).add_edge(0, 2)

    def test_subdivide_keeps_index_and_appends_second_half(self, debug_checks):
        g = triangle()
        w = g.subdivide_edge(0)
        assert w == 3
        assert g.edges[0] == (0, 3)
        assert g.edges[-1] == (3, 1)
        assert (g.n, g.m) == (4, 4)
        assert g.degree == [2, 2, 2, 2]
        assert not g.has_edge(0, 1)

    def test_subdivide_one_of_parallel_edges(self, debug_checks):
        g = MultiGraph(2, [(0, 1), (0, 1)])
        g.subdivide_edge(1)
        assert g.multiplicity(0, 1) == 1
        assert g.nonadjacent_pair_count() == 0

    def test_nonadjacent_pairs(self):
        assert triangle().nonadjacent_pair_count() == 0
        path = MultiGraph(3, [(0, 1), (1, 2), (1, 2)])
        assert path.nonadjacent_pair_count() == 1

    def test_copy_is_independent(self):
        g = triangle()
        clone = g.copy()
        clone.add_vertex()
        clone.add_edge(0, 3)
        assert g.n == 3 and g.m == 3
        assert clone != g

    def test_validate_detects_stale_degree(self):
        g = triangle()
        g.degree[0] = 5
        with pytest.raises(InvariantViolation):
            g.validate()


class TestKernels:
    def test_applicability_on_single_vertex(self):
        g = MultiGraph(1)
        assert kernel_applicable(g, SelectionKernel.UNIFORM_VERTEX)
        assert not kernel_applicable(g, SelectionKernel.UNIFORM_PAIR)
        assert not kernel_applicable(g, SelectionKernel.UNIFORM_EDGE)
        assert not kernel_applicable(g, SelectionKernel.DEGREE_PROPORTIONAL_VERTEX)
        assert not kernel_applicable(g, SelectionKernel.UNIFORM_NONADJACENT_PAIR)

    def test_no_left_element(self):
        with pytest.raises(NoLeftElement):
            sample_left_element(MultiGraph(1), SelectionKernel.UNIFORM_EDGE, RandomStream(1))

    def test_uniform_pair_is_sorted_and_distinct(self):
        rng = RandomStream(3)
        g = MultiGraph(5)
        for _ in range(200):
            u, v = sample_left_element(g, SelectionKernel.UNIFORM_PAIR, rng).vertices
            assert 0 <= u < v < 5

    def test_nonadjacent_pair_finds_the_only_free_pair(self):
        g = MultiGraph(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)])
        rng = RandomStream(11)
        for _ in range(20):
            assert sample_left_element(g, SelectionKernel.UNIFORM_NONADJACENT_PAIR, rng) == LeftElement((2, 3))

    def test_nonadjacent_pair_by_rejection(self):
        g = MultiGraph(6, [(0, 1)])
        rng = RandomStream(5)
        for _ in range(200):
            u, v = sample_left_element(g, SelectionKernel.UNIFORM_NONADJACENT_PAIR, rng).vertices
            assert not g.has_edge(u, v)

    def test_uniform_pair_frequencies(self):
        g = MultiGraph(3, [(0, 1)])
        counts = tally(g, SelectionKernel.UNIFORM_PAIR, 31, [(0, 1), (0, 2), (1, 2)])
        assert_frequencies(counts, [1 / 3] * 3)

    def test_uniform_edge_counts_parallel_edges_separately(self):
        g = MultiGraph(3, [(0, 1), (0, 1), (1, 2)])
        counts = tally(g, SelectionKernel.UNIFORM_EDGE, 37, [0, 1, 2], key=lambda left: left.edge)
        assert_frequencies(counts, [1 / 3] * 3)

    def test_nonadjacent_pair_frequencies_by_rejection(self):
        g = MultiGraph(4, [(0, 1), (2, 3)])
        assert g.nonadjacent_pair_count() >= NONADJACENT_REJECTION_SHARE * 6
        counts = tally(g, SelectionKernel.UNIFORM_NONADJACENT_PAIR, 41, [(0, 2), (0, 3), (1, 2), (1, 3)])
        assert_frequencies(counts, [1 / 4] * 4)

    def test_nonadjacent_pair_frequencies_by_enumeration(self):
        g = MultiGraph(5, [(u, v) for u in range(5) for v in range(u + 1, 5) if (u, v) not in ((0, 1), (2, 3))])
        assert g.nonadjacent_pair_count() < NONADJACENT_REJECTION_SHARE * 10
        counts = tally(g, SelectionKernel.UNIFORM_NONADJACENT_PAIR, 43, [(0, 1), (2, 3)])
        assert_frequencies(counts, [1 / 2] * 2)

    def test_uniform_edge_reports_index(self):
        g = triangle()
        left = sample_left_element(g, SelectionKernel.UNIFORM_EDGE, RandomStream(2))
        assert g.edges[left.edge] == left.vertices
        assert str(left) == f"e{left.edge}:{left.vertices[0]}-{left.vertices[1]}"

    def test_degree_proportional_frequencies(self):
        star = MultiGraph(4, [(0, 1), (0, 2), (0, 3)])
        counts = tally(star, SelectionKernel.DEGREE_PROPORTIONAL_VERTEX, 2024, [(0,), (1,), (2,), (3,)])
        assert_frequencies(counts, [1 / 2, 1 / 6, 1 / 6, 1 / 6])

    def test_prefix_sampler_matches_endpoint_sampler(self):
        g = MultiGraph(3, [(0, 1), (0, 1), (0, 2)])
        law = [1 / 2, 1 / 3, 1 / 6]
        rng = RandomStream(99)
        prefix = np.bincount([sample_degree_proportional_prefix(g, rng).vertices[0] for _ in range(DRAWS)],
                             minlength=3)
        endpoint = tally(g, SelectionKernel.DEGREE_PROPORTIONAL_VERTEX, 99, [(0,), (1,), (2,)])
        assert_frequencies(prefix, law)
        assert_frequencies(endpoint, law)

    def test_sampling_is_reproducible(self):
        g = triangle()
        first = [sample_left_element(g, SelectionKernel.UNIFORM_PAIR, RandomStream(8)) for _ in range(3)]
        second = [sample_left_element(g, SelectionKernel.UNIFORM_PAIR, RandomStream(8)) for _ in range(3)]
        assert first == second


class TestStructure:
    @pytest.mark.parametrize("seed", range(40))
    def test_scan_matches_networkx(self, seed):
        g = random_multigraph(seed)
        simple = nx.Graph(to_networkx(g))
        report = scan_structure(g)
        assert report.components == nx.number_connected_components(simple)
        assert set(report.articulation_points) == set(nx.articulation_points(simple))
        expected = {tuple(sorted(edge)) for edge in nx.bridges(to_networkx(g))}
        assert {tuple(sorted(g.edges[i])) for i in report.bridges} == expected

    def test_parallel_edge_is_not_a_bridge(self):
        g = MultiGraph(2, [(0, 1), (0, 1)])
        assert scan_structure(g).bridges == []
        assert check_property(g, GraphProperty.TWO_EDGE_CONNECTED)
        assert not check_property(g, GraphProperty.BICONNECTED)

    def test_triangle_properties(self):
        g = triangle()
        for prop in GraphProperty:
            assert check_property(g, prop)

    def test_path_has_cut_vertex_and_bridges(self):
        g = MultiGraph(3, [(0, 1), (1, 2)])
        report = scan_structure(g)
        assert report.articulation_points == [1]
        assert report.bridges == [0, 1]
        assert check_property(g, GraphProperty.CONNECTED)
        assert not check_property(g, GraphProperty.TWO_EDGE_CONNECTED)

    def test_disconnected_graph_fails_every_property(self):
        g = MultiGraph(4, [(0, 1), (2, 3)])
        for prop in GraphProperty:
            assert not check_property(g, prop)

    def test_single_vertex(self):
        g = MultiGraph(1)
        assert check_property(g, GraphProperty.CONNECTED)
        assert not check_property(g, GraphProperty.BICONNECTED)
        assert not check_property(g, GraphProperty.TWO_EDGE_CONNECTED)


def test_degree_histogram_and_density():
    g = MultiGraph(4, [(0, 1), (0, 2), (0, 3)])
    assert degree_histogram(g) == {1: 3, 3: 1}
    assert degree_density(g) == {1: 0.75, 3: 0.25}


def test_to_networkx_keeps_parallel_edges():
    graph = to_networkx(MultiGraph(3, [(0, 1), (0, 1), (1, 2)]))
    assert graph.number_of_nodes() == 3
    assert graph.number_of_edges() == 3


class TestWorkedExamples:
    def test_degree_proportional_on_path(self):
        path = MultiGraph(3, [(0, 1), (1, 2)])
        counts = tally(path, SelectionKernel.DEGREE_PROPORTIONAL_VERTEX, 17, [(0,), (1,), (2,)])
        assert_frequencies(counts, [0.25, 0.5, 0.25])

    def test_uniform_vertex_on_four_vertices(self):
        g = MultiGraph(4, [(0, 1), (1, 2)])
        counts = tally(g, SelectionKernel.UNIFORM_VERTEX, 23, [(0,), (1,), (2,), (3,)])
        assert_frequencies(counts, [0.25] * 4)

    def test_triangle_has_no_nonadjacent_pair(self):
        with pytest.raises(NoLeftElement):
            sample_left_element(triangle(), SelectionKernel.UNIFORM_NONADJACENT_PAIR, RandomStream(0))

    def test_four_cycle_is_two_edge_connected(self):
        g = triangle()
        g.subdivide_edge(0)
        assert check_property(g, GraphProperty.TWO_EDGE_CONNECTED)
        assert check_property(g, GraphProperty.BICONNECTED)

    def test_histograms(self):
        assert degree_histogram(triangle()) == {2: 3}
        assert degree_histogram(MultiGraph(3, [(0, 1), (1, 2)])) == {1: 2, 2: 1}
        assert degree_histogram(MultiGraph(2, [(0, 1), (0, 1)])) == {2: 2}
