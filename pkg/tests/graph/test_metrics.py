import math

import networkx as nx
import pytest

import cookiesync as cs

from ..graphs import ANALYTIC_GRAPHS, K3, P3, S5, TWO_TRIANGLES


@pytest.mark.parametrize('system', ANALYTIC_GRAPHS, ids=lambda s: s.name)
def test_algebraic_connectivity_correctness(system):
    value = cs.algebraic_connectivity(system.graph())
    assert value == pytest.approx(system.algebraic_connectivity, abs=1e-9)


@pytest.mark.parametrize('system', ANALYTIC_GRAPHS, ids=lambda s: s.name)
def test_smallest_eigenvalue_is_zero(system):
    g = system.graph().to_networkx()
    values = cs.smallest_laplacian_eigenvalues(g, k=2)
    assert abs(values[0]) < 1e-9


def test_algebraic_connectivity_largest_component():
    # a triangle and a separate edge: the triangle is the largest component
    g = cs.RelationGraph.from_edges([*K3.edges, ('X', 'Y')])
    assert cs.algebraic_connectivity(g) == pytest.approx(3.0, abs=1e-9)


def test_algebraic_connectivity_degenerate():
    assert cs.algebraic_connectivity(cs.RelationGraph.from_edges(nodes=['A'])) == 0.0
    assert cs.algebraic_connectivity(cs.RelationGraph.from_edges()) == 0.0


def test_sparse_eigensolver_matches_dense():
    n = 30
    g = nx.path_graph(n)
    expected = 2 - 2 * math.cos(math.pi / n)
    dense = cs.smallest_laplacian_eigenvalues(g, k=2, dense_limit=2000)
    sparse = cs.smallest_laplacian_eigenvalues(g, k=2, dense_limit=1)
    assert dense[1] == pytest.approx(expected, abs=1e-9)
    assert sparse[1] == pytest.approx(expected, abs=1e-8)
    assert abs(sparse[0]) < 1e-8


def test_modularity():
    g = cs.RelationGraph.from_edges(TWO_TRIANGLES)
    assert cs.modularity(g, [{'A', 'B', 'C'}, {'D', 'E', 'F'}]) == pytest.approx(
        0.5, abs=1e-12
    )
    assert cs.modularity(g, [set('ABCDEF')]) == pytest.approx(0.0, abs=1e-12)


def test_modularity_missing_nodes_are_singletons():
    g = cs.RelationGraph.from_edges(TWO_TRIANGLES)
    explicit = cs.modularity(g, [{'A', 'B', 'C'}, {'D'}, {'E'}, {'F'}])
    assert cs.modularity(g, [{'A', 'B', 'C'}]) == pytest.approx(explicit)


def test_modularity_without_edges():
    g = cs.RelationGraph.from_edges(nodes=['A', 'B'])
    assert cs.modularity(g, [{'A', 'B'}]) == 0.0


def test_detect_communities():
    g = cs.RelationGraph.from_edges(TWO_TRIANGLES)
    communities = cs.detect_communities(g, seed=3)
    assert communities == [frozenset('ABC'), frozenset('DEF')]


def test_detect_communities_deterministic():
    edges = [(f'N{i}', f'N{(i * 7 + 3) % 40}') for i in range(40)]
    edges = [(a, b) for a, b in edges if a != b]
    g = cs.RelationGraph.from_edges(edges)
    assert cs.detect_communities(g, seed=5) == cs.detect_communities(g, seed=5)


def test_detect_communities_seed_breaks_ties():
    # on a five-node path the middle node joins either end with equal gain
    g = cs.RelationGraph.from_edges([('A', 'B'), ('B', 'C'), ('C', 'D'), ('D', 'E')])
    partitions = {tuple(cs.detect_communities(g, seed=seed)) for seed in range(40)}
    assert partitions == {
        (frozenset('ABC'), frozenset('DE')),
        (frozenset('CDE'), frozenset('AB')),
    }


class TestPagerank:
    def test_sums_to_one(self):
        scores = cs.pagerank(S5.graph())
        assert sum(scores.values()) == pytest.approx(1.0, abs=1e-9)

    def test_center_ranks_first(self):
        scores = cs.pagerank(S5.graph())
        assert max(scores, key=scores.get) == 'Hub'
        leaves = [v for k, v in scores.items() if k != 'Hub']
        assert max(leaves) == pytest.approx(min(leaves))

    def test_relabel_invariant(self):
        edges = [*TWO_TRIANGLES, ('C', 'D'), ('F', 'G')]
        scores = cs.pagerank(cs.RelationGraph.from_edges(edges))
        # reversing the alphabet also reverses the node order
        rename = {n: chr(ord('Z') - ord(n) + ord('A')) for n in scores}
        renamed = cs.pagerank(
            cs.RelationGraph.from_edges([(rename[a], rename[b]) for a, b in edges])
        )
        assert renamed == pytest.approx(
            {rename[n]: v for n, v in scores.items()}, abs=1e-9
        )

    def test_empty(self):
        assert cs.pagerank(cs.RelationGraph.from_edges()) == {}


class TestGraphStats:
    @pytest.fixture(autouse=True)
    def _setup(self):
        # star with four leaves plus an isolated company
        self.graph = cs.RelationGraph.from_edges(
            S5.edges, nodes=['Lonely'], measurement_id='M1'
        )

    def test_counts(self):
        stats = cs.graph_stats(self.graph)
        assert stats.measurement_id == 'M1'
        assert stats.node_count == 6
        assert stats.isolated_count == 1
        assert stats.component_count == 1
        assert stats.largest_component_size == 5
        assert stats.median_component_size == 5.0
        assert stats.sync_edge_count == 4
        assert stats.embed_edge_count == 0

    def test_characteristics(self):
        stats = cs.graph_stats(self.graph)
        assert stats.algebraic_connectivity == pytest.approx(1.0, abs=1e-9)
        assert stats.diameter == 2
        assert stats.avg_path_length == pytest.approx(1.6)
        assert stats.mean_degree == pytest.approx(1.6)
        assert stats.median_degree == 1.0
        assert stats.avg_clustering_coefficient == 0.0

    @pytest.mark.parametrize('system', ANALYTIC_GRAPHS, ids=lambda s: s.name)
    def test_distances(self, system):
        stats = cs.graph_stats(system.graph())
        assert stats.diameter == system.diameter
        assert stats.avg_path_length == pytest.approx(system.avg_path_length)

    def test_two_triangles(self):
        stats = cs.graph_stats(cs.RelationGraph.from_edges(TWO_TRIANGLES))
        assert stats.component_count == 2
        assert stats.community_count == 2
        assert stats.modularity == pytest.approx(0.5)
        assert stats.avg_clustering_coefficient == pytest.approx(1.0)

    def test_include_embed(self):
        g = cs.RelationGraph.from_edges(P3.edges[:1], embed_edges=P3.edges[1:])
        assert cs.graph_stats(g).largest_component_size == 2
        options = cs.GraphOptions(include_embed=True)
        assert cs.graph_stats(g, options).largest_component_size == 3

    def test_empty_graph(self):
        stats = cs.graph_stats(cs.RelationGraph.from_edges(nodes=['A']))
        assert stats.component_count == 0
        assert stats.largest_component_size == 0
        assert stats.algebraic_connectivity == 0.0
        assert stats.modularity == 0.0


# components, largest component and algebraic connectivity of seven measurements
# with their printed changes relative to the first one
MEASUREMENTS = [
    (59, 429, 0.1187),
    (38, 296, 0.1494),
    (37, 269, 0.1071),
    (30, 277, 0.0994),
    (37, 235, 0.0818),
    (26, 225, 0.0469),
    (38, 268, 0.1146),
]
PRINTED_CHANGES = [
    (-35.59, -31.00, 25.86),
    (-37.29, -37.30, -9.77),
    (-49.15, -35.43, -16.26),
    (-37.29, -45.22, -31.09),
    (-55.93, -47.55, -60.49),
    (-35.59, -37.53, -3.45),
]


@pytest.mark.parametrize(
    ('after', 'printed'),
    list(zip(MEASUREMENTS[1:], PRINTED_CHANGES)),
    ids=[f'M{i}' for i in range(2, 8)],
)
def test_percent_change_table(after, printed):
    first = MEASUREMENTS[0]
    for before, value, expected in zip(first, after, printed):
        assert cs.percent_change(before, value) == pytest.approx(expected, abs=1e-9)


def test_percent_change_half_up():
    assert cs.percent_change(8, 9, digits=1) == 12.5
    assert cs.percent_change(1, 1.00125, digits=2) == 0.13


def test_percent_change_unrounded():
    assert cs.percent_change(3, 4, digits=None) == pytest.approx(100 / 3)


def test_percent_change_zero_reference():
    with pytest.raises(cs.UndefinedChangeError):
        cs.percent_change(0, 3)
    # also a `ZeroDivisionError`
    with pytest.raises(ZeroDivisionError):
        cs.percent_change(0.0, 0.0)
