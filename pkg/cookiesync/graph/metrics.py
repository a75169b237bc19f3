from __future__ import annotations

import logging
from collections.abc import Iterable
from decimal import ROUND_HALF_UP, Decimal
from typing import NamedTuple

import networkx as nx
import numpy as np
from scipy.sparse.linalg import eigsh

from ..errors import UndefinedChangeError
from ..options import GraphOptions
from .relation_graph import RelationGraph, connected_components

__all__ = [
    'GraphStats',
    'smallest_laplacian_eigenvalues',
    'algebraic_connectivity',
    'modularity',
    'detect_communities',
    'graph_stats',
    'pagerank',
    'percent_change',
]

logger = logging.getLogger(__name__)


class GraphStats(NamedTuple):
    """Connectivity statistics and characteristics of a relation graph.

    Component statistics are computed over the non-isolated nodes of the analyzed
    edge type; degree and clustering statistics likewise leave isolated nodes out.
    Distance statistics refer to the largest component.
    """

    measurement_id: str
    node_count: int
    isolated_count: int
    component_count: int
    largest_component_size: int
    median_component_size: float
    algebraic_connectivity: float
    diameter: int
    mean_degree: float
    median_degree: float
    modularity: float
    avg_clustering_coefficient: float
    avg_path_length: float
    community_count: int
    sync_edge_count: int
    embed_edge_count: int


def _edge_filter(options: GraphOptions) -> str:
    return 'all' if options.include_embed else 'sync'


def smallest_laplacian_eigenvalues(
    g: nx.Graph, k: int = 2, dense_limit: int = 2000
) -> np.ndarray:
    """Returns the `k` smallest eigenvalues of the combinatorial Laplacian
    $L = D - A$ of a graph, in ascending order.

    Graphs with at most `dense_limit` nodes use a full symmetric
    eigendecomposition, larger graphs a sparse shift-invert solver around zero.
    """
    n = g.number_of_nodes()
    if n == 0:
        return np.zeros(0)
    laplacian = nx.laplacian_matrix(g, nodelist=sorted(g.nodes), weight=None)
    laplacian = laplacian.astype(np.float64)
    if n <= dense_limit or k >= n - 1:
        return np.linalg.eigvalsh(laplacian.toarray())[:k]
    # shift slightly below zero so that the shifted operator is nonsingular
    values = eigsh(laplacian.tocsc(), k=k, sigma=-1e-2, which='LM')[0]
    return np.sort(values)


def algebraic_connectivity(
    graph: RelationGraph,
    options: GraphOptions = GraphOptions(),  # noqa: B008
) -> float:
    r"""Returns the algebraic connectivity of the largest component.

    The algebraic connectivity is the second-smallest eigenvalue $\lambda_2$ of the
    Laplacian. It is computed on the largest connected component, since it is zero
    for any disconnected graph. Components with less than two nodes have
    connectivity 0.

    Examples:
        >>> cs.algebraic_connectivity(cs.RelationGraph.from_edges([('A', 'B')]))
        2.0
    """
    components = connected_components(graph, _edge_filter(options))
    if len(components) == 0 or len(components[0]) < 2:
        return 0.0
    g = graph.to_networkx(_edge_filter(options)).subgraph(components[0])
    values = smallest_laplacian_eigenvalues(g, 2, options.dense_eigen_limit)
    return round(max(float(values[1]), 0.0), 12)


def _partition_graph(graph: RelationGraph, edge_filter: str) -> nx.Graph:
    return graph.to_networkx(edge_filter, include_isolated=False)


def modularity(
    graph: RelationGraph,
    partition: Iterable[Iterable[str]],
    options: GraphOptions = GraphOptions(),  # noqa: B008
) -> float:
    r"""Returns the Newman modularity $Q = \sum_i (e_{ii} - a_i^2)$ of a partition,
    computed on unweighted edges.

    Isolated nodes do not contribute; nodes of the graph missing from the partition
    are treated as singleton communities. A graph without edges has modularity 0.

    Examples:
        >>> g = cs.RelationGraph.from_edges(
        ...     [('A', 'B'), ('B', 'C'), ('A', 'C'), ('D', 'E'), ('E', 'F'), ('D', 'F')]
        ... )
        >>> cs.modularity(g, [{'A', 'B', 'C'}, {'D', 'E', 'F'}])
        0.5
    """
    g = _partition_graph(graph, _edge_filter(options))
    if g.number_of_edges() == 0:
        return 0.0
    communities = [set(c) & set(g.nodes) for c in partition]
    communities = [c for c in communities if len(c) > 0]
    covered = set().union(*communities)
    communities += [{n} for n in sorted(set(g.nodes) - covered)]
    return float(nx.community.modularity(g, communities, weight=None))


def detect_communities(
    graph: RelationGraph,
    seed: int | None = 0,
    options: GraphOptions = GraphOptions(),  # noqa: B008
) -> list[frozenset[str]]:
    """Detect communities by greedy modularity maximization.

    Starting from singletons, the pair of communities with the largest positive
    modularity gain is merged until no merge increases the modularity. Isolated
    nodes are left out. Ties between equal gains are broken by node rank, the
    sorted order if `seed` is `None` and a permutation drawn from `seed`
    otherwise, so the result is deterministic for a fixed seed.

    Returns:
        Communities sorted by decreasing size, then by their smallest member.
    """
    g = _partition_graph(graph, _edge_filter(options))
    if g.number_of_edges() == 0:
        return []
    nodes = sorted(g.nodes)
    if seed is not None:
        order = np.random.default_rng(seed).permutation(len(nodes))
        nodes = [nodes[i] for i in order]
    # networkx breaks ties on node labels, so nodes are relabeled by rank
    ranked = nx.relabel_nodes(g, {node: rank for rank, node in enumerate(nodes)})
    communities = [
        frozenset(nodes[rank] for rank in c)
        for c in nx.community.greedy_modularity_communities(ranked, weight=None)
    ]
    return sorted(communities, key=lambda c: (-len(c), min(c)))


def pagerank(
    graph: RelationGraph,
    damping: float = 0.85,
    tol: float = 1e-10,
    options: GraphOptions = GraphOptions(),  # noqa: B008
) -> dict[str, float]:
    """Returns the PageRank score of every node.

    Each undirected edge is followed in both directions. Power iteration stops
    once successive score vectors differ by less than `tol` in L1 norm; scores sum
    to 1.

    Examples:
        >>> g = cs.RelationGraph.from_edges([('A', 'B'), ('B', 'C'), ('A', 'C')])
        >>> {k: round(v, 6) for k, v in cs.pagerank(g).items()}
        {'A': 0.333333, 'B': 0.333333, 'C': 0.333333}
    """
    g = graph.to_networkx(_edge_filter(options))
    n = g.number_of_nodes()
    if n == 0:
        return {}
    # networkx compares the L1 change against `n * tol`
    scores = nx.pagerank(g, alpha=damping, tol=tol / n, max_iter=100_000, weight=None)
    total = sum(scores.values())
    return {node: scores[node] / total for node in sorted(scores)}


def graph_stats(
    graph: RelationGraph,
    options: GraphOptions = GraphOptions(),  # noqa: B008
) -> GraphStats:
    """Compute every connectivity statistic and characteristic of a graph.

    Args:
        graph: Relation graph.
        options: Analysis options; `options.include_embed` selects the edge types.

    Returns:
        The graph statistics.

    Examples:
        >>> g = cs.RelationGraph.from_edges([('A', 'B'), ('B', 'C'), ('C', 'D')])
        >>> stats = cs.graph_stats(g)
        >>> stats.diameter, round(stats.avg_path_length, 3)
        (3, 1.667)
    """
    edge_filter = _edge_filter(options)
    components = connected_components(graph, edge_filter)
    g = _partition_graph(graph, edge_filter)

    diameter, avg_path_length = 0, 0.0
    if len(components) > 0 and len(components[0]) >= 2:
        largest = g.subgraph(components[0])
        diameter = nx.diameter(largest)
        avg_path_length = nx.average_shortest_path_length(largest)

    degrees = [d for _, d in g.degree()]
    communities = detect_communities(graph, options.community_seed, options)
    stats = GraphStats(
        measurement_id=graph.measurement_id,
        node_count=len(graph.nodes),
        isolated_count=len(graph.nodes) - g.number_of_nodes(),
        component_count=len(components),
        largest_component_size=len(components[0]) if len(components) > 0 else 0,
        median_component_size=(
            float(np.median([len(c) for c in components])) if components else 0.0
        ),
        algebraic_connectivity=algebraic_connectivity(graph, options),
        diameter=diameter,
        mean_degree=float(np.mean(degrees)) if degrees else 0.0,
        median_degree=float(np.median(degrees)) if degrees else 0.0,
        modularity=modularity(graph, communities, options),
        avg_clustering_coefficient=(
            float(nx.average_clustering(g)) if g.number_of_nodes() > 0 else 0.0
        ),
        avg_path_length=float(avg_path_length),
        community_count=len(communities),
        sync_edge_count=len(graph.sync_edges),
        embed_edge_count=len(graph.embed_edges),
    )
    logger.info(
        'measurement %r: %d nodes, %d components',
        graph.measurement_id,
        stats.node_count,
        stats.component_count,
    )
    return stats


def percent_change(before: float, after: float, digits: int | None = 2) -> float:
    """Returns the relative change from `before` to `after` in percent.

    The result is rounded half-up to `digits` decimals, or left unrounded if
    `digits` is `None`.

    Raises:
        UndefinedChangeError: If `before` is zero.

    Examples:
        >>> cs.percent_change(59, 38)
        -35.59
        >>> cs.percent_change(0.1187, 0.1494)
        25.86
    """
    if before == 0:
        raise UndefinedChangeError(
            'The relative change from a zero value is undefined.'
        )
    if digits is None:
        return 100.0 * (after - before) / before
    # decimal arithmetic so that printed ties round half-up exactly
    change = Decimal(100) * (Decimal(str(after)) - Decimal(str(before))) / Decimal(
        str(before)
    )
    quantum = Decimal(1).scaleb(-digits)
    return float(change.quantize(quantum, rounding=ROUND_HALF_UP))
