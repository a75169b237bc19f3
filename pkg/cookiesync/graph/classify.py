from __future__ import annotations

from collections import Counter
from collections.abc import Iterable, Sequence
from typing import NamedTuple

import networkx as nx

from ..errors import UndefinedChangeError
from .metrics import percent_change
from .relation_graph import RelationGraph

__all__ = [
    'LABELS',
    'NodeClassification',
    'PartnerChange',
    'LabelSummary',
    'classify_nodes',
    'partner_changes',
    'label_summary',
]

LABELS = ('central', 'outer', 'balanced', 'isolated')

# a node is central (outer) with this many times more direct (indirect) partners
_RATIO = 4


class NodeClassification(NamedTuple):
    """Position of a company in the sync graph.

    Attributes:
        company: Company name.
        direct_partners: Number of sync-adjacent companies.
        indirect_partners: Number of companies reachable through sync edges at
            distance 2 or more.
        label: `central`, `outer`, `balanced` or `isolated`.
    """

    company: str
    direct_partners: int
    indirect_partners: int
    label: str


def _label(direct: int, indirect: int) -> str:
    if direct == 0:
        return 'isolated'
    if direct >= _RATIO * indirect:
        return 'central'
    if indirect >= _RATIO * direct:
        return 'outer'
    return 'balanced'


def classify_nodes(graph: RelationGraph) -> list[NodeClassification]:
    """Classify every node by its ratio of direct to indirect sync partners.

    A node is `central` if it has at least four times more direct than indirect
    partners, `outer` if it has at least four times more indirect than direct
    partners, `balanced` otherwise, and `isolated` without any sync partner. A
    node with direct partners only is central.

    Returns:
        One classification per node, in node order.

    Examples:
        >>> star = cs.RelationGraph.from_edges([('Hub', f'L{i}') for i in range(5)])
        >>> [(c.company, c.label) for c in cs.classify_nodes(star)][:2]
        [('Hub', 'central'), ('L0', 'outer')]
    """
    g = graph.to_networkx('sync')
    component_size = {}
    for component in nx.connected_components(g):
        for node in component:
            component_size[node] = len(component)

    classifications = []
    for node in graph.nodes:
        direct = g.degree(node)
        indirect = component_size[node] - direct - 1
        classifications.append(
            NodeClassification(node, direct, indirect, _label(direct, indirect))
        )
    return classifications


class PartnerChange(NamedTuple):
    company: str
    direct_before: int
    direct_after: int
    change: int
    percent: float | None


def partner_changes(
    before: RelationGraph, after: RelationGraph
) -> list[PartnerChange]:
    """Returns the change in direct sync partners of every company between two
    graphs.

    Companies missing from a graph have no partner in it. The percent change is
    `None` for companies without partner in `before`.

    Returns:
        Changes sorted by increasing absolute change, then by company, so that the
        largest decreases come first.
    """
    g_before, g_after = before.to_networkx('sync'), after.to_networkx('sync')
    changes = []
    for company in sorted(set(before.nodes) | set(after.nodes)):
        n_before = g_before.degree(company) if company in g_before else 0
        n_after = g_after.degree(company) if company in g_after else 0
        try:
            percent = percent_change(n_before, n_after)
        except UndefinedChangeError:
            percent = None
        changes.append(
            PartnerChange(company, n_before, n_after, n_after - n_before, percent)
        )
    return sorted(changes, key=lambda c: (c.change, c.company))


class LabelSummary(NamedTuple):
    """Label counts of a selection of companies and of the remaining ones."""

    selected: dict[str, int]
    remaining: dict[str, int]


def label_summary(
    classifications: Sequence[NodeClassification],
    companies: Iterable[str] | None = None,
) -> LabelSummary:
    """Count the classification labels.

    Args:
        classifications: Node classifications.
        companies: Companies to count in `selected`, all of them if `None`; the
            others are counted in `remaining`.

    Returns:
        Counts of every label, zero counts included.

    Examples:
        >>> star = cs.RelationGraph.from_edges([('Hub', f'L{i}') for i in range(5)])
        >>> cs.label_summary(cs.classify_nodes(star), ['Hub']).remaining
        {'central': 0, 'outer': 5, 'balanced': 0, 'isolated': 0}
    """
    selected = None if companies is None else set(companies)
    counts = {True: Counter(), False: Counter()}
    for c in classifications:
        counts[selected is None or c.company in selected][c.label] += 1
    return LabelSummary(
        {label: counts[True][label] for label in LABELS},
        {label: counts[False][label] for label in LABELS},
    )
