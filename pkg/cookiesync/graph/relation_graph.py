from __future__ import annotations

from collections import defaultdict
from collections.abc import Iterable
from typing import NamedTuple

import equinox as eqx
import networkx as nx

from ..companies import CompanyDb, company_resolver
from ..log_model import RequestRecord
from ..sync import SyncEvent

__all__ = [
    'EmbedObservation',
    'RelationGraph',
    'embed_observations',
    'observed_companies',
    'build_graph',
    'connected_components',
    'EDGE_FILTERS',
]

EDGE_FILTERS = ('sync', 'embed', 'all')


class EmbedObservation(NamedTuple):
    """A website loading an object from a third-party company."""

    site_company: str
    third_party_company: str
    profile_id: str
    site: str


def _pair(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


class RelationGraph(eqx.Module):
    """Undirected company-level relation graph of one measurement.

    Attributes:
        measurement_id _(str)_: Measurement the graph was built from.
        nodes _(tuple of str)_: Sorted company names, isolated ones included.
        sync_edges _(dict)_: Map from sorted company pair to the number of distinct
            `(profile, identifier)` occurrences syncing them.
        embed_edges _(dict)_: Map from sorted `(site company, third party)` pair to
            the number of distinct `(profile, site)` occurrences.
        embedded_by _(dict)_: Map from company to the number of distinct sites
            embedding it.
        site_count _(int)_: Number of distinct sites visited.
    """

    measurement_id: str
    nodes: tuple[str, ...]
    sync_edges: dict[tuple[str, str], int]
    embed_edges: dict[tuple[str, str], int]
    embedded_by: dict[str, int] = eqx.field(default_factory=dict)
    site_count: int = 0

    def __check_init__(self):
        nodes = set(self.nodes)
        for a, b in (*self.sync_edges, *self.embed_edges):
            if a == b:
                raise ValueError(f'Self-loop on node {a!r}.')
            if a not in nodes or b not in nodes:
                raise ValueError(f'Edge ({a!r}, {b!r}) has an unknown endpoint.')

    @classmethod
    def from_edges(
        cls,
        sync_edges: Iterable[tuple[str, str]] = (),
        embed_edges: Iterable[tuple[str, str]] = (),
        nodes: Iterable[str] = (),
        measurement_id: str = '',
    ) -> RelationGraph:
        """Build a graph from plain edge lists, every edge with weight 1.

        Examples:
            >>> g = cs.RelationGraph.from_edges([('A', 'B'), ('B', 'C')], nodes=['D'])
            >>> g.nodes, len(g.sync_edges)
            (('A', 'B', 'C', 'D'), 2)
        """
        sync = {_pair(a, b): 1 for a, b in sync_edges}
        embed = {_pair(a, b): 1 for a, b in embed_edges}
        all_nodes = set(nodes) | {n for edge in (*sync, *embed) for n in edge}
        return cls(measurement_id, tuple(sorted(all_nodes)), sync, embed)

    def edges(self, edge_filter: str = 'sync') -> list[tuple[str, str]]:
        if edge_filter not in EDGE_FILTERS:
            raise ValueError(
                f'Argument `edge_filter` must be one of {EDGE_FILTERS}, but is'
                f' {edge_filter!r}.'
            )
        edges = set()
        if edge_filter in ('sync', 'all'):
            edges.update(self.sync_edges)
        if edge_filter in ('embed', 'all'):
            edges.update(self.embed_edges)
        return sorted(edges)

    def to_networkx(
        self, edge_filter: str = 'sync', *, include_isolated: bool = True
    ) -> nx.Graph:
        """Returns the graph restricted to one edge type as a `networkx.Graph`.

        Nodes are inserted in sorted order. If `include_isolated` is `False`, nodes
        without any edge of the selected type are left out.
        """
        g = nx.Graph()
        edges = self.edges(edge_filter)
        if include_isolated:
            g.add_nodes_from(self.nodes)
        else:
            g.add_nodes_from(sorted({n for edge in edges for n in edge}))
        g.add_edges_from(edges)
        return g

    def isolated(self, edge_filter: str = 'sync') -> list[str]:
        connected = {n for edge in self.edges(edge_filter) for n in edge}
        return [n for n in self.nodes if n not in connected]

    def __str__(self) -> str:
        return (
            f'==== RelationGraph {self.measurement_id} ====\n'
            f'Nodes      : {len(self.nodes)}\n'
            f'Sync edges : {len(self.sync_edges)}\n'
            f'Embed edges: {len(self.embed_edges)}'
        )


def embed_observations(
    requests: Iterable[RequestRecord], db: CompanyDb
) -> list[EmbedObservation]:
    """Returns the sorted distinct embed observations of a request stream: requests
    whose host company differs from the company of the page under visit.
    """
    resolve = company_resolver(db)
    observations = set()
    for request in requests:
        site_company = resolve(request.top_level_site)
        third_party = resolve(request.host)
        if site_company != third_party:
            observations.add(
                EmbedObservation(
                    site_company,
                    third_party,
                    request.profile_id,
                    request.top_level_site,
                )
            )
    return sorted(observations)


def observed_companies(requests: Iterable[RequestRecord], db: CompanyDb) -> set[str]:
    """Returns the companies of every request host and every page under visit."""
    resolve = company_resolver(db)
    companies = set()
    for request in requests:
        companies.add(resolve(request.host))
        companies.add(resolve(request.top_level_site))
    return companies


def build_graph(
    measurement_id: str,
    sync_events: Iterable[SyncEvent],
    embed_observations: Iterable[EmbedObservation],
    observed: Iterable[str] = (),
) -> RelationGraph:
    """Build the relation graph of one measurement.

    Sync edges join the sender and receiver of every sync event, whatever its
    direction, weighted by distinct `(profile, identifier)` occurrences. Embed edges
    join the company of a visited site and the third party it embeds, weighted by
    distinct `(profile, site)` occurrences.

    Args:
        measurement_id: Measurement of the events and observations.
        sync_events: Sync events.
        embed_observations: Embed observations.
        observed: Further companies observed, kept as isolated nodes if no edge
            reaches them.

    Returns:
        The relation graph.

    Examples:
        >>> uid = cs.UserId('a.example', 'uid', '9f3c2a7be41d0c55', 'P1', 'M1')
        >>> e1 = cs.SyncEvent('M1', 'P1', 'A', 'B', uid, 'query_param', 3)
        >>> e2 = cs.SyncEvent('M1', 'P1', 'B', 'A', uid, 'referrer', 4)
        >>> cs.build_graph('M1', [e1, e2], []).sync_edges
        {('A', 'B'): 1}
    """
    sync = defaultdict(set)
    for event in sync_events:
        if event.sender_company == event.receiver_company:
            continue
        pair = _pair(event.sender_company, event.receiver_company)
        sync[pair].add((event.profile_id, event.id.value))

    embed = defaultdict(set)
    sites_by_company = defaultdict(set)
    sites = set()
    for obs in embed_observations:
        embed[_pair(obs.site_company, obs.third_party_company)].add(
            (obs.profile_id, obs.site)
        )
        sites_by_company[obs.third_party_company].add(obs.site)
        sites.add(obs.site)

    nodes = set(observed) | {n for pair in (*sync, *embed) for n in pair}
    return RelationGraph(
        measurement_id,
        tuple(sorted(nodes)),
        {pair: len(v) for pair, v in sorted(sync.items())},
        {pair: len(v) for pair, v in sorted(embed.items())},
        {c: len(s) for c, s in sorted(sites_by_company.items())},
        len(sites),
    )


def connected_components(
    graph: RelationGraph, edge_filter: str = 'sync', *, include_isolated: bool = False
) -> list[frozenset[str]]:
    """Returns the connected components of the graph restricted to one edge type.

    Isolated nodes are not components unless `include_isolated` is `True`, in
    which case each of them is a singleton component. Components are sorted by
    decreasing size, then by their smallest member.

    Examples:
        >>> g = cs.RelationGraph.from_edges([('A', 'B'), ('C', 'D')])
        >>> [sorted(c) for c in cs.connected_components(g)]
        [['A', 'B'], ['C', 'D']]
    """
    g = graph.to_networkx(edge_filter, include_isolated=include_isolated)
    components = [frozenset(c) for c in nx.connected_components(g)]
    return sorted(components, key=lambda c: (-len(c), min(c)))
