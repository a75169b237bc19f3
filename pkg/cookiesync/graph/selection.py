from __future__ import annotations

from collections import Counter
from typing import NamedTuple

from .relation_graph import RelationGraph

__all__ = ['CompanyShare', 'AnalysisCorpus', 'company_shares', 'select_analysis_corpus']


class CompanyShare(NamedTuple):
    """Prevalence of a company in one measurement.

    Attributes:
        company: Company name.
        embed_share: Share of visited sites embedding the company.
        sync_share: Share of sync edges touching the company.
    """

    company: str
    embed_share: float
    sync_share: float


class AnalysisCorpus(NamedTuple):
    """Companies selected for a detailed analysis.

    Attributes:
        companies: Union of the most embedded and the most syncing companies.
        embed_left_out: Embed share of the best company left out of the embed
            ranking.
        sync_left_out: Sync share of the best company left out of the sync ranking.
    """

    companies: tuple[str, ...]
    embed_left_out: float
    sync_left_out: float


def company_shares(graph: RelationGraph) -> list[CompanyShare]:
    """Returns the embed and sync share of every node, in node order.

    Examples:
        >>> g = cs.RelationGraph.from_edges([('A', 'B'), ('A', 'C')])
        >>> cs.company_shares(g)[0]
        CompanyShare(company='A', embed_share=0.0, sync_share=1.0)
    """
    degrees = Counter(n for edge in graph.sync_edges for n in edge)
    n_sync = len(graph.sync_edges)
    return [
        CompanyShare(
            company,
            graph.embedded_by.get(company, 0) / graph.site_count
            if graph.site_count > 0
            else 0.0,
            degrees[company] / n_sync if n_sync > 0 else 0.0,
        )
        for company in graph.nodes
    ]


def _top(shares: list[tuple[float, str]], k: int) -> tuple[list[str], float]:
    # ranking by decreasing share, ties by company name; zero shares never qualify
    ranked = sorted((s for s in shares if s[0] > 0), key=lambda s: (-s[0], s[1]))
    left_out = ranked[k][0] if len(ranked) > k else 0.0
    return [company for _, company in ranked[:k]], left_out


def select_analysis_corpus(
    graph: RelationGraph, top_embed: int = 25, top_sync: int = 25
) -> AnalysisCorpus:
    """Select the most embedded and the most syncing companies of a graph.

    Args:
        graph: Relation graph.
        top_embed: Number of companies selected by embed share.
        top_sync: Number of companies selected by sync share.

    Returns:
        The selected companies, sorted, with the share of the best company left
        out of each ranking.
    """
    if top_embed < 0 or top_sync < 0:
        raise ValueError(
            'Arguments `top_embed` and `top_sync` must be nonnegative, but are'
            f' {top_embed} and {top_sync}.'
        )
    shares = company_shares(graph)
    embed, embed_left_out = _top(
        [(s.embed_share, s.company) for s in shares], top_embed
    )
    sync, sync_left_out = _top([(s.sync_share, s.company) for s in shares], top_sync)
    companies = tuple(sorted(set(embed) | set(sync)))
    return AnalysisCorpus(companies, embed_left_out, sync_left_out)
