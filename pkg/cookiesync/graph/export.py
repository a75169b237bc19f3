from __future__ import annotations

import csv
import io
import json
from collections.abc import Sequence
from typing import Any

from .._utils import canonical_json
from ..errors import ArtifactError, UndefinedChangeError
from .metrics import GraphStats, percent_change
from .relation_graph import RelationGraph

__all__ = [
    'export_dot',
    'export_json',
    'graph_to_dict',
    'graph_from_dict',
    'load_graph_json',
    'export_stats_csv',
    'export_components_csv',
]


def _quote(text: str) -> str:
    escaped = text.replace('\\', '\\\\').replace('"', '\\"')
    return f'"{escaped}"'


def export_dot(graph: RelationGraph) -> str:
    """Returns the graph in the Graphviz DOT language.

    Every edge carries its `type` (`sync` or `embed`) and `weight` attributes; a
    pair related in both ways appears once per type.

    Examples:
        >>> print(cs.export_dot(cs.RelationGraph.from_edges([('A', 'B')])), end='')
        graph "" {
          "A";
          "B";
          "A" -- "B" [type="sync", weight=1];
        }
    """
    lines = [f'graph {_quote(graph.measurement_id)} {{']
    lines += [f'  {_quote(node)};' for node in graph.nodes]
    edges = [(pair, 'sync', w) for pair, w in graph.sync_edges.items()]
    edges += [(pair, 'embed', w) for pair, w in graph.embed_edges.items()]
    for (a, b), edge_type, weight in sorted(edges):
        lines.append(
            f'  {_quote(a)} -- {_quote(b)} [type="{edge_type}", weight={weight}];'
        )
    lines.append('}')
    return '\n'.join(lines) + '\n'


def graph_to_dict(graph: RelationGraph) -> dict[str, Any]:
    return {
        'measurement_id': graph.measurement_id,
        'nodes': list(graph.nodes),
        'sync_edges': [[a, b, w] for (a, b), w in graph.sync_edges.items()],
        'embed_edges': [[a, b, w] for (a, b), w in graph.embed_edges.items()],
        'embedded_by': dict(graph.embedded_by),
        'site_count': graph.site_count,
    }


def graph_from_dict(obj: dict[str, Any]) -> RelationGraph:
    try:
        return RelationGraph(
            str(obj['measurement_id']),
            tuple(sorted(obj['nodes'])),
            {(a, b): int(w) for a, b, w in sorted(obj['sync_edges'])},
            {(a, b): int(w) for a, b, w in sorted(obj['embed_edges'])},
            {str(k): int(v) for k, v in sorted(obj.get('embedded_by', {}).items())},
            int(obj.get('site_count', 0)),
        )
    except (AttributeError, KeyError, TypeError, ValueError) as e:
        raise ArtifactError(f'Malformed graph object: {e!r}.') from e


def export_json(graph: RelationGraph) -> str:
    """Returns the graph as canonical JSON adjacency: nodes and typed weighted
    edge lists.
    """
    return canonical_json(graph_to_dict(graph)) + '\n'


def load_graph_json(data: bytes | str) -> RelationGraph:
    try:
        obj = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ArtifactError(f'Malformed graph JSON: {e}') from e
    return graph_from_dict(obj)


# === CSV tables


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return f'{value:.6f}'
    return str(value)


def _csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    writer.writerows([[_fmt(v) for v in row] for row in rows])
    return buffer.getvalue()


def export_stats_csv(stats: Sequence[GraphStats]) -> str:
    """Returns the graph characteristics of every measurement as CSV, one row per
    measurement and one column per `GraphStats` field.
    """
    return _csv(GraphStats._fields, stats)


def _change(before: float, after: float) -> str:
    try:
        return f'{percent_change(before, after):.2f}'
    except UndefinedChangeError:
        return ''


def export_components_csv(stats: Sequence[GraphStats]) -> str:
    """Returns the connected-components overview of a measurement series as CSV.

    Each row holds the component count, the largest component size and the
    algebraic connectivity of one measurement, each followed by its percent change
    relative to the first measurement. Changes are empty on the first row and
    wherever the first value is zero.

    Examples:
        >>> s1 = cs.GraphStats('M1', 0, 0, 59, 429, 0, 0.1187, *[0] * 9)
        >>> s2 = cs.GraphStats('M2', 0, 0, 38, 296, 0, 0.1494, *[0] * 9)
        >>> print(cs.export_components_csv([s1, s2]), end='')
        measurement_id,components,components_change,largest_component,largest_component_change,algebraic_connectivity,algebraic_connectivity_change
        M1,59,,429,,0.118700,
        M2,38,-35.59,296,-31.00,0.149400,25.86
    """  # noqa: E501
    header = (
        'measurement_id',
        'components',
        'components_change',
        'largest_component',
        'largest_component_change',
        'algebraic_connectivity',
        'algebraic_connectivity_change',
    )
    rows = []
    for i, s in enumerate(stats):
        first = stats[0]
        rows.append(
            (
                s.measurement_id,
                s.component_count,
                '' if i == 0 else _change(first.component_count, s.component_count),
                s.largest_component_size,
                ''
                if i == 0
                else _change(first.largest_component_size, s.largest_component_size),
                s.algebraic_connectivity,
                ''
                if i == 0
                else _change(first.algebraic_connectivity, s.algebraic_connectivity),
            )
        )
    return _csv(header, rows)
