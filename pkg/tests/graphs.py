from __future__ import annotations

import math
from typing import NamedTuple

import cookiesync as cs


class AnalyticGraph(NamedTuple):
    """A small connected graph with known spectrum and distances."""

    name: str
    edges: tuple[tuple[str, str], ...]
    algebraic_connectivity: float
    diameter: int
    avg_path_length: float

    def graph(self) -> cs.RelationGraph:
        return cs.RelationGraph.from_edges(self.edges, measurement_id=self.name)


def _path(n: int) -> tuple[tuple[str, str], ...]:
    return tuple((f'N{i}', f'N{i + 1}') for i in range(n - 1))


def _star(leaves: int) -> tuple[tuple[str, str], ...]:
    return tuple(('Hub', f'L{i}') for i in range(leaves))


# Laplacian of the path P_n has eigenvalues 2 - 2 cos(k pi / n), the star S_n has
# eigenvalues 0, 1 (n - 2 times) and n, the complete graph K_n has 0 and n
K2 = AnalyticGraph('K2', (('A', 'B'),), 2.0, 1, 1.0)
K3 = AnalyticGraph('K3', (('A', 'B'), ('B', 'C'), ('A', 'C')), 3.0, 1, 1.0)
P3 = AnalyticGraph('P3', _path(3), 1.0, 2, 4 / 3)
P4 = AnalyticGraph('P4', _path(4), 2 - math.sqrt(2), 3, 10 / 6)
S4 = AnalyticGraph('S4', _star(3), 1.0, 2, 9 / 6)
S5 = AnalyticGraph('S5', _star(4), 1.0, 2, 16 / 10)

ANALYTIC_GRAPHS = (K2, K3, P3, P4, S4, S5)

# two disjoint triangles, the split into both triangles has modularity 1/2
TWO_TRIANGLES = (
    ('A', 'B'),
    ('B', 'C'),
    ('A', 'C'),
    ('D', 'E'),
    ('E', 'F'),
    ('D', 'F'),
)
