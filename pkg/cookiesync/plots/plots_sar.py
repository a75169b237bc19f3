from __future__ import annotations

from collections.abc import Mapping, Sequence

import numpy as np
from matplotlib.axes import Axes

from ..sar import OUTCOMES, RESPONSE_TYPES, ClusterPoint
from .utils import (
    integer_ticks,
    mark_dates,
    optional_ax,
    outcome_colors,
    response_colors,
)

__all__ = ['plot_response_timeline', 'plot_workload']


@optional_ax
def plot_response_timeline(
    timeline: Mapping[int, Mapping[str, int]],
    *,
    ax: Axes = None,
    deadline_weeks: Sequence[float] = (),
):
    """Plot the number of replies per week as stacked bars by response type.

    Args:
        timeline: Map from week to the count of each response type, as returned
            by `response_timeline`.
        ax: Axes to plot on, a new figure is created if `None`.
        deadline_weeks: Positions of the deadline markers, in weeks.

    Examples:
        >>> timeline = {1: {'automatic': 5, 'mixed': 1, 'human': 9}, 2: {'human': 4}}
        >>> cs.plot_response_timeline(timeline, deadline_weeks=[4.3, 6.0])
        >>> renderfig('plot_response_timeline')

        ![plot_response_timeline](/figs-code/plot_response_timeline.png){.fig}
    """
    weeks = np.array(sorted(timeline))
    bottom = np.zeros(len(weeks))
    for response_type in RESPONSE_TYPES:
        counts = np.array([timeline[w].get(response_type, 0) for w in weeks])
        ax.bar(
            weeks,
            counts,
            bottom=bottom,
            color=response_colors[response_type],
            label=response_type,
        )
        bottom += counts

    mark_dates(ax, list(deadline_weeks), label='deadlines')
    integer_ticks(ax.xaxis)
    ax.set(xlabel='week after request', ylabel='responses')
    ax.legend()


@optional_ax
def plot_workload(
    clusters: Sequence[ClusterPoint],
    *,
    ax: Axes = None,
    deadline_days: Sequence[float] = (),
    marker_scale: float = 40.0,
):
    """Plot clustered (response day, workload score) points by outcome.

    The marker area of a cluster is proportional to the number of merged cases.

    Args:
        clusters: Clusters, as returned by `cluster_points`.
        ax: Axes to plot on, a new figure is created if `None`.
        deadline_days: Positions of the deadline markers, in days after request.
        marker_scale: Marker area of a single case.
    """
    for outcome in OUTCOMES:
        points = [c for c in clusters if c.outcome == outcome]
        if len(points) == 0:
            continue
        ax.scatter(
            [c.day for c in points],
            [c.score for c in points],
            s=[marker_scale * c.size for c in points],
            color=outcome_colors[outcome],
            alpha=0.8,
            label=outcome.replace('_', ' '),
        )

    mark_dates(ax, list(deadline_days), label='deadlines')
    ax.set(xlabel='days after request', ylabel='workload score')
    ax.legend()
