from __future__ import annotations

import numpy as np
from matplotlib.axes import Axes

from ..longitudinal import MetricSeries, trend_pair
from .utils import colors, integer_ticks, optional_ax

__all__ = ['plot_trend']


@optional_ax
def plot_trend(
    series: MetricSeries,
    *,
    ax: Axes = None,
    x: str = 'ordinal',
    color: str = colors['blue'],
    ylabel: str | None = None,
):
    """Plot a metric series with its linear trends.

    Points taken before the regulation are drawn in grey. The dotted grey line is
    the fit including them, the dashed black line the fit excluding them.

    Args:
        series: Metric series.
        ax: Axes to plot on, a new figure is created if `None`.
        x: Abscissa, `ordinal` or `calendar_week`.
        color: Color of the post-regulation points.
        ylabel: Label of the y axis, the metric name if `None`.

    Examples:
        >>> points = ((1, 12.0), (2, 10.0), (3, 9.5), (4, 9.0), (5, 8.0))
        >>> s = cs.MetricSeries('node_count', points, frozenset({1}))
        >>> cs.plot_trend(s)
        >>> renderfig('plot_trend')

        ![plot_trend](/figs-code/plot_trend.png){.fig}
    """
    xs, ys = series.xy(x)
    pre = np.array([o in series.pre_gdpr_ordinals for o, _ in series.points])

    ax.scatter(xs[~pre], ys[~pre], color=color, zorder=3)
    ax.scatter(xs[pre], ys[pre], color=colors['grey'], zorder=3)

    fits = trend_pair(series, x)
    grid = np.linspace(xs.min(), xs.max(), 2)
    for fit, style, line_color, label in (
        (fits.with_pre_gdpr, ':', colors['grey'], 'incl. pre-GDPR'),
        (fits.without_pre_gdpr, '--', colors['black'], 'excl. pre-GDPR'),
    ):
        ax.plot(
            grid,
            fit.slope * grid + fit.intercept,
            linestyle=style,
            color=line_color,
            label=f'{label} (p={fit.p_value:.2g})',
        )

    integer_ticks(ax.xaxis)
    ax.set(
        xlabel='measurement' if x == 'ordinal' else 'calendar week',
        ylabel=series.metric_name if ylabel is None else ylabel,
    )
    ax.legend()
