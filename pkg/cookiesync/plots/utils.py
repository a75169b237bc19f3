from __future__ import annotations

from collections.abc import Iterator
from functools import wraps
from math import ceil

from cycler import cycler
from matplotlib import pyplot as plt
from matplotlib.axes import Axes
from matplotlib.axis import Axis
from matplotlib.figure import Figure
from matplotlib.ticker import MultipleLocator

__all__ = [
    'figax',
    'optional_ax',
    'gridplot',
    'mplstyle',
    'colors',
    'response_colors',
    'outcome_colors',
    'integer_ticks',
    'mark_dates',
]


def figax(w: float = 7.0, h: float | None = None, **kwargs) -> tuple[Figure, Axes]:
    """Returns a figure with a single axes of given width and height."""
    if h is None:
        h = w / 1.6
    return plt.subplots(1, 1, figsize=(w, h), constrained_layout=True, **kwargs)


def optional_ax(func):  # noqa: ANN201, ANN001
    """Decorator creating the `Axes` passed to a plot function when the caller
    passes none.

    The decorated function accepts the extra keyword arguments `w` and `h`, the
    size of the created figure.
    """

    @wraps(func)
    def wrapper(  # noqa: ANN202
        *args, ax: Axes | None = None, w: float = 7.0, h: float | None = None, **kwargs
    ):
        if ax is None:
            _, ax = figax(w=w, h=h)
        return func(*args, ax=ax, **kwargs)

    return wrapper


def gridplot(
    n: int, nrows: int = 1, *, w: float = 4.0, h: float | None = None, **kwargs
) -> tuple[Figure, Iterator[Axes]]:
    """Returns a figure and an iterator over the first `n` axes of its grid, the
    unused cells of the last row being removed.

    Examples:
        >>> fig, axs = cs.gridplot(4, 2, w=4.0, h=3.0)
        >>> for metric in ['node_count', 'sync_edge_count']:
        ...     ax = next(axs)
    """
    h = w if h is None else h
    ncols = ceil(n / nrows)
    fig, axs = plt.subplots(
        nrows,
        ncols,
        figsize=(w * ncols, h * nrows),
        constrained_layout=True,
        squeeze=False,
        **kwargs,
    )
    axs = axs.flatten()
    for ax in axs[n:]:
        ax.remove()
    return fig, iter(axs[:n])


colors = {
    'blue': '#0c5dA5',
    'red': '#ff6b6b',
    'turquoise': '#2ec4b6',
    'yellow': '#ffc463',
    'grey': '#9e9e9e',
    'purple': '#845b97',
    'black': '#222222',
    'darkgrey': '#666666',
}

# colors of the response types and of the request outcomes
response_colors = {
    'automatic': colors['grey'],
    'mixed': colors['yellow'],
    'human': colors['blue'],
}
outcome_colors = {
    'got_access': colors['turquoise'],
    'no_data_stored': colors['blue'],
    'access_denied': colors['red'],
    'in_process': colors['yellow'],
    'no_response': colors['darkgrey'],
}


def mplstyle(*, usetex: bool = False):
    """Set the Matplotlib style of the report figures."""
    plt.rcParams.update(
        {
            'xtick.direction': 'in',
            'xtick.major.size': 4.5,
            'xtick.minor.size': 2.5,
            'xtick.labelsize': 11,
            'ytick.direction': 'in',
            'ytick.major.size': 4.5,
            'ytick.minor.size': 2.5,
            'ytick.labelsize': 11,
            'axes.grid': True,
            'axes.labelsize': 12,
            'axes.prop_cycle': cycler('color', colors.values()),
            'grid.linestyle': '--',
            'grid.alpha': 0.3,
            'legend.frameon': False,
            'legend.fontsize': 11,
            'figure.dpi': 72,
            'savefig.facecolor': 'white',
            'text.usetex': usetex,
            'font.family': 'serif',
            'mathtext.fontset': 'stix',
        }
    )


def integer_ticks(axis: Axis):
    # major ticks on integers chosen by matplotlib, minor ticks on every integer
    axis.get_major_locator().set_params(integer=True)
    axis.set_minor_locator(MultipleLocator(1))
    axis.set_major_formatter(lambda x, _: f'{int(x)}')


def mark_dates(ax: Axes, days: list[float], label: str | None = None):
    """Draw dotted grey vertical lines at the given x positions."""
    for i, day in enumerate(days):
        ax.axvline(
            day,
            color=colors['grey'],
            linestyle=':',
            linewidth=1.5,
            label=label if i == 0 else None,
        )
