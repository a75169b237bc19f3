from __future__ import annotations

import csv
import io
import logging
import re
from collections import defaultdict
from collections.abc import Mapping, Sequence
from typing import Any, NamedTuple

import equinox as eqx
import numpy as np
from scipy import stats as sps

from .errors import ArtifactError, RegressionError
from .graph import GraphStats
from .log_model import Measurement

__all__ = [
    'MetricSeries',
    'RegressionResult',
    'TrendPair',
    'ols_fit',
    'trend_pair',
    'read_series_csv',
    'trend_report',
]

logger = logging.getLogger(__name__)

X_AXES = ('ordinal', 'calendar_week')

# residual to total sum of squares ratio below which a fit is exact
_EXACT_FIT_RTOL = 1e-20

_WEEK_RE = re.compile(r'CW\s*(\d{1,2})', re.IGNORECASE)


def _calendar_week(label: str) -> int:
    match = _WEEK_RE.search(label)
    if match is None:
        raise ValueError(f'No calendar week `CWnn` in week label {label!r}.')
    return int(match.group(1))


class MetricSeries(eqx.Module):
    """Values of one metric across a measurement series.

    Attributes:
        metric_name _(str)_: Name of the metric, e.g. `node_count`.
        points _(tuple)_: `(ordinal, value)` pairs with strictly increasing
            ordinals.
        pre_gdpr_ordinals _(frozenset of int)_: Ordinals of the measurements taken
            before the regulation took effect.
        week_labels _(tuple of str)_: Calendar week label of each point (e.g.
            `CW21`), empty if unknown.
    """

    metric_name: str
    points: tuple[tuple[int, float], ...]
    pre_gdpr_ordinals: frozenset[int] = frozenset()
    week_labels: tuple[str, ...] = ()

    def __check_init__(self):
        ordinals = [p[0] for p in self.points]
        if any(b <= a for a, b in zip(ordinals, ordinals[1:])):
            raise ValueError(
                f'Ordinals of series {self.metric_name!r} must be strictly increasing,'
                f' but are {ordinals}.'
            )
        if len(self.week_labels) not in (0, len(self.points)):
            raise ValueError(
                'Argument `week_labels` must be empty or have one label per point.'
            )

    @classmethod
    def from_graph_stats(
        cls,
        measurements: Sequence[Measurement],
        stats: Sequence[GraphStats],
        metric: str,
    ) -> MetricSeries:
        """Build the series of one `GraphStats` field.

        Args:
            measurements: Measurements of the series, in any order.
            stats: Graph statistics, matched to the measurements by id.
            metric: Name of a `GraphStats` field.
        """
        if metric not in GraphStats._fields or metric == 'measurement_id':
            raise ValueError(f'Unknown graph metric {metric!r}.')
        by_id = {s.measurement_id: s for s in stats}
        measurements = sorted(measurements, key=lambda m: m.ordinal)
        missing = [m.id for m in measurements if m.id not in by_id]
        if len(missing) > 0:
            raise ValueError(f'No graph statistics for measurements {missing}.')
        return cls(
            metric,
            tuple(
                (m.ordinal, float(getattr(by_id[m.id], metric))) for m in measurements
            ),
            frozenset(m.ordinal for m in measurements if m.pre_gdpr),
            tuple(m.week_label for m in measurements),
        )

    def xy(
        self, x: str = 'ordinal', *, include_pre_gdpr: bool = True
    ) -> tuple[np.ndarray, np.ndarray]:
        """Returns the x and y coordinates of the series as float arrays."""
        if x not in X_AXES:
            raise ValueError(f'Argument `x` must be one of {X_AXES}, but is {x!r}.')
        if x == 'calendar_week' and len(self.week_labels) == 0:
            raise ValueError(f'Series {self.metric_name!r} has no week labels.')
        xs, ys = [], []
        for i, (ordinal, value) in enumerate(self.points):
            if not include_pre_gdpr and ordinal in self.pre_gdpr_ordinals:
                continue
            xs.append(
                ordinal if x == 'ordinal' else _calendar_week(self.week_labels[i])
            )
            ys.append(value)
        return np.asarray(xs, dtype=np.float64), np.asarray(ys, dtype=np.float64)


class RegressionResult(NamedTuple):
    """Ordinary least-squares fit of a series.

    Attributes:
        slope: Fitted slope.
        intercept: Fitted intercept.
        p_value: Two-sided p-value of the slope under a Student t distribution
            with `n - 2` degrees of freedom.
        n: Number of points.
        included_pre_gdpr: Whether the pre-regulation points were fitted.
        stderr: Standard error of the slope.
    """

    slope: float
    intercept: float
    p_value: float
    n: int
    included_pre_gdpr: bool = True
    stderr: float = 0.0


def ols_fit(
    x: Sequence[float] | np.ndarray,
    y: Sequence[float] | np.ndarray,
    *,
    included_pre_gdpr: bool = True,
) -> RegressionResult:
    r"""Fit a line by ordinary least squares and test its slope.

    The p-value is the two-sided tail probability of $t = \hat\beta / SE(\hat\beta)$
    under a Student t distribution with $n - 2$ degrees of freedom. A flat series
    has p-value 1. Exact fits, whose residual sum of squares is below `1e-20`
    times the total sum of squares of `y`, have p-value 0.

    Args:
        x: Abscissas.
        y: Ordinates.
        included_pre_gdpr: Recorded in the result.

    Returns:
        The fit.

    Raises:
        RegressionError: If there are less than 3 points or all abscissas are
            equal.

    Examples:
        >>> fit = cs.ols_fit([1, 2, 3], [1, 2, 3])
        >>> fit.slope, fit.intercept, fit.p_value
        (1.0, 0.0, 0.0)
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(
            f'Arguments `x` and `y` must be 1-D with equal lengths, but have shapes'
            f' {x.shape} and {y.shape}.'
        )
    n = len(x)
    if n < 3:
        raise RegressionError(f'A regression needs at least 3 points, but got {n}.')
    if np.ptp(x) == 0:
        raise RegressionError('A regression needs at least two distinct x values.')

    res = sps.linregress(x, y)
    slope, intercept = float(res.slope), float(res.intercept)
    if np.ptp(y) == 0:
        return RegressionResult(slope, intercept, 1.0, n, included_pre_gdpr, 0.0)
    residuals = y - (slope * x + intercept)
    centered = y - y.mean()
    if residuals @ residuals <= _EXACT_FIT_RTOL * (centered @ centered):
        return RegressionResult(slope, intercept, 0.0, n, included_pre_gdpr, 0.0)
    return RegressionResult(
        slope,
        intercept,
        float(np.clip(res.pvalue, 0.0, 1.0)),
        n,
        included_pre_gdpr,
        float(res.stderr),
    )


class TrendPair(NamedTuple):
    with_pre_gdpr: RegressionResult
    without_pre_gdpr: RegressionResult

    @property
    def slope_difference(self) -> float:
        return self.with_pre_gdpr.slope - self.without_pre_gdpr.slope


def trend_pair(series: MetricSeries, x: str = 'ordinal') -> TrendPair:
    """Fit a series with and without its pre-regulation points.

    Args:
        series: Metric series.
        x: Abscissa, `ordinal` for measurement ordinals or `calendar_week` for the
            calendar week parsed from the week labels.

    Returns:
        Both fits.

    Raises:
        RegressionError: If either fit has less than 3 points.

    Examples:
        >>> points = ((1, 10.0), (2, 9.0), (3, 8.0), (4, 7.0))
        >>> s = cs.MetricSeries('nodes', points, frozenset({1}))
        >>> abs(cs.trend_pair(s).slope_difference) < 1e-9
        True
    """
    with_pre = ols_fit(*series.xy(x), included_pre_gdpr=True)
    without_pre = ols_fit(
        *series.xy(x, include_pre_gdpr=False), included_pre_gdpr=False
    )
    return TrendPair(with_pre, without_pre)


def read_series_csv(data: str) -> dict[str, MetricSeries]:
    """Read metric series from CSV text.

    The header must hold the `metric`, `ordinal` and `value` columns, and may
    hold `pre_gdpr` (`1`/`true` for pre-regulation points) and `week_label`.

    Returns:
        Map from metric name to its series, points sorted by ordinal.
    """
    reader = csv.DictReader(io.StringIO(data))
    required = {'metric', 'ordinal', 'value'}
    if reader.fieldnames is None or not required <= set(reader.fieldnames):
        raise ArtifactError(f'A series CSV must have the columns {sorted(required)}.')

    rows = defaultdict(list)
    for lineno, row in enumerate(reader, start=2):
        try:
            pre = row.get('pre_gdpr') or ''
            rows[row['metric']].append(
                (
                    int(row['ordinal']),
                    float(row['value']),
                    pre.strip().lower() in ('1', 'true', 'yes'),
                    row.get('week_label') or '',
                )
            )
        except ValueError as e:
            raise ArtifactError(f'Malformed series row on line {lineno}: {e}') from e

    series = {}
    for metric, points in sorted(rows.items()):
        points.sort()
        labels = tuple(p[3] for p in points)
        series[metric] = MetricSeries(
            metric,
            tuple((p[0], p[1]) for p in points),
            frozenset(p[0] for p in points if p[2]),
            labels if all(len(label) > 0 for label in labels) else (),
        )
    return series


def trend_report(
    series: Mapping[str, MetricSeries], x: str = 'ordinal'
) -> dict[str, Any]:
    """Returns both fits of every series as a JSON-serializable object."""
    report = {}
    for metric, s in sorted(series.items()):
        pair = trend_pair(s, x)
        report[metric] = {
            'with_pre_gdpr': pair.with_pre_gdpr._asdict(),
            'without_pre_gdpr': pair.without_pre_gdpr._asdict(),
            'slope_difference': pair.slope_difference,
        }
        logger.info(
            '%s: slope %.4g with pre-GDPR points, %.4g without',
            metric,
            pair.with_pre_gdpr.slope,
            pair.without_pre_gdpr.slope,
        )
    return report
