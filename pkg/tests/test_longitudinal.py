import math

import numpy as np
import pytest
from scipy import stats as sps

import cookiesync as cs


def textbook_fit(x, y):
    n = len(x)
    x_mean, y_mean = x.mean(), y.mean()
    sxx = ((x - x_mean) ** 2).sum()
    slope = ((x - x_mean) * (y - y_mean)).sum() / sxx
    intercept = y_mean - slope * x_mean
    residuals = y - (slope * x + intercept)
    stderr = math.sqrt((residuals**2).sum() / (n - 2) / sxx)
    t = slope / stderr
    return slope, intercept, 2 * sps.t.sf(abs(t), df=n - 2)


def random_series(rng):
    n = int(rng.integers(5, 51))
    x = np.sort(rng.choice(np.arange(1, 200), size=n, replace=False)).astype(float)
    y = rng.normal(0.0, 5.0) * x + rng.normal(0.0, 30.0, size=n) + 100.0
    return x, y


@pytest.mark.parametrize('seed', range(100), ids=str)
def test_ols_fit_matches_textbook_formula(seed):
    x, y = random_series(np.random.default_rng(seed))
    slope, intercept, p_value = textbook_fit(x, y)
    fit = cs.ols_fit(x, y)
    assert fit.n == len(x)
    assert fit.slope == pytest.approx(slope, abs=1e-6)
    assert fit.intercept == pytest.approx(intercept, abs=1e-6)
    assert fit.p_value == pytest.approx(p_value, abs=1e-6)


class TestOlsFit:
    def test_exact_fit(self):
        fit = cs.ols_fit([1, 2, 3, 4], [3, 5, 7, 9])
        assert fit.slope == pytest.approx(2.0)
        assert fit.intercept == pytest.approx(1.0)
        assert fit.p_value == 0.0
        assert fit.stderr == 0.0

    def test_flat_series(self):
        fit = cs.ols_fit([1, 2, 3], [4, 4, 4])
        assert fit.slope == pytest.approx(0.0, abs=1e-12)
        assert fit.p_value == 1.0

    @pytest.mark.parametrize('scale', [1e-9, 1.0, 1e9], ids=['small', 'unit', 'large'])
    def test_scale_invariant(self, scale):
        x = [1, 2, 3, 4, 5]
        y = [2.0, 4.5, 5.5, 8.5, 9.0]
        reference = cs.ols_fit(x, y).p_value
        noisy = cs.ols_fit(x, [scale * v for v in y])
        assert noisy.p_value == pytest.approx(reference, rel=1e-6)
        exact = cs.ols_fit(x, [scale * (2 * v + 1) for v in x])
        assert exact.p_value == 0.0

    def test_too_few_points(self):
        with pytest.raises(cs.RegressionError):
            cs.ols_fit([1, 2], [1, 2])

    def test_constant_abscissa(self):
        with pytest.raises(cs.RegressionError):
            cs.ols_fit([2, 2, 2], [1, 2, 3])

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match='equal lengths'):
            cs.ols_fit([1, 2, 3], [1, 2])


def graph_stats(measurement_id, node_count):
    fields = dict.fromkeys(cs.GraphStats._fields, 0)
    fields.update(measurement_id=measurement_id, node_count=node_count)
    return cs.GraphStats(**fields)


class TestMetricSeries:
    @pytest.fixture(autouse=True)
    def _setup(self):
        self.measurements = [
            cs.Measurement('M2', 2, 'CW22'),
            cs.Measurement('M1', 1, 'CW20', pre_gdpr=True),
            cs.Measurement('M3', 3, 'CW25'),
            cs.Measurement('M4', 4, 'CW27'),
        ]
        self.stats = [
            graph_stats('M1', 59),
            graph_stats('M2', 38),
            graph_stats('M3', 37),
            graph_stats('M4', 30),
        ]

    def test_from_graph_stats(self):
        series = cs.MetricSeries.from_graph_stats(
            self.measurements, self.stats, 'node_count'
        )
        assert series.points == ((1, 59.0), (2, 38.0), (3, 37.0), (4, 30.0))
        assert series.pre_gdpr_ordinals == frozenset({1})
        assert series.week_labels == ('CW20', 'CW22', 'CW25', 'CW27')

    def test_from_graph_stats_errors(self):
        with pytest.raises(ValueError, match='Unknown graph metric'):
            cs.MetricSeries.from_graph_stats(self.measurements, self.stats, 'nope')
        with pytest.raises(ValueError, match='M4'):
            cs.MetricSeries.from_graph_stats(
                self.measurements, self.stats[:3], 'node_count'
            )

    def test_xy(self):
        series = cs.MetricSeries.from_graph_stats(
            self.measurements, self.stats, 'node_count'
        )
        x, y = series.xy('calendar_week', include_pre_gdpr=False)
        np.testing.assert_array_equal(x, [22.0, 25.0, 27.0])
        np.testing.assert_array_equal(y, [38.0, 37.0, 30.0])

    def test_ordinals_increase(self):
        with pytest.raises(ValueError, match='strictly increasing'):
            cs.MetricSeries('nodes', ((2, 1.0), (1, 2.0)))

    def test_week_labels_length(self):
        with pytest.raises(ValueError, match='week_labels'):
            cs.MetricSeries('nodes', ((1, 1.0), (2, 2.0)), week_labels=('CW1',))

    def test_missing_week_labels(self):
        series = cs.MetricSeries('nodes', ((1, 1.0), (2, 2.0), (3, 4.0)))
        with pytest.raises(ValueError, match='no week labels'):
            series.xy('calendar_week')


class TestTrendPair:
    def test_pre_gdpr_point_changes_slope(self):
        points = ((1, 20.0), (2, 10.0), (3, 11.0), (4, 12.0))
        series = cs.MetricSeries('nodes', points, frozenset({1}))
        pair = cs.trend_pair(series)
        assert pair.with_pre_gdpr.slope < 0
        assert pair.without_pre_gdpr.slope == pytest.approx(1.0)
        assert pair.without_pre_gdpr.n == 3
        assert not pair.without_pre_gdpr.included_pre_gdpr
        assert pair.slope_difference == pytest.approx(pair.with_pre_gdpr.slope - 1.0)

    def test_too_short_without_pre_gdpr(self):
        points = ((1, 20.0), (2, 10.0), (3, 11.0))
        series = cs.MetricSeries('nodes', points, frozenset({1}))
        with pytest.raises(cs.RegressionError):
            cs.trend_pair(series)

    def test_report(self):
        points = ((1, 1.0), (2, 2.0), (3, 3.0), (4, 4.0))
        series = cs.MetricSeries('nodes', points)
        report = cs.trend_report({'nodes': series})
        assert set(report['nodes']) == {
            'with_pre_gdpr',
            'without_pre_gdpr',
            'slope_difference',
        }
        assert report['nodes']['with_pre_gdpr']['slope'] == pytest.approx(1.0)
        assert report['nodes']['slope_difference'] == pytest.approx(0.0, abs=1e-12)


class TestReadSeriesCsv:
    def test_read(self):
        data = (
            'metric,ordinal,value,pre_gdpr,week_label\n'
            'nodes,2,38,0,CW22\n'
            'nodes,1,59,1,CW20\n'
            'edges,1,429,true,CW20\n'
        )
        series = cs.read_series_csv(data)
        assert list(series) == ['edges', 'nodes']
        assert series['nodes'].points == ((1, 59.0), (2, 38.0))
        assert series['nodes'].pre_gdpr_ordinals == frozenset({1})
        assert series['nodes'].week_labels == ('CW20', 'CW22')

    def test_optional_columns(self):
        series = cs.read_series_csv('metric,ordinal,value\nnodes,1,3.5\n')
        assert series['nodes'].pre_gdpr_ordinals == frozenset()
        assert series['nodes'].week_labels == ()

    def test_missing_columns(self):
        with pytest.raises(ValueError, match='columns'):
            cs.read_series_csv('metric,value\nnodes,1\n')

    def test_malformed_row(self):
        with pytest.raises(ValueError, match='line 3'):
            cs.read_series_csv('metric,ordinal,value\nnodes,1,3\nnodes,x,4\n')
