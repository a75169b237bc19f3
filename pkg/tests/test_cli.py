import csv
import io
import json

import pytest

import cookiesync as cs
from cookiesync import cli
from cookiesync.cli import main

SPEC = {'seed': 17, 'stars': [['Hub0', 3], ['Hub1', 4]], 'n_sites': 2}


def read_csv(path):
    return list(csv.DictReader(io.StringIO(path.read_text())))


class TestPipeline:
    @pytest.fixture(autouse=True)
    def _setup(self, tmp_path):
        self.out = tmp_path / 'out'
        spec = tmp_path / 'spec.json'
        spec.write_text(json.dumps(SPEC))
        assert main(['-o', str(self.out), 'simulate', '--spec', str(spec)]) == 0

    def _run(self, *args):
        return main(['-o', str(self.out), *args])

    def test_simulate(self):
        for name in ('corpus.jsonl', 'ground_truth.json', 'companies.json'):
            assert (self.out / name).is_file()
            assert (self.out / f'{name}.meta.json').is_file()

    def test_stages(self):
        for command in ('ids', 'sync', 'graph', 'stats', 'classify'):
            assert self._run(command) == 0
        [row] = read_csv(self.out / 'stats.csv')
        assert row['measurement_id'] == 'M1'
        assert int(row['component_count']) == 2
        assert int(row['largest_component_size']) == 5
        assert (self.out / 'graphs' / 'M1.dot').is_file()

        labels = {r['company']: r['label'] for r in read_csv(self.out / 'classify.csv')}
        assert labels['Hub1'] == 'central'

    def test_sync_pairs_match_ground_truth(self):
        assert self._run('ids') == 0
        assert self._run('sync') == 0
        events = cs.parse_sync_jsonl((self.out / 'sync.jsonl').read_bytes())
        truth = json.loads((self.out / 'ground_truth.json').read_bytes())
        pairs = {(e.sender_company, e.receiver_company) for e in events}
        assert pairs == {tuple(p) for p in truth['sync_pairs']}

    def test_rerun_is_byte_identical(self):
        assert self._run('ids') == 0
        first = (self.out / 'ids.jsonl').read_bytes()
        assert self._run('ids') == 0
        assert (self.out / 'ids.jsonl').read_bytes() == first

    def test_meta_sidecar(self):
        assert self._run('ids', '--min-id-length', '10') == 0
        meta = json.loads((self.out / 'ids.jsonl.meta.json').read_text())
        assert meta['command'] == 'ids'
        assert meta['config']['ids']['min_id_length'] == 10
        assert meta['inputs'] == [str(self.out / 'corpus.jsonl')]

    def test_ingest(self, tmp_path):
        other = tmp_path / 'other'
        corpus = str(self.out / 'corpus.jsonl')
        assert main(['-o', str(other), 'ingest', corpus]) == 0
        loaded = cs.parse_jsonl((other / 'corpus.jsonl').read_bytes())
        assert len(loaded.requests) > 0

    def test_report(self):
        for command in ('ids', 'sync', 'graph'):
            assert self._run(command) == 0
        assert self._run('report') == 0
        [row] = read_csv(self.out / 'report_components.csv')
        assert row['components'] == '2'
        # one measurement is too short for a trend
        trends = json.loads((self.out / 'report_trends.json').read_text())
        assert trends == {}

    def test_stats_without_graphs(self):
        assert self._run('stats') == 1

    def test_graph_sidecars_ignored(self):
        for command in ('ids', 'sync', 'graph'):
            assert self._run(command) == 0
        assert (self.out / 'graphs' / 'M1.json.meta.json').is_file()
        assert self._run('stats') == 0
        assert [r['measurement_id'] for r in read_csv(self.out / 'stats.csv')] == ['M1']

    def test_malformed_graph(self, capsys):
        (self.out / 'graphs').mkdir()
        (self.out / 'graphs' / 'M1.json').write_text('{"nodes": ')
        assert self._run('stats') == 1
        assert 'Malformed graph' in capsys.readouterr().err

    def test_internal_error(self, monkeypatch, capsys):
        def fail(run):
            raise ValueError('unexpected')

        monkeypatch.setitem(cli._COMMANDS, 'ids', fail)
        assert self._run('ids') == 2
        assert 'Traceback' in capsys.readouterr().err


class TestSar:
    @pytest.fixture(autouse=True)
    def _setup(self, tmp_path):
        self.out = tmp_path / 'out'
        self.cases = tmp_path / 'cases.json'
        cases = [
            {
                'company': 'Acme',
                'sent_date': '2018-06-20',
                'events': [
                    {'date': '2018-06-25', 'response_type': 'human', 'status': 'access'}
                ],
                'workload': {'m_pre': 2, 'm_post': 1, 'a_online': 1, 'a_offline': 1},
            },
            {'company': 'Silent', 'sent_date': '2018-09-21'},
        ]
        self.cases.write_text(json.dumps(cases))

    def _sar(self, action, *args):
        return main(
            ['-o', str(self.out), 'sar', action, '--inputs', str(self.cases), *args]
        )

    def test_score(self):
        assert self._sar('score') == 0
        rows = read_csv(self.out / 'sar_scores.csv')
        assert [(r['company'], r['score'], r['outcome']) for r in rows] == [
            ('Acme', '52', 'got_access'),
            ('Silent', '0', 'no_response'),
        ]

    def test_deadlines(self):
        assert self._sar('deadlines') == 0
        rows = read_csv(self.out / 'sar_deadlines.csv')
        assert [(r['calendar'], r['business']) for r in rows] == [
            ('2018-07-20', '2018-08-01'),
            ('2018-10-22', '2018-11-05'),
        ]

    def test_outcomes_at_deadline(self):
        assert self._sar('outcomes', '--deadline', '2018-06-22') == 0
        rows = {r['outcome']: r for r in read_csv(self.out / 'sar_outcomes.csv')}
        assert rows['in_process']['count'] == '1'
        assert rows['no_response']['percent'] == '50.0'

    def test_timing(self):
        assert self._sar('timing') == 0
        assert (self.out / 'sar_timing.csv').read_text() == (
            'week,automatic,mixed,human\n1,0,0,1\n'
        )

    def test_invalid_deadline(self):
        assert self._sar('outcomes', '--deadline', 'tomorrow') == 1

    def test_quoted_company(self):
        self.cases.write_text(
            json.dumps([{'company': 'Acme, Inc.', 'sent_date': '2018-06-20'}])
        )
        assert self._sar('deadlines') == 0
        text = (self.out / 'sar_deadlines.csv').read_text()
        rows = list(csv.reader(io.StringIO(text)))
        assert rows == [
            ['company', 'sent_date', 'calendar', 'business'],
            ['Acme, Inc.', '2018-06-20', '2018-07-20', '2018-08-01'],
        ]


def test_no_command(capsys):
    assert main([]) == 1
    assert 'usage' in capsys.readouterr().err


def test_version(capsys):
    assert main(['--version']) == 0
    assert capsys.readouterr().out.startswith(f'cookiesync {cs.__version__}')


@pytest.mark.parametrize(
    'argv',
    [['frobnicate'], ['ids', '--min-id-length', 'eight'], ['sar', 'score']],
    ids=['unknown-command', 'bad-type', 'missing-option'],
)
def test_usage_errors(argv, capsys):
    assert main(argv) == 1
    assert 'error' in capsys.readouterr().err


def test_missing_input(tmp_path, capsys):
    assert main(['-o', str(tmp_path), 'ids', '--corpus', 'missing.jsonl']) == 1
    assert 'missing.jsonl' in capsys.readouterr().err


def test_invalid_config(tmp_path):
    config = tmp_path / 'config.json'
    config.write_text('{"colour": 1}')
    assert main(['--config', str(config), '-o', str(tmp_path), 'ids']) == 1
