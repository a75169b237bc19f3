"""Command-line interface of the pipeline.

Every subcommand reads the artifacts written by the previous stages (by default in
the output directory) and writes its own, each with a `X.meta.json` sidecar holding
the run metadata. Data files never hold timestamps, so re-running a stage over
unchanged inputs produces byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import traceback
from collections.abc import Iterable, Sequence
from datetime import date, datetime, timezone
from pathlib import Path

from . import __version__
from ._utils import canonical_json
from .companies import CompanyDb, load_company_db
from .errors import CookieSyncError, CorpusParseError, RegressionError
from .graph import (
    NodeClassification,
    build_graph,
    classify_nodes,
    embed_observations,
    export_components_csv,
    export_dot,
    export_json,
    export_stats_csv,
    graph_stats,
    load_graph_json,
    observed_companies,
    partner_changes,
)
from .ids import detect_ids, parse_ids_jsonl, write_ids_jsonl
from .log_model import (
    FORMAT_VERSION,
    Corpus,
    Measurement,
    parse_har,
    parse_jsonl,
    provenance_from_filename,
    write_jsonl,
)
from .longitudinal import MetricSeries, trend_pair
from .options import PipelineConfig
from .sar import (
    DEADLINE_MODES,
    RESPONSE_TYPES,
    classify_outcome,
    legal_deadline,
    load_cases,
    outcome_summary,
    response_timeline,
    write_cases_csv,
)
from .sync import detect_sync, parse_sync_jsonl, write_sync_jsonl
from .synth import ScenarioSpec, write_scenario

__all__ = ['main', 'build_parser']

logger = logging.getLogger(__name__)

# metrics fitted by `report`
TREND_METRICS = ('node_count', 'component_count', 'algebraic_connectivity')


class UsageError(Exception):
    """Raised by the argument parser instead of exiting."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f'{self.format_usage()}{self.prog}: error: {message}')


# === artifacts

META_SUFFIX = '.meta.json'


def _csv(header: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


class _Run:
    """Resolved configuration and artifact writer of one subcommand."""

    def __init__(self, args: argparse.Namespace, config: PipelineConfig):
        self.args = args
        self.config = config
        self.output_dir = Path(config.output_dir)

    def path(self, given: str | None, default: str) -> Path:
        return Path(given) if given is not None else self.output_dir / default

    def read(self, path: Path) -> bytes:
        if not path.is_file():
            raise FileNotFoundError(f'Input file not found: {path}')
        return path.read_bytes()

    def company_db(self, given: str | None) -> CompanyDb:
        path = given or self.config.company_db
        if path is None:
            default = self.output_dir / 'companies.json'
            if not default.is_file():
                logger.warning('no company database, hosts resolve to their eTLD+1')
                return CompanyDb({})
            path = default
        return load_company_db(self.read(Path(path)))

    def write(self, name: str | Path, data: bytes | str, inputs: Sequence[Path] = ()):
        path = self.output_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        if isinstance(data, str):
            data = data.encode('utf-8')
        path.write_bytes(data)
        self.write_meta(path, inputs)
        logger.info('wrote %s', path)
        return path

    def write_meta(self, path: Path, inputs: Sequence[Path] = ()):
        meta = {
            'tool_version': __version__,
            'format_version': FORMAT_VERSION,
            'command': self.args.command,
            'config': self.config.to_dict(),
            'created_at': datetime.now(timezone.utc).isoformat(),
            'inputs': [str(p) for p in inputs],
        }
        meta_path = path.with_name(path.name + META_SUFFIX)
        meta_path.write_text(
            json.dumps(meta, indent=2, sort_keys=True) + '\n', encoding='utf-8'
        )


def _config(args: argparse.Namespace) -> PipelineConfig:
    config = PipelineConfig()
    if args.config is not None:
        config = PipelineConfig.from_json(args.config)
    overrides = {
        'output_dir': args.output_dir,
        'company_db': getattr(args, 'companies', None),
        'ids.similarity_threshold': getattr(args, 'similarity_threshold', None),
        'ids.min_id_length': getattr(args, 'min_id_length', None),
        'ids.delimiters': getattr(args, 'delimiters', None),
        'sync.max_decode_depth': getattr(args, 'max_decode_depth', None),
        'sync.max_inflate_bytes': getattr(args, 'max_inflate_bytes', None),
        'graph.damping': getattr(args, 'damping', None),
        'graph.community_seed': getattr(args, 'community_seed', None),
        'load.max_post_bytes': getattr(args, 'max_post_bytes', None),
    }
    if getattr(args, 'lenient', False):
        overrides['load.strict'] = False
    if getattr(args, 'include_embed', False):
        overrides['graph.include_embed'] = True
    if getattr(args, 'verbose', False):
        overrides['sync.verbose'] = True
    if getattr(args, 'inputs', None):
        overrides['inputs'] = [str(p) for p in args.inputs]
    return config.updated(**overrides)


def _load_corpus(run: _Run, path: Path) -> Corpus:
    return parse_jsonl(run.read(path), options=run.config.load)


def _load_graphs(run: _Run, paths: Sequence[str]) -> tuple[list, list[Path]]:
    if len(paths) > 0:
        files = [Path(p) for p in paths]
    else:
        files = sorted(
            p
            for p in (run.output_dir / 'graphs').glob('*.json')
            if not p.name.endswith(META_SUFFIX)
        )
        if len(files) == 0:
            raise FileNotFoundError(
                f'No graph found in {run.output_dir / "graphs"}, run `graph` first.'
            )
    return [load_graph_json(run.read(f)) for f in files], files


# === subcommands


def _cmd_ingest(run: _Run) -> int:
    inputs = [Path(p) for p in run.config.inputs]
    if len(inputs) == 0:
        raise UsageError('ingest: no input file given.')

    corpora = []
    for path in inputs:
        data = run.read(path)
        if path.suffix == '.har':
            measurement_id, profile_id = provenance_from_filename(path)
            corpus = parse_har(
                data,
                run.args.measurement or measurement_id,
                run.args.profile or profile_id,
                options=run.config.load,
                source=str(path),
            )
            for error in corpus.errors:
                logger.warning('%s entry %d: %s', path, error.index, error.message)
        else:
            corpus = parse_jsonl(data, options=run.config.load)
        corpora.append(corpus)
    corpus = Corpus.merge(*corpora)

    if run.args.measurements is not None:
        path = Path(run.args.measurements)
        try:
            records = json.loads(run.read(path))
            measurements = tuple(Measurement(**m) for m in records)
        except (TypeError, ValueError) as e:
            msg = f'Malformed measurement records in {path}: {e}'
            raise CorpusParseError(msg) from e
        corpus = Corpus.merge(Corpus(measurements=measurements), corpus)
        inputs.append(path)

    logger.info('ingested corpus\n%s', corpus)
    run.write('corpus.jsonl', write_jsonl(corpus), inputs)
    return 0


def _cmd_ids(run: _Run) -> int:
    corpus_path = run.path(run.args.corpus, 'corpus.jsonl')
    ids = detect_ids(_load_corpus(run, corpus_path), run.config.ids)
    run.write('ids.jsonl', write_ids_jsonl(ids), [corpus_path])
    return 0


def _cmd_sync(run: _Run) -> int:
    corpus_path = run.path(run.args.corpus, 'corpus.jsonl')
    ids_path = run.path(run.args.ids, 'ids.jsonl')
    corpus = _load_corpus(run, corpus_path)
    ids = parse_ids_jsonl(run.read(ids_path))
    events = detect_sync(
        corpus.requests,
        ids,
        run.company_db(run.args.companies),
        run.config.sync,
        cookies=corpus.cookies,
    )
    run.write('sync.jsonl', write_sync_jsonl(events), [corpus_path, ids_path])
    return 0


def _cmd_graph(run: _Run) -> int:
    corpus_path = run.path(run.args.corpus, 'corpus.jsonl')
    sync_path = run.path(run.args.sync, 'sync.jsonl')
    corpus = _load_corpus(run, corpus_path)
    events = parse_sync_jsonl(run.read(sync_path))
    db = run.company_db(run.args.companies)

    for mid, part in corpus.by_measurement().items():
        graph = build_graph(
            mid,
            [e for e in events if e.measurement_id == mid],
            embed_observations(part.requests, db),
            observed_companies(part.requests, db),
        )
        logger.info('%s', graph)
        inputs = [corpus_path, sync_path]
        run.write(Path('graphs') / f'{mid}.json', export_json(graph), inputs)
        run.write(Path('graphs') / f'{mid}.dot', export_dot(graph), inputs)
    return 0


def _cmd_stats(run: _Run) -> int:
    graphs, files = _load_graphs(run, run.args.graphs)
    stats = [graph_stats(g, run.config.graph) for g in graphs]
    run.write('stats.csv', export_stats_csv(stats), files)
    return 0


def _cmd_classify(run: _Run) -> int:
    graphs, files = _load_graphs(run, run.args.graphs)
    header = ('measurement_id', *NodeClassification._fields)
    rows = [(g.measurement_id, *c) for g in graphs for c in classify_nodes(g)]
    run.write('classify.csv', _csv(header, rows), files)
    return 0


def _cmd_compare(run: _Run) -> int:
    before_path, after_path = Path(run.args.before), Path(run.args.after)
    before = load_graph_json(run.read(before_path))
    after = load_graph_json(run.read(after_path))
    header = ('company', 'direct_before', 'direct_after', 'change', 'percent')
    rows = [
        (
            c.company,
            c.direct_before,
            c.direct_after,
            c.change,
            '' if c.percent is None else f'{c.percent:.2f}',
        )
        for c in partner_changes(before, after)
    ]
    run.write('compare.csv', _csv(header, rows), [before_path, after_path])
    return 0


def _cmd_sar(run: _Run) -> int:
    inputs_path = Path(run.args.inputs)
    cases = load_cases(run.read(inputs_path))
    deadline = None
    if run.args.deadline is not None:
        try:
            deadline = date.fromisoformat(run.args.deadline)
        except ValueError as e:
            raise UsageError(f'Invalid `--deadline` {run.args.deadline!r}: {e}') from e
    action = run.args.action

    if action == 'score':
        run.write('sar_scores.csv', write_cases_csv(cases, deadline), [inputs_path])
    elif action == 'deadlines':
        rows = [
            (
                case.company,
                case.sent_date,
                *(legal_deadline(case.sent_date, m) for m in DEADLINE_MODES),
            )
            for case in cases
        ]
        header = ('company', 'sent_date', *DEADLINE_MODES)
        run.write('sar_deadlines.csv', _csv(header, rows), [inputs_path])
    elif action == 'outcomes':
        summary = outcome_summary(cases, deadline)
        rows = [(o, c.count, f'{c.percent:.1f}') for o, c in summary.items()]
        header = ('outcome', 'count', 'percent')
        run.write('sar_outcomes.csv', _csv(header, rows), [inputs_path])
        for case in cases:
            logger.debug('%s: %s', case.company, classify_outcome(case, deadline))
    else:
        timeline = response_timeline(cases)
        rows = [
            (week, *(counts[t] for t in RESPONSE_TYPES))
            for week, counts in timeline.items()
        ]
        header = ('week', *RESPONSE_TYPES)
        run.write('sar_timing.csv', _csv(header, rows), [inputs_path])
    return 0


def _cmd_simulate(run: _Run) -> int:
    spec_path = Path(run.args.spec)
    spec = ScenarioSpec.from_json(run.read(spec_path))
    directory = write_scenario(spec, run.output_dir)
    for name in ('corpus.jsonl', 'ground_truth.json', 'companies.json'):
        run.write_meta(directory / name, [spec_path])
    return 0


def _cmd_report(run: _Run) -> int:
    graphs, files = _load_graphs(run, run.args.graphs)
    corpus_path = run.path(run.args.corpus, 'corpus.jsonl')
    measurements = list(_load_corpus(run, corpus_path).measurements)
    inputs = [*files, corpus_path]

    known = {m.id for m in measurements}
    for graph in graphs:
        if graph.measurement_id not in known:
            # ordinals follow the measurement ids when no record describes them
            measurements.append(Measurement(graph.measurement_id, 0))
    if any(m.ordinal == 0 for m in measurements):
        measurements = [
            Measurement(m.id, i + 1, m.week_label, m.pre_gdpr)
            for i, m in enumerate(sorted(measurements, key=lambda m: (m.ordinal, m.id)))
        ]
    order = {m.id: m.ordinal for m in measurements}
    graphs = sorted(graphs, key=lambda g: order[g.measurement_id])
    stats = [graph_stats(g, run.config.graph) for g in graphs]
    analyzed = {s.measurement_id for s in stats}
    measurements = [m for m in measurements if m.id in analyzed]

    run.write('report_components.csv', export_components_csv(stats), inputs)
    run.write('report_stats.csv', export_stats_csv(stats), inputs)

    trends = {}
    for metric in TREND_METRICS:
        series = MetricSeries.from_graph_stats(measurements, stats, metric)
        try:
            pair = trend_pair(series)
        except RegressionError as e:
            logger.warning('no trend for %s: %s', metric, e)
            continue
        trends[metric] = {
            'with_pre_gdpr': pair.with_pre_gdpr._asdict(),
            'without_pre_gdpr': pair.without_pre_gdpr._asdict(),
            'slope_difference': pair.slope_difference,
        }
        if run.args.figures:
            _save_trend_figure(run, series, metric)
    run.write('report_trends.json', canonical_json(trends) + '\n', inputs)
    return 0


def _save_trend_figure(run: _Run, series: MetricSeries, metric: str):
    import matplotlib.pyplot as plt

    from .plots import plot_trend

    figures = run.output_dir / 'figures'
    figures.mkdir(parents=True, exist_ok=True)
    plot_trend(series)
    plt.gcf().savefig(figures / f'{metric}.png', bbox_inches='tight', dpi=150)
    plt.close()


_COMMANDS = {
    'ingest': _cmd_ingest,
    'ids': _cmd_ids,
    'sync': _cmd_sync,
    'graph': _cmd_graph,
    'stats': _cmd_stats,
    'classify': _cmd_classify,
    'compare': _cmd_compare,
    'sar': _cmd_sar,
    'simulate': _cmd_simulate,
    'report': _cmd_report,
}


# === parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog='cookiesync',
        description='Reconstruct cookie-syncing ecosystems from captured traffic.',
    )
    parser.add_argument(
        '--version', action='store_true', help='print tool and format versions'
    )
    parser.add_argument(
        '--log-level',
        default='WARNING',
        choices=('DEBUG', 'INFO', 'WARNING', 'ERROR'),
        help='logging level (default: WARNING)',
    )
    parser.add_argument('--config', help='JSON pipeline configuration file')
    parser.add_argument(
        '-o', '--output-dir', help='directory of the artifacts (default: out)'
    )
    sub = parser.add_subparsers(dest='command', parser_class=_Parser)

    p = sub.add_parser('ingest', help='load HAR or JSONL captures into a corpus')
    p.add_argument('inputs', nargs='*', help='`.har` or `.jsonl` files')
    p.add_argument('--measurement', help='measurement id of the HAR inputs')
    p.add_argument('--profile', help='profile id of the HAR inputs')
    p.add_argument('--measurements', help='JSON list of measurement records')
    p.add_argument('--lenient', action='store_true', help='skip malformed lines')
    p.add_argument('--max-post-bytes', type=int)

    p = sub.add_parser('ids', help='detect user identifiers')
    p.add_argument('--corpus')
    p.add_argument('--similarity-threshold', type=float)
    p.add_argument('--min-id-length', type=int)
    p.add_argument('--delimiters')

    p = sub.add_parser('sync', help='detect cookie-sync events')
    p.add_argument('--corpus')
    p.add_argument('--ids')
    p.add_argument('--companies', help='company database JSON file')
    p.add_argument('--max-decode-depth', type=int)
    p.add_argument('--max-inflate-bytes', type=int)
    p.add_argument('--verbose', action='store_true', help='show a progress bar')

    p = sub.add_parser('graph', help='build the relation graph of each measurement')
    p.add_argument('--corpus')
    p.add_argument('--sync')
    p.add_argument('--companies', help='company database JSON file')

    for name, help_text in (
        ('stats', 'compute graph characteristics'),
        ('classify', 'classify companies by partner counts'),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument('graphs', nargs='*', help='graph JSON files')
        p.add_argument('--include-embed', action='store_true')
        p.add_argument('--damping', type=float)
        p.add_argument('--community-seed', type=int)

    p = sub.add_parser('compare', help='compare the partners of two measurements')
    p.add_argument('--before', required=True, help='graph JSON file')
    p.add_argument('--after', required=True, help='graph JSON file')

    p = sub.add_parser('sar', help='analyze subject access requests')
    p.add_argument('action', choices=('score', 'deadlines', 'outcomes', 'timing'))
    p.add_argument('--inputs', required=True, help='JSON list of inquiry cases')
    p.add_argument('--deadline', help='ISO date at which outcomes are evaluated')

    p = sub.add_parser('simulate', help='generate a synthetic scenario')
    p.add_argument('--spec', required=True, help='scenario specification JSON')

    p = sub.add_parser('report', help='collate tables and trends across measurements')
    p.add_argument('graphs', nargs='*', help='graph JSON files')
    p.add_argument('--corpus')
    p.add_argument('--include-embed', action='store_true')
    p.add_argument('--figures', action='store_true', help='render trend figures')

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Run the command line and return its exit code.

    Exit codes are 0 on success, 1 on invalid usage or input and 2 on internal
    errors.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return 1
    except SystemExit as e:
        # `--help`
        return 0 if e.code is None else int(e.code)

    if args.version:
        print(f'cookiesync {__version__} (format {FORMAT_VERSION})')
        return 0
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1

    logging.basicConfig(
        level=args.log_level, format='%(levelname)s %(name)s: %(message)s'
    )
    try:
        run = _Run(args, _config(args))
        return _COMMANDS[args.command](run)
    except (UsageError, CookieSyncError, OSError) as e:
        print(f'cookiesync: error: {e}', file=sys.stderr)
        return 1
    except Exception:  # noqa: BLE001
        traceback.print_exc()
        return 2
