from __future__ import annotations

import dataclasses
import json
from os import PathLike
from pathlib import Path
from typing import Any

import equinox as eqx

from ._utils import obj_type_str
from .errors import ConfigError

__all__ = ['IdOptions', 'SyncOptions', 'GraphOptions', 'LoadOptions', 'PipelineConfig']


class IdOptions(eqx.Module):
    min_id_length: int = 8
    similarity_threshold: float = 0.66
    delimiters: str = '&;,|'

    def __init__(
        self,
        min_id_length: int = 8,
        similarity_threshold: float = 0.66,
        delimiters: str = '&;,|',
    ):
        """Options of the user identifier detection.

        Args:
            min_id_length: Minimum length (inclusive) of an identifier value.
            similarity_threshold: Ratcliff/Obershelp similarity at or above which two
                values of the same key seen in distinct profiles are considered too
                close to be identifiers.
            delimiters: Characters on which query strings, POST bodies and packed
                cookie values are split into `key=value` fragments.
        """
        self.min_id_length = min_id_length
        self.similarity_threshold = similarity_threshold
        self.delimiters = delimiters

    def __check_init__(self):
        if self.min_id_length < 1:
            raise ValueError(
                'Argument `min_id_length` must be at least 1, but is'
                f' {self.min_id_length}.'
            )
        if not 0.0 <= self.similarity_threshold <= 1.0:
            raise ValueError(
                'Argument `similarity_threshold` must be in [0, 1], but is'
                f' {self.similarity_threshold}.'
            )
        if len(self.delimiters) == 0 or '=' in self.delimiters:
            raise ValueError(
                'Argument `delimiters` must be non-empty and must not contain `=`.'
            )


class SyncOptions(eqx.Module):
    max_decode_depth: int = 3
    max_inflate_bytes: int = 65536
    verbose: bool = False

    def __init__(
        self,
        max_decode_depth: int = 3,
        max_inflate_bytes: int = 65536,
        verbose: bool = False,
    ):
        """Options of the cookie-sync detection.

        Args:
            max_decode_depth: Maximum number of codecs chained when decoding a
                parameter value.
            max_inflate_bytes: Maximum size of a decompressed payload, larger
                payloads are dropped.
            verbose: If `True`, display a progress bar over the scanned requests.
        """
        self.max_decode_depth = max_decode_depth
        self.max_inflate_bytes = max_inflate_bytes
        self.verbose = verbose

    def __check_init__(self):
        if self.max_decode_depth < 1:
            raise ValueError(
                'Argument `max_decode_depth` must be at least 1, but is'
                f' {self.max_decode_depth}.'
            )
        if self.max_inflate_bytes < 1:
            raise ValueError('Argument `max_inflate_bytes` must be positive.')


class GraphOptions(eqx.Module):
    damping: float = 0.85
    pagerank_tol: float = 1e-10
    community_seed: int | None = 0
    include_embed: bool = False
    dense_eigen_limit: int = 2000

    def __init__(
        self,
        damping: float = 0.85,
        pagerank_tol: float = 1e-10,
        community_seed: int | None = 0,
        include_embed: bool = False,
        dense_eigen_limit: int = 2000,
    ):
        """Options of the relation graph analysis.

        Args:
            damping: PageRank damping factor.
            pagerank_tol: PageRank L1 convergence tolerance.
            community_seed: Seed of the node order used to break ties in community
                detection. If `None`, nodes are visited in sorted order.
            include_embed: If `True`, components and statistics are computed over
                sync and embed edges, otherwise over sync edges only.
            dense_eigen_limit: Largest component size for which the Laplacian
                spectrum is computed by a dense eigendecomposition; larger
                components use a sparse shift-invert solver.
        """
        self.damping = damping
        self.pagerank_tol = pagerank_tol
        self.community_seed = community_seed
        self.include_embed = include_embed
        self.dense_eigen_limit = dense_eigen_limit

    def __check_init__(self):
        if not 0.0 < self.damping < 1.0:
            raise ValueError(
                f'Argument `damping` must be in (0, 1), but is {self.damping}.'
            )
        if self.pagerank_tol <= 0:
            raise ValueError('Argument `pagerank_tol` must be positive.')


class LoadOptions(eqx.Module):
    max_post_bytes: int = 1 << 20
    strict: bool = True

    def __init__(self, max_post_bytes: int = 1 << 20, strict: bool = True):
        """Options of the traffic log loaders.

        Args:
            max_post_bytes: POST bodies longer than this are truncated and flagged.
            strict: If `True`, a malformed line of a line-delimited corpus aborts the
                load, otherwise it is skipped and counted.
        """
        self.max_post_bytes = max_post_bytes
        self.strict = strict


_SECTIONS = {
    'ids': IdOptions,
    'sync': SyncOptions,
    'graph': GraphOptions,
    'load': LoadOptions,
}


class PipelineConfig(eqx.Module):
    """Configuration of a pipeline run: input and output locations and every
    tunable of the stages.

    Attributes:
        inputs _(tuple of str)_: Input files of the first stage.
        company_db _(str, optional)_: Path of the company database.
        output_dir _(str)_: Directory where the stage artifacts are written.
        ids _(IdOptions)_: Identifier detection options.
        sync _(SyncOptions)_: Sync detection options.
        graph _(GraphOptions)_: Graph analysis options.
        load _(LoadOptions)_: Loader options.
    """

    inputs: tuple[str, ...] = ()
    company_db: str | None = None
    output_dir: str = 'out'
    ids: IdOptions = eqx.field(default_factory=IdOptions)
    sync: SyncOptions = eqx.field(default_factory=SyncOptions)
    graph: GraphOptions = eqx.field(default_factory=GraphOptions)
    load: LoadOptions = eqx.field(default_factory=LoadOptions)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> PipelineConfig:
        if not isinstance(data, dict):
            raise ConfigError(
                'A pipeline configuration must be a JSON object, but got'
                f' {obj_type_str(data)}.'
            )
        unknown = set(data) - {'inputs', 'company_db', 'output_dir', *_SECTIONS}
        if len(unknown) > 0:
            raise ConfigError(f'Unknown configuration keys: {sorted(unknown)}.')

        kwargs = {}
        for name, section_cls in _SECTIONS.items():
            section = data.get(name, {})
            try:
                kwargs[name] = section_cls(**section)
            except (TypeError, ValueError) as e:
                raise ConfigError(f'Invalid configuration section `{name}`: {e}') from e
        inputs = data.get('inputs', ())
        if not isinstance(inputs, (list, tuple)):
            raise ConfigError(
                f'Configuration key `inputs` must be a list, but got'
                f' {obj_type_str(inputs)}.'
            )
        return cls(
            inputs=tuple(str(p) for p in inputs),
            company_db=data.get('company_db'),
            output_dir=data.get('output_dir', 'out'),
            **kwargs,
        )

    @classmethod
    def from_json(cls, path: str | PathLike) -> PipelineConfig:
        with Path(path).open(encoding='utf-8') as f:
            try:
                data = json.load(f)
            except (json.JSONDecodeError, UnicodeDecodeError) as e:
                raise ConfigError(f'Malformed configuration file {path}: {e}') from e
        return cls.from_dict(data)

    def to_dict(self) -> dict[str, Any]:
        data = {
            'inputs': list(self.inputs),
            'company_db': self.company_db,
            'output_dir': self.output_dir,
        }
        for name in _SECTIONS:
            section = getattr(self, name)
            data[name] = {
                f.name: getattr(section, f.name) for f in dataclasses.fields(section)
            }
        return data

    def updated(self, **overrides: Any) -> PipelineConfig:
        """Returns a copy with `section.field` overrides applied, `None` values
        being ignored.
        """
        data = self.to_dict()
        for key, value in overrides.items():
            if value is None:
                continue
            if '.' in key:
                section, field = key.split('.', 1)
                data[section][field] = value
            else:
                data[key] = value
        return PipelineConfig.from_dict(data)
