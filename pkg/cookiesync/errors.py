from __future__ import annotations

__all__ = [
    'CookieSyncError',
    'CorpusParseError',
    'CompanyDbError',
    'UndefinedChangeError',
    'RegressionError',
    'ScenarioError',
    'ConfigError',
    'ArtifactError',
]


class CookieSyncError(ValueError):
    """Base class of all errors raised on invalid inputs."""


class CorpusParseError(CookieSyncError):
    """Raised when a traffic log cannot be parsed.

    Attributes:
        offset: Byte offset of the failure in the input, if known.
        line: 1-based line number of the failure (line-delimited inputs only).
    """

    def __init__(self, msg: str, *, offset: int | None = None, line: int | None = None):
        where = []
        if line is not None:
            where.append(f'line {line}')
        if offset is not None:
            where.append(f'byte offset {offset}')
        if len(where) > 0:
            msg = f'{msg} ({", ".join(where)})'
        super().__init__(msg)
        self.offset = offset
        self.line = line


class CompanyDbError(CookieSyncError):
    """Raised when a company database file is malformed or empty."""


class UndefinedChangeError(CookieSyncError, ZeroDivisionError):
    """Raised when a relative change is requested from a zero reference value."""


class RegressionError(CookieSyncError):
    """Raised when a series cannot be fitted (too few points or constant x)."""


class ScenarioError(CookieSyncError):
    """Raised when a synthetic scenario specification is invalid."""


class ConfigError(CookieSyncError):
    """Raised when a pipeline configuration is malformed or holds invalid values."""


class ArtifactError(CookieSyncError):
    """Raised when a pipeline artifact (graph, inquiry cases, series table) is
    malformed.
    """
