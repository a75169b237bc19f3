from __future__ import annotations

import json
import logging
from collections.abc import Callable, Mapping
from datetime import date
from functools import lru_cache

import equinox as eqx

from ._utils import canonical_json, obj_type_str
from .domains import is_ip_literal, normalize_host, registrable_domain
from .errors import CompanyDbError

__all__ = [
    'CompanyDb',
    'load_company_db',
    'write_company_db',
    'resolve_company',
    'company_resolver',
]

logger = logging.getLogger(__name__)

METADATA_KEY = '_metadata'


class CompanyDb(eqx.Module):
    """Tracker database mapping domain suffixes to the company owning them.

    Attributes:
        entries _(dict)_: Map from lowercase domain suffix (no leading dot) to
            company name.
        source_label _(str)_: Origin of the database snapshot.
        snapshot_date _(date, optional)_: Date of the snapshot.
    """

    entries: dict[str, str]
    source_label: str = ''
    snapshot_date: date | None = None

    def __check_init__(self):
        for domain, company in self.entries.items():
            if domain != domain.lower() or domain.startswith('.') or len(domain) == 0:
                raise CompanyDbError(
                    'Domain keys must be lowercase without leading dot, got'
                    f' {domain!r}.'
                )
            if not isinstance(company, str) or len(company) == 0:
                raise CompanyDbError(f'Domain {domain!r} maps to an empty company.')

    @classmethod
    def from_mapping(
        cls,
        mapping: Mapping[str, str],
        source_label: str = '',
        snapshot_date: date | None = None,
    ) -> CompanyDb:
        entries = {normalize_host(k).lstrip('.'): v for k, v in mapping.items()}
        return cls(entries, source_label, snapshot_date)

    def lookup(self, domain: str) -> str | None:
        return self.entries.get(domain)

    def __len__(self) -> int:
        return len(self.entries)


def load_company_db(data: bytes) -> CompanyDb:
    """Load a company database from JSON bytes.

    The input is a JSON object mapping domains to company names, with an optional
    `_metadata` block holding `source_label` and `snapshot_date` (ISO date).
    Duplicate domains keep the last company and are reported in a warning.

    Raises:
        CompanyDbError: If the input is not a JSON object or has no entry.

    Examples:
        >>> db = cs.load_company_db(b'{"doubleclick.net": "Google"}')
        >>> len(db), db.lookup('doubleclick.net')
        (1, 'Google')
    """
    duplicates = 0

    def collect_pairs(pairs: list[tuple[str, object]]) -> dict:
        nonlocal duplicates
        obj = {}
        for key, value in pairs:
            if key in obj:
                duplicates += 1
            obj[key] = value
        return obj

    try:
        raw = json.loads(data, object_pairs_hook=collect_pairs)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise CompanyDbError(f'Malformed company database: {e}') from e
    if not isinstance(raw, dict):
        raise CompanyDbError(
            f'A company database must be a JSON object, got {obj_type_str(raw)}.'
        )

    metadata = raw.pop(METADATA_KEY, {})
    if not isinstance(metadata, dict):
        raise CompanyDbError(
            f'The `{METADATA_KEY}` block must be a JSON object, got'
            f' {obj_type_str(metadata)}.'
        )
    entries = {}
    for key, company in raw.items():
        domain = normalize_host(str(key)).lstrip('.')
        if domain in entries:
            duplicates += 1
        entries[domain] = company
    if len(entries) == 0:
        raise CompanyDbError('The company database has no entry.')
    if duplicates > 0:
        logger.warning(
            '%d duplicate domains in company database, last wins', duplicates
        )

    snapshot_date = metadata.get('snapshot_date')
    try:
        if snapshot_date is not None:
            snapshot_date = date.fromisoformat(snapshot_date)
    except (TypeError, ValueError) as e:
        raise CompanyDbError(f'Invalid `snapshot_date`: {e}') from e
    return CompanyDb(entries, str(metadata.get('source_label', '')), snapshot_date)


def write_company_db(db: CompanyDb) -> bytes:
    obj = dict(db.entries)
    obj[METADATA_KEY] = {
        'source_label': db.source_label,
        'snapshot_date': (
            None if db.snapshot_date is None else db.snapshot_date.isoformat()
        ),
    }
    return (canonical_json(obj) + '\n').encode('utf-8')


def resolve_company(host: str, db: CompanyDb) -> str:
    """Returns the company owning a host.

    The longest database suffix matching the host on a label boundary wins. Hosts
    absent from the database fall back to their registrable domain, used verbatim
    as the company name; IP literals and single-label hosts are their own company.

    Examples:
        >>> db = cs.CompanyDb({'doubleclick.net': 'Google'})
        >>> cs.resolve_company('stats.g.doubleclick.net', db)
        'Google'
        >>> cs.resolve_company('notdoubleclick.net', db)
        'notdoubleclick.net'
        >>> cs.resolve_company('cdn.example.co.uk', db)
        'example.co.uk'
    """
    host = normalize_host(host)
    if is_ip_literal(host) or '.' not in host:
        return host
    labels = host.split('.')
    for i in range(len(labels)):
        company = db.entries.get('.'.join(labels[i:]))
        if company is not None:
            return company
    return registrable_domain(host)


def company_resolver(db: CompanyDb) -> Callable[[str], str]:
    """Returns a memoized `resolve_company` bound to `db`."""

    @lru_cache(maxsize=None)
    def resolve(host: str) -> str:
        return resolve_company(host, db)

    return resolve
