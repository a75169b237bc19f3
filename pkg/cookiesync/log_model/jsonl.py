from __future__ import annotations

import base64
import binascii
import json
import logging
from typing import Any

from .._utils import canonical_json, obj_type_str
from ..errors import CorpusParseError
from ..options import LoadOptions
from .records import (
    BrowserProfile,
    CookieRecord,
    Corpus,
    Measurement,
    RequestRecord,
    Url,
    format_timestamp,
    parse_timestamp,
)

__all__ = ['parse_jsonl', 'write_jsonl', 'record_to_dict', 'FORMAT_VERSION']

logger = logging.getLogger(__name__)

# version of the native line-delimited format, bumped on incompatible changes
FORMAT_VERSION = '1'

_KINDS = ('measurement', 'profile', 'request', 'cookie')


# === byte strings


def _dump_bytes(value: bytes | None) -> str | dict | None:
    # valid UTF-8 is stored as text, anything else as base64
    if value is None:
        return None
    try:
        return value.decode('utf-8')
    except UnicodeDecodeError:
        return {'base64': base64.b64encode(value).decode('ascii')}


def _load_bytes(value: Any) -> bytes | None:
    if value is None:
        return None
    if isinstance(value, str):
        return value.encode('utf-8')
    if isinstance(value, dict) and isinstance(value.get('base64'), str):
        try:
            return base64.b64decode(value['base64'], validate=True)
        except binascii.Error as e:
            raise ValueError(f'invalid base64 payload: {e}') from e
    raise TypeError(f'expected a string or a base64 object, got {obj_type_str(value)}')


def _load_url(value: Any) -> Url | None:
    return None if value is None else Url.parse(value)


# === records


def record_to_dict(record: Any) -> dict[str, Any]:
    """Convert a record into its native line-delimited JSON object."""
    if isinstance(record, RequestRecord):
        return {
            'kind': 'request',
            'measurement_id': record.measurement_id,
            'profile_id': record.profile_id,
            'seq': record.seq,
            'timestamp': format_timestamp(record.timestamp),
            'method': record.method,
            'url': record.url.raw,
            'referrer': None if record.referrer is None else record.referrer.raw,
            'post_body': _dump_bytes(record.post_body),
            'redirect_location': (
                None
                if record.redirect_location is None
                else record.redirect_location.raw
            ),
            'top_level_site': record.top_level_site,
            'post_truncated': record.post_truncated,
        }
    elif isinstance(record, CookieRecord):
        return {
            'kind': 'cookie',
            'measurement_id': record.measurement_id,
            'profile_id': record.profile_id,
            'domain': record.domain,
            'name': record.name,
            'value': _dump_bytes(record.value),
            'set_at': format_timestamp(record.set_at),
        }
    elif isinstance(record, Measurement):
        return {
            'kind': 'measurement',
            'id': record.id,
            'ordinal': record.ordinal,
            'week_label': record.week_label,
            'pre_gdpr': record.pre_gdpr,
        }
    elif isinstance(record, BrowserProfile):
        return {
            'kind': 'profile',
            'id': record.id,
            'measurement_id': record.measurement_id,
            'country_tag': record.country_tag,
            'user_agent': record.user_agent,
        }
    else:
        raise TypeError(f'Cannot serialize an object of type {obj_type_str(record)}.')


def _record_from_dict(obj: dict[str, Any], options: LoadOptions) -> Any:
    kind = obj.get('kind')
    if kind == 'request':
        post_body = _load_bytes(obj.get('post_body'))
        truncated = bool(obj.get('post_truncated', False))
        if post_body is not None and len(post_body) > options.max_post_bytes:
            post_body, truncated = post_body[: options.max_post_bytes], True
        return RequestRecord(
            measurement_id=str(obj['measurement_id']),
            profile_id=str(obj['profile_id']),
            seq=int(obj['seq']),
            timestamp=parse_timestamp(obj['timestamp']),
            method=str(obj['method']),
            url=Url.parse(obj['url']),
            referrer=_load_url(obj.get('referrer')),
            post_body=post_body,
            redirect_location=_load_url(obj.get('redirect_location')),
            top_level_site=str(obj['top_level_site']),
            post_truncated=truncated,
        )
    elif kind == 'cookie':
        return CookieRecord(
            measurement_id=str(obj['measurement_id']),
            profile_id=str(obj['profile_id']),
            domain=str(obj['domain']),
            name=str(obj['name']),
            value=_load_bytes(obj['value']),
            set_at=parse_timestamp(obj['set_at']),
        )
    elif kind == 'measurement':
        return Measurement(
            id=str(obj['id']),
            ordinal=int(obj['ordinal']),
            week_label=str(obj.get('week_label', '')),
            pre_gdpr=bool(obj.get('pre_gdpr', False)),
        )
    elif kind == 'profile':
        return BrowserProfile(
            id=str(obj['id']),
            measurement_id=str(obj.get('measurement_id', '')),
            country_tag=str(obj.get('country_tag', '')),
            user_agent=str(obj.get('user_agent', '')),
        )
    else:
        raise ValueError(f'unknown record kind {kind!r}, expected one of {_KINDS}')


def parse_jsonl(
    data: bytes,
    *,
    options: LoadOptions = LoadOptions(),  # noqa: B008
) -> Corpus:
    """Parse a native line-delimited corpus.

    Each non-blank line is a JSON object with a `kind` field in `measurement`,
    `profile`, `request` or `cookie`, the other fields being named after the record
    fields. Records are materialized in file order.

    Args:
        data: UTF-8 encoded corpus.
        options: Loader options. With `options.strict=False` malformed lines are
            skipped and counted in `Corpus.skipped`.

    Returns:
        Loaded corpus.

    Raises:
        CorpusParseError: On the first malformed line in strict mode, carrying its
            line number and byte offset.

    Examples:
        >>> line = (
        ...     b'{"kind": "cookie", "measurement_id": "M1", "profile_id": "P1",'
        ...     b' "domain": "bar.org", "name": "uid", "value": "abcdef12",'
        ...     b' "set_at": "2018-05-20T10:00:00Z"}'
        ... )
        >>> corpus = cs.parse_jsonl(line)
        >>> corpus.cookies[0].value
        b'abcdef12'
    """
    records = {kind: [] for kind in _KINDS}
    last_seq = {}
    skipped = 0
    offset = 0

    for lineno, raw_line in enumerate(data.splitlines(keepends=True), start=1):
        line_offset = offset
        offset += len(raw_line)
        if len(raw_line.strip()) == 0:
            continue
        try:
            obj = json.loads(raw_line)
            if not isinstance(obj, dict):
                raise TypeError(f'expected a JSON object, got {obj_type_str(obj)}')
            record = _record_from_dict(obj, options)
            if isinstance(record, RequestRecord):
                key = (record.measurement_id, record.profile_id)
                if key in last_seq and record.seq <= last_seq[key]:
                    raise ValueError(
                        f'`seq` {record.seq} does not increase within profile'
                        f' {record.profile_id!r}'
                    )
                last_seq[key] = record.seq
        except (KeyError, TypeError, ValueError, UnicodeDecodeError) as e:
            if options.strict:
                msg = f'Malformed record: {e}'
                raise CorpusParseError(msg, line=lineno, offset=line_offset) from e
            skipped += 1
            continue
        records[obj['kind']].append(record)

    if skipped > 0:
        logger.warning('skipped %d malformed lines', skipped)

    return Corpus(
        measurements=tuple(records['measurement']),
        profiles=tuple(records['profile']),
        requests=tuple(records['request']),
        cookies=tuple(records['cookie']),
        skipped=skipped,
    )


def write_jsonl(corpus: Corpus) -> bytes:
    """Serialize a corpus into the native line-delimited format.

    Lines are canonical JSON (sorted keys, compact separators), so identical
    corpora always serialize to identical bytes.
    """
    records = (
        *corpus.measurements,
        *corpus.profiles,
        *corpus.requests,
        *corpus.cookies,
    )
    lines = [canonical_json(record_to_dict(record)) + '\n' for record in records]
    return ''.join(lines).encode('utf-8')
