from __future__ import annotations

import json
import logging
import math
import re
from collections import defaultdict
from collections.abc import Iterable, Iterator, Sequence
from typing import NamedTuple
from urllib.parse import unquote

from tqdm import tqdm

from .._utils import canonical_json, obj_type_str
from ..companies import CompanyDb, company_resolver
from ..errors import CorpusParseError
from ..ids import UserId, split_pairs
from ..log_model import CookieRecord, RequestRecord
from ..options import SyncOptions
from .decode import decode_layers
from .urls import extract_urls

__all__ = [
    'SyncEvent',
    'MECHANISMS',
    'detect_sync',
    'id_origins',
    'write_sync_jsonl',
    'parse_sync_jsonl',
]

logger = logging.getLogger(__name__)

MECHANISMS = ('query_param', 'post_param', 'nested_url', 'referrer')

_PARAM_DELIMITERS = '&;'


class SyncEvent(NamedTuple):
    """Evidence that a company's identifier reached another company.

    Attributes:
        measurement_id: Measurement of the carrying request.
        profile_id: Profile of the carrying request.
        sender_company: Company owning the identifier.
        receiver_company: Company of the request host.
        id: The identifier transmitted.
        mechanism: `query_param`, `post_param`, `nested_url` or `referrer`.
        request_seq: Sequence number of the carrying request.
        codec_chain: Codecs applied to the matching text to reveal the identifier.
        param_key: Parameter carrying the identifier, empty when the identifier was
            found in a whole URL or body.
    """

    measurement_id: str
    profile_id: str
    sender_company: str
    receiver_company: str
    id: UserId
    mechanism: str
    request_seq: int
    codec_chain: tuple[str, ...] = ()
    param_key: str = ''

    @property
    def key(self) -> tuple:
        return (
            self.measurement_id,
            self.profile_id,
            self.sender_company,
            self.receiver_company,
            self.id.value,
            self.mechanism,
            self.request_seq,
        )


class _Evidence(NamedTuple):
    # where a piece of text to search for identifiers comes from
    mechanism: str
    text: str
    codec_chain: tuple[str, ...]
    param_key: str


def id_origins(
    ids: Iterable[UserId],
    requests: Iterable[RequestRecord],
    cookies: Iterable[CookieRecord],
    db: CompanyDb,
) -> dict[tuple[str, str, str], UserId]:
    """Attribute every identifier value to the company that exhibited it first.

    The same value may be validated for several owners, for instance the receiver
    of a sync storing the value under its own key. The first evidence of each
    owner (cookie set or request carrying the value, ordered by time with cookies
    first on ties) designates the origin.

    Returns:
        Map from `(measurement_id, profile_id, value)` to the origin identifier.
    """
    resolve = company_resolver(db)
    by_host = defaultdict(list)
    for uid in ids:
        by_host[uid.measurement_id, uid.profile_id, uid.owner_host].append(uid)

    first_seen = {}

    def observe(uid: UserId, when: tuple):
        if uid not in first_seen or when < first_seen[uid]:
            first_seen[uid] = when

    for cookie in cookies:
        candidates = by_host.get(
            (cookie.measurement_id, cookie.profile_id, cookie.domain)
        )
        if candidates is None:
            continue
        text = unquote(cookie.value.decode('utf-8', errors='replace'))
        for uid in candidates:
            if uid.value in text:
                observe(uid, (cookie.set_at.timestamp(), 0, -1))

    for request in requests:
        candidates = by_host.get(
            (request.measurement_id, request.profile_id, request.host)
        )
        if candidates is None:
            continue
        text = unquote(request.url.query)
        if request.post_body is not None:
            text += '\n' + unquote(request.post_body.decode('utf-8', errors='replace'))
        for uid in candidates:
            if uid.value in text:
                observe(uid, (request.timestamp.timestamp(), 1, request.seq))

    origins = {}
    never_seen = (math.inf, 2, 0)
    for uids in by_host.values():
        for uid in uids:
            key = (uid.measurement_id, uid.profile_id, uid.value)
            rank = (first_seen.get(uid, never_seen), resolve(uid.owner_host), uid)
            if key not in origins or rank < origins[key][0]:
                origins[key] = (rank, uid)
    return {key: uid for key, (_, uid) in origins.items()}


def _param_evidence(
    text: str, mechanism: str, options: SyncOptions
) -> Iterator[_Evidence]:
    for key, value in split_pairs(text, _PARAM_DELIMITERS):
        for layer in decode_layers(
            value, options.max_decode_depth, options.max_inflate_bytes
        ):
            yield _Evidence(mechanism, layer.text, layer.codec_chain, key)


def _request_evidence(request: RequestRecord, options: SyncOptions) -> list[_Evidence]:
    evidence = list(_param_evidence(request.url.query, 'query_param', options))
    evidence.append(_Evidence('query_param', request.url.raw, (), ''))

    if request.post_body is not None:
        body = request.post_body.decode('utf-8', errors='replace')
        evidence.extend(_param_evidence(body, 'post_param', options))
        for layer in decode_layers(
            request.post_body, options.max_decode_depth, options.max_inflate_bytes
        ):
            evidence.append(_Evidence('post_param', layer.text, layer.codec_chain, ''))

    # URLs nested in the request URL or in any decoded parameter or body layer
    nested = {}
    for item in evidence:
        for url in extract_urls(item.text):
            if url.raw != request.url.raw and url.raw not in nested:
                nested[url.raw] = _Evidence(
                    'nested_url', unquote(url.query), item.codec_chain, item.param_key
                )
    evidence.extend(nested.values())
    return evidence


def _attribute_encoded_copies(
    owners: dict[str, tuple[str, UserId]], options: SyncOptions
):
    # a value decoding to another identifier of the profile is a copy of it and
    # belongs to its company
    plain = dict(owners)
    for value, (_, uid) in plain.items():
        layers = decode_layers(
            value, options.max_decode_depth, options.max_inflate_bytes
        )
        for layer in layers[1:]:
            if layer.text != value and layer.text in plain:
                owners[value] = (plain[layer.text][0], uid)
                break


def _token_pattern(values: Sequence[str]) -> re.Pattern:
    # longest values first so that a value never shadows a longer one it prefixes
    alternatives = '|'.join(re.escape(v) for v in sorted(values, key=len, reverse=True))
    return re.compile(rf'(?<![A-Za-z0-9])(?:{alternatives})(?![A-Za-z0-9])')


def detect_sync(
    requests: Sequence[RequestRecord],
    ids: Iterable[UserId],
    db: CompanyDb,
    options: SyncOptions = SyncOptions(),  # noqa: B008
    *,
    cookies: Iterable[CookieRecord] = (),
) -> list[SyncEvent]:
    """Detect cookie-sync events.

    Every request is searched for token-delimited occurrences of the identifiers
    validated for its profile whose owner company differs from the request's
    company: in each query parameter and its decoded layers and in the raw URL
    (`query_param`), in the POST parameters, body and their decoded layers
    (`post_param`), in the queries of URLs nested in any of these (`nested_url`),
    and in the referrer query (`referrer`).

    A value is attributed to the company that exhibited it first within the
    profile (see `id_origins`), only that company can send it. An identifier that
    decodes to another identifier of the profile is a copy, attributed to the
    company of the decoded one. Transmissions of a
    first party's own identifier by the page under visit are embed relations, not
    sync events. For the referrer mechanism the sender is the referrer's company.

    Args:
        requests: Request records.
        ids: Identifiers detected on the same corpus.
        db: Company database.
        options: Detection options.
        cookies: Cookie records of the same corpus, used to date when identifiers
            were first exhibited.

    Returns:
        Deduplicated events sorted by measurement, profile, request sequence,
        sender and receiver.
    """
    ids = list(ids)
    resolve = company_resolver(db)
    origins = id_origins(ids, requests, cookies, db)

    values = defaultdict(dict)
    for (measurement_id, profile_id, value), uid in origins.items():
        values[measurement_id, profile_id][value] = (resolve(uid.owner_host), uid)
    for owners in values.values():
        _attribute_encoded_copies(owners, options)
    patterns = {key: _token_pattern(list(v)) for key, v in values.items()}

    events = {}

    def emit(
        request: RequestRecord, sender: str, receiver: str, uid: UserId, e: _Evidence
    ):
        event = SyncEvent(
            request.measurement_id,
            request.profile_id,
            sender,
            receiver,
            uid,
            e.mechanism,
            request.seq,
            e.codec_chain,
            e.param_key,
        )
        events.setdefault(event.key, event)

    for request in tqdm(requests, disable=not options.verbose, desc='sync'):
        key = (request.measurement_id, request.profile_id)
        if key not in patterns:
            continue
        owners, pattern = values[key], patterns[key]
        receiver = resolve(request.host)
        first_party = resolve(request.top_level_site)

        for evidence in _request_evidence(request, options):
            for match in pattern.finditer(evidence.text):
                sender, uid = owners[match.group(0)]
                if sender not in (receiver, first_party):
                    emit(request, sender, receiver, uid, evidence)

        referrer = request.referrer
        if referrer is not None and len(referrer.query) > 0:
            sender = resolve(referrer.host)
            evidence = _Evidence('referrer', unquote(referrer.query), (), '')
            for match in pattern.finditer(evidence.text):
                owner, uid = owners[match.group(0)]
                if owner == sender and sender not in (receiver, first_party):
                    emit(request, sender, receiver, uid, evidence)

    logger.info('%d sync events in %d requests', len(events), len(requests))
    return sorted(
        events.values(),
        key=lambda e: (
            e.measurement_id,
            e.profile_id,
            e.request_seq,
            e.sender_company,
            e.receiver_company,
            e.mechanism,
            e.id.value,
        ),
    )


# === JSONL artifacts


def _event_to_dict(event: SyncEvent) -> dict:
    obj = event._asdict()
    obj['id'] = event.id._asdict()
    obj['codec_chain'] = list(event.codec_chain)
    return obj


def write_sync_jsonl(events: Iterable[SyncEvent]) -> bytes:
    """Serialize sync events as canonical JSON lines, in the given order."""
    lines = [canonical_json(_event_to_dict(e)) + '\n' for e in events]
    return ''.join(lines).encode('utf-8')


def parse_sync_jsonl(data: bytes) -> list[SyncEvent]:
    """Load sync events written by `write_sync_jsonl`.

    Raises:
        CorpusParseError: On a malformed line, carrying its line number.
    """
    events = []
    for lineno, line in enumerate(data.splitlines(), start=1):
        if len(line.strip()) == 0:
            continue
        try:
            obj = json.loads(line)
            if not isinstance(obj, dict):
                raise TypeError(f'expected a JSON object, got {obj_type_str(obj)}')
            obj['id'] = UserId(**obj['id'])
            obj['codec_chain'] = tuple(obj.get('codec_chain', ()))
            if obj['mechanism'] not in MECHANISMS:
                raise ValueError(f'unknown mechanism {obj["mechanism"]!r}')
            events.append(SyncEvent(**obj))
        except (KeyError, TypeError, ValueError) as e:
            raise CorpusParseError(f'Malformed sync event: {e}', line=lineno) from e
    return events
