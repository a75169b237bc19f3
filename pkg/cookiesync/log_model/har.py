from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any
from urllib.parse import urljoin

from ..domains import normalize_host, registrable_domain
from ..errors import CorpusParseError
from ..options import LoadOptions
from .records import (
    BrowserProfile,
    CookieRecord,
    Corpus,
    EntryError,
    RequestRecord,
    Url,
    parse_timestamp,
)

__all__ = ['parse_har', 'provenance_from_filename', 'parse_set_cookie']

logger = logging.getLogger(__name__)


def provenance_from_filename(path: str | Path) -> tuple[str, str]:
    """Returns `(measurement_id, profile_id)` from a `<measurement>__<profile>.har`
    file name. Without the separator the whole stem is the profile id and the
    measurement id is empty.
    """
    stem = Path(path).stem
    if '__' in stem:
        measurement_id, profile_id = stem.split('__', 1)
        return measurement_id, profile_id
    return '', stem


def _decode_json(data: bytes) -> Any:
    try:
        text = data.decode('utf-8-sig')
    except UnicodeDecodeError as e:
        raise CorpusParseError('HAR input is not valid UTF-8', offset=e.start) from e
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        # convert the character position into a byte offset
        offset = len(text[: e.pos].encode('utf-8'))
        raise CorpusParseError(f'Malformed HAR JSON: {e.msg}', offset=offset) from e


def _headers(message: dict, name: str) -> list[str]:
    values = []
    for header in message.get('headers', []):
        if str(header.get('name', '')).lower() == name:
            # some exporters fold repeated headers into one value
            values.extend(str(header.get('value', '')).split('\n'))
    return values


def parse_set_cookie(header: str, default_domain: str) -> tuple[str, str, str] | None:
    """Parse one `Set-Cookie` header into `(domain, name, value)`.

    Returns `None` when the header has no `name=value` pair. The domain falls back
    to the host that set the cookie and is stripped of its leading dot.

    Examples:
        >>> cs.parse_set_cookie('uid=abc123; Domain=.bar.org; Path=/', 'x.bar.org')
        ('bar.org', 'uid', 'abc123')
    """
    chunks = [c.strip() for c in header.split(';')]
    if len(chunks) == 0 or '=' not in chunks[0]:
        return None
    name, value = chunks[0].split('=', 1)
    name = name.strip()
    if len(name) == 0:
        return None

    domain = default_domain
    for attribute in chunks[1:]:
        key, _, attr_value = attribute.partition('=')
        if key.strip().lower() == 'domain' and len(attr_value.strip()) > 0:
            domain = attr_value.strip()
    domain = normalize_host(domain).lstrip('.')
    return domain, name, value.strip()


def _page_sites(log: dict) -> dict[str, str]:
    # map page ids to the registrable domain of the page under visit, when the
    # page title is the visited URL
    sites = {}
    for page in log.get('pages', None) or []:
        page_id = page.get('id')
        try:
            url = Url.parse(str(page.get('title', '')))
        except ValueError:
            continue
        if page_id is not None and url.scheme in ('http', 'https') and url.host:
            sites[page_id] = registrable_domain(url.host)
    return sites


def _post_body(request: dict, options: LoadOptions) -> tuple[bytes | None, bool]:
    post_data = request.get('postData')
    if post_data is None:
        return None, False
    text = post_data.get('text')
    if text is None and 'params' in post_data:
        text = '&'.join(
            f'{p.get("name", "")}={p.get("value", "")}' for p in post_data['params']
        )
    if text is None:
        return None, False
    body = str(text).encode('utf-8')
    if len(body) > options.max_post_bytes:
        logger.warning(
            'POST body of %d bytes truncated to %d bytes',
            len(body),
            options.max_post_bytes,
        )
        return body[: options.max_post_bytes], True
    return body, False


def parse_har(
    data: bytes,
    measurement_id: str = '',
    profile_id: str = '',
    *,
    options: LoadOptions = LoadOptions(),  # noqa: B008
    source: str = '',
) -> Corpus:
    """Parse a HAR 1.2 capture into request and cookie records.

    HAR carries no measurement or profile provenance, it is passed as arguments.
    One `RequestRecord` is produced per log entry in entry order, and one
    `CookieRecord` per `Set-Cookie` response header. Entries missing mandatory
    fields are reported in `Corpus.errors` and parsing continues.

    Args:
        data: HAR JSON bytes.
        measurement_id: Measurement the capture belongs to.
        profile_id: Browser profile that produced the capture.
        options: Loader options.
        source: Label of the input reported with entry-level errors.

    Returns:
        Corpus with requests, cookies, the browser profile and entry-level errors.

    Raises:
        CorpusParseError: If the input is not valid JSON or has no `log.entries`.

    Examples:
        >>> har = b'''{"log": {"entries": [{
        ...     "startedDateTime": "2018-05-20T10:00:00Z",
        ...     "request": {"method": "GET", "url": "https://a.example/p?x=1",
        ...                 "headers": []},
        ...     "response": {"headers": []}}]}}'''
        >>> corpus = cs.parse_har(har, 'M1', 'P1')
        >>> request = corpus.requests[0]
        >>> request.method, request.host, request.url.query
        ('GET', 'a.example', 'x=1')
    """
    har = _decode_json(data)
    if not isinstance(har, dict) or not isinstance(har.get('log'), dict):
        raise CorpusParseError('HAR input has no `log` object', offset=0)
    log = har['log']
    entries = log.get('entries')
    if not isinstance(entries, list):
        raise CorpusParseError('HAR input has no `log.entries` list', offset=0)

    page_sites = _page_sites(log)
    requests, cookies, errors = [], [], []
    user_agent = ''
    fallback_site = None

    for index, entry in enumerate(entries):
        try:
            request = entry['request']
            url = Url.parse(str(request['url']))
            timestamp = parse_timestamp(entry['startedDateTime'])
            method = str(request['method']).upper()
        except (KeyError, TypeError, ValueError) as e:
            errors.append(EntryError(index, f'missing or invalid field: {e}', source))
            continue

        if len(url.host) == 0:
            errors.append(EntryError(index, f'URL `{url.raw}` has no host', source))
            continue

        if fallback_site is None:
            fallback_site = registrable_domain(url.host)
        site = page_sites.get(entry.get('pageref'), fallback_site)

        referrer = _headers(request, 'referer')
        response = entry.get('response') or {}
        locations = _headers(response, 'location') or [
            str(response.get('redirectURL') or '')
        ]
        location = locations[0].strip()
        post_body, post_truncated = _post_body(request, options)
        if len(user_agent) == 0:
            user_agent = next(iter(_headers(request, 'user-agent')), '')

        try:
            record = RequestRecord(
                measurement_id=measurement_id,
                profile_id=profile_id,
                seq=index,
                timestamp=timestamp,
                method=method,
                url=url,
                referrer=Url.parse(referrer[0]) if len(referrer) > 0 else None,
                post_body=post_body,
                redirect_location=(
                    Url.parse(urljoin(url.raw, location)) if location else None
                ),
                top_level_site=site,
                post_truncated=post_truncated,
            )
        except (TypeError, ValueError) as e:
            errors.append(EntryError(index, str(e), source))
            continue
        requests.append(record)

        for header in _headers(response, 'set-cookie'):
            parsed = parse_set_cookie(header, url.host)
            if parsed is None:
                continue
            domain, name, value = parsed
            cookies.append(
                CookieRecord(
                    measurement_id=measurement_id,
                    profile_id=profile_id,
                    domain=domain,
                    name=name,
                    value=value.encode('utf-8'),
                    set_at=timestamp,
                )
            )

    if len(errors) > 0:
        logger.warning('%d HAR entries could not be parsed in %s', len(errors), source)

    profiles = ()
    if len(profile_id) > 0:
        profiles = (
            BrowserProfile(
                id=profile_id, measurement_id=measurement_id, user_agent=user_agent
            ),
        )
    return Corpus(
        profiles=profiles,
        requests=tuple(requests),
        cookies=tuple(cookies),
        errors=tuple(errors),
    )
