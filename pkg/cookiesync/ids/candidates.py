from __future__ import annotations

import re
from collections.abc import Iterable, Iterator
from typing import NamedTuple
from urllib.parse import unquote

from ..log_model import CookieRecord, RequestRecord

__all__ = ['IdCandidate', 'UserId', 'extract_candidates', 'split_pairs']


class IdCandidate(NamedTuple):
    """A `(key, value)` pair observed for one profile.

    Attributes:
        owner_host: Host that set (cookies) or received (requests) the pair.
        key: Parameter or cookie name.
        value: Decoded parameter text.
        profile_id: Profile the pair was observed for.
        origin: `cookie`, `url_param` or `post_param`.
        measurement_id: Measurement the pair was observed in.
    """

    owner_host: str
    key: str
    value: str
    profile_id: str
    origin: str
    measurement_id: str = ''


class UserId(NamedTuple):
    """A validated user identifier.

    Attributes:
        owner_host: Host owning the identifier.
        key: Parameter or cookie name carrying it.
        value: Identifier value.
        profile_id: The only profile the value was observed for.
        measurement_id: Measurement the identifier was detected in.
    """

    owner_host: str
    key: str
    value: str
    profile_id: str
    measurement_id: str = ''


def split_pairs(text: str, delimiters: str) -> Iterator[tuple[str, str]]:
    """Split text on delimiters, then each fragment on its first `=`.

    Fragments without `=`, with an empty key or with an empty value are skipped.

    Examples:
        >>> list(cs.split_pairs('uid=1234-abcd-f1&x=2&flag', '&;,|'))
        [('uid', '1234-abcd-f1'), ('x', '2')]
    """
    for fragment in re.split(f'[{re.escape(delimiters)}]', text):
        key, sep, value = fragment.partition('=')
        if sep and key and value:
            yield key, value


def _decode_text(data: bytes | None) -> str | None:
    if data is None:
        return None
    try:
        return data.decode('utf-8')
    except UnicodeDecodeError:
        return None


def extract_candidates(
    requests: Iterable[RequestRecord],
    cookies: Iterable[CookieRecord],
    delimiters: str = '&;,|',
) -> list[IdCandidate]:
    """Extract identifier candidates from request queries, POST bodies and cookies.

    Queries and bodies are percent-decoded once, then split into `key=value`
    pairs on `delimiters`. A cookie whose decoded value contains a delimiter is
    split the same way, otherwise the cookie `(name, value)` is the candidate.
    Binary bodies and cookie values that are not valid UTF-8 are skipped.

    Args:
        requests: Request records.
        cookies: Cookie records.
        delimiters: Characters separating pairs.

    Returns:
        Candidates in record order, requests first.
    """
    candidates = []

    for request in requests:
        sources = [(request.url.query, 'url_param')]
        body = _decode_text(request.post_body)
        if body is not None:
            sources.append((body, 'post_param'))
        for text, origin in sources:
            for key, value in split_pairs(unquote(text), delimiters):
                candidates.append(
                    IdCandidate(
                        request.host,
                        key,
                        value,
                        request.profile_id,
                        origin,
                        request.measurement_id,
                    )
                )

    for cookie in cookies:
        value = _decode_text(cookie.value)
        if value is None:
            continue
        value = unquote(value)
        if any(d in value for d in delimiters):
            pairs = list(split_pairs(value, delimiters))
        else:
            pairs = [(cookie.name, value)] if value else []
        for key, v in pairs:
            candidates.append(
                IdCandidate(
                    cookie.domain,
                    key,
                    v,
                    cookie.profile_id,
                    'cookie',
                    cookie.measurement_id,
                )
            )

    return candidates
