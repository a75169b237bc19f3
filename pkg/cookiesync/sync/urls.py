from __future__ import annotations

import re
from urllib.parse import unquote

from ..domains import has_public_suffix
from ..log_model import Url

__all__ = ['extract_urls']

# characters that never belong to a URL embedded in a parameter value
_STOP = r'\s"\'<>|'

_URL_RE = re.compile(
    rf"""
    (?<![\w.@/-])                                  # start on a token boundary
    (?:
        (?P<absolute>https?://[^{_STOP}/?#]+[^{_STOP}]*)
      |
        (?P<bare>(?:[a-z0-9](?:[a-z0-9-]*[a-z0-9])?\.)+[a-z0-9-]+/[^{_STOP}]*)
    )
    """,
    re.IGNORECASE | re.VERBOSE,
)

_TRAILING = '.,)'


def extract_urls(text: str) -> list[Url]:
    """Extract the URLs embedded in a text.

    Absolute `http(s)://` URLs and schemeless `host/path?query` URLs are
    recognized, the latter only when the host ends with a known public suffix.
    The percent-decoded query of every URL found is searched recursively, so that
    URLs passed as encoded parameters of other URLs are found as well. Matches
    that cannot be parsed as URLs are skipped.

    Args:
        text: Text to search.

    Returns:
        Distinct URLs in order of appearance, each outer URL before the URLs nested
        in its query.

    Examples:
        >>> text = 'foo.com/sync?partner=https%3A%2F%2Fbar.org%2Fpixel%3Fuid%3Dabcdef12'
        >>> [url.raw for url in cs.extract_urls(text)]
        ['foo.com/sync?partner=https%3A%2F%2Fbar.org%2Fpixel%3Fuid%3Dabcdef12', 'https://bar.org/pixel?uid=abcdef12']
    """  # noqa: E501
    found = {}
    _extract(text, found)
    return list(found.values())


def _extract(text: str, found: dict[str, Url]):
    for match in _URL_RE.finditer(text):
        raw = match.group(0).rstrip(_TRAILING)
        try:
            url = Url.parse(raw)
        except ValueError:
            # unbalanced IPv6 brackets
            continue
        if len(url.host) == 0:
            continue
        if match.group('bare') is not None and not has_public_suffix(url.host):
            continue
        if raw not in found:
            found[raw] = url
        if len(url.query) > 0:
            _extract(unquote(url.query), found)
