from __future__ import annotations

import ipaddress
import logging
from functools import lru_cache
from os import PathLike
from pathlib import Path

from publicsuffixlist import PublicSuffixList

__all__ = [
    'get_public_suffix_list',
    'normalize_host',
    'is_ip_literal',
    'registrable_domain',
    'has_public_suffix',
    'host_matches_suffix',
]

logger = logging.getLogger(__name__)


@lru_cache(64)
def get_public_suffix_list(psl_file: str | PathLike | None = None) -> PublicSuffixList:
    """Returns the public suffix list, loaded from `psl_file` if given, otherwise
    the snapshot bundled with the pinned `publicsuffixlist` distribution.
    """
    if psl_file is not None:
        logger.debug('loading public suffix list from %s', psl_file)
        with Path(psl_file).open('rb') as f:
            return PublicSuffixList(f)
    return PublicSuffixList()


def normalize_host(host: str) -> str:
    """Lowercase a host, strip its port, brackets and trailing dot."""
    host = host.strip().lower()
    if host.startswith('['):
        # bracketed IPv6 literal, possibly followed by a port
        return host[1 : host.find(']')] if ']' in host else host[1:]
    if host.count(':') == 1:
        host = host.split(':', 1)[0]
    return host.rstrip('.')


def is_ip_literal(host: str) -> bool:
    try:
        ipaddress.ip_address(host)
    except ValueError:
        return False
    return True


def registrable_domain(host: str, psl_file: str | PathLike | None = None) -> str:
    """Returns the registrable domain (eTLD+1) of a host.

    IP literals, single-label hosts and hosts that are themselves a public suffix
    are returned verbatim.

    Examples:
        >>> cs.registrable_domain('cdn.example.co.uk')
        'example.co.uk'
        >>> cs.registrable_domain('192.0.2.7')
        '192.0.2.7'
    """
    host = normalize_host(host)
    if is_ip_literal(host) or '.' not in host:
        return host
    domain = get_public_suffix_list(psl_file).privatesuffix(host)
    return host if domain is None else domain


def has_public_suffix(host: str, psl_file: str | PathLike | None = None) -> bool:
    """Whether a host ends with a public suffix listed in the snapshot (unknown
    top-level labels are not accepted).
    """
    host = normalize_host(host)
    if '.' not in host or is_ip_literal(host):
        return False
    psl = get_public_suffix_list(psl_file)
    suffix = psl.publicsuffix(host, accept_unknown=False)
    return suffix is not None and suffix != host


def host_matches_suffix(host: str, suffix: str) -> bool:
    # label-boundary suffix match: `a.b.com` matches `b.com`, `ab.com` does not
    return host == suffix or host.endswith('.' + suffix)
