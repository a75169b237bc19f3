from __future__ import annotations

from collections import Counter
from datetime import datetime, timezone
from typing import NamedTuple
from urllib.parse import urlsplit

import equinox as eqx

from .._utils import check_nonempty, obj_type_str
from ..domains import normalize_host
from ..errors import CorpusParseError

__all__ = [
    'Url',
    'RequestRecord',
    'CookieRecord',
    'Measurement',
    'BrowserProfile',
    'EntryError',
    'Corpus',
    'parse_timestamp',
    'format_timestamp',
]


def parse_timestamp(text: str) -> datetime:
    """Parse an RFC 3339 timestamp into an aware UTC datetime."""
    if not isinstance(text, str):
        raise TypeError(f'A timestamp must be a string, but got {obj_type_str(text)}.')
    if text.endswith(('Z', 'z')):
        text = text[:-1] + '+00:00'
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).isoformat().replace('+00:00', 'Z')


class Url(eqx.Module):
    """Structured URL.

    The original text is kept in `raw` and the query is kept byte exact (never
    decoded) so that encoded parameters can be analyzed later. The host is
    lowercased and stripped of its port.

    Attributes:
        raw _(str)_: Original text.
        scheme _(str)_: Lowercase scheme, empty for schemeless text.
        host _(str)_: Lowercase host without port.
        port _(int, optional)_: Explicit port.
        path _(str)_: Path, possibly empty.
        query _(str)_: Raw query, without the leading `?`.
        fragment _(str)_: Raw fragment, without the leading `#`.
    """

    raw: str
    scheme: str
    host: str
    port: int | None
    path: str
    query: str
    fragment: str

    @classmethod
    def parse(cls, text: str) -> Url:
        """Parse an absolute or schemeless (`host/path?query`) URL.

        Examples:
            >>> url = cs.Url.parse('https://A.example:8443/p?x=1')
            >>> url.host, url.port, url.query
            ('a.example', 8443, 'x=1')
            >>> cs.Url.parse('foo.com/sync?partner=1').host
            'foo.com'
        """
        if not isinstance(text, str):
            raise TypeError(f'A URL must be a string, but got {obj_type_str(text)}.')
        target = text if '://' in text or text.startswith('//') else '//' + text
        parts = urlsplit(target)
        try:
            port = parts.port
        except ValueError:
            port = None
        return cls(
            raw=text,
            scheme=parts.scheme.lower(),
            host=normalize_host(parts.hostname or ''),
            port=port,
            path=parts.path,
            query=parts.query,
            fragment=parts.fragment,
        )

    def __str__(self) -> str:
        return self.raw


class RequestRecord(eqx.Module):
    """One captured HTTP request.

    Attributes:
        measurement_id _(str)_: Measurement the request belongs to.
        profile_id _(str)_: Browser profile that issued the request.
        seq _(int)_: Position of the request, strictly increasing per
            `(measurement_id, profile_id)`.
        timestamp _(datetime)_: UTC instant of the request.
        method _(str)_: Uppercase method token (`GET`, `POST`, ...).
        url _(Url)_: Requested URL.
        referrer _(Url, optional)_: `Referer` header.
        post_body _(bytes, optional)_: Request body.
        redirect_location _(Url, optional)_: Response `Location` header.
        top_level_site _(str)_: Registrable domain of the page under visit.
        post_truncated _(bool)_: Whether `post_body` was truncated at load time.
    """

    measurement_id: str
    profile_id: str
    seq: int
    timestamp: datetime
    method: str
    url: Url
    referrer: Url | None
    post_body: bytes | None
    redirect_location: Url | None
    top_level_site: str
    post_truncated: bool = False

    def __check_init__(self):
        if len(self.url.host) == 0:
            raise ValueError(f'Request URL `{self.url.raw}` has no host.')
        if self.url.host != self.url.host.lower():
            raise ValueError(f'Request host `{self.url.host}` must be lowercase.')
        if len(self.method) == 0 or not self.method.isupper():
            raise ValueError(
                f'Argument `method` must be an uppercase token, but is {self.method!r}.'
            )
        if self.post_body is not None and not isinstance(self.post_body, bytes):
            raise TypeError(
                'Argument `post_body` must be bytes, but has type'
                f' {obj_type_str(self.post_body)}.'
            )

    @property
    def host(self) -> str:
        return self.url.host


class CookieRecord(eqx.Module):
    """One cookie observed in a `Set-Cookie` response header.

    Attributes:
        measurement_id _(str)_: Measurement the cookie belongs to.
        profile_id _(str)_: Browser profile that stored the cookie.
        domain _(str)_: Cookie scope domain, lowercase and without leading dot.
        name _(str)_: Cookie name.
        value _(bytes)_: Cookie value, byte exact.
        set_at _(datetime)_: UTC instant the cookie was set.
    """

    measurement_id: str
    profile_id: str
    domain: str
    name: str
    value: bytes
    set_at: datetime

    def __check_init__(self):
        check_nonempty(self.domain, 'domain')
        check_nonempty(self.name, 'name')
        if not isinstance(self.value, bytes):
            raise TypeError(
                'Argument `value` must be bytes, but has type'
                f' {obj_type_str(self.value)}.'
            )


class Measurement(eqx.Module):
    id: str
    ordinal: int
    week_label: str = ''
    pre_gdpr: bool = False

    @property
    def calendar_week(self) -> int | None:
        # `CW20` -> 20
        digits = ''.join(c for c in self.week_label if c.isdigit())
        return int(digits) if len(digits) > 0 else None


class BrowserProfile(eqx.Module):
    id: str
    measurement_id: str = ''
    country_tag: str = ''
    user_agent: str = ''


class EntryError(NamedTuple):
    index: int
    message: str
    source: str = ''


class Corpus(eqx.Module):
    """A loaded traffic corpus.

    Attributes:
        measurements _(tuple of Measurement)_: Measurements of the series.
        profiles _(tuple of BrowserProfile)_: Browser profiles.
        requests _(tuple of RequestRecord)_: Requests in load order.
        cookies _(tuple of CookieRecord)_: Cookies in load order.
        errors _(tuple of EntryError)_: Entry-level errors collected while loading.
        skipped _(int)_: Number of malformed lines skipped by a lenient load.
    """

    measurements: tuple[Measurement, ...] = ()
    profiles: tuple[BrowserProfile, ...] = ()
    requests: tuple[RequestRecord, ...] = ()
    cookies: tuple[CookieRecord, ...] = ()
    errors: tuple[EntryError, ...] = ()
    skipped: int = 0

    def __check_init__(self):
        ordinals = Counter(m.ordinal for m in self.measurements)
        duplicates = sorted(o for o, n in ordinals.items() if n > 1)
        if len(duplicates) > 0:
            raise CorpusParseError(
                f'Measurement ordinals must be unique, got {duplicates}.'
            )
        profile_ids = Counter((p.measurement_id, p.id) for p in self.profiles)
        duplicates = sorted(k for k, n in profile_ids.items() if n > 1)
        if len(duplicates) > 0:
            raise CorpusParseError(
                f'Profile ids must be unique within a measurement, got {duplicates}.'
            )

    @classmethod
    def merge(cls, *corpora: Corpus) -> Corpus:
        return cls(
            measurements=tuple(m for c in corpora for m in c.measurements),
            profiles=tuple(p for c in corpora for p in c.profiles),
            requests=tuple(r for c in corpora for r in c.requests),
            cookies=tuple(k for c in corpora for k in c.cookies),
            errors=tuple(e for c in corpora for e in c.errors),
            skipped=sum(c.skipped for c in corpora),
        )

    @property
    def measurement_ids(self) -> list[str]:
        """Measurement ids sorted by ordinal, followed by ids seen only in records."""
        ids = [m.id for m in sorted(self.measurements, key=lambda m: m.ordinal)]
        seen = set(ids)
        for record in (*self.requests, *self.cookies):
            if record.measurement_id not in seen:
                seen.add(record.measurement_id)
                ids.append(record.measurement_id)
        return ids

    def by_measurement(self) -> dict[str, Corpus]:
        """Split the corpus per measurement id, in measurement order."""
        return {
            mid: Corpus(
                measurements=tuple(m for m in self.measurements if m.id == mid),
                profiles=tuple(p for p in self.profiles if p.measurement_id == mid),
                requests=tuple(r for r in self.requests if r.measurement_id == mid),
                cookies=tuple(c for c in self.cookies if c.measurement_id == mid),
            )
            for mid in self.measurement_ids
        }

    def __str__(self) -> str:
        parts = {
            'Measurements': len(self.measurements),
            'Profiles    ': len(self.profiles),
            'Requests    ': len(self.requests),
            'Cookies     ': len(self.cookies),
            'Errors      ': len(self.errors) if len(self.errors) > 0 else None,
            'Skipped     ': self.skipped if self.skipped > 0 else None,
        }
        parts = {k: v for k, v in parts.items() if v is not None}
        parts_str = '\n'.join(f'{k}: {v}' for k, v in parts.items())
        return '==== Corpus ====\n' + parts_str
