from __future__ import annotations

from datetime import datetime, timedelta, timezone

import cookiesync as cs

T0 = datetime(2018, 5, 20, 10, 0, tzinfo=timezone.utc)


def request(
    url: str,
    site: str,
    seq: int = 0,
    *,
    profile_id: str = 'P0',
    measurement_id: str = 'M1',
    method: str = 'GET',
    referrer: str | None = None,
    post_body: bytes | None = None,
) -> cs.RequestRecord:
    return cs.RequestRecord(
        measurement_id=measurement_id,
        profile_id=profile_id,
        seq=seq,
        timestamp=T0 + timedelta(seconds=seq),
        method=method,
        url=cs.Url.parse(url),
        referrer=None if referrer is None else cs.Url.parse(referrer),
        post_body=post_body,
        redirect_location=None,
        top_level_site=site,
    )


def cookie(
    domain: str,
    name: str,
    value: str,
    seconds: int = 0,
    *,
    profile_id: str = 'P0',
    measurement_id: str = 'M1',
) -> cs.CookieRecord:
    return cs.CookieRecord(
        measurement_id=measurement_id,
        profile_id=profile_id,
        domain=domain,
        name=name,
        value=value.encode('utf-8'),
        set_at=T0 + timedelta(seconds=seconds),
    )
