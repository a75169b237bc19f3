import json
from datetime import datetime, timezone

import pytest

import cookiesync as cs


def _entry(url, **kwargs):
    entry = {
        'startedDateTime': kwargs.pop('started', '2018-05-20T12:00:00.000+02:00'),
        'request': {
            'method': kwargs.pop('method', 'GET'),
            'url': url,
            'headers': kwargs.pop('request_headers', []),
        },
        'response': {'headers': kwargs.pop('response_headers', [])},
    }
    post_data = kwargs.pop('post_data', None)
    if post_data is not None:
        entry['request']['postData'] = post_data
    entry.update(kwargs)
    return entry


def _har(*entries, pages=()):
    log = {'pages': list(pages), 'entries': list(entries)}
    return json.dumps({'log': log}).encode()


class TestParseHar:
    @pytest.fixture(autouse=True)
    def _setup(self):
        self.har = _har(
            _entry(
                'https://www.news.com/',
                pageref='page_1',
                request_headers=[{'name': 'User-Agent', 'value': 'Firefox/60.0'}],
                response_headers=[
                    {'name': 'Set-Cookie', 'value': 'fp=aa11bb22cc33; Path=/'}
                ],
            ),
            _entry(
                'https://px.tracker.com:8443/p?uid=9f3c2a7be41d0c55',
                pageref='page_1',
                request_headers=[
                    {'name': 'Referer', 'value': 'https://www.news.com/'}
                ],
                response_headers=[
                    {
                        'name': 'Set-Cookie',
                        'value': 'uid=9f3c2a7be41d0c55; Domain=.tracker.com',
                    },
                    {'name': 'Location', 'value': '/next?x=1'},
                ],
            ),
            _entry(
                'https://api.tracker.com/c',
                method='post',
                pageref='page_1',
                post_data={'mimeType': 'text/plain', 'text': 'uid=9f3c2a7be41d0c55'},
            ),
            pages=[{'id': 'page_1', 'title': 'https://www.news.com/'}],
        )

    def test_requests(self):
        corpus = cs.parse_har(self.har, 'M1', 'P1')
        assert [r.seq for r in corpus.requests] == [0, 1, 2]
        first, second, third = corpus.requests
        assert first.timestamp == datetime(2018, 5, 20, 10, tzinfo=timezone.utc)
        assert {r.top_level_site for r in corpus.requests} == {'news.com'}
        assert second.host == 'px.tracker.com'
        assert second.url.port == 8443
        assert second.referrer.host == 'www.news.com'
        assert second.redirect_location.raw == 'https://px.tracker.com:8443/next?x=1'
        assert third.method == 'POST'
        assert third.post_body == b'uid=9f3c2a7be41d0c55'

    def test_cookies(self):
        corpus = cs.parse_har(self.har, 'M1', 'P1')
        cookies = [(c.domain, c.name, c.value) for c in corpus.cookies]
        assert cookies == [
            ('www.news.com', 'fp', b'aa11bb22cc33'),
            ('tracker.com', 'uid', b'9f3c2a7be41d0c55'),
        ]
        assert corpus.cookies[0].set_at == corpus.requests[0].timestamp

    def test_profile(self):
        corpus = cs.parse_har(self.har, 'M1', 'P1')
        [profile] = corpus.profiles
        assert (profile.id, profile.measurement_id) == ('P1', 'M1')
        assert profile.user_agent == 'Firefox/60.0'

    def test_post_truncation(self):
        options = cs.LoadOptions(max_post_bytes=4)
        third = cs.parse_har(self.har, 'M1', 'P1', options=options).requests[2]
        assert third.post_body == b'uid='
        assert third.post_truncated

    def test_site_without_pages(self):
        har = _har(_entry('https://a.example.co.uk/'), _entry('https://cdn.b.com/x'))
        corpus = cs.parse_har(har, 'M1', 'P1')
        assert [r.top_level_site for r in corpus.requests] == ['example.co.uk'] * 2


def test_entry_errors_collected():
    har = _har(
        _entry('https://a.com/'),
        {'request': {'method': 'GET', 'url': 'https://b.com/'}},
        _entry('https:///no-host'),
    )
    corpus = cs.parse_har(har, 'M1', 'P1', source='capture.har')
    assert len(corpus.requests) == 1
    assert [e.index for e in corpus.errors] == [1, 2]
    assert corpus.errors[0].source == 'capture.har'


def test_unparsable_page_title():
    har = _har(
        _entry('https://cdn.b.com/x', pageref='page_1'),
        pages=[{'id': 'page_1', 'title': 'https://[broken/'}],
    )
    corpus = cs.parse_har(har, 'M1', 'P1')
    assert corpus.requests[0].top_level_site == 'b.com'


@pytest.mark.parametrize(
    ('data', 'message'),
    [
        (b'{"log": ', 'Malformed HAR JSON'),
        (b'[]', 'no `log` object'),
        (b'{"log": {}}', 'no `log.entries`'),
        (b'\xff\xfe', 'not valid UTF-8'),
    ],
)
def test_malformed_har(data, message):
    with pytest.raises(cs.CorpusParseError, match=message) as e:
        cs.parse_har(data)
    assert e.value.offset is not None


def test_provenance_from_filename():
    assert cs.provenance_from_filename('data/M3__P2.har') == ('M3', 'P2')
    assert cs.provenance_from_filename('firefox.har') == ('', 'firefox')


@pytest.mark.parametrize(
    ('header', 'expected'),
    [
        ('a=1; Domain=.Bar.org', ('bar.org', 'a', '1')),
        ('a=b=c; Path=/', ('x.com', 'a', 'b=c')),
        ('novalue', None),
        ('=1', None),
    ],
)
def test_parse_set_cookie(header, expected):
    assert cs.parse_set_cookie(header, 'x.com') == expected
