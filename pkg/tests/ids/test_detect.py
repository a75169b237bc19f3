import pytest

import cookiesync as cs

from ..records import cookie, request

PLANTED = ('f3ab9c7e2d14b6a8', 'XQ7JZK2MWRPLNVTH')


class TestDetectIds:
    @pytest.fixture(autouse=True)
    def _setup(self):
        self.cookies = (
            # value shared by two profiles
            cookie('a.example', 'p_id', '1234abcd', profile_id='P1'),
            cookie('a.example', 'p_id', '1234abcd', profile_id='P2'),
            # values of different lengths
            cookie('b.example', 'data', '3rw3', profile_id='P1'),
            cookie('b.example', 'data', '70g63b5g', profile_id='P2'),
            # values too similar
            cookie('c.example', 'id', 'AAAC', profile_id='P1'),
            cookie('c.example', 'id', 'AABA', profile_id='P2'),
            # value too short
            cookie('d.example', 'key', '1hgtz', profile_id='P1'),
            # valid identifiers
            cookie('e.example', 'uid', PLANTED[0], profile_id='P1'),
            cookie('e.example', 'uid', PLANTED[1], profile_id='P2'),
        )

    def test_counterexamples_eliminated(self):
        ids = cs.detect_ids(cs.Corpus(cookies=self.cookies))
        assert ids == [
            cs.UserId('e.example', 'uid', PLANTED[1], 'P2', 'M1'),
            cs.UserId('e.example', 'uid', PLANTED[0], 'P1', 'M1'),
        ]

    def test_options(self):
        options = cs.IdOptions(min_id_length=4, similarity_threshold=0.9)
        ids = cs.detect_ids(cs.Corpus(cookies=self.cookies), options)
        hosts = {uid.owner_host for uid in ids}
        assert hosts == {'c.example', 'd.example', 'e.example'}

    def test_measurements_processed_separately(self):
        # the same value in two measurements is not shared between profiles
        cookies = (
            cookie('e.example', 'uid', PLANTED[0], profile_id='P1'),
            cookie(
                'e.example', 'uid', PLANTED[0], profile_id='P2', measurement_id='M2'
            ),
        )
        ids = cs.detect_ids(cs.Corpus(cookies=cookies))
        assert [uid.measurement_id for uid in ids] == ['M1', 'M2']

    def test_query_and_post_candidates(self):
        requests = (
            request(f'https://t.example/p?uid={PLANTED[0]}&v=1', 'news.com', 0),
            request(
                'https://t.example/c',
                'news.com',
                1,
                profile_id='P2',
                method='POST',
                post_body=f'uid={PLANTED[1]}'.encode(),
            ),
        )
        ids = cs.detect_ids(cs.Corpus(requests=requests))
        assert {uid.value for uid in ids} == set(PLANTED)


def _hex(i, salt, length=16):
    return f'{(i * 0x9E3779B97F4A7C15 + salt) % 2**64:016x}'[:length]


# same length as a hexadecimal value, no character in common with it
_DISJOINT = str.maketrans('0123456789abcdef', 'GHIJKLMNOPQRSTUV')


def test_planted_ids_among_decoys():
    planted, cookies = set(), []
    for i in range(25):
        host = f'id{i}.example'
        values = (_hex(i, 1), _hex(i, 2).translate(_DISJOINT))
        for profile_id, value in zip(('P1', 'P2'), values):
            planted.add((host, 'uid', value, profile_id))
            cookies.append(cookie(host, 'uid', value, profile_id=profile_id))

    # 200 decoy cookies, 50 of each eliminated kind
    for i in range(25):
        shared = _hex(i, 3)
        similar = _hex(i, 4)
        decoys = {
            'shared': (shared, shared),
            'lengths': (_hex(i, 5), _hex(i, 6, 12).translate(_DISJOINT)),
            'similar': (similar, similar[:-1] + 'x'),
            'short': (_hex(i, 7, 6), _hex(i, 8, 6).translate(_DISJOINT)),
        }
        for kind, values in decoys.items():
            for profile_id, value in zip(('P1', 'P2'), values):
                cookies.append(
                    cookie(f'{kind}{i}.example', 'sid', value, profile_id=profile_id)
                )

    ids = cs.detect_ids(cs.Corpus(cookies=tuple(cookies)))
    assert len(cookies) == 250
    assert {(u.owner_host, u.key, u.value, u.profile_id) for u in ids} == planted
    assert len(ids) == 50

def test_rules_are_intersected():
    # the shared value makes the whole key too similar, even though it is also
    # removed as a cross-profile value
    candidates = [
        cs.IdCandidate('a.example', 'uid', 'aaaaaaaaaaaaaaab', 'P1', 'cookie'),
        cs.IdCandidate('a.example', 'uid', 'aaaaaaaaaaaaaaab', 'P2', 'cookie'),
        cs.IdCandidate('a.example', 'uid', 'aaaaaaaaaaaaaaac', 'P3', 'cookie'),
    ]
    assert cs.surviving_candidates(candidates) == set()


def test_extract_candidates():
    requests = [request('https://t.example/p?a=x%3D1%26y&b=2', 'news.com')]
    cookies = [
        cookie('t.example', 'packed', 'id=abc|v=2'),
        cookie('t.example', 'uid', 'f3ab%209c'),
    ]
    candidates = cs.extract_candidates(requests, cookies)
    pairs = [(c.key, c.value, c.origin) for c in candidates]
    assert pairs == [
        ('a', 'x=1', 'url_param'),
        ('b', '2', 'url_param'),
        ('id', 'abc', 'cookie'),
        ('v', '2', 'cookie'),
        ('uid', 'f3ab 9c', 'cookie'),
    ]


def test_ids_jsonl():
    ids = [
        cs.UserId('e.example', 'uid', PLANTED[1], 'P2', 'M1'),
        cs.UserId('e.example', 'uid', PLANTED[0], 'P1', 'M1'),
    ]
    data = cs.write_ids_jsonl(ids)
    assert data.count(b'\n') == 2
    assert cs.parse_ids_jsonl(data) == ids
    with pytest.raises(cs.CorpusParseError, match='line 3'):
        cs.parse_ids_jsonl(data + b'[1, 2]\n')
