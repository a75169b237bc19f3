from __future__ import annotations

import base64
import gzip
import json
import logging
import zlib
from collections import defaultdict
from collections.abc import Sequence
from datetime import datetime, timedelta, timezone
from difflib import SequenceMatcher
from os import PathLike
from pathlib import Path
from typing import Any, NamedTuple

import equinox as eqx
import jax
import numpy as np
from jaxtyping import PRNGKeyArray

from ._utils import canonical_json, obj_type_str
from .companies import CompanyDb, write_company_db
from .errors import ScenarioError
from .ids import IdCandidate, UserId
from .ids.rules import (
    rule_cross_profile,
    rule_length_consistency,
    rule_min_length,
    rule_similarity,
)
from .ids.similarity import ratcliff_obershelp
from .log_model import (
    BrowserProfile,
    CookieRecord,
    Corpus,
    Measurement,
    RequestRecord,
    Url,
    write_jsonl,
)
from .sync import CODECS

__all__ = [
    'DECOY_FAMILIES',
    'ScenarioSpec',
    'Decoy',
    'GroundTruth',
    'rand_hex',
    'encode_chain',
    'company_db_of',
    'generate_corpus',
    'write_scenario',
]

logger = logging.getLogger(__name__)

# one decoy family per identifier elimination rule
DECOY_FAMILIES = ('cross_profile', 'length', 'similarity', 'min_length')

_COMPRESSIONS = ('deflate', 'gzip')
_HEX = np.array(list('0123456789abcdef'))
_START = datetime(2018, 5, 20, tzinfo=timezone.utc)
_SHORT_DECOY_LENGTH = 5
_MAX_REDRAWS = 1000
# margin kept below the similarity threshold between two planted identifiers
_SIMILARITY_MARGIN = 0.05


class ScenarioSpec(eqx.Module):
    """Parameters of a synthetic traffic scenario.

    Attributes:
        seed _(int)_: 64-bit seed fully determining the generated bytes.
        n_profiles _(int)_: Number of browser profiles.
        n_sites _(int)_: Number of first-party sites visited by each profile.
        stars _(tuple)_: `(center company, leaf count)` of each sync star.
        id_length _(int)_: Length of the planted hexadecimal identifiers.
        codec_chains _(tuple)_: Codec chains, in encoding order, applied in turn to
            the identifiers carried by the sync requests.
        noise _(int)_: Number of decoy identifiers, cycling through the families
            `cross_profile`, `length`, `similarity` and `min_length`.
        similarity_threshold _(float)_: Similarity threshold of the identifier
            detection, planted identifiers stay below it by a margin.
        measurement_id _(str)_: Measurement id of the corpus.
    """

    seed: int
    n_profiles: int = 2
    n_sites: int = 3
    stars: tuple[tuple[str, int], ...] = (('Center0', 5),)
    id_length: int = 16
    codec_chains: tuple[tuple[str, ...], ...] = ((),)
    noise: int = 0
    similarity_threshold: float = 0.66
    measurement_id: str = 'M1'

    def __init__(
        self,
        seed: int,
        n_profiles: int = 2,
        n_sites: int = 3,
        stars: Sequence[tuple[str, int]] = (('Center0', 5),),
        id_length: int = 16,
        codec_chains: Sequence[Sequence[str]] = ((),),
        noise: int = 0,
        similarity_threshold: float = 0.66,
        measurement_id: str = 'M1',
    ):
        self.seed = seed
        self.n_profiles = n_profiles
        self.n_sites = n_sites
        self.stars = tuple((str(name), int(k)) for name, k in stars)
        self.id_length = id_length
        self.codec_chains = tuple(tuple(chain) for chain in codec_chains)
        self.noise = noise
        self.similarity_threshold = similarity_threshold
        self.measurement_id = measurement_id

    def __check_init__(self):
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ScenarioError(
                f'Argument `seed` must be an integer in [0, 2**64), but is'
                f' {self.seed!r}.'
            )
        if self.n_profiles < 1 or self.n_sites < 1:
            raise ScenarioError(
                'Arguments `n_profiles` and `n_sites` must be at least 1, but are'
                f' {self.n_profiles} and {self.n_sites}.'
            )
        if any(k < 1 for _, k in self.stars):
            raise ScenarioError(
                f'Every star needs at least one leaf, got {self.stars}.'
            )
        if len({name for name, _ in self.stars}) != len(self.stars):
            raise ScenarioError('Star center names must be unique.')
        if self.id_length < 8:
            raise ScenarioError(
                f'Argument `id_length` must be at least 8, but is {self.id_length}.'
            )
        if len(self.codec_chains) == 0:
            raise ScenarioError('Argument `codec_chains` must hold at least one chain.')
        for chain in self.codec_chains:
            _check_chain(chain)
        if self.noise < 0:
            raise ScenarioError(
                f'Argument `noise` must be nonnegative, got {self.noise}.'
            )
        if self.noise > 0 and self.n_profiles < 2:
            raise ScenarioError('Decoys need at least 2 profiles.')
        if not _SIMILARITY_MARGIN < self.similarity_threshold <= 1.0:
            raise ScenarioError(
                'Argument `similarity_threshold` must be in (0.05, 1], but is'
                f' {self.similarity_threshold}.'
            )

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ScenarioSpec:
        if not isinstance(data, dict):
            raise ScenarioError(
                f'A scenario must be a JSON object, but got {obj_type_str(data)}.'
            )
        try:
            return cls(**data)
        except ScenarioError:
            raise
        except (TypeError, ValueError) as e:
            raise ScenarioError(f'Invalid scenario: {e}') from e

    @classmethod
    def from_json(cls, data: bytes | str) -> ScenarioSpec:
        try:
            obj = json.loads(data)
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise ScenarioError(f'Malformed scenario JSON: {e}') from e
        return cls.from_dict(obj)

    def to_dict(self) -> dict[str, Any]:
        return {
            'seed': self.seed,
            'n_profiles': self.n_profiles,
            'n_sites': self.n_sites,
            'stars': [list(star) for star in self.stars],
            'id_length': self.id_length,
            'codec_chains': [list(chain) for chain in self.codec_chains],
            'noise': self.noise,
            'similarity_threshold': self.similarity_threshold,
            'measurement_id': self.measurement_id,
        }


def _check_chain(chain: tuple[str, ...]):
    unknown = [c for c in chain if c not in CODECS]
    if len(unknown) > 0:
        raise ScenarioError(f'Unknown codecs {unknown}, expected codecs in {CODECS}.')
    if len(chain) > 3:
        raise ScenarioError(f'Codec chain {chain} is longer than 3 codecs.')
    for i, codec in enumerate(chain):
        if codec in _COMPRESSIONS and (i + 1 == len(chain) or chain[i + 1] != 'base64'):
            raise ScenarioError(
                f'Compression `{codec}` must be followed by `base64` in chain {chain}.'
            )


def encode_chain(value: str, chain: Sequence[str]) -> str:
    """Encode a value through a codec chain, in order.

    Percent-encoding escapes every byte, Base64 uses the URL-safe alphabet without
    padding, and gzip streams carry no modification time.

    Examples:
        >>> cs.encode_chain('hello', ['base64', 'base64'])
        'YUdWc2JHOA'
        >>> cs.encode_chain('hi', ['percent'])
        '%68%69'
    """
    data = value.encode('utf-8')
    for codec in chain:
        if codec == 'percent':
            data = ''.join(f'%{b:02X}' for b in data).encode('ascii')
        elif codec == 'base64':
            data = base64.urlsafe_b64encode(data).rstrip(b'=')
        elif codec == 'deflate':
            data = zlib.compress(data, 9)
        elif codec == 'gzip':
            data = gzip.compress(data, mtime=0)
        else:
            raise ValueError(f'Unknown codec {codec!r}, expected one of {CODECS}.')
    return data.decode('ascii')


def rand_hex(key: PRNGKeyArray, shape: tuple[int, int]) -> list[str]:
    """Returns `shape[0]` random lowercase hexadecimal strings of `shape[1]`
    characters.

    Examples:
        >>> key = jax.random.PRNGKey(42)
        >>> len(cs.rand_hex(key, (3, 16))[0])
        16
    """
    digits = np.asarray(jax.random.randint(key, shape, 0, 16))
    return [''.join(row) for row in _HEX[digits]]


class _IdDraws:
    # stateful stream of identifiers: each draw consumes the next key derived from
    # the scenario key, planted values are redrawn when too close to a value
    # already planted for another profile

    def __init__(self, key: PRNGKeyArray, width: int, max_similarity: float):
        self.key = key
        self.width = width
        self.max_similarity = max_similarity
        self.counter = 0
        self.planted: list[tuple[str, str]] = []

    def raw(self, length: int) -> str:
        key = jax.random.fold_in(self.key, self.counter)
        self.counter += 1
        return rand_hex(key, (1, self.width))[0][:length]

    def _too_close(self, value: str, profile_id: str) -> bool:
        for other, other_profile in self.planted:
            if other_profile == profile_id:
                continue
            if (
                SequenceMatcher(None, value, other, autojunk=False).quick_ratio()
                >= self.max_similarity
                and ratcliff_obershelp(value, other) >= self.max_similarity
            ):
                return True
        return False

    def draw(self, length: int, profile_id: str) -> str:
        for _ in range(_MAX_REDRAWS):
            value = self.raw(length)
            if not self._too_close(value, profile_id):
                self.planted.append((value, profile_id))
                return value
            logger.debug('redrawing identifier too close to a planted one')
        raise ScenarioError(
            f'Could not draw an identifier of length {length} dissimilar enough from'
            f' {len(self.planted)} others, increase `id_length`.'
        )


class Decoy(NamedTuple):
    """A non-identifier value violating one elimination rule."""

    owner_host: str
    key: str
    value: str
    profile_id: str
    family: str


class GroundTruth(NamedTuple):
    """What a scenario planted.

    Attributes:
        user_ids: Every planted identifier, owned by the domain of its cookie.
        sync_pairs: Every planted `(sender company, receiver company)` sync.
        decoys: Every decoy value with its family.
    """

    user_ids: tuple[UserId, ...]
    sync_pairs: tuple[tuple[str, str], ...]
    decoys: tuple[Decoy, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            'user_ids': [u._asdict() for u in self.user_ids],
            'sync_pairs': [list(pair) for pair in self.sync_pairs],
            'decoys': [d._asdict() for d in self.decoys],
        }


def _scenario_key(seed: int) -> PRNGKeyArray:
    # 64-bit seed: the low word seeds the key, the high word is folded in
    key = jax.random.PRNGKey(seed & 0xFFFFFFFF)
    return jax.random.fold_in(key, seed >> 32)


def _center_domain(j: int) -> str:
    return f'center{j}.com'


def _leaf(j: int, k: int) -> tuple[str, str]:
    # company name and domain
    return f'Leaf{j}-{k}', f'leaf{j}-{k}.com'


def company_db_of(spec: ScenarioSpec) -> CompanyDb:
    """Returns the company database of a scenario: star centers, leaves and decoy
    hosts. First-party sites are left out.
    """
    entries = {}
    for j, (center, n_leaves) in enumerate(spec.stars):
        entries[_center_domain(j)] = center
        for k in range(n_leaves):
            name, domain = _leaf(j, k)
            entries[domain] = name
    for i in range(spec.noise):
        entries[f'decoy{i}.com'] = f'Decoy{i}'
    return CompanyDb(entries, 'synthetic', None)


class _Traffic:
    # records of one measurement, with a clock ticking one second per record

    def __init__(self, measurement_id: str):
        self.measurement_id = measurement_id
        self.now = _START
        self.seqs = defaultdict(int)
        self.requests: list[RequestRecord] = []
        self.cookies: list[CookieRecord] = []
        self.planted: list[UserId] = []

    def tick(self) -> datetime:
        self.now += timedelta(seconds=1)
        return self.now

    def request(self, profile_id: str, url: str, site: str) -> datetime:
        when = self.tick()
        self.requests.append(
            RequestRecord(
                self.measurement_id,
                profile_id,
                self.seqs[profile_id],
                when,
                'GET',
                Url.parse(url),
                None,
                None,
                None,
                site,
            )
        )
        self.seqs[profile_id] += 1
        return when

    def cookie(
        self,
        profile_id: str,
        domain: str,
        name: str,
        value: str,
        when: datetime,
        *,
        planted: bool = False,
    ):
        self.cookies.append(
            CookieRecord(
                self.measurement_id,
                profile_id,
                domain,
                name,
                value.encode('ascii'),
                when,
            )
        )
        if planted:
            self.planted.append(
                UserId(domain, name, value, profile_id, self.measurement_id)
            )


def _draw_decoys(spec: ScenarioSpec, draws: _IdDraws) -> list[Decoy]:
    decoys = []
    for i in range(spec.noise):
        family = DECOY_FAMILIES[i % len(DECOY_FAMILIES)]
        host = f'decoy{i}.com'
        if family == 'cross_profile':
            value = draws.raw(spec.id_length)
            values = [('dup', value, 'P0'), ('dup', value, 'P1')]
        elif family == 'length':
            values = [
                ('len', draws.draw(spec.id_length, 'P0'), 'P0'),
                ('len', draws.draw(spec.id_length + 4, 'P1'), 'P1'),
            ]
        elif family == 'similarity':
            value = draws.raw(spec.id_length)
            last = f'{(int(value[-1], 16) + 1) % 16:x}'
            values = [('near', value, 'P0'), ('near', value[:-1] + last, 'P1')]
        else:
            values = [('short', draws.raw(_SHORT_DECOY_LENGTH), 'P0')]
        decoys += [Decoy(host, key, v, pid, family) for key, v, pid in values]
    return decoys


def _check_planted(planted: list[UserId], decoys: list[Decoy], threshold: float):
    candidates = [
        IdCandidate(u.owner_host, u.key, u.value, u.profile_id, 'cookie')
        for u in planted
    ]
    rules = {
        'cross_profile': rule_cross_profile,
        'length': rule_length_consistency,
        'similarity': lambda c: rule_similarity(c, threshold),
        'min_length': rule_min_length,
    }
    decoy_candidates = [
        IdCandidate(d.owner_host, d.key, d.value, d.profile_id, 'cookie')
        for d in decoys
    ]
    everything = candidates + decoy_candidates
    for family, rule in rules.items():
        survivors = set(rule(everything))
        if not set(candidates) <= survivors:
            raise ScenarioError(f'A planted identifier violates the {family} rule.')
        for decoy, candidate in zip(decoys, decoy_candidates):
            if (candidate in survivors) == (decoy.family == family):
                raise ScenarioError(
                    f'Decoy {decoy.value!r} of family {decoy.family} does not violate'
                    f' exactly its rule.'
                )


def generate_corpus(spec: ScenarioSpec) -> tuple[Corpus, GroundTruth]:
    """Generate a synthetic traffic corpus with its ground truth.

    Every profile visits the sites in turn. Each site sets a first-party cookie
    and embeds every star center, which receives the first-party identifier and
    sets its own `uid` cookie on its first embed. The leaves of each star are
    distributed over the sites: on its site, a leaf receives a sync request
    carrying the center's identifier encoded through the next codec chain and sets
    its own `lid` cookie. Decoy cookies, one host each, close each profile's
    traffic.

    Identifiers are random lowercase hexadecimal strings drawn with `jax.random`
    from the scenario seed; a value is redrawn while its similarity to a value of
    another profile reaches the similarity threshold minus 0.05. Before returning,
    planted identifiers are checked to pass every elimination rule and each decoy
    to violate exactly its designated one.

    Args:
        spec: Scenario specification.

    Returns:
        The corpus and its ground truth.

    Raises:
        ScenarioError: If no dissimilar identifier can be drawn or a check fails.
    """
    draws = _IdDraws(
        _scenario_key(spec.seed),
        spec.id_length + 4,
        spec.similarity_threshold - _SIMILARITY_MARGIN,
    )
    decoys = _draw_decoys(spec, draws)
    traffic = _Traffic(spec.measurement_id)
    sync_pairs = set()

    for p in range(spec.n_profiles):
        pid = f'P{p}'
        center_uids = {}
        chain_index = 0
        for s in range(spec.n_sites):
            site = f'site{s}.com'
            when = traffic.request(pid, f'https://{site}/', site)
            fp = draws.draw(spec.id_length, pid)
            traffic.cookie(pid, site, 'fp', fp, when, planted=True)

            for j, (center, n_leaves) in enumerate(spec.stars):
                center_domain = _center_domain(j)
                url = f'https://{center_domain}/pixel?fp={fp}'
                when = traffic.request(pid, url, site)
                if j not in center_uids:
                    center_uids[j] = draws.draw(spec.id_length, pid)
                    traffic.cookie(
                        pid, center_domain, 'uid', center_uids[j], when, planted=True
                    )

                for k in range(s, n_leaves, spec.n_sites):
                    leaf, leaf_domain = _leaf(j, k)
                    chain = spec.codec_chains[chain_index % len(spec.codec_chains)]
                    chain_index += 1
                    encoded = encode_chain(center_uids[j], chain)
                    url = f'https://sync.{leaf_domain}/match?c{j}_uid={encoded}'
                    when = traffic.request(pid, url, site)
                    lid = draws.draw(spec.id_length, pid)
                    traffic.cookie(pid, leaf_domain, 'lid', lid, when, planted=True)
                    sync_pairs.add((center, leaf))

        for decoy in decoys:
            if decoy.profile_id == pid:
                when = traffic.tick()
                traffic.cookie(pid, decoy.owner_host, decoy.key, decoy.value, when)

    _check_planted(traffic.planted, decoys, spec.similarity_threshold)

    corpus = Corpus(
        measurements=(Measurement(spec.measurement_id, 1),),
        profiles=tuple(
            BrowserProfile(f'P{p}', spec.measurement_id)
            for p in range(spec.n_profiles)
        ),
        requests=tuple(traffic.requests),
        cookies=tuple(traffic.cookies),
    )
    truth = GroundTruth(
        tuple(
            sorted(traffic.planted, key=lambda u: (u.owner_host, u.key, u.profile_id))
        ),
        tuple(sorted(sync_pairs)),
        tuple(decoys),
    )
    logger.info(
        'generated %d requests, %d cookies, %d sync pairs',
        len(traffic.requests),
        len(traffic.cookies),
        len(sync_pairs),
    )
    return corpus, truth


def write_scenario(spec: ScenarioSpec, directory: str | PathLike) -> Path:
    """Generate a scenario and write `corpus.jsonl`, `ground_truth.json` and
    `companies.json` into a directory, created if needed.

    Returns:
        The directory.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    corpus, truth = generate_corpus(spec)
    (directory / 'corpus.jsonl').write_bytes(write_jsonl(corpus))
    (directory / 'ground_truth.json').write_bytes(
        (canonical_json(truth.to_dict()) + '\n').encode('utf-8')
    )
    (directory / 'companies.json').write_bytes(write_company_db(company_db_of(spec)))
    return directory
