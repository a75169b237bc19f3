from __future__ import annotations

import json
import logging
from collections import defaultdict
from collections.abc import Iterable

from .._utils import canonical_json, obj_type_str
from ..errors import CorpusParseError
from ..log_model import Corpus
from ..options import IdOptions
from .candidates import IdCandidate, UserId, extract_candidates
from .rules import (
    rule_cross_profile,
    rule_length_consistency,
    rule_min_length,
    rule_similarity,
)

__all__ = ['detect_ids', 'surviving_candidates', 'write_ids_jsonl', 'parse_ids_jsonl']

logger = logging.getLogger(__name__)


def surviving_candidates(
    candidates: list[IdCandidate],
    options: IdOptions = IdOptions(),  # noqa: B008
) -> set[IdCandidate]:
    """Returns the candidates surviving all four elimination rules.

    Every rule is evaluated against the full candidate set and the survivors are
    intersected, so the result does not depend on the order of the rules.
    """
    survivors = set(rule_cross_profile(candidates))
    survivors &= set(rule_length_consistency(candidates))
    survivors &= set(rule_similarity(candidates, options.similarity_threshold))
    survivors &= set(rule_min_length(candidates, options.min_id_length))
    return survivors


def detect_ids(
    corpus: Corpus,
    options: IdOptions = IdOptions(),  # noqa: B008
) -> list[UserId]:
    """Detect user identifiers in a corpus.

    Candidates are extracted from queries, POST bodies and cookies, then filtered
    by the four elimination rules: values shared by several profiles, keys whose
    values differ in length, keys whose values are too similar across profiles,
    and values shorter than `options.min_id_length`. Each measurement of the corpus
    is processed on its own.

    Args:
        corpus: Loaded traffic corpus.
        options: Detection options.

    Returns:
        Deduplicated identifiers sorted by `(measurement_id, owner_host, key, value,
        profile_id)`.

    Examples:
        >>> from datetime import datetime, timezone
        >>> t = datetime(2018, 5, 20, tzinfo=timezone.utc)
        >>> cookie = cs.CookieRecord('M1', 'P1', 'bar.org', 'uid', b'9f3c2a7be41d0c55', t)
        >>> cs.detect_ids(cs.Corpus(cookies=(cookie,)))
        [UserId(owner_host='bar.org', key='uid', value='9f3c2a7be41d0c55', profile_id='P1', measurement_id='M1')]
    """  # noqa: E501
    requests = defaultdict(list)
    cookies = defaultdict(list)
    for r in corpus.requests:
        requests[r.measurement_id].append(r)
    for c in corpus.cookies:
        cookies[c.measurement_id].append(c)

    ids = set()
    for measurement_id in sorted(requests.keys() | cookies.keys()):
        candidates = extract_candidates(
            requests[measurement_id], cookies[measurement_id], options.delimiters
        )
        survivors = surviving_candidates(candidates, options)
        logger.info(
            'measurement %r: %d candidates, %d survive',
            measurement_id,
            len(candidates),
            len(survivors),
        )
        ids.update(
            UserId(c.owner_host, c.key, c.value, c.profile_id, c.measurement_id)
            for c in survivors
        )

    return sorted(ids, key=lambda u: (u.measurement_id, *u[:4]))


def write_ids_jsonl(ids: Iterable[UserId]) -> bytes:
    """Serialize identifiers as canonical JSON lines, in the given order."""
    lines = [canonical_json(uid._asdict()) + '\n' for uid in ids]
    return ''.join(lines).encode('utf-8')


def parse_ids_jsonl(data: bytes) -> list[UserId]:
    """Load identifiers written by `write_ids_jsonl`.

    Raises:
        CorpusParseError: On a malformed line, carrying its line number.
    """
    ids = []
    for lineno, line in enumerate(data.splitlines(), start=1):
        if len(line.strip()) == 0:
            continue
        try:
            obj = json.loads(line)
            if not isinstance(obj, dict):
                raise TypeError(f'expected a JSON object, got {obj_type_str(obj)}')
            ids.append(UserId(**obj))
        except (TypeError, ValueError) as e:
            raise CorpusParseError(f'Malformed identifier: {e}', line=lineno) from e
    return ids
