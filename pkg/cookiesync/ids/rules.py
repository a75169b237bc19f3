from __future__ import annotations

from collections import defaultdict
from collections.abc import Sequence
from difflib import SequenceMatcher
from itertools import combinations

from .candidates import IdCandidate
from .similarity import ratcliff_obershelp

__all__ = [
    'rule_cross_profile',
    'rule_length_consistency',
    'rule_similarity',
    'rule_min_length',
]


def _groups(
    candidates: Sequence[IdCandidate], *, with_value: bool
) -> dict[tuple, list[IdCandidate]]:
    groups = defaultdict(list)
    for c in candidates:
        key = (c.owner_host, c.key, c.value) if with_value else (c.owner_host, c.key)
        groups[key].append(c)
    return groups


def rule_cross_profile(candidates: Sequence[IdCandidate]) -> list[IdCandidate]:
    """Eliminate values observed for several profiles.

    Candidates are grouped by `(owner_host, key, value)` and groups spanning two
    or more profiles are dropped.

    Examples:
        >>> c1 = cs.IdCandidate('a.example', 'p_id', '1234abcd', 'P1', 'cookie')
        >>> c2 = cs.IdCandidate('a.example', 'p_id', '1234abcd', 'P2', 'cookie')
        >>> cs.rule_cross_profile([c1, c2])
        []
    """
    groups = _groups(candidates, with_value=True)
    shared = {k for k, g in groups.items() if len({c.profile_id for c in g}) >= 2}
    return [c for c in candidates if (c.owner_host, c.key, c.value) not in shared]


def rule_length_consistency(candidates: Sequence[IdCandidate]) -> list[IdCandidate]:
    """Eliminate every candidate of an `(owner_host, key)` whose values differ in
    length.
    """
    groups = _groups(candidates, with_value=False)
    mixed = {k for k, g in groups.items() if len({len(c.value) for c in g}) > 1}
    return [c for c in candidates if (c.owner_host, c.key) not in mixed]


def _too_similar(group: list[IdCandidate], threshold: float) -> bool:
    profiles = defaultdict(set)
    for c in group:
        profiles[c.value].add(c.profile_id)

    for a, b in combinations(sorted(profiles), 2):
        # distinct values seen only in one and the same profile are not compared
        if profiles[a] == profiles[b] and len(profiles[a]) == 1:
            continue
        # cheap upper bound before the full matcher
        if SequenceMatcher(None, a, b, autojunk=False).quick_ratio() < threshold:
            continue
        if ratcliff_obershelp(a, b) >= threshold:
            return True
    return False


def rule_similarity(
    candidates: Sequence[IdCandidate], threshold: float = 0.66
) -> list[IdCandidate]:
    """Eliminate every candidate of an `(owner_host, key)` whose values are too
    close to each other to carry enough entropy.

    Distinct values of the group observed in distinct profiles are compared
    pairwise with the Ratcliff/Obershelp similarity; a single pair at or above
    `threshold` eliminates the whole group.

    Examples:
        >>> c1 = cs.IdCandidate('a.example', 'id', 'AAAC', 'P1', 'url_param')
        >>> c2 = cs.IdCandidate('a.example', 'id', 'AABA', 'P2', 'url_param')
        >>> cs.rule_similarity([c1, c2])
        []
    """
    groups = _groups(candidates, with_value=False)
    similar = {k for k, g in groups.items() if _too_similar(g, threshold)}
    return [c for c in candidates if (c.owner_host, c.key) not in similar]


def rule_min_length(
    candidates: Sequence[IdCandidate], min_len: int = 8
) -> list[IdCandidate]:
    """Drop candidates whose value is shorter than `min_len` characters."""
    return [c for c in candidates if len(c.value) >= min_len]
