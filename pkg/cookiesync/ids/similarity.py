from __future__ import annotations

from difflib import SequenceMatcher

__all__ = ['ratcliff_obershelp']


def ratcliff_obershelp(a: str, b: str) -> float:
    r"""Returns the Ratcliff/Obershelp similarity of two strings.

    The similarity is $2M / (|a| + |b|)$ where $M$ is the number of characters
    matched by recursively taking the longest common substring and recursing on
    both sides of it. Two empty strings have similarity 1.

    The gestalt matcher breaks ties between equally long common substrings by
    position, which makes it order dependent on some inputs; the larger of both
    argument orders is returned so that the similarity is symmetric.

    Args:
        a: First string.
        b: Second string.

    Returns:
        Similarity in $[0, 1]$.

    Examples:
        >>> cs.ratcliff_obershelp('AAAC', 'AABA')
        0.75
        >>> cs.ratcliff_obershelp('abcd', 'wxyz')
        0.0
    """
    if len(a) == 0 and len(b) == 0:
        return 1.0
    forward = SequenceMatcher(None, a, b, autojunk=False).ratio()
    backward = SequenceMatcher(None, b, a, autojunk=False).ratio()
    return max(forward, backward)
