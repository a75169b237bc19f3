from __future__ import annotations

import base64
import binascii
import logging
import re
import zlib
from collections.abc import Callable
from typing import NamedTuple
from urllib.parse import unquote_to_bytes

__all__ = ['DecodedLayer', 'decode_layers', 'CODECS']

logger = logging.getLogger(__name__)

CODECS = ('percent', 'base64', 'deflate', 'gzip')

_BASE64_RE = re.compile(rb'[A-Za-z0-9+/_-]+={0,2}')
_URLSAFE = bytes.maketrans(b'-_', b'+/')


class DecodedLayer(NamedTuple):
    """One decoding of a value.

    Attributes:
        depth: Number of codecs applied, equal to `len(codec_chain)`.
        text: Decoded text.
        codec_chain: Codecs applied in decoding order.
    """

    depth: int
    text: str
    codec_chain: tuple[str, ...]


def _is_text(data: bytes) -> bool:
    try:
        data.decode('utf-8')
    except UnicodeDecodeError:
        return False
    return True


def _percent(data: bytes, _: int) -> bytes | None:
    if b'%' not in data or not _is_text(data):
        return None
    decoded = unquote_to_bytes(data)
    if decoded == data or not _is_text(decoded):
        return None
    return decoded


def _inflate(data: bytes, wbits: int, cap: int) -> bytes | None:
    decompressor = zlib.decompressobj(wbits)
    try:
        out = decompressor.decompress(data, cap + 1)
    except zlib.error:
        return None
    if len(out) > cap:
        logger.debug('dropped a layer inflating beyond %d bytes', cap)
        return None
    if not decompressor.eof or len(decompressor.unused_data) > 0 or len(out) == 0:
        return None
    return out


def _deflate(data: bytes, cap: int) -> bytes | None:
    # raw DEFLATE first, then the zlib-wrapped variant
    out = _inflate(data, -zlib.MAX_WBITS, cap)
    return out if out is not None else _inflate(data, zlib.MAX_WBITS, cap)


def _gzip(data: bytes, cap: int) -> bytes | None:
    return _inflate(data, zlib.MAX_WBITS | 16, cap)


def _base64(data: bytes, cap: int) -> bytes | None:
    data = data.strip()
    if len(data) < 4 or _BASE64_RE.fullmatch(data) is None:
        return None
    data = data.rstrip(b'=').translate(_URLSAFE)
    if len(data) % 4 == 1:
        return None
    try:
        decoded = base64.b64decode(data + b'=' * (-len(data) % 4), validate=True)
    except (binascii.Error, ValueError):
        return None
    if len(decoded) == 0:
        return None
    # keep text, or binary that is itself a compressed stream
    if _is_text(decoded) or _deflate(decoded, cap) or _gzip(decoded, cap):
        return decoded
    return None


_DECODERS: dict[str, Callable[[bytes, int], bytes | None]] = {
    'percent': _percent,
    'base64': _base64,
    'deflate': _deflate,
    'gzip': _gzip,
}


def decode_layers(
    value: bytes | str, max_depth: int = 3, max_inflate_bytes: int = 65536
) -> list[DecodedLayer]:
    """Decode a value recursively through layered encodings.

    At every layer, percent-decoding, Base64 (standard and URL-safe alphabets,
    missing padding tolerated), raw or zlib-wrapped DEFLATE and gzip are tried.
    Each successful and previously unseen decoding spawns the next layer, until
    `max_depth` codecs have been chained. Compressed intermediate payloads are
    decoded further but only text payloads are returned.

    Args:
        value: Value to decode.
        max_depth: Maximum number of chained codecs.
        max_inflate_bytes: Cap on decompressed sizes, larger payloads are dropped.

    Returns:
        Decoded layers in breadth-first order, starting with the depth-0 original.
        A text reachable through several chains is reported once, at its
        shallowest depth.

    Examples:
        >>> [(l.depth, l.text, l.codec_chain) for l in cs.decode_layers('YUdWc2JHOD0=')]
        [(0, 'YUdWc2JHOD0=', ()), (1, 'aGVsbG8=', ('base64',)), (2, 'hello', ('base64', 'base64'))]
        >>> cs.decode_layers('%68%65%6C%6C%6F')[1].text
        'hello'
    """  # noqa: E501
    if max_depth < 1:
        raise ValueError(
            f'Argument `max_depth` must be at least 1, but is {max_depth}.'
        )
    data = value.encode('utf-8') if isinstance(value, str) else bytes(value)

    layers = [DecodedLayer(0, data.decode('utf-8', errors='replace'), ())]
    seen = {data}
    frontier = [(data, ())]
    for depth in range(1, max_depth + 1):
        next_frontier = []
        for payload, chain in frontier:
            for codec, decoder in _DECODERS.items():
                decoded = decoder(payload, max_inflate_bytes)
                if decoded is None or decoded in seen:
                    continue
                seen.add(decoded)
                next_frontier.append((decoded, (*chain, codec)))
                if _is_text(decoded):
                    layers.append(
                        DecodedLayer(depth, decoded.decode('utf-8'), (*chain, codec))
                    )
        frontier = next_frontier
    return layers
