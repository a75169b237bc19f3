import base64
import gzip
import zlib

import pytest

import cookiesync as cs


def _texts(layers):
    return {layer.text: layer.codec_chain for layer in layers}


def test_original_first():
    layers = cs.decode_layers('plain-value')
    assert layers[0] == cs.DecodedLayer(0, 'plain-value', ())


def test_base64_alphabets():
    standard = base64.b64encode(b'id=ff/a+b?').decode()
    urlsafe = base64.urlsafe_b64encode(b'id=ff/a+b?').decode().rstrip('=')
    assert _texts(cs.decode_layers(standard))['id=ff/a+b?'] == ('base64',)
    assert _texts(cs.decode_layers(urlsafe))['id=ff/a+b?'] == ('base64',)


@pytest.mark.parametrize(
    ('compress', 'codec'),
    [(zlib.compress, 'deflate'), (lambda d: gzip.compress(d, mtime=0), 'gzip')],
)
def test_compressed(compress, codec):
    value = base64.b64encode(compress(b'uid=f3ab9c7e2d14b6a8')).decode()
    assert _texts(cs.decode_layers(value))['uid=f3ab9c7e2d14b6a8'] == ('base64', codec)


def test_raw_deflate():
    compressor = zlib.compressobj(9, zlib.DEFLATED, -zlib.MAX_WBITS)
    raw = compressor.compress(b'hello world') + compressor.flush()
    value = base64.urlsafe_b64encode(raw).decode()
    assert 'hello world' in _texts(cs.decode_layers(value))


def test_max_depth():
    texts = _texts(cs.decode_layers('YUdWc2JHOD0=', max_depth=1))
    assert 'aGVsbG8=' in texts
    assert 'hello' not in texts
    with pytest.raises(ValueError, match='max_depth'):
        cs.decode_layers('x', max_depth=0)


def test_inflate_cap():
    value = base64.b64encode(zlib.compress(b'a' * 1000)).decode()
    assert 'a' * 1000 in _texts(cs.decode_layers(value))
    assert 'a' * 1000 not in _texts(cs.decode_layers(value, max_inflate_bytes=100))


def test_shallowest_chain_reported():
    # percent-encoded Base64: the text is reached at depth 2 only once
    value = cs.encode_chain('hello', ['base64', 'percent'])
    chains = [layer.codec_chain for layer in cs.decode_layers(value)]
    assert chains.count(('percent', 'base64')) == 1


def test_extract_urls():
    text = 'ref=foo.com/a?b=1 and https://bar.org/x?u=https%3A%2F%2Fbaz.net%2Fy'
    urls = [url.raw for url in cs.extract_urls(text)]
    assert urls == [
        'foo.com/a?b=1',
        'https://bar.org/x?u=https%3A%2F%2Fbaz.net%2Fy',
        'https://baz.net/y',
    ]
    assert cs.extract_urls('no url in here') == []


def test_extract_urls_skips_unparsable():
    assert cs.extract_urls('see https://[not-an-ip/path') == []
    urls = [url.raw for url in cs.extract_urls('https://[x https://ok.com/p')]
    assert urls == ['https://ok.com/p']
