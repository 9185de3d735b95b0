import os
import warnings

import pytest

from basketio.codec import (
    HEADER_SIZE,
    MAX_FRAME_SIZE,
    CodecId,
    CompressionSettings,
    FrameHeader,
    compress_buffer,
    compress_frame,
    decompress_buffer,
    decompress_frame,
    iter_frame_headers,
    train_dictionary,
)
from basketio.errors import (
    CodecFailure,
    EmptyPayload,
    InsufficientSamples,
    InvalidSettings,
    PayloadTooLarge,
    SizeMismatch,
    TotalSizeMismatch,
    TruncatedFrame,
    UnknownTag,
)

MATRIX = [("raw", 0), ("zlib", 1), ("zlib", 6), ("zlib", 9), ("lzma", 1), ("lzma", 6),
          ("lz4", 1), ("lz4", 9), ("zstd", 1), ("zstd", 3), ("zstd", 19)]


def _payloads(rng):
    return {
        "zeros": bytes(5000),
        "random": rng.integers(0, 256, 5000, dtype="u1").tobytes(),
        "text": b"".join(b"event %d pt=%.2f eta=%.3f\n" % (i, i * 1.1, i * 0.01) for i in range(200)),
        "one": b"x",
    }


def test_codec_ids_and_tags():
    assert {c.tag: int(c) for c in CodecId} == {b"RW": 0, b"ZL": 1, b"XZ": 2, b"L4": 4, b"ZS": 5}
    assert 3 not in {int(c) for c in CodecId}
    for c in CodecId:
        assert CodecId.from_tag(c.tag) is c


def test_default_levels():
    assert [CompressionSettings(c).level for c in ("zstd", "zlib", "lzma", "lz4")] == [3, 6, 6, 1]


def test_dictionary_only_with_zstd():
    with pytest.raises(InvalidSettings):
        CompressionSettings("lz4", 1, dictionary=b"abc")


def test_level_range_enforced():
    with pytest.raises(InvalidSettings):
        CompressionSettings("zlib", 12)


@pytest.mark.parametrize("codec,level", MATRIX)
def test_frame_round_trip(codec, level, rng):
    settings = CompressionSettings(codec, level)
    for name, payload in _payloads(rng).items():
        frame = compress_frame(payload, settings)
        header = FrameHeader.unpack(frame)
        assert header.u_size == len(payload)
        assert header.c_size == len(frame) - HEADER_SIZE
        assert len(frame) <= len(payload) + HEADER_SIZE
        out, consumed = decompress_frame(frame)
        assert out == payload, name
        assert consumed == len(frame)


def test_empty_payload():
    with pytest.raises(EmptyPayload):
        compress_frame(b"")
    with pytest.raises(EmptyPayload):
        compress_buffer(b"")


def test_zeros_zstd3_header():
    frame = compress_frame(bytes(100), CompressionSettings("zstd", 3))
    assert frame[:2] == b"ZS"
    assert frame[2] == 3
    assert int.from_bytes(frame[6:9], "little") == 100
    assert decompress_frame(frame)[0] == bytes(100)


def test_c_size_300_encoding():
    header = FrameHeader(CodecId.ZSTD, 3, 300, 1000).pack()
    assert header[3:6] == bytes.fromhex("2c0100")
    assert header == b"ZS\x03" + bytes.fromhex("2c0100") + bytes.fromhex("e80300")


def test_raw_frame_abc():
    frame = compress_frame(b"abc", CompressionSettings("raw"))
    assert frame == b"RW\x00\x03\x00\x00\x03\x00\x00abc"
    assert decompress_frame(frame) == (b"abc", 12)


def test_incompressible_falls_back_to_raw(rng):
    payload = rng.integers(0, 256, 4096, dtype="u1").tobytes()
    frame = compress_frame(payload, CompressionSettings("lz4", 1))
    assert frame[:2] == b"RW"
    assert len(frame) == len(payload) + HEADER_SIZE


@pytest.mark.parametrize("codec", ["zlib", "lzma", "lz4", "zstd"])
@pytest.mark.parametrize("delta", [-1, 1, 1000])
def test_corrupted_u_size(codec, delta):
    payload = b"abcdefgh" * 500
    frame = bytearray(compress_frame(payload, CompressionSettings(codec)))
    u = int.from_bytes(frame[6:9], "little") + delta
    frame[6:9] = u.to_bytes(3, "little")
    with pytest.raises(SizeMismatch):
        decompress_frame(bytes(frame))


def test_corrupted_raw_u_size():
    frame = bytearray(compress_frame(b"abc", CompressionSettings("raw")))
    frame[6] = 4
    with pytest.raises(SizeMismatch):
        decompress_frame(bytes(frame))


def test_unknown_tag_and_truncation():
    frame = compress_frame(b"hello" * 100, CompressionSettings("zstd"))
    with pytest.raises(UnknownTag):
        decompress_frame(b"QQ" + frame[2:])
    with pytest.raises(TruncatedFrame):
        decompress_frame(frame[:5])
    with pytest.raises(TruncatedFrame):
        decompress_frame(frame[:-1])


def test_garbage_body_is_codec_failure():
    body = b"\xff" * 50
    frame = FrameHeader(CodecId.LZ4, 1, len(body), 200).pack() + body
    with pytest.raises(CodecFailure) as info:
        decompress_frame(frame)
    assert info.value.codec is CodecId.LZ4


def test_buffer_boundaries():
    at_limit = bytes(MAX_FRAME_SIZE)
    framed = compress_buffer(at_limit, CompressionSettings("zstd", 1))
    headers = [h for _, h in iter_frame_headers(framed)]
    assert len(headers) == 1
    assert decompress_buffer(framed, MAX_FRAME_SIZE) == at_limit

    over = bytes(MAX_FRAME_SIZE + 1)
    framed = compress_buffer(over, CompressionSettings("zstd", 1))
    headers = [h for _, h in iter_frame_headers(framed)]
    assert len(headers) == 2
    assert headers[0].u_size == MAX_FRAME_SIZE
    assert headers[1].u_size == 1
    assert decompress_buffer(framed, MAX_FRAME_SIZE + 1) == over


@pytest.mark.slow
def test_buffer_40mib_random_round_trip():
    payload = os.urandom(40 * 1024 * 1024)
    framed = compress_buffer(payload, CompressionSettings("lz4", 1))
    headers = [h for _, h in iter_frame_headers(framed)]
    assert len(headers) == 3
    assert len(framed) <= len(payload) + HEADER_SIZE * len(headers)
    assert decompress_buffer(framed, len(payload)) == payload


def test_buffer_total_size_mismatch():
    framed = compress_buffer(b"abc" * 100, CompressionSettings("zlib"))
    with pytest.raises(TotalSizeMismatch):
        decompress_buffer(framed, 301)


def test_small_chunks_are_self_delimiting(rng):
    payload = rng.integers(0, 4, 10_000, dtype="u1").tobytes()
    framed = compress_buffer(payload, CompressionSettings("zstd", 3), chunk_size=1024)
    walked = list(iter_frame_headers(framed))
    assert len(walked) == 10
    assert sum(h.u_size for _, h in walked) == len(payload)
    assert walked[-1][0] + walked[-1][1].frame_size == len(framed)
    assert decompress_buffer(framed, len(payload)) == payload


def test_frame_size_too_large():
    with pytest.raises(PayloadTooLarge):
        compress_frame(bytes(MAX_FRAME_SIZE + 1))


def _records(n):
    return [(b'{"run": 1, "lumi": %d, "event": %d, "MET_pt": %.2f, "nJet": %d, "flags": "goodVertices"}'
             % (i % 7, 1000 + i, i * 0.37, i % 5)) * 12 for i in range(n)]


def test_train_dictionary_errors():
    with pytest.raises(InsufficientSamples):
        train_dictionary([], 1024)
    with pytest.raises(InsufficientSamples):
        train_dictionary([b"ab"] * 20, 1024)


def test_train_dictionary_few_samples_warns():
    with pytest.warns(UserWarning):
        train_dictionary(_records(50), 4096)


def test_dictionary_shrinks_records_and_is_deterministic():
    records = _records(128)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        blob = train_dictionary(records, 16 * 1024)
    assert len(blob) <= 16 * 1024
    assert train_dictionary(records, 16 * 1024) == blob
    plain = CompressionSettings("zstd", 3)
    with_dict = CompressionSettings("zstd", 3, dictionary=blob)
    assert sum(len(compress_frame(r, with_dict)) for r in records) < sum(len(compress_frame(r, plain)) for r in records)
    for r in records[:10]:
        assert decompress_frame(compress_frame(r, with_dict), dictionary=blob)[0] == r
