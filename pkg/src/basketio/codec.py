"""Multi-codec compression behind a fixed 9-byte frame header.

Frame layout (all little-endian)::

    offset 0  2 bytes  ASCII codec tag ("RW", "ZL", "XZ", "L4", "ZS")
    offset 2  1 byte   method (the compression level; 0 for raw)
    offset 3  3 bytes  compressed payload length
    offset 6  3 bytes  uncompressed length
    offset 9  ...      compressed payload

Buffers larger than 16,777,215 bytes are split across several frames.  When
a codec fails to shrink a chunk the frame is stored raw instead, so a framed
buffer never grows by more than 9 bytes per frame.
"""
from __future__ import annotations

import enum
import lzma
import threading
import warnings
import zlib
from dataclasses import dataclass

import lz4.block
import zstandard

from .errors import (
    CodecFailure,
    EmptyPayload,
    InsufficientSamples,
    InvalidSettings,
    MissingDictionary,
    PayloadTooLarge,
    SizeMismatch,
    TotalSizeMismatch,
    TrainingFailure,
    TruncatedFrame,
    UnknownTag,
)

HEADER_SIZE = 9
MAX_FRAME_SIZE = (1 << 24) - 1


class CodecId(enum.IntEnum):
    RAW = 0
    DEFLATE = 1
    LZMA = 2
    # 3 is reserved
    LZ4 = 4
    ZSTD = 5

    @property
    def tag(self) -> bytes:
        return _TAGS[self]

    @classmethod
    def from_tag(cls, tag: bytes) -> "CodecId":
        try:
            return _BY_TAG[bytes(tag)]
        except KeyError:
            raise UnknownTag(f"unknown frame tag {bytes(tag)!r}") from None

    @classmethod
    def parse(cls, value) -> "CodecId":
        if isinstance(value, CodecId):
            return value
        if isinstance(value, int):
            return cls(value)
        try:
            return _ALIASES[str(value).strip().lower()]
        except KeyError:
            raise ValueError(f"unknown codec {value!r}") from None

    @property
    def short_name(self) -> str:
        return _SHORT[self]


_TAGS = {
    CodecId.RAW: b"RW",
    CodecId.DEFLATE: b"ZL",
    CodecId.LZMA: b"XZ",
    CodecId.LZ4: b"L4",
    CodecId.ZSTD: b"ZS",
}
_BY_TAG = {v: k for k, v in _TAGS.items()}
_SHORT = {
    CodecId.RAW: "raw",
    CodecId.DEFLATE: "zlib",
    CodecId.LZMA: "lzma",
    CodecId.LZ4: "lz4",
    CodecId.ZSTD: "zstd",
}
_ALIASES = {v: k for k, v in _SHORT.items()}
_ALIASES.update({"deflate": CodecId.DEFLATE, "xz": CodecId.LZMA, "none": CodecId.RAW})

LEVEL_RANGES = {
    CodecId.RAW: (0, 0),
    CodecId.DEFLATE: (0, 9),
    CodecId.LZMA: (0, 9),
    CodecId.LZ4: (1, 12),
    CodecId.ZSTD: (1, 22),
}
DEFAULT_LEVELS = {
    CodecId.RAW: 0,
    CodecId.DEFLATE: 6,
    CodecId.LZMA: 6,
    CodecId.LZ4: 1,
    CodecId.ZSTD: 3,
}


@dataclass(frozen=True)
class CompressionSettings:
    codec: CodecId = CodecId.ZSTD
    level: int | None = None
    dictionary: bytes | None = None

    def __post_init__(self):
        codec = CodecId.parse(self.codec)
        object.__setattr__(self, "codec", codec)
        if self.level is None:
            object.__setattr__(self, "level", DEFAULT_LEVELS[codec])
        lo, hi = LEVEL_RANGES[codec]
        if not lo <= self.level <= hi:
            raise InvalidSettings(f"{codec.short_name} level must be in [{lo}, {hi}], got {self.level}")
        if self.dictionary is not None:
            if codec is not CodecId.ZSTD:
                raise InvalidSettings(f"dictionaries are only supported with zstd, not {codec.short_name}")
            object.__setattr__(self, "dictionary", bytes(self.dictionary))

    @classmethod
    def parse(cls, text: str, dictionary: bytes | None = None) -> "CompressionSettings":
        """Parse ``"zstd:3"`` / ``"lz4"`` style codec strings."""
        name, _, level = text.partition(":")
        return cls(CodecId.parse(name), int(level) if level else None, dictionary)

    def __str__(self):
        return f"{self.codec.short_name}:{self.level}"


@dataclass(frozen=True)
class FrameHeader:
    codec: CodecId
    method: int
    c_size: int
    u_size: int

    def pack(self) -> bytes:
        if not (0 <= self.c_size <= MAX_FRAME_SIZE and 0 <= self.u_size <= MAX_FRAME_SIZE):
            raise PayloadTooLarge(f"frame sizes ({self.c_size}, {self.u_size}) exceed 3-byte limit")
        return (self.codec.tag + bytes([self.method & 0xFF])
                + self.c_size.to_bytes(3, "little") + self.u_size.to_bytes(3, "little"))

    @classmethod
    def unpack(cls, buf, offset: int = 0) -> "FrameHeader":
        head = bytes(buf[offset:offset + HEADER_SIZE])
        if len(head) < HEADER_SIZE:
            raise TruncatedFrame(f"need {HEADER_SIZE} header bytes, have {len(head)}")
        return cls(CodecId.from_tag(head[:2]), head[2],
                   int.from_bytes(head[3:6], "little"), int.from_bytes(head[6:9], "little"))

    @property
    def frame_size(self) -> int:
        return HEADER_SIZE + self.c_size


# Compressor objects are not thread-safe, so keep one cache per thread.
_local = threading.local()


def _zstd_dict(blob: bytes) -> zstandard.ZstdCompressionDict:
    cache = _local.__dict__.setdefault("zdicts", {})
    d = cache.get(blob)
    if d is None:
        d = cache[blob] = zstandard.ZstdCompressionDict(blob)
    return d


def _zstd_compressor(level: int, dictionary: bytes | None) -> zstandard.ZstdCompressor:
    cache = _local.__dict__.setdefault("zcomp", {})
    key = (level, dictionary)
    c = cache.get(key)
    if c is None:
        c = cache[key] = zstandard.ZstdCompressor(
            level=level,
            dict_data=_zstd_dict(dictionary) if dictionary else None,
            write_checksum=False,
            write_content_size=False,
            write_dict_id=False,
            threads=0,
        )
    return c


def _zstd_decompressor(dictionary: bytes | None) -> zstandard.ZstdDecompressor:
    cache = _local.__dict__.setdefault("zdecomp", {})
    d = cache.get(dictionary)
    if d is None:
        d = cache[dictionary] = zstandard.ZstdDecompressor(
            dict_data=_zstd_dict(dictionary) if dictionary else None)
    return d


def _encode(codec: CodecId, payload, level: int, dictionary: bytes | None) -> bytes:
    if codec is CodecId.DEFLATE:
        c = zlib.compressobj(level, zlib.DEFLATED, -15)
        return c.compress(payload) + c.flush()
    if codec is CodecId.LZMA:
        return lzma.compress(payload, format=lzma.FORMAT_RAW,
                             filters=[{"id": lzma.FILTER_LZMA2, "preset": level}])
    if codec is CodecId.LZ4:
        if level <= 2:
            return lz4.block.compress(payload, mode="default", store_size=False)
        return lz4.block.compress(payload, mode="high_compression", compression=level,
                                  store_size=False)
    if codec is CodecId.ZSTD:
        return _zstd_compressor(level, dictionary).compress(payload)
    raise AssertionError(codec)


def _decode(codec: CodecId, body, u_size: int, dictionary: bytes | None) -> bytes:
    if codec is CodecId.RAW:
        return bytes(body)
    if codec is CodecId.DEFLATE:
        return zlib.decompress(body, -15)
    if codec is CodecId.LZMA:
        # Matches cannot reach further back than the chunk itself.
        dict_size = max(4096, u_size)
        d = lzma.LZMADecompressor(format=lzma.FORMAT_RAW,
                                  filters=[{"id": lzma.FILTER_LZMA2, "dict_size": dict_size}])
        return d.decompress(body)
    if codec is CodecId.LZ4:
        return lz4.block.decompress(body, uncompressed_size=max(u_size, 1))
    if codec is CodecId.ZSTD:
        return _zstd_decompressor(dictionary).decompress(body, max_output_size=max(u_size, 1))
    raise AssertionError(codec)


def compress_frame(payload, settings: CompressionSettings | None = None) -> bytes:
    """Compress ``payload`` into a single frame (header + body)."""
    settings = settings or CompressionSettings()
    u_size = len(payload)
    if u_size == 0:
        raise EmptyPayload("cannot frame an empty payload")
    if u_size > MAX_FRAME_SIZE:
        raise PayloadTooLarge(f"payload of {u_size} bytes exceeds {MAX_FRAME_SIZE}; use compress_buffer")
    codec = settings.codec
    if codec is not CodecId.RAW:
        try:
            body = _encode(codec, payload, settings.level, settings.dictionary)
        except (zlib.error, lzma.LZMAError, lz4.block.LZ4BlockError, zstandard.ZstdError) as exc:
            raise CodecFailure(codec, exc) from exc
        if len(body) < u_size:
            return FrameHeader(codec, settings.level, len(body), u_size).pack() + body
    return FrameHeader(CodecId.RAW, 0, u_size, u_size).pack() + bytes(payload)


def decompress_frame(frame, dictionary: bytes | None = None, offset: int = 0) -> tuple[bytes, int]:
    """Decode the frame starting at ``offset``; returns ``(payload, bytes_consumed)``."""
    header = FrameHeader.unpack(frame, offset)
    start = offset + HEADER_SIZE
    body = frame[start:start + header.c_size]
    if len(body) < header.c_size:
        raise TruncatedFrame(f"frame declares {header.c_size} payload bytes, only {len(body)} present")
    codec = header.codec
    if codec is CodecId.RAW and header.c_size != header.u_size:
        raise SizeMismatch(f"raw frame with c_size {header.c_size} != u_size {header.u_size}")
    try:
        out = _decode(codec, body, header.u_size, dictionary)
    except (zlib.error, lzma.LZMAError, lz4.block.LZ4BlockError, zstandard.ZstdError) as exc:
        actual = _probe_size(codec, body, dictionary)
        if actual is not None and actual != header.u_size:
            raise SizeMismatch(f"frame decodes to {actual} bytes, header says {header.u_size}") from exc
        if codec is CodecId.ZSTD and dictionary is None:
            raise MissingDictionary("zstd frame failed to decode; a dictionary may be required") from exc
        raise CodecFailure(codec, exc) from exc
    if len(out) != header.u_size:
        raise SizeMismatch(f"frame decodes to {len(out)} bytes, header says {header.u_size}")
    return out, header.frame_size


def _probe_size(codec: CodecId, body, dictionary) -> int | None:
    """Decode with the largest legal bound to tell a bad size field from bad data."""
    try:
        return len(_decode(codec, body, MAX_FRAME_SIZE + 1, dictionary))
    except Exception:
        return None


def compress_buffer(payload, settings: CompressionSettings | None = None,
                    chunk_size: int = MAX_FRAME_SIZE) -> bytes:
    """Frame ``payload`` as consecutive chunks of at most ``chunk_size`` bytes."""
    if len(payload) == 0:
        raise EmptyPayload("cannot frame an empty payload")
    if not 1 <= chunk_size <= MAX_FRAME_SIZE:
        raise ValueError(f"chunk_size must be in [1, {MAX_FRAME_SIZE}]")
    view = memoryview(payload).cast("B")
    if len(view) <= chunk_size:
        return compress_frame(view, settings)
    return b"".join(compress_frame(view[i:i + chunk_size], settings)
                    for i in range(0, len(view), chunk_size))


def iter_frame_headers(frames, offset: int = 0, end: int | None = None):
    """Walk a concatenation of frames using only their headers; yields ``(offset, header)``."""
    end = len(frames) if end is None else end
    while offset < end:
        header = FrameHeader.unpack(frames, offset)
        if offset + header.frame_size > end:
            raise TruncatedFrame(f"frame at {offset} runs past the end of the buffer")
        yield offset, header
        offset += header.frame_size


def decompress_buffer(frames, expected_size: int, dictionary: bytes | None = None) -> bytes:
    """Inverse of :func:`compress_buffer`; checks the total against ``expected_size``."""
    parts = []
    offset = 0
    total = 0
    n = len(frames)
    while offset < n:
        payload, consumed = decompress_frame(frames, dictionary, offset)
        parts.append(payload)
        total += len(payload)
        offset += consumed
    if total != expected_size:
        raise TotalSizeMismatch(f"frames decode to {total} bytes, expected {expected_size}")
    return parts[0] if len(parts) == 1 else b"".join(parts)


MIN_SAMPLES = 8
MIN_SAMPLE_BYTES = 1024
RECOMMENDED_SAMPLES = 100


def train_dictionary(samples, capacity: int) -> bytes:
    """Train a zstd dictionary of at most ``capacity`` bytes from small sample buffers.

    Fewer than 100 samples still trains but emits a ``UserWarning``.
    """
    samples = [bytes(s) for s in samples]
    total = sum(len(s) for s in samples)
    if len(samples) < MIN_SAMPLES or total < MIN_SAMPLE_BYTES:
        raise InsufficientSamples(
            f"need at least {MIN_SAMPLES} samples and {MIN_SAMPLE_BYTES} bytes, "
            f"got {len(samples)} samples / {total} bytes")
    if len(samples) < RECOMMENDED_SAMPLES:
        warnings.warn(f"training a dictionary from only {len(samples)} samples; "
                      f"{RECOMMENDED_SAMPLES}+ are recommended", UserWarning, stacklevel=2)
    try:
        d = zstandard.train_dictionary(capacity, samples, threads=0)
    except zstandard.ZstdError as exc:
        raise TrainingFailure(str(exc)) from exc
    blob = d.as_bytes()
    if len(blob) > capacity:
        raise TrainingFailure(f"trained dictionary of {len(blob)} bytes exceeds capacity {capacity}")
    return blob


def dictionary_id(blob: bytes) -> int:
    return zstandard.ZstdCompressionDict(blob).dict_id()
