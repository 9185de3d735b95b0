"""Reversible byte and bit transposes applied to payloads before compression.

All transforms view the buffer as ``n`` elements of ``elem_size`` bytes.
Shuffle (and its twin byte-stream-split) gathers byte ``j`` of every element
into stream ``j``.  BitShuffle goes one level further and gathers bit ``b``
of every element into plane ``b``, bits numbered LSB-first within each byte,
byte by byte; each plane is packed LSB-first into ``n / 8`` bytes.
"""
from __future__ import annotations

import enum

import numpy as np

from .errors import BadStride, CountNotMultipleOf8


class PrecondId(enum.IntEnum):
    NONE = 0
    SHUFFLE = 1
    BITSHUFFLE = 2
    BYTE_STREAM_SPLIT = 3

    @classmethod
    def parse(cls, value) -> "PrecondId":
        if isinstance(value, PrecondId):
            return value
        if isinstance(value, (int, np.integer)):
            return cls(int(value))
        key = str(value).strip().lower()
        try:
            return _NAMES[key]
        except KeyError:
            raise ValueError(f"unknown pre-conditioner {value!r}") from None

    @property
    def short_name(self) -> str:
        return _SHORT[self]


_SHORT = {
    PrecondId.NONE: "none",
    PrecondId.SHUFFLE: "shuffle",
    PrecondId.BITSHUFFLE: "bitshuffle",
    PrecondId.BYTE_STREAM_SPLIT: "bss",
}
_NAMES = {v: k for k, v in _SHORT.items()}
_NAMES.update({"byte_stream_split": PrecondId.BYTE_STREAM_SPLIT, "noshuffle": PrecondId.NONE})


def _as_matrix(data, elem_size: int) -> np.ndarray:
    if elem_size < 1:
        raise BadStride(f"element size must be >= 1, got {elem_size}")
    buf = np.frombuffer(data, dtype=np.uint8)
    if len(buf) % elem_size:
        raise BadStride(f"buffer of {len(buf)} bytes is not a multiple of element size {elem_size}")
    return buf.reshape(-1, elem_size)


def shuffle(data, elem_size: int) -> bytes:
    return _as_matrix(data, elem_size).T.tobytes()


def unshuffle(data, elem_size: int) -> bytes:
    m = _as_matrix(data, elem_size)
    n = m.size // elem_size
    return m.reshape(elem_size, n).T.tobytes()


def byte_stream_split(data, elem_size: int) -> bytes:
    # Same transpose as shuffle; a separate id lets readers tell float columns apart.
    return shuffle(data, elem_size)


def byte_stream_merge(data, elem_size: int) -> bytes:
    return unshuffle(data, elem_size)


def _check_bit_count(m: np.ndarray) -> int:
    n = m.shape[0]
    if n % 8:
        raise CountNotMultipleOf8(f"bitshuffle needs an element count divisible by 8, got {n}")
    return n


def bitshuffle(data, elem_size: int) -> bytes:
    m = _as_matrix(data, elem_size)
    _check_bit_count(m)
    # (n, 8*elem_size) bit matrix, column index = byte*8 + bit
    bits = np.unpackbits(m, axis=1, bitorder="little")
    return np.packbits(bits.T, axis=1, bitorder="little").tobytes()


def unbitshuffle(data, elem_size: int) -> bytes:
    m = _as_matrix(data, elem_size)
    n = _check_bit_count(m)
    planes = np.frombuffer(data, dtype=np.uint8).reshape(8 * elem_size, n // 8)
    bits = np.unpackbits(planes, axis=1, bitorder="little")
    return np.packbits(bits.T, axis=1, bitorder="little").tobytes()


_FORWARD = {
    PrecondId.SHUFFLE: shuffle,
    PrecondId.BITSHUFFLE: bitshuffle,
    PrecondId.BYTE_STREAM_SPLIT: byte_stream_split,
}
_INVERSE = {
    PrecondId.SHUFFLE: unshuffle,
    PrecondId.BITSHUFFLE: unbitshuffle,
    PrecondId.BYTE_STREAM_SPLIT: byte_stream_merge,
}


def effective_precond(precond: PrecondId, element_counts) -> PrecondId:
    """BitShuffle falls back to Shuffle unless every blob has a multiple of 8 elements."""
    precond = PrecondId.parse(precond)
    if precond is PrecondId.BITSHUFFLE and any(c % 8 for c in element_counts):
        return PrecondId.SHUFFLE
    return precond


def apply(precond: PrecondId, data: bytes, elem_size: int) -> bytes:
    precond = PrecondId.parse(precond)
    if precond is PrecondId.NONE or not data:
        return data
    return _FORWARD[precond](data, elem_size)


def invert(precond: PrecondId, data: bytes, elem_size: int) -> bytes:
    precond = PrecondId.parse(precond)
    if precond is PrecondId.NONE or not data:
        return data
    return _INVERSE[precond](data, elem_size)
