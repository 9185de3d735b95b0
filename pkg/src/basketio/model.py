"""Columnar data model and basket payload serialization.

Fixed columns serialize to the little-endian concatenation of their values.
Variable columns serialize to two blobs: the concatenated element data and
one u32 little-endian *byte* offset per event marking where that event's
elements start in the data blob.  The total length is implied by the data
blob, so there is no trailing sentinel offset.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import MalformedOffsets, SchemaMismatch

OFFSET_DTYPE = np.dtype("<u4")
OFFSET_WIDTH = OFFSET_DTYPE.itemsize
MAX_DATA_BLOB = np.iinfo(OFFSET_DTYPE).max


class ElementType(str, enum.Enum):
    I32 = "i32"
    I64 = "i64"
    F32 = "f32"
    F64 = "f64"
    U8 = "u8"

    @property
    def dtype(self) -> np.dtype:
        return _DTYPES[self]

    @property
    def width(self) -> int:
        return self.dtype.itemsize


_DTYPES = {
    ElementType.I32: np.dtype("<i4"),
    ElementType.I64: np.dtype("<i8"),
    ElementType.F32: np.dtype("<f4"),
    ElementType.F64: np.dtype("<f8"),
    ElementType.U8: np.dtype("u1"),
}

# Bare widths are read as integers of that size.
_WIDTH_DTYPES = {1: np.dtype("u1"), 4: np.dtype("<i4"), 8: np.dtype("<i8")}


def as_dtype(kind) -> np.dtype:
    """Resolve an ElementType, type name ("f32"), or byte width (4) to a little-endian dtype."""
    if isinstance(kind, (int, np.integer)) and not isinstance(kind, bool):
        try:
            return _WIDTH_DTYPES[int(kind)]
        except KeyError:
            raise ValueError(f"element width must be 1, 4 or 8, got {kind}") from None
    if isinstance(kind, np.dtype):
        return kind.newbyteorder("<") if kind.itemsize > 1 else kind
    return ElementType(kind).dtype


class Arity(str, enum.Enum):
    FIXED = "fixed"
    VARIABLE = "variable"


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    element_type: ElementType
    arity: Arity = Arity.FIXED

    def __post_init__(self):
        if not self.name:
            raise ValueError("column name must be non-empty")
        object.__setattr__(self, "element_type", ElementType(self.element_type))
        object.__setattr__(self, "arity", Arity(self.arity))

    @property
    def is_variable(self) -> bool:
        return self.arity is Arity.VARIABLE

    @property
    def dtype(self) -> np.dtype:
        return self.element_type.dtype

    @property
    def width(self) -> int:
        return self.element_type.width

    def to_json(self) -> dict:
        return {"name": self.name, "element_type": self.element_type.value,
                "arity": self.arity.value}

    @classmethod
    def from_json(cls, obj: Mapping) -> "ColumnSchema":
        return cls(obj["name"], ElementType(obj["element_type"]), Arity(obj["arity"]))


def validate_schema(schema: Sequence[ColumnSchema]) -> None:
    if not schema:
        raise ValueError("schema must declare at least one column")
    names = [c.name for c in schema]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate column names in schema: {names}")


class JaggedArray:
    """Per-event arrays stored as one flat ``content`` array plus ``counts``.

    Indexing with an int returns that event's elements; slicing by events
    returns another JaggedArray.
    """

    __slots__ = ("content", "counts", "_starts")

    def __init__(self, content, counts):
        self.content = np.asarray(content)
        self.counts = np.asarray(counts, dtype=np.int64)
        if self.counts.ndim != 1 or (self.counts < 0).any():
            raise ValueError("counts must be a 1-d array of non-negative integers")
        if int(self.counts.sum()) != len(self.content):
            raise ValueError("counts do not add up to the content length")
        self._starts = None

    @classmethod
    def from_list(cls, events: Iterable, dtype=None) -> "JaggedArray":
        arrays = [np.asarray(e, dtype=dtype).reshape(-1) for e in events]
        counts = np.fromiter((len(a) for a in arrays), dtype=np.int64, count=len(arrays))
        if arrays:
            content = np.concatenate(arrays)
            if dtype is not None:
                content = content.astype(dtype, copy=False)
        else:
            content = np.empty(0, dtype=dtype if dtype is not None else np.float64)
        return cls(content, counts)

    @classmethod
    def concatenate(cls, parts: Sequence["JaggedArray"]) -> "JaggedArray":
        if len(parts) == 1:
            return parts[0]
        return cls(np.concatenate([p.content for p in parts]),
                   np.concatenate([p.counts for p in parts]))

    @property
    def starts(self) -> np.ndarray:
        if self._starts is None:
            starts = np.zeros(len(self.counts) + 1, dtype=np.int64)
            np.cumsum(self.counts, out=starts[1:])
            self._starts = starts
        return self._starts

    @property
    def dtype(self) -> np.dtype:
        return self.content.dtype

    def __len__(self) -> int:
        return len(self.counts)

    def __getitem__(self, item):
        if isinstance(item, slice):
            start, stop, step = item.indices(len(self))
            if step != 1:
                raise IndexError("JaggedArray only supports contiguous slices")
            stop = max(start, stop)
            lo, hi = self.starts[start], self.starts[stop]
            return JaggedArray(self.content[lo:hi], self.counts[start:stop])
        i = int(item)
        if i < 0:
            i += len(self)
        if not 0 <= i < len(self):
            raise IndexError(item)
        return self.content[self.starts[i]:self.starts[i + 1]]

    def __iter__(self):
        starts = self.starts
        for i in range(len(self)):
            yield self.content[starts[i]:starts[i + 1]]

    def __eq__(self, other):
        if not isinstance(other, JaggedArray):
            return NotImplemented
        return (np.array_equal(self.counts, other.counts)
                and self.content.dtype == other.content.dtype
                and self.content.tobytes() == other.content.tobytes())

    __hash__ = None

    def tolist(self) -> list:
        return [a.tolist() for a in self]

    def __repr__(self):
        return f"JaggedArray(events={len(self)}, elements={len(self.content)}, dtype={self.dtype})"


ColumnData = Union[np.ndarray, JaggedArray]


@dataclass
class EventBatch:
    """Values for a contiguous run of events, keyed by column name."""

    columns: dict = field(default_factory=dict)

    def __post_init__(self):
        counts = {name: len(values) for name, values in self.columns.items()}
        if len(set(counts.values())) > 1:
            raise SchemaMismatch(f"columns cover different event counts: {counts}")

    @property
    def n_events(self) -> int:
        for values in self.columns.values():
            return len(values)
        return 0

    def __len__(self) -> int:
        return self.n_events

    def __getitem__(self, name: str) -> ColumnData:
        return self.columns[name]

    def slice(self, start: int, stop: int) -> "EventBatch":
        return EventBatch({k: v[start:stop] for k, v in self.columns.items()})


def coerce_column(column: ColumnSchema, values) -> ColumnData:
    """Convert user-supplied values to the canonical in-memory form for ``column``."""
    if column.is_variable:
        if isinstance(values, JaggedArray):
            if values.dtype != column.dtype:
                values = JaggedArray(values.content.astype(column.dtype), values.counts)
            return values
        return JaggedArray.from_list(values, dtype=column.dtype)
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise SchemaMismatch(f"fixed column {column.name!r} expects a 1-d array, got shape {arr.shape}")
    return arr.astype(column.dtype, copy=False)


@dataclass
class BasketPayload:
    data_blob: bytes
    offsets_blob: bytes | None
    event_count: int
    first_event: int


def serialize_fixed_column(values, dtype) -> bytes:
    """Little-endian concatenation of ``values``; ``dtype`` may be a type name or byte width."""
    return np.asarray(values).astype(as_dtype(dtype), copy=False).tobytes()


def deserialize_fixed_column(data_blob: bytes, dtype) -> np.ndarray:
    dt = as_dtype(dtype)
    if len(data_blob) % dt.itemsize:
        raise MalformedOffsets(
            f"fixed blob of {len(data_blob)} bytes is not a multiple of width {dt.itemsize}")
    return np.frombuffer(data_blob, dtype=dt)


def variable_offsets(counts: np.ndarray, width: int) -> np.ndarray:
    """Byte offset of each event's first element, starting at 0."""
    offsets = np.zeros(len(counts), dtype=np.int64)
    if len(counts) > 1:
        np.cumsum(counts[:-1], out=offsets[1:])
    offsets *= width
    return offsets


def serialize_variable_column(events, dtype) -> tuple[bytes, bytes]:
    """Serialize per-event arrays into ``(data_blob, offsets_blob)``.

    ``events`` is a JaggedArray or any sequence of element sequences.
    """
    dt = as_dtype(dtype)
    if not isinstance(events, JaggedArray):
        events = JaggedArray.from_list(events, dtype=dt)
    data = events.content.astype(dt, copy=False).tobytes()
    if len(data) > MAX_DATA_BLOB:
        raise ValueError(f"data blob of {len(data)} bytes exceeds the u32 offset range")
    offsets = variable_offsets(events.counts, dt.itemsize).astype(OFFSET_DTYPE)
    return data, offsets.tobytes()


def deserialize_variable_column(data_blob: bytes, offsets_blob: bytes, dtype) -> JaggedArray:
    dt = as_dtype(dtype)
    if len(offsets_blob) % OFFSET_WIDTH:
        raise MalformedOffsets(f"offsets blob length {len(offsets_blob)} is not a multiple of {OFFSET_WIDTH}")
    if len(data_blob) % dt.itemsize:
        raise MalformedOffsets(f"data blob length {len(data_blob)} is not a multiple of {dt.itemsize}")
    offsets = np.frombuffer(offsets_blob, dtype=OFFSET_DTYPE).astype(np.int64)
    content = np.frombuffer(data_blob, dtype=dt)
    if len(offsets) == 0:
        if data_blob:
            raise MalformedOffsets("data present but no offsets")
        return JaggedArray(content, offsets)
    if offsets[0] != 0:
        raise MalformedOffsets(f"first offset must be 0, got {offsets[0]}")
    if (np.diff(offsets) < 0).any():
        raise MalformedOffsets("offsets decrease")
    if offsets[-1] > len(data_blob):
        raise MalformedOffsets(f"offset {offsets[-1]} exceeds data length {len(data_blob)}")
    if (offsets % dt.itemsize).any():
        raise MalformedOffsets(f"offsets are not multiples of element width {dt.itemsize}")
    counts = np.diff(offsets, append=len(data_blob)) // dt.itemsize
    return JaggedArray(content, counts)


def serialize_column(column: ColumnSchema, values: ColumnData) -> tuple[bytes, bytes | None]:
    if column.is_variable:
        return serialize_variable_column(values, column.dtype)
    return serialize_fixed_column(values, column.dtype), None


def deserialize_column(column: ColumnSchema, data_blob: bytes, offsets_blob: bytes | None) -> ColumnData:
    if column.is_variable:
        return deserialize_variable_column(data_blob, offsets_blob or b"", column.dtype)
    return deserialize_fixed_column(data_blob, column.dtype)


def serialized_event_sizes(column: ColumnSchema, values: ColumnData) -> np.ndarray:
    """Bytes each event adds to the serialized payload (data plus its offset entry)."""
    if column.is_variable:
        return values.counts * column.width + OFFSET_WIDTH
    return np.full(len(values), column.width, dtype=np.int64)


def concat_columns(parts: Sequence[ColumnData]) -> ColumnData:
    if isinstance(parts[0], JaggedArray):
        return JaggedArray.concatenate(parts)
    return parts[0] if len(parts) == 1 else np.concatenate(parts)
