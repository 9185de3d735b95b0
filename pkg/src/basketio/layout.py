"""On-disk container layout: flush policies, basket directory and footer.

::

    [8-byte magic "BKIO\\x00\\x01\\x00\\x00"]
    [baskets: concatenated frame sequences]
    [footer: UTF-8 JSON]
    [8-byte little-endian footer length]
    [4-byte trailer "OIKB"]
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from typing import Union

from .codec import CodecId
from .errors import CorruptFooter, DirectoryGap
from .model import ColumnSchema
from .precond import PrecondId

MAGIC = b"BKIO\x00\x01\x00\x00"
TRAILER = b"OIKB"
FOOTER_LEN_SIZE = 8
TAIL_SIZE = FOOTER_LEN_SIZE + len(TRAILER)

MIN_BASKET_BYTES = 1024


@dataclass(frozen=True)
class PerBasket:
    """Flush a column as soon as its buffered payload exceeds ``max_basket_bytes``."""

    max_basket_bytes: int = 32 * 1024

    def __post_init__(self):
        if self.max_basket_bytes < MIN_BASKET_BYTES:
            raise ValueError(f"max_basket_bytes must be >= {MIN_BASKET_BYTES}")

    def __str__(self):
        return f"basket:{self.max_basket_bytes}"


@dataclass(frozen=True)
class OnlyAtCluster:
    """Flush every column together, exactly once per ``events_per_cluster`` events."""

    events_per_cluster: int = 1000

    def __post_init__(self):
        if self.events_per_cluster < 1:
            raise ValueError("events_per_cluster must be >= 1")

    def __str__(self):
        return f"cluster:{self.events_per_cluster}"


FlushPolicy = Union[PerBasket, OnlyAtCluster]


def parse_policy(text: str) -> FlushPolicy:
    """``"cluster:1000"`` or ``"basket:32768"``."""
    kind, _, size = text.strip().partition(":")
    kind = kind.lower()
    if kind == "cluster":
        return OnlyAtCluster(int(size) if size else 1000)
    if kind == "basket":
        return PerBasket(int(size) if size else 32 * 1024)
    raise ValueError(f"unknown flush policy {text!r}")


def policy_to_json(policy: FlushPolicy) -> dict:
    if isinstance(policy, OnlyAtCluster):
        return {"kind": "cluster", "events_per_cluster": policy.events_per_cluster}
    return {"kind": "basket", "max_basket_bytes": policy.max_basket_bytes}


@dataclass
class BasketDirectoryEntry:
    column_index: int
    first_event: int
    event_count: int
    file_offset: int
    framed_data_len: int
    framed_offsets_len: int
    uncompressed_data_len: int
    uncompressed_offsets_len: int
    codec: CodecId
    level: int
    precond_applied: PrecondId

    @property
    def stop_event(self) -> int:
        return self.first_event + self.event_count

    @property
    def framed_len(self) -> int:
        return self.framed_data_len + self.framed_offsets_len

    @property
    def uncompressed_len(self) -> int:
        return self.uncompressed_data_len + self.uncompressed_offsets_len

    def to_json(self) -> dict:
        d = asdict(self)
        d["codec"] = int(self.codec)
        d["precond_applied"] = int(self.precond_applied)
        return d

    @classmethod
    def from_json(cls, obj: dict) -> "BasketDirectoryEntry":
        kwargs = {f.name: obj[f.name] for f in fields(cls)}
        for name, value in kwargs.items():
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise CorruptFooter(f"directory field {name!r} must be a non-negative integer, got {value!r}")
        kwargs["codec"] = CodecId(kwargs["codec"])
        kwargs["precond_applied"] = PrecondId(kwargs["precond_applied"])
        return cls(**kwargs)


@dataclass
class FileFooter:
    schema: list
    total_events: int = 0
    clusters: list = field(default_factory=list)
    directory: list = field(default_factory=list)
    settings: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "schema": [c.to_json() for c in self.schema],
            "total_events": self.total_events,
            "clusters": list(self.clusters),
            "directory": [e.to_json() for e in self.directory],
            "settings": self.settings,
        }

    def dumps(self) -> bytes:
        return json.dumps(self.to_json(), separators=(",", ":")).encode("utf-8")

    @classmethod
    def loads(cls, raw: bytes) -> "FileFooter":
        try:
            obj = json.loads(raw.decode("utf-8"))
            footer = cls(
                schema=[ColumnSchema.from_json(c) for c in obj["schema"]],
                total_events=int(obj["total_events"]),
                clusters=[int(b) for b in obj["clusters"]],
                directory=[BasketDirectoryEntry.from_json(e) for e in obj["directory"]],
                settings=obj["settings"],
            )
        except CorruptFooter:
            raise
        except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise CorruptFooter(f"cannot parse footer: {exc}") from exc
        return footer

    def column_index(self, name: str) -> int:
        for i, c in enumerate(self.schema):
            if c.name == name:
                return i
        raise KeyError(f"no column named {name!r}")

    def entries_for(self, column_index: int) -> list:
        return sorted((e for e in self.directory if e.column_index == column_index),
                      key=lambda e: e.first_event)

    def validate(self, basket_region: tuple[int, int] | None = None) -> None:
        """Check cluster ordering and that each column's baskets tile ``[0, total_events)``."""
        if self.total_events < 0:
            raise CorruptFooter("negative total_events")
        prev = 0
        for b in self.clusters:
            if b <= prev:
                raise CorruptFooter(f"cluster boundaries not strictly increasing: {self.clusters}")
            prev = b
        if (self.clusters and self.clusters[-1] != self.total_events) or (
                not self.clusters and self.total_events):
            raise CorruptFooter("cluster boundaries must end at total_events")
        n_cols = len(self.schema)
        for e in self.directory:
            if e.column_index >= n_cols:
                raise CorruptFooter(f"directory entry references column {e.column_index}")
            if e.event_count == 0:
                raise CorruptFooter("directory entry with zero events")
            if basket_region is not None:
                lo, hi = basket_region
                if e.file_offset < lo or e.file_offset + e.framed_len > hi:
                    raise CorruptFooter(f"basket at {e.file_offset} lies outside the basket region")
            if not self.schema[e.column_index].is_variable and (
                    e.framed_offsets_len or e.uncompressed_offsets_len):
                raise CorruptFooter("fixed column basket carries an offsets blob")
        for i, column in enumerate(self.schema):
            expected = 0
            for e in self.entries_for(i):
                if e.first_event != expected:
                    kind = "gap" if e.first_event > expected else "overlap"
                    raise DirectoryGap(
                        f"column {column.name!r}: {kind} at event {expected} (next basket starts at {e.first_event})")
                expected = e.stop_event
            if expected != self.total_events:
                raise DirectoryGap(
                    f"column {column.name!r}: baskets cover {expected} of {self.total_events} events")
