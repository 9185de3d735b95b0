"""Open container files and reconstruct column values."""
from __future__ import annotations

import bisect
import mmap
import os
import time
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import precond as _precond
from .codec import decompress_buffer, dictionary_id
from .errors import BadMagic, CorruptFooter, InvalidSettings, MalformedOffsets, MissingDictionary
from .layout import FOOTER_LEN_SIZE, MAGIC, TAIL_SIZE, TRAILER, BasketDirectoryEntry, FileFooter
from .model import OFFSET_WIDTH, ColumnData, ColumnSchema, JaggedArray, concat_columns, deserialize_column


@dataclass
class ScanResult:
    column_bytes: dict = field(default_factory=dict)
    column_seconds: dict = field(default_factory=dict)

    @property
    def total_bytes(self) -> int:
        return sum(self.column_bytes.values())

    @property
    def elapsed(self) -> float:
        return sum(self.column_seconds.values())

    @property
    def mb_per_s(self) -> float:
        return self.total_bytes / self.elapsed / 1e6 if self.elapsed > 0 else float("inf")


def _load_dictionary(src) -> bytes:
    if isinstance(src, (bytes, bytearray, memoryview)):
        return bytes(src)
    with open(src, "rb") as f:
        return f.read()


class Reader:
    """Read-only view of a container file.

    The footer is parsed and validated on open; basket bytes are only touched
    by :meth:`read_column` and :meth:`scan_all`.  Nothing is cached between
    calls.
    """

    def __init__(self, path, dictionaries: Mapping | None = None):
        self.path = os.fspath(path)
        with open(self.path, "rb") as f:
            size = os.fstat(f.fileno()).st_size
            if size < len(MAGIC) + TAIL_SIZE:
                raise BadMagic(f"{self.path}: file too short ({size} bytes)")
            self._mm = mmap.mmap(f.fileno(), 0, access=mmap.ACCESS_READ)
        try:
            self.footer = self._parse_footer(size)
            self._dictionaries = self._check_dictionaries(dictionaries or {})
        except Exception:
            self._mm.close()
            raise
        self.schema = self.footer.schema
        self._entries = [self.footer.entries_for(i) for i in range(len(self.schema))]
        self._starts = [[e.first_event for e in entries] for entries in self._entries]

    def _parse_footer(self, size: int) -> FileFooter:
        mm = self._mm
        if mm[:len(MAGIC)] != MAGIC:
            raise BadMagic(f"{self.path}: bad header magic {mm[:len(MAGIC)]!r}")
        if mm[size - len(TRAILER):] != TRAILER:
            raise BadMagic(f"{self.path}: bad trailer {mm[size - len(TRAILER):]!r}")
        len_at = size - TAIL_SIZE
        footer_len = int.from_bytes(mm[len_at:len_at + FOOTER_LEN_SIZE], "little")
        footer_start = len_at - footer_len
        if footer_start < len(MAGIC):
            raise CorruptFooter(f"{self.path}: footer length {footer_len} exceeds file size")
        footer = FileFooter.loads(mm[footer_start:len_at])
        footer.validate(basket_region=(len(MAGIC), footer_start))
        return footer

    def _check_dictionaries(self, dictionaries: Mapping) -> dict:
        loaded = {}
        names = {c.name for c in self.footer.schema}
        col_settings = self.footer.settings.get("columns", {})
        for name, src in dictionaries.items():
            if name not in names:
                raise KeyError(f"dictionary given for unknown column {name!r}")
            blob = _load_dictionary(src)
            expected = col_settings.get(name, {}).get("dictionary_id")
            if expected is not None and dictionary_id(blob) != expected:
                raise InvalidSettings(f"column {name!r}: dictionary id {dictionary_id(blob)} "
                                      f"does not match the file's {expected}")
            loaded[name] = blob
        return loaded

    def close(self):
        self._mm.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    @property
    def total_events(self) -> int:
        return self.footer.total_events

    def column(self, name: str) -> ColumnSchema:
        return self.schema[self.footer.column_index(name)]

    def _dictionary_for(self, column: ColumnSchema) -> bytes | None:
        blob = self._dictionaries.get(column.name)
        if blob is None and self.footer.settings.get("columns", {}).get(column.name, {}).get("dictionary_id"):
            raise MissingDictionary(f"column {column.name!r} was written with a dictionary; none supplied")
        return blob

    def _decode_basket(self, column: ColumnSchema, entry: BasketDirectoryEntry, dictionary) -> ColumnData:
        mm = self._mm
        pos = entry.file_offset
        data = b""
        if entry.framed_data_len:
            data = decompress_buffer(mm[pos:pos + entry.framed_data_len],
                                     entry.uncompressed_data_len, dictionary)
            data = _precond.invert(entry.precond_applied, data, column.width)
        elif entry.uncompressed_data_len:
            raise CorruptFooter(f"basket at {pos} has no data frames but expects {entry.uncompressed_data_len} bytes")
        offsets = None
        if column.is_variable:
            pos += entry.framed_data_len
            offsets = decompress_buffer(mm[pos:pos + entry.framed_offsets_len],
                                        entry.uncompressed_offsets_len, dictionary) \
                if entry.framed_offsets_len else b""
            offsets = _precond.invert(entry.precond_applied, offsets, OFFSET_WIDTH)
            if len(offsets) != entry.event_count * OFFSET_WIDTH:
                raise MalformedOffsets(
                    f"basket at {entry.file_offset}: {len(offsets) // OFFSET_WIDTH} offsets "
                    f"for {entry.event_count} events")
        values = deserialize_column(column, data, offsets)
        if len(values) != entry.event_count:
            raise MalformedOffsets(
                f"basket at {entry.file_offset}: decoded {len(values)} events, directory says {entry.event_count}")
        return values

    def read_column(self, name: str, start: int = 0, stop: int | None = None) -> ColumnData:
        """Values of column ``name`` for events ``[start, stop)``."""
        total = self.footer.total_events
        stop = total if stop is None else stop
        if not 0 <= start <= stop <= total:
            raise IndexError(f"event range [{start}, {stop}) outside [0, {total})")
        idx = self.footer.column_index(name)
        column = self.schema[idx]
        if start == stop:
            if column.is_variable:
                return JaggedArray(np.empty(0, column.dtype), np.empty(0, np.int64))
            return np.empty(0, column.dtype)
        dictionary = self._dictionary_for(column)
        entries = self._entries[idx]
        starts = self._starts[idx]
        lo = bisect.bisect_right(starts, start) - 1
        hi = bisect.bisect_left(starts, stop)
        selected = entries[lo:hi]
        parts = [self._decode_basket(column, e, dictionary) for e in selected]
        values = concat_columns(parts)
        base = selected[0].first_event
        return values[start - base:stop - base]

    def scan_all(self) -> ScanResult:
        """Decode every basket once, in file order, timing only the decode path."""
        result = ScanResult(
            column_bytes={c.name: 0 for c in self.schema},
            column_seconds={c.name: 0.0 for c in self.schema},
        )
        dictionaries = {c.name: self._dictionary_for(c) for c in self.schema}
        perf = time.perf_counter
        for entry in self.footer.directory:
            column = self.schema[entry.column_index]
            t0 = perf()
            self._decode_basket(column, entry, dictionaries[column.name])
            result.column_seconds[column.name] += perf() - t0
            result.column_bytes[column.name] += entry.uncompressed_len
        return result


def open_reader(path, dictionaries: Mapping | None = None) -> Reader:
    """Open and validate ``path``.  ``dictionaries`` maps column name to a sidecar path or blob."""
    return Reader(path, dictionaries)


def read_column(handle: Reader, column: str, start: int = 0, stop: int | None = None) -> ColumnData:
    return handle.read_column(column, start, stop)


def scan_all(handle: Reader) -> ScanResult:
    return handle.scan_all()
