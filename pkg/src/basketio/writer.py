"""Buffer events per column into baskets and write the container file."""
from __future__ import annotations

import os
import time
from collections import defaultdict
from typing import Mapping, Sequence

import numpy as np

from . import precond as _precond
from .codec import CodecId, CompressionSettings, compress_buffer, dictionary_id
from .errors import InvalidSettings, SchemaMismatch
from .layout import (
    MAGIC,
    TRAILER,
    BasketDirectoryEntry,
    FileFooter,
    FlushPolicy,
    OnlyAtCluster,
    PerBasket,
    policy_to_json,
)
from .model import (
    OFFSET_WIDTH,
    ColumnSchema,
    EventBatch,
    coerce_column,
    concat_columns,
    serialize_column,
    serialized_event_sizes,
    validate_schema,
)
from .precond import PrecondId


class _ColumnBuffer:
    __slots__ = ("parts", "n_events", "nbytes", "first_event")

    def __init__(self, first_event=0):
        self.parts = []
        self.n_events = 0
        self.nbytes = 0
        self.first_event = first_event

    def add(self, values, nbytes):
        if len(values):
            self.parts.append(values)
            self.n_events += len(values)
            self.nbytes += nbytes


def uniform_settings(schema: Sequence[ColumnSchema], settings: CompressionSettings,
                     precond=PrecondId.NONE) -> dict:
    """Same codec and pre-conditioner for every column."""
    precond = PrecondId.parse(precond)
    return {c.name: (settings, precond) for c in schema}


class Writer:
    """Single-owner container writer; use :func:`open_writer` to create one.

    Baskets are written in flush order, so the same inputs always produce the
    same bytes.
    """

    def __init__(self, path, schema: Sequence[ColumnSchema], per_column_settings: Mapping,
                 policy: FlushPolicy):
        schema = list(schema)
        validate_schema(schema)
        if not isinstance(policy, (PerBasket, OnlyAtCluster)):
            raise InvalidSettings(f"unsupported flush policy {policy!r}")
        self.schema = schema
        self.policy = policy
        self.settings = {}
        for column in schema:
            try:
                entry = per_column_settings[column.name]
            except KeyError:
                raise InvalidSettings(f"no compression settings for column {column.name!r}") from None
            if isinstance(entry, CompressionSettings):
                comp, pre = entry, PrecondId.NONE
            else:
                comp, pre = entry
            if not isinstance(comp, CompressionSettings):
                raise InvalidSettings(f"column {column.name!r}: expected CompressionSettings, got {comp!r}")
            if comp.dictionary is not None and comp.codec is not CodecId.ZSTD:
                raise InvalidSettings(f"column {column.name!r}: dictionary requires zstd")
            self.settings[column.name] = (comp, PrecondId.parse(pre))
        extra = set(per_column_settings) - {c.name for c in schema}
        if extra:
            raise InvalidSettings(f"settings given for unknown columns: {sorted(extra)}")

        self.path = os.fspath(path)
        self._file = open(self.path, "wb")
        self._file.write(MAGIC)
        self._pos = len(MAGIC)
        self._buffers = {c.name: _ColumnBuffer() for c in schema}
        self._cluster_fill = 0
        self.total_events = 0
        self.clusters: list[int] = []
        self.directory: list[BasketDirectoryEntry] = []
        # per-column seconds spent serializing, pre-conditioning and compressing
        self.encode_seconds = defaultdict(float)
        self.closed = False
        self.footer: FileFooter | None = None

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if not self.closed:
            if exc_type is None:
                self.close()
            else:
                self._file.close()
                self.closed = True

    def append_events(self, batch) -> None:
        if self.closed:
            raise ValueError("writer is closed")
        if not isinstance(batch, EventBatch):
            batch = EventBatch(dict(batch))
        names = {c.name for c in self.schema}
        if set(batch.columns) != names:
            raise SchemaMismatch(
                f"batch columns {sorted(batch.columns)} do not match schema {sorted(names)}")
        columns = {c.name: coerce_column(c, batch.columns[c.name]) for c in self.schema}
        n = batch.n_events
        if n == 0:
            return
        if isinstance(self.policy, OnlyAtCluster):
            self._append_clustered(columns, n)
        else:
            self._append_per_basket(columns, n)
        self.total_events += n

    def _append_clustered(self, columns, n):
        size = self.policy.events_per_cluster
        pos = 0
        while pos < n:
            take = min(size - self._cluster_fill, n - pos)
            for column in self.schema:
                values = columns[column.name][pos:pos + take]
                self._buffers[column.name].add(values, 0)
            self._cluster_fill += take
            pos += take
            if self._cluster_fill == size:
                self._flush_cluster()

    def _flush_cluster(self):
        for column in self.schema:
            self._flush_column(column)
        self._cluster_fill = 0
        self.clusters.append(self._buffers[self.schema[0].name].first_event)

    def _append_per_basket(self, columns, n):
        limit = self.policy.max_basket_bytes
        for column in self.schema:
            values = columns[column.name]
            buf = self._buffers[column.name]
            cum = np.cumsum(serialized_event_sizes(column, values))
            start = 0
            while start < n:
                prior = int(cum[start - 1]) if start else 0
                # first event whose inclusion pushes the buffer past the limit
                k = int(np.searchsorted(cum, limit - buf.nbytes + prior, side="right"))
                if k >= n:
                    buf.add(values[start:], int(cum[-1]) - prior)
                    break
                buf.add(values[start:k + 1], int(cum[k]) - prior)
                self._flush_column(column)
                buf = self._buffers[column.name]
                start = k + 1

    def _flush_column(self, column: ColumnSchema):
        buf = self._buffers[column.name]
        if buf.n_events == 0:
            return
        comp, pre = self.settings[column.name]
        t0 = time.perf_counter()
        values = concat_columns(buf.parts)
        data, offsets = serialize_column(column, values)
        counts = [len(data) // column.width]
        if offsets is not None:
            counts.append(len(offsets) // OFFSET_WIDTH)
        applied = _precond.effective_precond(pre, counts)
        framed_data = compress_buffer(_precond.apply(applied, data, column.width), comp) if data else b""
        framed_offsets = b""
        if offsets:
            framed_offsets = compress_buffer(_precond.apply(applied, offsets, OFFSET_WIDTH), comp)
        self.encode_seconds[column.name] += time.perf_counter() - t0

        entry = BasketDirectoryEntry(
            column_index=self.schema.index(column),
            first_event=buf.first_event,
            event_count=buf.n_events,
            file_offset=self._pos,
            framed_data_len=len(framed_data),
            framed_offsets_len=len(framed_offsets),
            uncompressed_data_len=len(data),
            uncompressed_offsets_len=len(offsets) if offsets is not None else 0,
            codec=comp.codec,
            level=comp.level,
            precond_applied=applied,
        )
        self._file.write(framed_data)
        self._file.write(framed_offsets)
        self._pos += entry.framed_len
        self.directory.append(entry)
        self._buffers[column.name] = _ColumnBuffer(buf.first_event + buf.n_events)

    def _settings_summary(self) -> dict:
        columns = {}
        for column in self.schema:
            comp, pre = self.settings[column.name]
            columns[column.name] = {
                "codec": comp.codec.short_name,
                "level": comp.level,
                "precond": pre.short_name,
                "dictionary_id": dictionary_id(comp.dictionary) if comp.dictionary else None,
            }
        return {"policy": policy_to_json(self.policy), "columns": columns}

    def close(self) -> FileFooter:
        """Flush whatever is buffered, write the footer and trailer, and close the file."""
        if self.closed:
            if self.footer is None:
                raise ValueError("writer was aborted")
            return self.footer
        try:
            if isinstance(self.policy, OnlyAtCluster):
                if self._cluster_fill:
                    self._flush_cluster()
            else:
                for column in self.schema:
                    self._flush_column(column)
                if self.total_events:
                    self.clusters = [self.total_events]
            footer = FileFooter(
                schema=self.schema,
                total_events=self.total_events,
                clusters=list(self.clusters),
                directory=list(self.directory),
                settings=self._settings_summary(),
            )
            raw = footer.dumps()
            self._file.write(raw)
            self._file.write(len(raw).to_bytes(8, "little"))
            self._file.write(TRAILER)
        finally:
            self._file.close()
            self.closed = True
        self.footer = footer
        return footer


def open_writer(path, schema: Sequence[ColumnSchema], per_column_settings: Mapping,
                policy: FlushPolicy) -> Writer:
    """Create (or truncate) ``path`` and return a :class:`Writer`.

    ``per_column_settings`` maps each column name to a
    ``(CompressionSettings, PrecondId)`` pair.
    """
    return Writer(path, schema, per_column_settings, policy)


def append_events(writer: Writer, batch) -> None:
    writer.append_events(batch)


def close(writer: Writer) -> FileFooter:
    return writer.close()


def write_file(path, schema, per_column_settings, policy, batches) -> FileFooter:
    with open_writer(path, schema, per_column_settings, policy) as w:
        for batch in batches:
            w.append_events(batch)
        return w.close()
