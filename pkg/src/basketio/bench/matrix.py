"""Codec x level x pre-conditioner x flush-policy measurement matrix."""
from __future__ import annotations

import logging
import math
import os
import statistics
import tempfile
import time
from dataclasses import dataclass, fields
from typing import Iterable, Sequence

from ..codec import CodecId, CompressionSettings
from ..layout import FlushPolicy, parse_policy
from ..precond import PrecondId
from ..reader import open_reader
from ..writer import open_writer, uniform_settings
from .datasets import DatasetKind, generate_dataset, schema_for

log = logging.getLogger(__name__)

FILE_ROW = "*"
READ_REPEATS = 3


@dataclass
class BenchReportRow:
    dataset: str
    column: str
    codec: str
    level: int
    precond: str
    policy: str
    uncompressed_bytes: int
    compressed_bytes: int
    ratio: float
    write_mb_s: float | None = None
    read_mb_s: float | None = None
    write_s: float | None = None
    read_s: float | None = None
    file_bytes: int | None = None
    error: str = ""

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


def _mb_s(nbytes: int, seconds: float) -> float:
    return nbytes / seconds / 1e6 if seconds > 0 else math.inf


def parse_codecs(text: str) -> list[CompressionSettings]:
    return [CompressionSettings.parse(part) for part in text.split(",") if part.strip()]


def parse_preconds(text: str) -> list[PrecondId]:
    return [PrecondId.parse(part) for part in text.split(",") if part.strip()]


def parse_policies(text: str) -> list[FlushPolicy]:
    return [parse_policy(part) for part in text.replace("|", ",").split(",") if part.strip()]


def measure_cell(kind: DatasetKind, batches, settings: CompressionSettings, precond: PrecondId,
                 policy: FlushPolicy, path: str, repeats: int = READ_REPEATS) -> list[BenchReportRow]:
    """Write one file, scan it ``repeats`` times, and report per-file and per-column rows."""
    schema = schema_for(kind)
    common = dict(dataset=kind.value, codec=settings.codec.short_name, level=settings.level,
                  precond=precond.short_name, policy=str(policy))

    t0 = time.perf_counter()
    with open_writer(path, schema, uniform_settings(schema, settings, precond), policy) as writer:
        for batch in batches:
            writer.append_events(batch)
        footer = writer.close()
    write_s = time.perf_counter() - t0
    encode_s = writer.encode_seconds
    file_bytes = os.path.getsize(path)

    scans = []
    with open_reader(path) as reader:
        for _ in range(repeats):
            scans.append(reader.scan_all())

    per_col = {c.name: [0, 0, 0, 0] for c in schema}  # u_data, u_off, f_data, f_off
    for e in footer.directory:
        acc = per_col[schema[e.column_index].name]
        acc[0] += e.uncompressed_data_len
        acc[1] += e.uncompressed_offsets_len
        acc[2] += e.framed_data_len
        acc[3] += e.framed_offsets_len
    total_u = sum(a[0] + a[1] for a in per_col.values())
    total_f = sum(a[2] + a[3] for a in per_col.values())
    read_s = statistics.median(s.elapsed for s in scans)
    rows = [BenchReportRow(
        column=FILE_ROW, uncompressed_bytes=total_u, compressed_bytes=total_f,
        ratio=total_u / total_f if total_f else math.nan,
        write_mb_s=_mb_s(total_u, write_s), read_mb_s=_mb_s(total_u, read_s),
        write_s=write_s, read_s=read_s, file_bytes=file_bytes, **common)]

    for column in schema:
        u_data, u_off, f_data, f_off = per_col[column.name][:4]
        u, f = u_data + u_off, f_data + f_off
        col_read = statistics.median(s.column_seconds[column.name] for s in scans)
        rows.append(BenchReportRow(
            column=column.name, uncompressed_bytes=u, compressed_bytes=f,
            ratio=u / f if f else math.nan, write_mb_s=_mb_s(u, encode_s[column.name]),
            read_mb_s=_mb_s(u, col_read), write_s=encode_s[column.name], read_s=col_read, **common))
        if column.is_variable:
            rows.append(BenchReportRow(
                column=f"{column.name}:data", uncompressed_bytes=u_data, compressed_bytes=f_data,
                ratio=u_data / f_data if f_data else math.nan, **common))
            rows.append(BenchReportRow(
                column=f"{column.name}:offsets", uncompressed_bytes=u_off, compressed_bytes=f_off,
                ratio=u_off / f_off if f_off else math.nan, **common))
    return rows


def run_matrix(kind, n_events: int, seed: int, codecs: Sequence, preconds: Sequence = (PrecondId.NONE,),
               policies: Sequence = ("cluster:1000",), workdir: str | None = None,
               repeats: int = READ_REPEATS, batches: Iterable | None = None) -> list[BenchReportRow]:
    """Measure every (codec, precond, policy) cell on one generated dataset.

    ``codecs`` holds CompressionSettings, ``"zstd:3"`` strings, or
    ``(CodecId, level)`` pairs.  A failing cell yields a single row carrying
    the error text instead of aborting the run.
    """
    kind = DatasetKind(kind)
    codecs = [_as_settings(c) for c in codecs]
    preconds = [PrecondId.parse(p) for p in preconds]
    policies = [parse_policy(p) if isinstance(p, str) else p for p in policies]
    if not (codecs and preconds and policies):
        raise ValueError("benchmark matrix must be non-empty")
    batches = list(batches) if batches is not None else list(generate_dataset(kind, n_events, seed))

    rows = []
    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        path = os.path.join(tmp, "cell.bkio")
        for settings in codecs:
            for precond in preconds:
                for policy in policies:
                    log.info("cell %s %s %s %s", kind.value, settings, precond.short_name, policy)
                    try:
                        rows.extend(measure_cell(kind, batches, settings, precond, policy, path, repeats))
                    except Exception as exc:  # recorded, not fatal
                        log.exception("cell failed")
                        rows.append(BenchReportRow(
                            dataset=kind.value, column=FILE_ROW, codec=settings.codec.short_name,
                            level=settings.level, precond=precond.short_name, policy=str(policy),
                            uncompressed_bytes=0, compressed_bytes=0, ratio=math.nan,
                            error=f"{type(exc).__name__}: {exc}"))
    return rows


def _as_settings(c) -> CompressionSettings:
    if isinstance(c, CompressionSettings):
        return c
    if isinstance(c, str):
        return CompressionSettings.parse(c)
    codec, level = c
    return CompressionSettings(CodecId.parse(codec), level)


def select(rows: Sequence[BenchReportRow], **criteria) -> list[BenchReportRow]:
    return [r for r in rows if all(getattr(r, k) == v for k, v in criteria.items())]


def select_one(rows: Sequence[BenchReportRow], **criteria) -> BenchReportRow:
    found = select(rows, **criteria)
    if len(found) != 1:
        raise LookupError(f"expected one row matching {criteria}, found {len(found)}")
    if found[0].error:
        raise RuntimeError(f"benchmark cell failed: {found[0].error}")
    return found[0]
