import json
import math

import numpy as np
import pytest

from basketio.bench.datasets import DatasetKind, generate_dataset, schema_for
from basketio.bench.matrix import FILE_ROW, BenchReportRow, run_matrix, select, select_one
from basketio.bench.report import emit_report, format_value, parse_csv
from basketio.cli import main
from basketio.codec import HEADER_SIZE
from basketio.model import serialize_column


def _serialized(batches, schema):
    out = b""
    for batch in batches:
        for c in schema:
            data, offsets = serialize_column(c, batch[c.name])
            out += data + (offsets or b"")
    return out


@pytest.mark.parametrize("kind", list(DatasetKind))
def test_generation_deterministic(kind):
    schema = schema_for(kind)
    a = _serialized(generate_dataset(kind, 1500, 9), schema)
    b = _serialized(generate_dataset(kind, 1500, 9, batch_size=333), schema)
    assert _serialized(generate_dataset(kind, 1500, 9), schema) == a
    assert len(a) == len(b)
    assert _serialized(generate_dataset(kind, 1500, 10), schema) != a


def test_schemas():
    nano = schema_for("nanoaod")
    assert sum(c.element_type.value == "f32" and not c.is_variable for c in nano) == 20
    assert sum(c.element_type.value == "i32" for c in nano) == 10
    assert sum(c.is_variable for c in nano) == 4
    flat = schema_for("flat")
    assert [c.element_type.value for c in flat] == ["f64"] * 4 + ["i64"] * 4
    (carray,) = schema_for("carray")
    assert carray.is_variable and carray.element_type.value == "i32"


def test_carray_offsets_invariant():
    (batch,) = generate_dataset("carray", 1000, 1, batch_size=1000)
    _, offsets = serialize_column(schema_for("carray")[0], batch["values"])
    off = np.frombuffer(offsets, "<u4").astype(np.int64)
    assert off[0] == 0 and (np.diff(off) >= 0).all()
    assert batch["values"].content.max() < 1 << 16


def test_nanoaod_bytes_per_event():
    schema = schema_for("nanoaod")
    total = sum(len(x) for x in [_serialized(generate_dataset("nanoaod", 10_000, 42), schema)])
    assert 700 <= total / 10_000 <= 1400


def test_generate_rejects_zero_events():
    with pytest.raises(ValueError):
        next(generate_dataset("flat", 0, 1))


@pytest.fixture(scope="module")
def small_rows():
    return run_matrix("carray", 3000, 5, ["raw:0", "zstd:3", "lz4:1"], ["none", "shuffle"],
                      ["cluster:1000", "basket:32768"])


def test_raw_ratio_is_header_overhead(small_rows, tmp_path):
    row = select_one(small_rows, column=FILE_ROW, codec="raw", precond="none", policy="cluster:1000")
    # 3 clusters x (data + offsets) blobs, one frame each
    assert row.compressed_bytes == row.uncompressed_bytes + HEADER_SIZE * 6
    assert row.ratio == pytest.approx(row.uncompressed_bytes / (row.uncompressed_bytes + 9 * 6))
    assert row.ratio < 1.0


def test_rows_shape(small_rows):
    cells = select(small_rows, column=FILE_ROW)
    assert len(cells) == 3 * 2 * 2
    for r in small_rows:
        assert r.error == ""
        assert r.ratio > 0
        assert r.ratio * r.compressed_bytes == pytest.approx(r.uncompressed_bytes)
    data = select_one(small_rows, column="values:data", codec="zstd", precond="none", policy="cluster:1000")
    offsets = select_one(small_rows, column="values:offsets", codec="zstd", precond="none", policy="cluster:1000")
    whole = select_one(small_rows, column="values", codec="zstd", precond="none", policy="cluster:1000")
    assert data.compressed_bytes + offsets.compressed_bytes == whole.compressed_bytes
    assert offsets.ratio > select_one(small_rows, column="values:offsets", codec="lz4", precond="none",
                                      policy="cluster:1000").ratio


def test_size_fields_deterministic(small_rows):
    again = run_matrix("carray", 3000, 5, ["raw:0", "zstd:3", "lz4:1"], ["none", "shuffle"],
                       ["cluster:1000", "basket:32768"], repeats=1)
    key = lambda r: (r.column, r.codec, r.precond, r.policy, r.uncompressed_bytes, r.compressed_bytes)
    assert [key(r) for r in again] == [key(r) for r in small_rows]


def test_failed_cell_is_recorded(monkeypatch):
    from basketio.bench import matrix

    def boom(*a, **k):
        raise RuntimeError("disk on fire")
    monkeypatch.setattr(matrix, "measure_cell", boom)
    rows = run_matrix("flat", 100, 1, ["zstd:3", "lz4:1"])
    assert len(rows) == 2 and all("disk on fire" in r.error for r in rows)


def test_empty_matrix_rejected():
    with pytest.raises(ValueError):
        run_matrix("flat", 100, 1, [])


def _row(**over):
    base = dict(dataset="flat", column="*", codec="zstd", level=3, precond="none", policy="cluster:1000",
                uncompressed_bytes=123456, compressed_bytes=65432, ratio=123456 / 65432,
                write_mb_s=101.23456, read_mb_s=987.6543, write_s=0.0123456, read_s=0.00012345, file_bytes=70000)
    base.update(over)
    return BenchReportRow(**base)


def test_csv_one_row(tmp_path):
    text = emit_report([_row()], "csv", tmp_path / "r.csv")
    lines = text.splitlines()
    assert len(lines) == 2
    assert lines[0].split(",") == BenchReportRow.field_names()
    assert (tmp_path / "r.csv").read_text() == text
    assert "1.887" in lines[1] and "101.2" in lines[1] and "987.7" in lines[1]


def test_csv_parse_back(small_rows):
    parsed = parse_csv(emit_report(small_rows, "csv"))
    assert len(parsed) == len(small_rows)
    for a, b in zip(small_rows, parsed):
        for name in BenchReportRow.field_names():
            va, vb = getattr(a, name), getattr(b, name)
            if isinstance(va, float):
                if math.isnan(va):
                    assert math.isnan(vb)
                else:
                    assert vb == float(format_value(va))
                    assert vb == pytest.approx(va, rel=5e-4)
            else:
                assert va == vb


def test_markdown_rows(small_rows, tmp_path):
    text = emit_report(small_rows, "md", tmp_path / "r.md")
    assert len(text.splitlines()) == len(small_rows) + 2


def test_emit_report_rejects_empty():
    with pytest.raises(ValueError):
        emit_report([], "csv")


def test_cli_write_read_inspect(tmp_path, capsys):
    out = tmp_path / "f.bkio"
    assert main(["write", "--dataset", "flat", "--events", "2500", "--codec", "lz4:1", "--precond", "shuffle",
                 "--policy", "cluster:1000", "--out", str(out)]) == 0
    assert main(["inspect", str(out)]) == 0
    footer = json.loads(capsys.readouterr().out.split("\n", 1)[1])
    assert footer["total_events"] == 2500 and footer["clusters"] == [1000, 2000, 2500]
    assert main(["read", str(out)]) == 0
    assert "total" in capsys.readouterr().out
    assert main(["read", str(out), "--column", "id", "--start", "5", "--stop", "9"]) == 0
    assert "id: 4 events" in capsys.readouterr().out


def test_cli_bench_report(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["bench", "--dataset", "carray", "--events", "500", "--codecs", "zstd:3,lz4:1",
                 "--precond", "none,bss", "--policy", "cluster:100|basket:4096", "--out", str(out)]) == 0
    rows = parse_csv(out.read_text())
    assert len(select(rows, column=FILE_ROW)) == 8


def test_cli_train_dict(tmp_path, capsys):
    from basketio.bench.checks import similar_records

    samples = tmp_path / "samples"
    samples.mkdir()
    for i, rec in enumerate(similar_records()):
        (samples / f"{i:03d}.json").write_bytes(rec)
    out = tmp_path / "d.zdict"
    assert main(["train-dict", "--samples", str(samples), "--capacity", "8192", "--out", str(out)]) == 0
    assert 0 < out.stat().st_size <= 8192

    f = tmp_path / "d.bkio"
    assert main(["write", "--dataset", "flat", "--events", "300", "--codec", "zstd:3",
                 "--dictionary", str(out), "--out", str(f)]) == 0
    assert main(["read", str(f), "--dictionary", f"x={out}", "--column", "x"]) == 0
