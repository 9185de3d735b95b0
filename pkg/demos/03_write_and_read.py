"""
Writing and reading an event file
=================================

A schema mixes fixed-width columns with jagged ones. Each column gets its
own codec and pre-conditioner, and baskets are flushed either per column
by size or all together at cluster boundaries.
"""

import tempfile
from pathlib import Path

import numpy as np

from basketio import (
    Arity, ColumnSchema, CompressionSettings, JaggedArray, OnlyAtCluster, PrecondId, open_reader, open_writer,
)

schema = [
    ColumnSchema("run", "i32"),
    ColumnSchema("MET_pt", "f32"),
    ColumnSchema("Jet_pt", "f32", Arity.VARIABLE),
]
settings = {
    "run": (CompressionSettings("zstd", 3), PrecondId.NONE),
    "MET_pt": (CompressionSettings("lz4", 1), PrecondId.SHUFFLE),
    "Jet_pt": (CompressionSettings("lz4", 1), PrecondId.SHUFFLE),
}

rng = np.random.default_rng(1)
path = Path(tempfile.mkdtemp()) / "events.bkio"

with open_writer(path, schema, settings, OnlyAtCluster(1000)) as w:
    for _ in range(5):
        n = 700
        counts = rng.poisson(4, n)
        w.append_events({
            "run": np.full(n, 316000, "<i4"),
            "MET_pt": rng.exponential(30, n).astype("<f4"),
            "Jet_pt": JaggedArray(rng.exponential(25, counts.sum()).astype("<f4"), counts),
        })

print(path.stat().st_size, "bytes on disk")

with open_reader(path) as r:
    print(r.total_events, "events, clusters end at", r.footer.clusters)
    jets = r.read_column("Jet_pt", 995, 1005)
    for i, event in enumerate(jets, start=995):
        print(i, np.round(event, 1))
    scan = r.scan_all()
    print(f"full scan {scan.total_bytes} bytes at {scan.mb_per_s:.0f} MB/s")
