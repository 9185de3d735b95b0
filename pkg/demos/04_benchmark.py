"""
Sweeping codecs, pre-conditioners and flush policies
====================================================

The harness writes one file per combination, times a full scan, and
reports per-column ratios and speeds.
"""

from basketio.bench.matrix import FILE_ROW, run_matrix, select
from basketio.bench.report import emit_report

rows = run_matrix("nanoaod", 5000, 42, ["lz4:1", "zstd:3", "lzma:6"], ["none", "shuffle"],
                  ["cluster:1000", "basket:32768"])

# one line per cell for the file as a whole
print(emit_report(select(rows, column=FILE_ROW), "md"))

# the jagged columns split into a data blob and an offsets blob
for r in select(rows, column="PFCand_pt:offsets", policy="cluster:1000", precond="none"):
    print(r.codec, f"offsets ratio {r.ratio:.3f}")
