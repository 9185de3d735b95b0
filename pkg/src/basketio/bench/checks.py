"""Directional reproduction checks run by ``bench --check``."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from ..codec import CompressionSettings, compress_frame, train_dictionary
from ..model import Arity
from .datasets import DatasetKind, generate_dataset, schema_for
from .matrix import FILE_ROW, run_matrix, select_one

log = logging.getLogger(__name__)

CHECK_EVENTS = 100_000
CHECK_SEED = 42

LZ4_INCOMPRESSIBLE_MAX = 1.05
CLUSTER_SIZE_OVERHEAD_MAX = 0.10
SHUFFLE_MIN_SAVING = 0.05
DICTIONARY_MIN_SAVING = 0.20
DICTIONARY_RECORDS = 128
DICTIONARY_CAPACITY = 16 * 1024

TRIGGER_NAMES = ("HLT_IsoMu24", "HLT_IsoMu27", "HLT_Ele32_WPTight_Gsf", "HLT_PFJet500",
                 "HLT_PFMET120_PFMHT120_IDTight", "HLT_DoubleEle33_CaloIdL_MW", "HLT_Mu50", "HLT_Photon200")

CLUSTER_POLICY = "cluster:1000"
BASKET_POLICY = "basket:32768"


@dataclass
class CheckResult:
    criterion: int
    name: str
    passed: bool
    detail: str
    measured: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.criterion}: {self.name}: {self.detail}"


def check_offset_incompressibility(n_events=CHECK_EVENTS, seed=CHECK_SEED, workdir=None) -> CheckResult:
    rows = run_matrix(DatasetKind.CARRAY, n_events, seed, ["zstd:3", "lz4:1"], ["none"],
                      [CLUSTER_POLICY], workdir=workdir, repeats=1)
    zstd = select_one(rows, column="values:offsets", codec="zstd").ratio
    lz4 = select_one(rows, column="values:offsets", codec="lz4").ratio
    passed = zstd > lz4 and lz4 < LZ4_INCOMPRESSIBLE_MAX
    return CheckResult(3, "offset array incompressible with lz4", passed,
                       f"offsets ratio zstd:3={zstd:.4f} lz4:1={lz4:.4f} (need zstd > lz4, lz4 < {LZ4_INCOMPRESSIBLE_MAX})",
                       {"zstd": zstd, "lz4": lz4})


def check_ratio_ordering(batches, n_events=CHECK_EVENTS, seed=CHECK_SEED, workdir=None) -> CheckResult:
    codecs = ["lzma:6", "zstd:3", "lz4:1", "raw:0"]
    rows = run_matrix(DatasetKind.NANOAOD_LIKE, n_events, seed, codecs, ["none"], [BASKET_POLICY],
                      workdir=workdir, batches=batches)
    file_rows = {c.split(":")[0]: select_one(rows, column=FILE_ROW, codec=c.split(":")[0]) for c in codecs}
    r = {k: v.ratio for k, v in file_rows.items()}
    lz4_read = file_rows["lz4"].read_mb_s
    lzma_read = file_rows["lzma"].read_mb_s
    passed = r["lzma"] >= r["zstd"] >= r["lz4"] >= r["raw"] and lz4_read > lzma_read
    return CheckResult(4, "file ratio ordering lzma >= zstd >= lz4 >= raw", passed,
                       f"ratios lzma={r['lzma']:.4f} zstd={r['zstd']:.4f} lz4={r['lz4']:.4f} raw={r['raw']:.4f}; "
                       f"read MB/s lz4={lz4_read:.1f} lzma={lzma_read:.1f}",
                       {**{f"ratio_{k}": v for k, v in r.items()}, "read_lz4": lz4_read, "read_lzma": lzma_read})


def check_cluster_tradeoff(batches, n_events=CHECK_EVENTS, seed=CHECK_SEED, workdir=None) -> CheckResult:
    rows = run_matrix(DatasetKind.NANOAOD_LIKE, n_events, seed, ["zstd:3"], ["none"],
                      [CLUSTER_POLICY, BASKET_POLICY], workdir=workdir, batches=batches)
    cluster = select_one(rows, column=FILE_ROW, policy=CLUSTER_POLICY)
    basket = select_one(rows, column=FILE_ROW, policy=BASKET_POLICY)
    overhead = cluster.file_bytes / basket.file_bytes - 1.0
    passed = overhead <= CLUSTER_SIZE_OVERHEAD_MAX and cluster.read_mb_s >= basket.read_mb_s
    return CheckResult(5, "cluster-only flush: small size cost, no read slowdown", passed,
                       f"size overhead {overhead:+.2%} (max {CLUSTER_SIZE_OVERHEAD_MAX:.0%}); "
                       f"scan MB/s cluster={cluster.read_mb_s:.1f} basket={basket.read_mb_s:.1f}",
                       {"size_overhead": overhead, "read_cluster": cluster.read_mb_s,
                        "read_basket": basket.read_mb_s})


def check_shuffle_benefit(batches, n_events=CHECK_EVENTS, seed=CHECK_SEED, workdir=None) -> CheckResult:
    rows = run_matrix(DatasetKind.NANOAOD_LIKE, n_events, seed, ["lz4:1"], ["none", "shuffle"],
                      [CLUSTER_POLICY], workdir=workdir, repeats=1, batches=batches)
    savings = {}
    for column in schema_for(DatasetKind.NANOAOD_LIKE):
        if column.arity is not Arity.VARIABLE:
            continue
        plain = select_one(rows, column=f"{column.name}:data", precond="none").compressed_bytes
        shuffled = select_one(rows, column=f"{column.name}:data", precond="shuffle").compressed_bytes
        savings[column.name] = 1.0 - shuffled / plain
    worst = min(savings, key=savings.get)
    passed = all(s >= SHUFFLE_MIN_SAVING for s in savings.values())
    return CheckResult(6, "shuffle shrinks lz4 output for variable f32 columns", passed,
                       "lz4 data-blob saving " + ", ".join(f"{k}={v:.1%}" for k, v in savings.items())
                       + f" (min {SHUFFLE_MIN_SAVING:.0%}, worst {worst})",
                       savings)


def similar_records(n=DICTIONARY_RECORDS, seed=CHECK_SEED) -> list[bytes]:
    """~1 KiB JSON event summaries sharing keys and layout but not values."""
    rng = np.random.default_rng(seed)
    batch = next(generate_dataset(DatasetKind.NANOAOD_LIKE, n, seed, batch_size=n))
    records = []
    for i in range(n):
        rec = {"run": 316000 + int(rng.integers(0, 5)), "event": int(rng.integers(0, 1 << 31))}
        rec["triggers"] = {name: bool(rng.integers(0, 2)) for name in TRIGGER_NAMES}
        for column in schema_for(DatasetKind.NANOAOD_LIKE):
            if column.arity is Arity.VARIABLE:
                rec[f"n{column.name.split('_')[0]}"] = len(batch[column.name][i])
            else:
                rec[column.name] = round(float(batch[column.name][i]), 3)
        records.append(json.dumps(rec).encode())
    return records


def check_dictionary_benefit(seed=CHECK_SEED) -> CheckResult:
    records = similar_records(seed=seed)
    blob = train_dictionary(records, DICTIONARY_CAPACITY)
    plain = CompressionSettings("zstd", 3)
    with_dict = CompressionSettings("zstd", 3, dictionary=blob)
    size_plain = sum(len(compress_frame(r, plain)) for r in records)
    size_dict = sum(len(compress_frame(r, with_dict)) for r in records)
    saving = 1.0 - size_dict / size_plain
    mean_len = sum(map(len, records)) / len(records)
    return CheckResult(7, "zstd dictionary shrinks small similar records", saving >= DICTIONARY_MIN_SAVING,
                       f"{len(records)} records of ~{mean_len:.0f} B: {size_plain} -> {size_dict} bytes "
                       f"({saving:.1%} saved, min {DICTIONARY_MIN_SAVING:.0%}; dictionary {len(blob)} B)",
                       {"plain": size_plain, "dict": size_dict, "saving": saving})


def run_checks(n_events=CHECK_EVENTS, seed=CHECK_SEED, workdir=None, echo=None) -> list[CheckResult]:
    """Run the directional checks in order; ``echo`` is called with each result line."""
    results = []

    def record(result):
        results.append(result)
        log.info(result.line())
        if echo is not None:
            echo(result.line())

    record(check_offset_incompressibility(n_events, seed, workdir))
    nano = list(generate_dataset(DatasetKind.NANOAOD_LIKE, n_events, seed))
    record(check_ratio_ordering(nano, n_events, seed, workdir))
    record(check_cluster_tradeoff(nano, n_events, seed, workdir))
    record(check_shuffle_benefit(nano, n_events, seed, workdir))
    record(check_dictionary_benefit(seed))
    return results
