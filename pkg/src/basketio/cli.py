"""Command line entry point: ``basketio {bench,write,read,inspect,train-dict}``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time

from .bench.checks import CHECK_EVENTS, CHECK_SEED, run_checks
from .bench.datasets import DatasetKind, generate_dataset, schema_for
from .bench.matrix import parse_codecs, parse_policies, parse_preconds, run_matrix
from .bench.report import emit_report
from .codec import CompressionSettings, train_dictionary
from .layout import MAGIC, TAIL_SIZE, parse_policy
from .precond import PrecondId
from .reader import open_reader
from .writer import uniform_settings, write_file


def _dict_pairs(items):
    out = {}
    for item in items or []:
        name, sep, path = item.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"expected COLUMN=PATH, got {item!r}")
        out[name] = path
    return out


def cmd_bench(args) -> int:
    status = 0
    if args.codecs or not args.check:
        rows = run_matrix(args.dataset, args.events, args.seed, parse_codecs(args.codecs or "zstd:3,lz4:1,zlib:6,lzma:6"),
                          parse_preconds(args.precond), parse_policies(args.policy))
        text = emit_report(rows, args.format, args.out)
        if args.out is None:
            sys.stdout.write(text)
        failed = [r for r in rows if r.error]
        for r in failed:
            print(f"cell failed: {r.codec}:{r.level} {r.precond} {r.policy}: {r.error}", file=sys.stderr)
        status = 1 if failed else 0
    if args.check:
        t0 = time.perf_counter()
        results = run_checks(args.check_events, args.seed,
                             echo=print)
        ok = all(r.passed for r in results)
        print(f"{sum(r.passed for r in results)}/{len(results)} checks passed "
              f"in {time.perf_counter() - t0:.1f}s")
        if not ok:
            status = 1
    return status


def cmd_write(args) -> int:
    kind = DatasetKind(args.dataset)
    schema = schema_for(kind)
    dictionary = None
    if args.dictionary:
        with open(args.dictionary, "rb") as f:
            dictionary = f.read()
    settings = CompressionSettings.parse(args.codec, dictionary)
    t0 = time.perf_counter()
    footer = write_file(args.out, schema, uniform_settings(schema, settings, PrecondId.parse(args.precond)),
                        parse_policy(args.policy), generate_dataset(kind, args.events, args.seed))
    elapsed = time.perf_counter() - t0
    u = sum(e.uncompressed_len for e in footer.directory)
    print(f"wrote {args.out}: {footer.total_events} events, {len(footer.directory)} baskets, "
          f"{u} -> {os.path.getsize(args.out)} bytes in {elapsed:.2f}s")
    return 0


def cmd_read(args) -> int:
    with open_reader(args.file, _dict_pairs(args.dictionary)) as reader:
        if args.column:
            values = reader.read_column(args.column, args.start, args.stop)
            print(f"{args.column}: {len(values)} events")
            for i, v in zip(range(args.show), values):
                print(f"  {args.start + i}: {v.tolist() if hasattr(v, 'tolist') else v}")
            return 0
        scan = reader.scan_all()
    for name, nbytes in scan.column_bytes.items():
        secs = scan.column_seconds[name]
        rate = nbytes / secs / 1e6 if secs else float("inf")
        print(f"{name:32s} {nbytes:12d} B {rate:10.1f} MB/s")
    print(f"{'total':32s} {scan.total_bytes:12d} B {scan.mb_per_s:10.1f} MB/s")
    return 0


def cmd_inspect(args) -> int:
    # Dump the footer as stored; no schema validation, so damaged files can be looked at.
    with open(args.file, "rb") as f:
        raw = f.read()
    if raw[:len(MAGIC)] != MAGIC or len(raw) < len(MAGIC) + TAIL_SIZE:
        print(f"{args.file}: not a basketio container", file=sys.stderr)
        return 2
    n = int.from_bytes(raw[-TAIL_SIZE:-4], "little")
    footer = json.loads(raw[-TAIL_SIZE - n:-TAIL_SIZE])
    json.dump(footer, sys.stdout, indent=None if args.compact else 2)
    sys.stdout.write("\n")
    return 0


def cmd_train_dict(args) -> int:
    samples = []
    for name in sorted(os.listdir(args.samples)):
        path = os.path.join(args.samples, name)
        if os.path.isfile(path):
            with open(path, "rb") as f:
                samples.append(f.read())
    blob = train_dictionary(samples, args.capacity)
    with open(args.out, "wb") as f:
        f.write(blob)
    print(f"trained {len(blob)}-byte dictionary from {len(samples)} samples -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="basketio", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    datasets = [k.value for k in DatasetKind]

    b = sub.add_parser("bench", help="run the codec/pre-conditioner/policy matrix")
    b.add_argument("--dataset", choices=datasets, default="nanoaod")
    b.add_argument("--events", type=int, default=10_000)
    b.add_argument("--seed", type=int, default=CHECK_SEED)
    b.add_argument("--codecs", default=None, help="e.g. zstd:3,lz4:1,zlib:6,lzma:6")
    b.add_argument("--precond", default="none", help="e.g. none,shuffle,bitshuffle,bss")
    b.add_argument("--policy", default="cluster:1000", help="e.g. cluster:1000|basket:32768")
    b.add_argument("--out", default=None)
    b.add_argument("--format", choices=["csv", "md"], default="csv")
    b.add_argument("--check", action="store_true", help="run the directional reproduction checks")
    b.add_argument("--check-events", type=int, default=CHECK_EVENTS, help=argparse.SUPPRESS)
    b.set_defaults(func=cmd_bench)

    w = sub.add_parser("write", help="write a synthetic dataset to a container file")
    w.add_argument("--dataset", choices=datasets, default="nanoaod")
    w.add_argument("--events", type=int, default=10_000)
    w.add_argument("--seed", type=int, default=CHECK_SEED)
    w.add_argument("--codec", default="zstd:3")
    w.add_argument("--precond", default="none")
    w.add_argument("--policy", default="cluster:1000")
    w.add_argument("--dictionary", default=None, help="zstd dictionary sidecar to compress with")
    w.add_argument("--out", required=True)
    w.set_defaults(func=cmd_write)

    r = sub.add_parser("read", help="scan a container file (or read one column)")
    r.add_argument("file")
    r.add_argument("--column", default=None)
    r.add_argument("--start", type=int, default=0)
    r.add_argument("--stop", type=int, default=None)
    r.add_argument("--show", type=int, default=5)
    r.add_argument("--dictionary", action="append", metavar="COLUMN=PATH")
    r.set_defaults(func=cmd_read)

    i = sub.add_parser("inspect", help="print the footer JSON")
    i.add_argument("file")
    i.add_argument("--compact", action="store_true")
    i.set_defaults(func=cmd_inspect)

    t = sub.add_parser("train-dict", help="train a zstd dictionary from a directory of samples")
    t.add_argument("--samples", required=True)
    t.add_argument("--capacity", type=int, required=True)
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_train_dict)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
