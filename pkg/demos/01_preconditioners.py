"""
Byte and bit shuffling on float columns
=======================================

Shuffle regroups the bytes of each element so that slowly varying high
bytes sit next to each other. A fast codec like LZ4 then finds runs it
could not see before.
"""

import lz4.block
import numpy as np

from basketio import bitshuffle, byte_stream_split, shuffle, unbitshuffle, unshuffle

# a tiny example first: two 2-byte elements
print(shuffle(b"\xa0\xa1\xb0\xb1", 2).hex(" "))

# transverse momenta of a made-up particle collection
rng = np.random.default_rng(0)
pt = rng.exponential(20.0, 100_000).astype("<f4")
raw = pt.tobytes()

for name, transform in [("none", lambda b: b), ("shuffle", lambda b: shuffle(b, 4)),
                        ("bitshuffle", lambda b: bitshuffle(b, 4))]:
    size = len(lz4.block.compress(transform(raw), store_size=False))
    print(f"{name:>10}: {len(raw)} -> {size} bytes ({len(raw) / size:.3f}x)")

# byte-stream-split is the same permutation under another name
assert byte_stream_split(raw, 4) == shuffle(raw, 4)

# and every transform is exactly invertible
assert unshuffle(shuffle(raw, 4), 4) == raw
assert unbitshuffle(bitshuffle(raw, 4), 4) == raw
