"""
Self-describing compressed frames
=================================

Every compressed chunk carries a 9-byte header: a two letter codec tag,
the level, then compressed and uncompressed sizes as 3-byte little-endian
integers. A decoder needs nothing else.
"""

import os

from basketio import CompressionSettings, FrameHeader, compress_buffer, compress_frame, decompress_frame
from basketio.codec import MAX_FRAME_SIZE, iter_frame_headers

payload = b"run=316000 lumi=12 event=%d\n" * 400

for codec in ["raw", "zlib:6", "lzma:6", "lz4:1", "zstd:3"]:
    frame = compress_frame(payload, CompressionSettings.parse(codec))
    header = FrameHeader.unpack(frame)
    print(f"{codec:>7}  header={frame[:9].hex(' ')}  {header.u_size} -> {header.c_size}")
    assert decompress_frame(frame)[0] == payload

# random bytes do not shrink, so the frame is stored raw
print(compress_frame(os.urandom(1024), CompressionSettings("lz4"))[:2])

# anything over 16 MiB - 1 is split into several frames back to back
big = bytes(MAX_FRAME_SIZE + 1)
print([h.u_size for _, h in iter_frame_headers(compress_buffer(big, CompressionSettings("zstd", 1)))])
