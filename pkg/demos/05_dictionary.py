"""
Dictionaries for many small records
===================================

Small similar records compress poorly on their own, since each one has
to rediscover the shared keys. A trained zstd dictionary supplies them up
front.
"""

from basketio import CompressionSettings, compress_frame, decompress_frame, train_dictionary
from basketio.bench.checks import similar_records

records = similar_records(128)
print(records[0][:120], "...")

dictionary = train_dictionary(records, 16 * 1024)

plain = sum(len(compress_frame(r, CompressionSettings("zstd", 3))) for r in records)
with_dict = sum(len(compress_frame(r, CompressionSettings("zstd", 3, dictionary=dictionary))) for r in records)
print(f"raw {sum(map(len, records))}  zstd {plain}  zstd+dict {with_dict}")

# the dictionary must be supplied again to decode
frame = compress_frame(records[0], CompressionSettings("zstd", 3, dictionary=dictionary))
assert decompress_frame(frame, dictionary=dictionary)[0] == records[0]
