"""Columnar event storage with framed multi-codec compression and byte pre-conditioners."""
from .codec import (
    CodecId,
    CompressionSettings,
    FrameHeader,
    compress_buffer,
    compress_frame,
    decompress_buffer,
    decompress_frame,
    train_dictionary,
)
from .errors import *  # noqa: F401,F403
from .layout import BasketDirectoryEntry, FileFooter, OnlyAtCluster, PerBasket, parse_policy
from .model import (
    Arity,
    ColumnSchema,
    ElementType,
    EventBatch,
    JaggedArray,
    deserialize_variable_column,
    serialize_fixed_column,
    serialize_variable_column,
)
from .precond import PrecondId, bitshuffle, byte_stream_split, shuffle, unbitshuffle, unshuffle
from .reader import Reader, ScanResult, open_reader, read_column, scan_all
from .writer import Writer, open_writer, uniform_settings, write_file

__version__ = "0.1.0"
