"""Synthetic datasets, the measurement matrix, reports and reproduction checks."""
from .datasets import DatasetKind, generate_dataset, schema_for
from .matrix import BenchReportRow, run_matrix
from .report import emit_report
