"""Seeded synthetic event datasets that stand in for HEP analysis ntuples."""
from __future__ import annotations

import enum
from typing import Iterator

import numpy as np

from ..model import Arity, ColumnSchema, ElementType, EventBatch, JaggedArray


class DatasetKind(str, enum.Enum):
    NANOAOD_LIKE = "nanoaod"
    FLAT_NTUPLE = "flat"
    CARRAY = "carray"


# (name, mean, sigma); a mix of narrow and wide distributions
_NANO_F32 = [
    ("MET_pt", 40.0, 15.0), ("MET_phi", 0.0, 1.8), ("MET_sumEt", 800.0, 150.0),
    ("MET_significance", 4.0, 2.5), ("PuppiMET_pt", 35.0, 12.0), ("PuppiMET_phi", 0.0, 1.8),
    ("PV_x", 0.1, 0.002), ("PV_y", -0.05, 0.002), ("PV_z", 0.5, 3.5), ("PV_chi2", 1.0, 0.1),
    ("PV_ndof", 120.0, 5.0), ("PV_score", 1500.0, 60.0), ("fixedGridRhoFastjetAll", 25.0, 1.0),
    ("fixedGridRhoFastjetCentral", 22.0, 1.0), ("LHEWeight_originalXWGTUP", 1.0, 0.01),
    ("genWeight", 1000.0, 1.0), ("Pileup_nTrueInt", 35.0, 2.0), ("Generator_scalePDF", 91.0, 1.5),
    ("Generator_x1", 0.5, 0.05), ("Generator_x2", 0.5, 0.05),
]
# (name, exclusive upper bound)
_NANO_I32 = [
    ("PV_npvs", 60), ("PV_npvsGood", 50), ("Pileup_nPU", 70), ("Flag_goodVertices", 2),
    ("Flag_METFilters", 2), ("HLT_IsoMu24", 2), ("HLT_Ele32_WPTight", 2), ("L1_SingleMu22", 2),
    ("luminosityBlock", 16), ("SV_count", 8),
]
# Variable columns: (name, exponential scale).  Lengths are Poisson; the mean
# is set so an event serializes to roughly 1 KiB.
_NANO_VARIABLE = [("PFCand_pt", 5.0), ("PFCand_energy", 12.0), ("Track_pt", 3.0), ("CaloHit_energy", 0.8)]
VARIABLE_MEAN_LENGTH = 50.0

_FLAT_F64 = ["x", "y", "z", "energy"]
_FLAT_I64 = ["id", "charge_code", "detector", "hits"]
FLAT_I64_HIGH = 1000

CARRAY_MEAN_LENGTH = 20.0
CARRAY_VALUE_HIGH = 1 << 16


def schema_for(kind) -> list[ColumnSchema]:
    kind = DatasetKind(kind)
    if kind is DatasetKind.NANOAOD_LIKE:
        cols = [ColumnSchema(n, ElementType.F32) for n, _, _ in _NANO_F32]
        cols += [ColumnSchema(n, ElementType.I32) for n, _ in _NANO_I32]
        cols += [ColumnSchema(n, ElementType.F32, Arity.VARIABLE) for n, _ in _NANO_VARIABLE]
        return cols
    if kind is DatasetKind.FLAT_NTUPLE:
        return ([ColumnSchema(n, ElementType.F64) for n in _FLAT_F64]
                + [ColumnSchema(n, ElementType.I64) for n in _FLAT_I64])
    return [ColumnSchema("values", ElementType.I32, Arity.VARIABLE)]


def _generate_columns(kind: DatasetKind, n: int, rng: np.random.Generator) -> dict:
    cols = {}
    if kind is DatasetKind.NANOAOD_LIKE:
        for name, mu, sigma in _NANO_F32:
            cols[name] = rng.normal(mu, sigma, n).astype("<f4")
        for name, high in _NANO_I32:
            cols[name] = rng.integers(0, high, n).astype("<i4")
        for name, scale in _NANO_VARIABLE:
            counts = rng.poisson(VARIABLE_MEAN_LENGTH, n)
            cols[name] = JaggedArray(rng.exponential(scale, int(counts.sum())).astype("<f4"), counts)
    elif kind is DatasetKind.FLAT_NTUPLE:
        for name in _FLAT_F64:
            cols[name] = rng.normal(0.0, 1.0, n).astype("<f8")
        for name in _FLAT_I64:
            cols[name] = rng.integers(0, FLAT_I64_HIGH, n).astype("<i8")
    else:
        counts = rng.poisson(CARRAY_MEAN_LENGTH, n)
        cols["values"] = JaggedArray(
            rng.integers(0, CARRAY_VALUE_HIGH, int(counts.sum())).astype("<i4"), counts)
    return cols


def generate_dataset(kind, n_events: int, seed: int, batch_size: int = 1000) -> Iterator[EventBatch]:
    """Yield the dataset as consecutive batches.

    Values depend only on ``(kind, n_events, seed)``; ``batch_size`` just
    controls how they are chunked.
    """
    if n_events < 1:
        raise ValueError("n_events must be >= 1")
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    kind = DatasetKind(kind)
    cols = _generate_columns(kind, n_events, np.random.default_rng(seed))
    whole = EventBatch(cols)
    for start in range(0, n_events, batch_size):
        yield whole.slice(start, min(start + batch_size, n_events))
