import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from basketio.errors import MalformedOffsets, SchemaMismatch
from basketio.model import (
    Arity,
    ColumnSchema,
    ElementType,
    EventBatch,
    JaggedArray,
    deserialize_fixed_column,
    deserialize_variable_column,
    serialize_fixed_column,
    serialize_variable_column,
)
from oracles import le_bytes, offsets_oracle


def test_element_widths():
    widths = {t.value: t.width for t in ElementType}
    assert widths == {"i32": 4, "i64": 8, "f32": 4, "f64": 8, "u8": 1}


def test_column_schema_rejects_empty_name():
    with pytest.raises(ValueError):
        ColumnSchema("", ElementType.F32)


def test_column_schema_json_round_trip():
    c = ColumnSchema("Jet_pt", "f32", "variable")
    assert c.arity is Arity.VARIABLE
    assert ColumnSchema.from_json(c.to_json()) == c


def test_serialize_variable_empty():
    assert serialize_variable_column([], 4) == (b"", b"")


def test_serialize_variable_single():
    data, offsets = serialize_variable_column([[7]], 4)
    assert data == bytes.fromhex("07000000")
    assert np.frombuffer(offsets, "<u4").tolist() == [0]


def test_serialize_variable_with_empty_event():
    events = [[1, 2], [], [3]]
    data, offsets = serialize_variable_column(events, 4)
    assert data == le_bytes([1, 2, 3], 4)
    assert np.frombuffer(offsets, "<u4").tolist() == offsets_oracle(events, 4) == [0, 8, 8]


def test_deserialize_variable_empty():
    assert len(deserialize_variable_column(b"", b"", 4)) == 0


def test_deserialize_rejects_decreasing_offsets():
    offsets = np.array([8, 0], "<u4").tobytes()
    with pytest.raises(MalformedOffsets):
        deserialize_variable_column(bytes(16), offsets, 4)


@pytest.mark.parametrize("offsets", [[0, 20], [0, 6], [4]])
def test_deserialize_rejects_bad_offsets(offsets):
    with pytest.raises(MalformedOffsets):
        deserialize_variable_column(bytes(16), np.array(offsets, "<u4").tobytes(), 4)


def test_variable_round_trip_1000_random(rng):
    events = [rng.integers(-2**31, 2**31, rng.integers(0, 6)).tolist() for _ in range(1000)]
    data, offsets = serialize_variable_column(events, "i32")
    assert deserialize_variable_column(data, offsets, "i32").tolist() == events
    assert len(data) == sum(len(e) for e in events) * 4
    assert np.frombuffer(offsets, "<u4").tolist() == offsets_oracle(events, 4)


def test_serialize_fixed():
    assert serialize_fixed_column([], 4) == b""
    assert serialize_fixed_column([1, 2], 4) == bytes.fromhex("0100000002000000")


def test_fixed_round_trip_1000_random(rng):
    values = rng.normal(size=1000)
    blob = serialize_fixed_column(values, "f64")
    assert len(blob) == 8000
    assert np.array_equal(deserialize_fixed_column(blob, "f64"), values)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.lists(st.integers(0, 255), max_size=10), max_size=40),
       st.sampled_from([1, 4, 8]))
def test_variable_round_trip_property(events, width):
    data, offsets = serialize_variable_column(events, width)
    off = np.frombuffer(offsets, "<u4")
    assert len(off) == len(events)
    if len(off):
        assert off[0] == 0
        assert (np.diff(off.astype(np.int64)) >= 0).all()
    assert len(data) == sum(len(e) for e in events) * width
    assert deserialize_variable_column(data, offsets, width).tolist() == events


def test_jagged_slicing():
    j = JaggedArray.from_list([[1, 2], [], [3], [4, 5, 6]], dtype="<i4")
    assert j[1:3].tolist() == [[], [3]]
    assert j[-1].tolist() == [4, 5, 6]
    assert JaggedArray.concatenate([j[:2], j[2:]]) == j


def test_event_batch_rejects_uneven_columns():
    with pytest.raises(SchemaMismatch):
        EventBatch({"a": np.zeros(3), "b": np.zeros(4)})
