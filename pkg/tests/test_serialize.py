import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wavetree.serialize import (
    canonical_json,
    compact_json,
    format_cell,
    rle_decode,
    rle_encode,
    spec_hash,
    write_csv,
)


def test_rle_roundtrip_basic():
    labels = np.array([0, 0, 0, 1, 1, 2, 0, 0], dtype=np.int32)
    pairs = rle_encode(labels)
    assert pairs == [[0, 3], [1, 2], [2, 1], [0, 2]]
    assert np.array_equal(rle_decode(pairs), labels)


def test_rle_empty():
    assert rle_encode([]) == []
    assert rle_decode([]).size == 0


@given(st.lists(st.integers(0, 5), min_size=1, max_size=200))
def test_rle_roundtrip_property(values):
    arr = np.asarray(values, dtype=np.int32)
    assert np.array_equal(rle_decode(rle_encode(arr)), arr)


def test_canonical_json_sorted_and_numpy_safe():
    payload = {"b": np.float64(1.5), "a": np.int32(2),
               "c": np.array([1.0, 2.0]), "d": np.bool_(True),
               "e": complex(1, -2)}
    text = canonical_json(payload)
    decoded = json.loads(text)
    assert list(decoded) == ["a", "b", "c", "d", "e"]
    assert decoded["e"] == {"re": 1.0, "im": -2.0}
    assert text.index('"a"') < text.index('"b"')


def test_spec_hash_stable_under_key_order():
    h1 = spec_hash({"x": 1, "y": [1, 2]})
    h2 = spec_hash({"y": [1, 2], "x": 1})
    assert h1 == h2 and len(h1) == 8
    assert spec_hash({"x": 2, "y": [1, 2]}) != h1


def test_format_cell_types():
    assert format_cell(True) == "true"
    assert format_cell(np.int64(3)) == "3"
    assert format_cell(0.1) == repr(0.1)
    assert format_cell("ok") == "ok"


def test_write_csv_with_preamble(tmp_path):
    path = tmp_path / "t.csv"
    write_csv(path, ["a", "b"], [(1, 2.5), (3, 4.0)], preamble=["config {}"])
    lines = path.read_text().splitlines()
    assert lines[0] == "# config {}"
    assert lines[1] == "a,b"
    assert lines[2] == "1,2.5"


def test_compact_json_single_line():
    text = compact_json({"b": 1, "a": [1, 2]})
    assert "\n" not in text and text == '{"a":[1,2],"b":1}'
