import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qpsync.records import NA, OutputError, Table, dumps, loads, normalize, read_table, write_table

cell = st.one_of(st.none(), st.floats(allow_nan=False, allow_infinity=False), st.integers(-10**6, 10**6),
                 st.booleans(), st.sampled_from(["CondMax", "proof-state 3", "grid"]))


@given(st.lists(st.lists(cell, min_size=3, max_size=3), max_size=20), st.sampled_from(["csv", "json"]))
def test_round_trip(rows, fmt):
    t = Table(["a", "b", "c"], rows, {"config": {"seed": 3, "params": [0.1, 2.0]}})
    back = loads(dumps(t, fmt), fmt)
    assert back.columns == t.columns and back.meta == t.meta
    assert back.rows == normalize(t).rows


def test_nan_policy():
    t = Table(["x"], [[float("nan")], [np.float64(0.25)], [None]])
    text = dumps(t, "csv")
    assert text.splitlines()[1:] == ["x", NA, "0.25", NA][1:]
    assert '"rows": [\n  [\n   null' in dumps(t, "json")
    assert loads(text).rows == [[None], [0.25], [None]]


def test_file_io(tmp_path):
    t = Table(["k", "v"], [["pi", math.pi]], {"note": "x"})
    p = write_table(t, tmp_path / "out.json", "json")
    assert read_table(p).rows == [["pi", math.pi]]
    with pytest.raises(OutputError, match="missing"):
        write_table(t, tmp_path / "missing" / "out.csv")
