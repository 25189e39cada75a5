import json
import math

from hypothesis import given, strategies as st

from weakgamma.report import BoundReport, fmt

values = st.one_of(st.floats(allow_nan=False), st.just(math.inf))


@given(v=values, err=st.floats(0, 1e6), flags=st.lists(st.text(max_size=8), max_size=3))
def test_json_roundtrip(v, err, flags):
    r = BoundReport("x", v, {"a": 1, "b": [1.0, math.inf]}, {"k": v}, {"c": -math.inf}, flags, "", err)
    back = BoundReport.from_json(json.loads(json.dumps(r.to_json())))
    assert back == r
    assert back.digest == r.digest


def test_dominates():
    assert BoundReport("x", math.inf).dominates(1e300)
    assert BoundReport("x", 2.0, error=0.5).dominates(1.5)
    assert not BoundReport("x", 2.0, error=0.6).dominates(1.5)


def test_fmt_twelve_digits():
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(math.inf) == "inf" and fmt(-math.inf) == "-inf" and fmt(math.nan) == "nan"
    assert fmt(7) == "7"


def test_csv_row_shape():
    r = BoundReport("x", 1.0, comparisons={"a": 2.0, "nested": {"skip": 1}}, flags=["f1", "f2"])
    row = r.csv_row()
    assert len(row) == len(BoundReport.CSV_COLUMNS)
    assert row[4] == "f1|f2" and row[5] == "a=2"
