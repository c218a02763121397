import numpy as np
import pytest

from matinar.io import SeriesFormatError, read_params_json, read_series_csv, write_json, write_series_csv
from matinar.process import simulate


def test_roundtrip_bit_identical(tmp_path, params_a):
    Y = simulate(params_a, 50, seed=1)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_series_csv(p1, Y)
    back = read_series_csv(p1)
    assert back.dtype == np.int64 and np.array_equal(back, Y)
    write_series_csv(p2, back)
    assert p1.read_bytes() == p2.read_bytes()


def test_row_order_free(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("t,row,col,value\n2,1,1,5\n1,1,1,3\n")
    assert read_series_csv(p).ravel().tolist() == [3, 5]


@pytest.mark.parametrize("body,needle", [
    ("t,row,col,value\n1,1,1,\n", "line 2, column 'value'"),
    ("t,row,col,value\n1,1,1,2\n2,1,,4\n", "line 3, column 'col'"),
    ("t,row,col,value\n1,1,1,x\n", "not an integer"),
    ("t,row,col,value\n1,1,1,-2\n", "below 0"),
    ("t,row,col,value\n0,1,1,2\n", "column 't'"),
    ("t,row,col,value\n1,1,1,2\n1,1,1,3\n", "duplicate"),
    ("t,row,col,value\n1,1,1,2\n2,1,2,3\n", "missing entry"),
    ("time,row,col,value\n1,1,1,2\n", "header"),
    ("t,row,col,value\n1,1,1,2,9\n", "expected 4 fields"),
    ("", "empty"),
    ("t,row,col,value\n", "no data"),
])
def test_malformed_csv(tmp_path, body, needle):
    p = tmp_path / "bad.csv"
    p.write_text(body)
    with pytest.raises(SeriesFormatError, match=needle):
        read_series_csv(p)


def test_params_json(tmp_path, params_a):
    p = tmp_path / "p.json"
    write_json(p, params_a.to_dict())
    back = read_params_json(p)
    np.testing.assert_array_equal(back.B[0], params_a.B[0])
    write_json(p, {"params": params_a.to_dict()})
    assert read_params_json(p).p == 1
    write_json(p, {"A": []})
    with pytest.raises(ValueError, match="missing"):
        read_params_json(p)
    p.write_text("{not json")
    with pytest.raises(ValueError, match="invalid JSON"):
        read_params_json(p)
