import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from ghostsim import io

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=30, deadline=None)
@given(
    values=arrays(np.float64, st.tuples(st.integers(1, 8), st.integers(1, 8)), elements=finite),
    centered=st.booleans(),
)
def test_grid_round_trip_is_bit_exact(tmp_path_factory, values, centered):
    path = tmp_path_factory.mktemp("g") / "a.gimg"
    io.write_grid(path, values, 0.25, 3.0, centered=centered)
    back = io.read_grid(path)
    assert back.values.tobytes() == values.tobytes()
    assert (back.dx, back.dy) == (0.25, 3.0)


def test_grid_header_and_errors(tmp_path):
    io.write_grid(tmp_path / "a.gimg", np.arange(6.0))
    raw = (tmp_path / "a.gimg").read_bytes()
    assert raw[:4] == b"GIMG" and len(raw) == 36 + 6 * 8
    (tmp_path / "b.gimg").write_bytes(b"XXXX" + raw[4:])
    with pytest.raises(ValueError):
        io.read_grid(tmp_path / "b.gimg")
    with pytest.raises(ValueError):
        io.write_grid(tmp_path / "c.gimg", np.zeros((2, 2, 2)))


def test_pgm_round_trip_with_comment(tmp_path):
    img = np.arange(12, dtype=np.uint8).reshape(3, 4)
    io.write_pgm(tmp_path / "a.pgm", img)
    raw = (tmp_path / "a.pgm").read_bytes()
    (tmp_path / "b.pgm").write_bytes(raw.replace(b"P5\n", b"P5\n# made by hand\n", 1))
    np.testing.assert_array_equal(io.read_pgm(tmp_path / "b.pgm"), img)
    deep = np.array([[0, 65535], [256, 7]], np.uint16)
    io.write_pgm(tmp_path / "d.pgm", deep, maxval=65535)
    np.testing.assert_array_equal(io.read_pgm(tmp_path / "d.pgm"), deep)


def test_preview_is_centred_and_normalised(tmp_path):
    v = np.zeros((4, 4))
    v[0, 0] = 2.0
    v[1, 1] = -1.0
    io.write_preview(tmp_path / "p.pgm", v)
    img = io.read_pgm(tmp_path / "p.pgm")
    assert img[2, 2] == 65535 and img.sum() == 65535


def test_series_csv(tmp_path):
    io.write_series_csv(tmp_path / "s.csv", [10, 14], [0.1, 1 / 3])
    n, eps = io.read_series_csv(tmp_path / "s.csv")
    assert n == [10, 14] and eps == [0.1, 1 / 3]
