import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from navspace.io import (PnmFormatError, encode_pgm, encode_ppm, format_matrix, parse_matrix,
                         parse_pgm, parse_ppm)


@settings(max_examples=60, deadline=None)
@given(arrays(np.uint8, st.tuples(st.integers(1, 12), st.integers(1, 12))))
def test_pgm_round_trip(px):
    assert np.array_equal(parse_pgm(encode_pgm(px)), px)


@settings(max_examples=40, deadline=None)
@given(arrays(np.uint8, st.tuples(st.integers(1, 8), st.integers(1, 8), st.just(3))))
def test_ppm_round_trip(px):
    assert np.array_equal(parse_ppm(encode_ppm(px)), px)


def test_header_comments_and_whitespace():
    data = b"P5\n# a comment\n 3  2\n#another\n255\n" + bytes(range(6))
    assert parse_pgm(data).tolist() == [[0, 1, 2], [3, 4, 5]]


def test_encode_is_byte_stable():
    px = np.array([[0, 255]], dtype=np.uint8)
    assert encode_pgm(px) == b"P5\n2 1\n255\n\x00\xff"


@pytest.mark.parametrize("data, where", [
    (b"P6\n1 1\n255\n\x00\x00\x00", 0),  # wrong magic
    (b"P5\n2 2\n255\n\x00", 12),  # short raster: first missing byte
    (b"P5\n2", 4),  # truncated header
])
def test_errors_carry_offsets(data, where):
    with pytest.raises(PnmFormatError) as info:
        parse_pgm(data)
    assert info.value.offset == where
    assert f"byte offset {where}" in str(info.value)


def test_matrix_text_round_trip():
    m = np.array([[1.5, 2.0], [0.25, 1e-7]])
    assert np.array_equal(parse_matrix(format_matrix(m, "%.17g")), m)
    with pytest.raises(ValueError):
        parse_matrix("1 2\n3\n")
