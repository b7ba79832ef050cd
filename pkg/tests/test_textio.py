import numpy as np
import pytest

from ffmimo.errors import ParseError
from ffmimo.textio import format_matrix, format_real_channel, parse_matrix, parse_real_channel

HAMMING_TXT = """# [7,4] Hamming generator, systematic
7 4 2
1 0 0 0
0 1 0 0
0 0 1 0
0 0 0 1

1 1 0 1
1 0 1 1
0 1 1 1
"""


def test_parse_matrix_with_comments():
    a, p = parse_matrix(HAMMING_TXT)
    assert p == 2 and a.shape == (7, 4)
    assert a[4].tolist() == [1, 1, 0, 1]


def test_matrix_round_trip():
    a = np.random.default_rng(0).integers(0, 5, size=(3, 4))
    b, p = parse_matrix(format_matrix(a, 5))
    assert p == 5 and np.array_equal(a, b)


def test_real_round_trip():
    H = np.random.default_rng(1).standard_normal((3, 2))
    H2, snr, p, seed = parse_real_channel(format_real_channel(H, 2.5, 3, seed=9))
    assert np.array_equal(H, H2) and snr == 2.5 and p == 3 and seed == 9


@pytest.mark.parametrize("text, line, col", [
    ("2 2\n1 0\n0 1\n", 1, 1),
    ("2 2 2\n1 0\n0 y\n", 3, 3),
    ("2 2 2\n1 0 1\n0 1\n", 2, 5),
    ("2 2 2\n1 0\n", 3, 1),
    ("2 2 4\n1 0\n0 1\n", 1, 5),
])
def test_matrix_errors_have_positions(text, line, col):
    with pytest.raises(ParseError) as info:
        parse_matrix(text, "m.txt")
    assert (info.value.line, info.value.col) == (line, col)
    assert str(info.value).startswith(f"m.txt:{line}:{col}:")


def test_real_channel_needs_snr():
    with pytest.raises(ParseError) as info:
        parse_real_channel("1 1 2\n1.0\n")
    assert info.value.line == 2


def test_real_channel_bad_float():
    with pytest.raises(ParseError) as info:
        parse_real_channel("1 2 3\nsnr 1\n0.5 abc\n")
    assert (info.value.line, info.value.col) == (3, 5)
