from fractions import Fraction

from hypothesis import given
from hypothesis import strategies as st

from mdimshift import _bigint


@given(st.integers(0, 10**60), st.integers(2, 200))
def test_digits_round_trip(value, radix):
    width = 1
    while radix**width <= value:
        width += 1
    digits = _bigint.to_digits(value, radix, width + 2)
    assert digits[:2] == [0, 0]
    assert _bigint.from_digits(digits, radix) == value
    for pos in range(len(digits)):
        assert _bigint.digit_at(value, radix, width + 2, pos) == digits[pos]


def test_decimal_past_the_str_limit():
    x = 7**20000  # ~17000 digits, above CPython's default int->str limit
    assert _bigint.undec(_bigint.dec(x)) == x


def test_fraction_strings():
    assert _bigint.frac_str(Fraction(6, 4)) == "3/2"
    assert _bigint.parse_frac("3/2") == Fraction(3, 2)
    assert _bigint.parse_frac("5") == 5


def test_ratio_reduces():
    assert _bigint.ratio(2**500 * 3, 2**501) == Fraction(3, 2)
