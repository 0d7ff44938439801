"""Helpers for integers far past the int<->str limits of CPython."""

from fractions import Fraction

import gmpy2

# GMP's digit alphabets: lowercase up to radix 36, uppercase first above it
_LOW = "0123456789abcdefghijklmnopqrstuvwxyz"
_HIGH = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz"


def _alphabet(radix):
    return _LOW if radix <= 36 else _HIGH


def dec(x):
    """Decimal string of an arbitrary int (no 4300-digit limit)."""
    return gmpy2.mpz(x).digits(10)


def undec(s):
    return int(gmpy2.mpz(s, 10))


def frac_str(q):
    q = Fraction(q)
    return f"{dec(q.numerator)}/{dec(q.denominator)}"


def parse_frac(s):
    num, _, den = str(s).partition("/")
    return Fraction(undec(num), undec(den or "1"))


def ratio(num, den):
    """Exact num/den, reducing with GMP first (math.gcd is slow on 10^5-digit ints)."""
    g = int(gmpy2.gcd(num, den))
    if g > 1:
        num, den = num // g, den // g
    return Fraction(num, den)


def lt_scaled(num, den, q):
    """num/den < q for den > 0, without building a huge Fraction."""
    q = Fraction(q)
    return num * q.denominator < q.numerator * den


def le_scaled(num, den, q):
    q = Fraction(q)
    return num * q.denominator <= q.numerator * den


def digit_at(value, radix, width, pos):
    """Digit `pos` of `value` written with `width` digits in `radix`, most significant first."""
    if not 0 <= pos < width:
        raise IndexError(pos)
    exp = width - 1 - pos
    # value < 2^(exp * floor(log2 radix)) <= radix^exp means the digit is 0; skips a huge power
    if value.bit_length() <= exp * (radix.bit_length() - 1):
        return 0
    v = gmpy2.mpz(value)
    return int((v // gmpy2.mpz(radix) ** exp) % radix)


def to_digits(value, radix, width):
    """All `width` digits of value in `radix`, most significant first."""
    if value < 0:
        raise ValueError("value out of range")
    if radix <= 62:
        s = gmpy2.mpz(value).digits(radix)
        if len(s) > width:
            raise ValueError("value out of range")
        alpha = _alphabet(radix)
        return [0] * (width - len(s)) + [alpha.index(ch) for ch in s]
    return _split_digits(gmpy2.mpz(value), radix, width)


def _split_digits(v, radix, width):
    if width <= 32:
        out = []
        for _ in range(width):
            v, r = divmod(v, radix)
            out.append(int(r))
        if v:
            raise ValueError("value out of range")
        return out[::-1]
    low = width // 2
    hi, lo = divmod(v, gmpy2.mpz(radix) ** low)
    return _split_digits(hi, radix, width - low) + _split_digits(lo, radix, low)


def from_digits(digits, radix):
    digits = list(digits)
    if any(not 0 <= x < radix for x in digits):
        raise ValueError("digit out of range")
    if radix <= 62 and digits:
        alpha = _alphabet(radix)
        return int(gmpy2.mpz("".join(alpha[x] for x in digits), radix))
    return int(_join_digits(digits, radix))


def _join_digits(digits, radix):
    if len(digits) <= 32:
        v = gmpy2.mpz(0)
        for x in digits:
            v = v * radix + x
        return v
    low = len(digits) // 2
    return _join_digits(digits[:-low], radix) * gmpy2.mpz(radix) ** low + _join_digits(digits[-low:], radix)
