"""Exact rational scalars and their ``"p/q"`` text form."""

from __future__ import annotations

from fractions import Fraction
from typing import Union

RationalLike = Union[Fraction, int, str]

ZERO = Fraction(0)
ONE = Fraction(1)


def parse_rational(text: RationalLike) -> Fraction:
    """Parse ``"p/q"``, ``"p"`` or an int into a Fraction.

    Floats are refused: a binary float silently carries rounding error that
    would corrupt the exact comparisons done everywhere else.

    >>> parse_rational("6/8")
    Fraction(3, 4)
    >>> parse_rational(2)
    Fraction(2, 1)
    """
    if isinstance(text, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, str):
        s = text.strip()
        if "." in s or "e" in s.lower():
            raise ValueError(f"decimal notation is not exact: {text!r}")
        return Fraction(s)
    raise TypeError(f"cannot interpret {type(text).__name__} as a rational")


def format_rational(value: Fraction) -> str:
    """``Fraction(3, 4)`` -> ``"3/4"``; integers print without a denominator."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"
