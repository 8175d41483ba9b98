"""Conversions between the exact scalar types that flow through the package."""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Any

import sympy
from sympy.polys.domains import QQ, QQ_I

Rat = Fraction


def to_fraction(v: Any) -> Fraction:
    """Exact rational from int/Fraction/gmpy/sympy values; rejects non-real."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if hasattr(v, "y") and hasattr(v, "x"):  # Gaussian rational
        if v.y:
            raise ValueError(f"value {v} is not real")
        return to_fraction(v.x)
    if isinstance(v, sympy.Basic):
        v = sympy.nsimplify(v) if not v.is_Rational else v
        if not v.is_Rational:
            raise ValueError(f"value {v} is not rational")
        return Fraction(int(v.p), int(v.q))
    if hasattr(v, "numerator") and hasattr(v, "denominator"):
        return Fraction(int(v.numerator), int(v.denominator))
    if isinstance(v, str):
        return parse_rational(v)
    raise TypeError(f"cannot convert {type(v).__name__} to a rational")


_RATIONAL = re.compile(r"[+-]?\d+(/\d+)?")


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    if not _RATIONAL.fullmatch(text):
        raise ValueError(f"expected an integer or 'a/b', got {text!r}")
    return Fraction(text)


def fmt_rational(v: Any) -> str:
    f = to_fraction(v)
    return f"{f.numerator}/{f.denominator}"


def to_qq(v: Any):
    f = to_fraction(v)
    return QQ(f.numerator, f.denominator)


def to_qqi(v: Any):
    if hasattr(v, "y") and hasattr(v, "x"):
        return QQ_I(v.x, v.y)
    f = to_fraction(v)
    return QQ_I.convert(QQ(f.numerator, f.denominator))


def gaussian_parts(v: Any) -> tuple[Fraction, Fraction]:
    if hasattr(v, "y") and hasattr(v, "x"):
        return to_fraction(v.x), to_fraction(v.y)
    return to_fraction(v), Fraction(0)


def fmt_gaussian(v: Any) -> str:
    re, im = gaussian_parts(v)
    if not im:
        return fmt_rational(re)
    return f"{fmt_rational(re)}+{fmt_rational(im)}i"
