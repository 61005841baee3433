"""Exact rational arithmetic and rigorous comparisons against c / sqrt(pi * n).

Every certified claim in this package reduces to a comparison between a
nonnegative rational and a constant of the form (c_num/c_den) / sqrt(pi * n).
Squaring both sides removes the square root, so the comparison is decided by
exact integer arithmetic against a fixed rational enclosure of pi.  No
floating point ever enters a certification path.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

Rational = Fraction


class Cmp(enum.Enum):
    """Outcome of a one-sided certified comparison."""

    CERT_LT = "CERT_LT"
    CERT_GT = "CERT_GT"
    UNDECIDED = "UNDECIDED"


@dataclass(frozen=True)
class PiEnclosure:
    """A rational interval lower < pi < upper, strict on both sides."""

    lower: Rational
    upper: Rational

    def __post_init__(self) -> None:
        if not (0 < self.lower < self.upper):
            raise ValueError("enclosure must satisfy 0 < lower < upper")
        if self.upper - self.lower > Fraction(1, 10**12):
            raise ValueError("enclosure wider than 1e-12")


# 3.141592653589793 < pi = 3.14159265358979323846... < 3.141592653589794.
# Width 1e-15; the certified inequalities are never tight within 1e-2 at the
# scales this package computes, so a fixed enclosure suffices.
PI = PiEnclosure(
    lower=Fraction(3141592653589793, 10**15),
    upper=Fraction(3141592653589794, 10**15),
)


def binomial(n: int, k: int) -> int:
    """C(n, k); zero outside 0 <= k <= n.  Requires n >= 0."""
    if n < 0:
        raise ValueError(f"binomial requires n >= 0, got n={n}")
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


def cmp_sq_below(
    r: Rational, c_num: int, c_den: int, pi: PiEnclosure = PI, n: int = 1
) -> Cmp:
    """Certified comparison of r >= 0 against (c_num/c_den) / sqrt(pi * n).

    Returns CERT_LT only when r^2 * pi.upper * n < (c_num/c_den)^2, which
    implies r < (c_num/c_den)/sqrt(pi*n); CERT_GT only when
    r^2 * pi.lower * n > (c_num/c_den)^2, which implies the reverse strict
    inequality; UNDECIDED when the enclosure is too coarse to decide.
    CERT_LT and CERT_GT are mutually exclusive by construction.
    """
    if n <= 0:
        raise ValueError(f"cmp_sq_below requires n >= 1, got n={n}")
    if r < 0:
        raise ValueError(f"cmp_sq_below requires r >= 0, got r={r}")
    c_sq = Fraction(c_num, c_den) ** 2
    r_sq = r * r
    if r_sq * pi.upper * n < c_sq:
        return Cmp.CERT_LT
    if r_sq * pi.lower * n > c_sq:
        return Cmp.CERT_GT
    return Cmp.UNDECIDED


def sqrt_enclosure(x: Rational, scale_digits: int = 30) -> tuple[Rational, Rational]:
    """Rational (lo, hi) with lo <= sqrt(x) <= hi, width about 10^-scale_digits.

    sqrt(p/q) = sqrt(p*q)/q, and isqrt gives floor(S*sqrt(p*q)) exactly.
    """
    if x < 0:
        raise ValueError("sqrt_enclosure requires x >= 0")
    if x == 0:
        return Fraction(0), Fraction(0)
    p, q = x.numerator, x.denominator
    scale = 10**scale_digits
    t = math.isqrt(p * q * scale * scale)
    return Fraction(t, q * scale), Fraction(t + 1, q * scale)


def recip_sqrt_upper(s: int) -> Rational:
    """Certified rational upper bound on 1/sqrt(s), exact for perfect squares.

    With x0 = isqrt(s), the mean of 1/x0 and x0/s dominates their geometric
    mean 1/sqrt(s) (AM-GM), so (x0^2 + s) / (2*x0*s) >= 1/sqrt(s).
    """
    if s <= 0:
        raise ValueError(f"recip_sqrt_upper requires s >= 1, got {s}")
    x0 = math.isqrt(s)
    return Fraction(x0 * x0 + s, 2 * x0 * s)


def format_rational(q: Rational) -> str:
    """Serialize in lowest terms: "p/q", or "p" when the denominator is 1."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def parse_rational(text: str) -> Rational:
    """Inverse of format_rational; accepts "p" and "p/q"."""
    return Fraction(text.strip())


def decimal_str(q: Rational, digits: int = 30) -> str:
    """Decimal expansion with exactly `digits` fractional digits (truncated
    toward zero).  Deterministic, used for report payloads only."""
    q = Fraction(q)
    sign = "-" if q < 0 else ""
    q = abs(q)
    scaled = (q.numerator * 10**digits) // q.denominator
    whole, frac = divmod(scaled, 10**digits)
    return f"{sign}{whole}.{frac:0{digits}d}"
