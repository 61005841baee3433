"""Exact supremum of |measure(A x B)| over rectangles, with certification.

By atomicity the supremum over arbitrary product sets equals the supremum
over A a set of rows and B a set of columns of the support grid, so
rectangles are bitsets.  Two routes compute it:

* a brute-force oracle enumerating every (A, B) pair (n <= 4), and
* a fast path: for fixed B with |B| = b, linearity in the indicator of A
  plus the +/- mirror symmetry of the full sign cube make
  A* = {rows with positive partial sum over B} optimal, and the row sums
  over B realize each pattern of b independent signs exactly 2^(n-b) times,
  giving sup over A equal to (1/(n*2^b)) * sum over sign patterns of
  max(0, pattern sum), a pure binomial quantity.  The answer is the max
  over b = 1..n.

The fast path is never trusted on derivation alone: it is checked against
the oracle at small n and against the certified two-sided bound
1/(2 sqrt(pi n)) < sup < 2/sqrt(pi n) at every n.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .exactnum import (
    Cmp,
    PI,
    PiEnclosure,
    Rational,
    binomial,
    decimal_str,
    format_rational,
)
from .ks_measure import EXPLICIT_MAX_N, KSMeasure

BRUTE_MAX_N = 4

PASS = "PASS"
FAIL = "FAIL"
UNDECIDED = "UNDECIDED"


@dataclass(frozen=True)
class Rectangle:
    """A x B as bitsets: bit s of row_bits selects row s, likewise columns."""

    row_bits: int
    col_bits: int


@dataclass(frozen=True)
class RectangleSupReport:
    n: int
    sup: Rational
    witness: Rectangle | None
    lower_ok: Cmp
    upper_ok: Cmp
    method: str  # "BruteForce" | "FastPath"


def rect_mass(m: KSMeasure, r: Rectangle) -> Rational:
    """scale * sum over selected atoms of sign(s, j); exact, sign retained."""
    if not (0 <= r.row_bits < (1 << m.rows)):
        raise ValueError(f"row bitset exceeds width 2^{m.rows}")
    if not (0 <= r.col_bits < (1 << m.n)):
        raise ValueError(f"column bitset exceeds width {m.n}")
    b = r.col_bits.bit_count()
    total = 0
    # walk the row bitset bytewise: mutating a 2^n-bit integer per row would
    # be quadratic in the number of rows
    data = r.row_bits.to_bytes((m.rows + 7) // 8, "little")
    for byte_idx, byte in enumerate(data):
        base = byte_idx * 8
        while byte:
            low = byte & -byte
            s = base + low.bit_length() - 1
            byte ^= low
            minus = (m.row_pattern(s) & r.col_bits).bit_count()
            total += b - 2 * minus
    return total * m.scale


def _certify_pair(sup: Rational, n: int, pi: PiEnclosure) -> tuple[Cmp, Cmp]:
    from .exactnum import cmp_sq_below

    lower_ok = cmp_sq_below(sup, 1, 2, pi, n)  # want CERT_GT vs 1/(2 sqrt(pi n))
    upper_ok = cmp_sq_below(sup, 2, 1, pi, n)  # want CERT_LT vs 2/sqrt(pi n)
    return lower_ok, upper_ok


def sup_rect_bruteforce(m: KSMeasure, pi: PiEnclosure = PI) -> RectangleSupReport:
    """Exhaustive maximum of |rect_mass| over all 2^(2^n) * 2^n rectangles.

    Ties broken by the lexicographically smallest (B, A) bit pattern, which
    is the natural iteration order.  Guarded at n <= 4.
    """
    n = m.n
    if n > BRUTE_MAX_N:
        raise ValueError(f"brute force limited to n <= {BRUTE_MAX_N}, got n={n}")
    rows = m.rows
    best = -1
    best_rect = Rectangle(0, 0)
    for col_bits in range(1 << n):
        b = col_bits.bit_count()
        sig = [b - 2 * (m.row_pattern(s) & col_bits).bit_count() for s in range(rows)]
        # subset sums over A: T[A] enumerates every row subset
        t = np.zeros(1 << rows, dtype=np.int64)
        for i in range(rows):
            size = 1 << i
            t[size : 2 * size] = t[:size] + sig[i]
        absT = np.abs(t)
        vmax = int(absT.max())
        if vmax > best:
            best = vmax
            best_rect = Rectangle(int(np.argmax(absT == vmax)), col_bits)
    sup = Fraction(best, n << n)
    lower_ok, upper_ok = _certify_pair(sup, n, pi)
    return RectangleSupReport(
        n=n, sup=sup, witness=best_rect, lower_ok=lower_ok, upper_ok=upper_ok,
        method="BruteForce",
    )


@lru_cache(maxsize=None)
def _positive_part_sum(b: int) -> int:
    """Sum over sign patterns in {-1,+1}^b of max(0, pattern sum).

    A pattern with k plus signs sums to 2k - b and occurs C(b, k) times.
    """
    return sum(binomial(b, k) * (2 * k - b) for k in range(b // 2 + 1, b + 1))


def fast_per_width_values(m: KSMeasure) -> list[Rational]:
    """Per-|B| suprema of |rect_mass| for |B| = 1..n (fast reduction)."""
    n = m.n
    return [Fraction(_positive_part_sum(b), n << b) for b in range(1, n + 1)]


def sup_rect_fast(m: KSMeasure, pi: PiEnclosure = PI) -> RectangleSupReport:
    """Fast-path supremum: max over b of the per-width binomial value.

    Works in implicit mode.  A witness (B = first b columns, A = rows with
    positive partial sum) is materialized only at explicit scale and only
    for the smallest maximizing width.
    """
    n = m.n
    best_num = -1
    best_b = 1
    for b in range(1, n + 1):
        # compare over the common denominator n * 2^n
        num = _positive_part_sum(b) << (n - b)
        if num > best_num:
            best_num = num
            best_b = b
    sup = Fraction(best_num, n << n)

    witness: Rectangle | None = None
    if n <= EXPLICIT_MAX_N:
        col_bits = (1 << best_b) - 1
        buf = bytearray((m.rows + 7) // 8)
        for s in range(m.rows):
            minus = (m.row_pattern(s) & col_bits).bit_count()
            if best_b - 2 * minus > 0:
                buf[s >> 3] |= 1 << (s & 7)
        witness = Rectangle(int.from_bytes(bytes(buf), "little"), col_bits)

    lower_ok, upper_ok = _certify_pair(sup, n, pi)
    return RectangleSupReport(
        n=n, sup=sup, witness=witness, lower_ok=lower_ok, upper_ok=upper_ok,
        method="FastPath",
    )


def certify_bound2(report: RectangleSupReport, pi: PiEnclosure = PI) -> str:
    """PASS iff 1/(2 sqrt(pi n)) < sup < 2/sqrt(pi n), both rationally
    certified; UNDECIDED signals an insufficient enclosure."""
    if report.sup < 0:
        raise ValueError("supremum must be nonnegative")
    lower_ok, upper_ok = _certify_pair(report.sup, report.n, pi)
    if lower_ok is Cmp.UNDECIDED or upper_ok is Cmp.UNDECIDED:
        return UNDECIDED
    if lower_ok is Cmp.CERT_GT and upper_ok is Cmp.CERT_LT:
        return PASS
    return FAIL


def report_to_json(report: RectangleSupReport) -> dict:
    witness = None
    if report.witness is not None:
        witness = {
            "A_bits": str(report.witness.row_bits),
            "B_bits": str(report.witness.col_bits),
        }
    return {
        "n": report.n,
        "sup": format_rational(report.sup),
        "sup_decimal": decimal_str(report.sup),
        "witness": witness,
        "lower_ok": report.lower_ok.value,
        "upper_ok": report.upper_ok.value,
        "method": report.method,
    }
