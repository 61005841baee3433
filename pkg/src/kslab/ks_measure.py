"""Sign-cube measures: unit-mass signed measures on a 2^n-by-n product grid.

The measure with index n lives on K_n x L_n with |K_n| = 2^n rows and
|L_n| = n columns.  A bijection from rows onto the full sign cube {-1,+1}^n
assigns each atom (s, j) the weight sign(s, j) / (n * 2^n).  Every quantity
this package certifies (total variation, rectangle masses, tensor
functionals) is a function of this finite atomic data, so the grid is all
that is ever modeled.

Rows are encoded as bit patterns: bit j of the pattern set means
sign(s, j) = -1.  The canonical bijection uses the row index itself as the
pattern; a seeded row permutation composes it with a shuffle of the row
indices.  Above EXPLICIT_MAX_N the atom table is unmaterializable and signs
are computed on demand from the row index (implicit representation).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .exactnum import Rational, binomial, format_rational

EXPLICIT_MAX_N = 20

EXPLICIT = "explicit"
IMPLICIT = "implicit"


@dataclass(frozen=True)
class Canonical:
    """Bijection sending row s to the pattern with bit j of s encoding -1."""


@dataclass(frozen=True)
class RowPermutation:
    """Canonical bijection composed with a seeded shuffle of row indices."""

    seed: int


CANONICAL = Canonical()


class MemoryGuardError(ValueError):
    """Explicit materialization requested above the memory guard."""


@dataclass(frozen=True)
class KSMeasure:
    """Immutable sign-cube measure; all evaluations are pure."""

    n: int
    bijection: Canonical | RowPermutation
    representation: str
    _patterns: tuple[int, ...] | None = None  # row index -> sign pattern

    @property
    def rows(self) -> int:
        return 1 << self.n

    @property
    def cols(self) -> int:
        return self.n

    @property
    def scale(self) -> Rational:
        return Fraction(1, self.n << self.n)

    def row_pattern(self, s: int) -> int:
        if self._patterns is not None:
            return self._patterns[s]
        return s

    def sign(self, s: int, j: int) -> int:
        """Sign of the atom at row s, column j; always -1 or +1."""
        if not (0 <= s < self.rows and 0 <= j < self.n):
            raise IndexError(f"atom ({s}, {j}) outside the {self.rows}x{self.n} grid")
        return -1 if (self.row_pattern(s) >> j) & 1 else 1

    def is_explicit(self) -> bool:
        return self.representation == EXPLICIT


def build(
    n: int,
    bijection: Canonical | RowPermutation = CANONICAL,
    representation: str | None = None,
) -> KSMeasure:
    """Construct the measure with index n.

    representation defaults to explicit for n <= EXPLICIT_MAX_N and implicit
    above; requesting explicit above the guard is an error.  A seeded row
    permutation requires materializing a table of 2^n row indices and is
    therefore only available at explicit scale.
    """
    if n < 1:
        raise ValueError(f"measure index must be >= 1, got n={n}")
    if representation is None:
        representation = EXPLICIT if n <= EXPLICIT_MAX_N else IMPLICIT
    if representation not in (EXPLICIT, IMPLICIT):
        raise ValueError(f"unknown representation {representation!r}")
    if representation == EXPLICIT and n > EXPLICIT_MAX_N:
        raise MemoryGuardError(
            f"explicit representation limited to n <= {EXPLICIT_MAX_N}, got n={n}"
        )

    patterns: tuple[int, ...] | None = None
    if isinstance(bijection, RowPermutation):
        if n > EXPLICIT_MAX_N:
            raise MemoryGuardError(
                f"row permutations need a 2^n table; limited to n <= {EXPLICIT_MAX_N}"
            )
        perm = list(range(1 << n))
        random.Random(bijection.seed).shuffle(perm)
        patterns = tuple(perm)
    elif not isinstance(bijection, Canonical):
        raise TypeError(f"unknown bijection {bijection!r}")

    return KSMeasure(n=n, bijection=bijection, representation=representation, _patterns=patterns)


def total_variation(m: KSMeasure) -> Rational:
    """Sum of |weight| over all atoms; equals 1 exactly for every n.

    Explicit mode sums the per-row atom magnitudes; implicit mode uses the
    count n * 2^n directly (every sign has magnitude 1) without touching
    atoms.
    """
    if m.is_explicit():
        total = 0
        for s in range(m.rows):
            minus = m.row_pattern(s).bit_count()
            total += minus + (m.n - minus)
        return total * m.scale
    return Fraction(m.n << m.n, 1) * m.scale


def support_size(m: KSMeasure) -> int:
    """Number of atoms with nonzero weight; equals n * 2^n."""
    if m.is_explicit():
        count = 0
        for s in range(m.rows):
            minus = m.row_pattern(s).bit_count()
            count += minus + (m.n - minus)
        return count
    return m.n << m.n


def eval_tensor(m: KSMeasure, f: Sequence, g: Sequence) -> Rational:
    """Apply the measure to f (x) g: scale * sum_s sum_j sign(s,j) f(s) g(j).

    Requires the explicit representation (f is a table over all 2^n rows).
    Exact when the inputs are rational.
    """
    if not m.is_explicit():
        raise ValueError("eval_tensor needs an explicit measure (f is a full row table)")
    if len(f) != m.rows:
        raise ValueError(f"f has {len(f)} entries, expected {m.rows}")
    if len(g) != m.n:
        raise ValueError(f"g has {len(g)} entries, expected {m.n}")
    total = Fraction(0)
    for s in range(m.rows):
        fs = f[s]
        if not fs:
            continue
        p = m.row_pattern(s)
        row = Fraction(0)
        for j in range(m.n):
            gj = g[j]
            if not gj:
                continue
            row += -gj if (p >> j) & 1 else gj
        total += Fraction(fs) * row
    return m.scale * total


@lru_cache(maxsize=8)
def _binomial_row(n: int) -> tuple[int, ...]:
    """Row (C(n,0), ..., C(n,n)) built iteratively; cached for reuse."""
    row = [1] * (n + 1)
    for k in range(1, n + 1):
        row[k] = row[k - 1] * (n - k + 1) // k
    return tuple(row)


def eval_symmetric(m: KSMeasure, F: Sequence, gsum: Rational) -> Rational:
    """Tensor evaluation for f depending only on a row's count of +1 signs.

    Equals eval_tensor with f(s) = F(#plus signs in row s) and any g whose
    column sum is gsum: per column, rows with k plus signs split into
    C(n-1, k-1) rows signed +1 and C(n-1, k) rows signed -1, so

        value = scale * gsum * sum_k F(k) * (C(n-1, k-1) - C(n-1, k)).

    O(n) big-integer work; valid in both representations (only bijectivity
    onto the sign cube matters), usable for n in the thousands.
    """
    n = m.n
    if len(F) != n + 1:
        raise ValueError(f"F has {len(F)} entries, expected {n + 1}")
    row = _binomial_row(n - 1)
    total = Fraction(0)
    for k in range(n + 1):
        d = (row[k - 1] if k >= 1 else 0) - (row[k] if k <= n - 1 else 0)
        if d and F[k]:
            total += Fraction(F[k]) * d
    return m.scale * Fraction(gsum) * total


@dataclass(frozen=True)
class GridFunction:
    """A tensor function on the support grid, stored as its two factors."""

    f_values: tuple
    g_values: tuple

    def sup_norm(self) -> Rational:
        """max over the grid of |f(s) g(j)| = max|f| * max|g|."""
        if not self.f_values or not self.g_values:
            return Fraction(0)
        return Fraction(max(abs(Fraction(v)) for v in self.f_values)) * Fraction(
            max(abs(Fraction(v)) for v in self.g_values)
        )

    def value(self, s: int, j: int) -> Rational:
        return Fraction(self.f_values[s]) * Fraction(self.g_values[j])


@dataclass(frozen=True)
class FiniteSignedMeasure:
    """Generic finite atomic signed measure: distinct keys, nonzero weights."""

    atoms: tuple[tuple[tuple[int, int], Rational], ...]

    def __post_init__(self) -> None:
        keys = [k for k, _ in self.atoms]
        if len(set(keys)) != len(keys):
            raise ValueError("atom keys must be distinct")
        if any(w == 0 for _, w in self.atoms):
            raise ValueError("atom weights must be nonzero")

    def total_variation(self) -> Rational:
        return sum((abs(w) for _, w in self.atoms), Fraction(0))

    def support(self) -> frozenset[tuple[int, int]]:
        return frozenset(k for k, _ in self.atoms)


def as_signed_measure(m: KSMeasure) -> FiniteSignedMeasure:
    """Materialize the atom list (explicit representation only)."""
    if not m.is_explicit():
        raise MemoryGuardError("atom list unmaterializable in implicit mode")
    atoms = []
    for s in range(m.rows):
        p = m.row_pattern(s)
        for j in range(m.n):
            w = -m.scale if (p >> j) & 1 else m.scale
            atoms.append(((s, j), w))
    return FiniteSignedMeasure(atoms=tuple(atoms))


def measure_to_json(m: KSMeasure) -> dict:
    """Wire format: explicit measures list atoms, implicit ones the rule."""
    if m.is_explicit():
        atoms = []
        for s in range(m.rows):
            p = m.row_pattern(s)
            for j in range(m.n):
                atoms.append([s, j, "-1" if (p >> j) & 1 else "1"])
        return {"n": m.n, "scale": format_rational(m.scale), "atoms": atoms}
    bij = "canonical" if isinstance(m.bijection, Canonical) else {"perm_seed": m.bijection.seed}
    return {"n": m.n, "scale": format_rational(m.scale), "bijection": bij}
