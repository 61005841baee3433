"""Density test for subspaces of the full sequence space and the triangular
basis construction, all in exact rational arithmetic.

A span of finitely supported generators is dense in the product topology
iff every finite-coordinate projection of it is surjective.  Surjectivity
onto an initial segment {1..m} implies it for every subset of {1..m}
(a coordinate subprojection of a surjection is surjective), so the check
reduces to one exact rank computation on the matrix of generator
coordinates restricted to rows 1..m.

From a generator set dense up to N, the construction solves, for each n,
an exact linear system for a combination b_n with coordinate profile
(0, ..., 0, 1) on 1..n.  The resulting triangular family expands any target
sequence through the recursion a_n = y_n - sum_{k<n} a_k * pi_n(b_k), whose
partial sums stabilize coordinatewise: pi_m(S_N') = y_m for every N' >= m.
Coefficient functionals unroll the same recursion into finite combinations
of coordinate projections, which is their continuity witness.

Elements of the sequence space are represented on explicit finite horizons;
coordinatewise convergence stabilizes after finitely many steps per
coordinate, so a horizon loses nothing testable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

from .exactnum import Rational, format_rational, parse_rational

SparseVec = dict[int, Fraction]  # 1-based coordinate -> value, finite support

DENSE_UP_TO = "DENSE_UP_TO"
NOT_DENSE = "NOT_DENSE"
INCONCLUSIVE = "INCONCLUSIVE"

# generators scanned per requested rank before a stream verdict is abandoned
STREAM_SCAN_FACTOR = 16


class DensityError(ValueError):
    """Rank deficiency while building a basis; names the failing coordinate."""

    def __init__(self, coordinate: int, message: str | None = None):
        self.coordinate = coordinate
        super().__init__(message or f"rank deficiency at coordinate {coordinate}")


def _validate_sparse(vec: Mapping[int, object]) -> SparseVec:
    out: SparseVec = {}
    for k, v in vec.items():
        k = int(k)
        if k < 1:
            raise ValueError(f"coordinates are 1-based, got {k}")
        fv = Fraction(v)
        if fv:
            out[k] = fv
    return out


class GeneratorSet:
    """An indexed family of finitely supported rational sequences.

    Finite families know their count; a stream (count None) is consumed
    lazily and may be unbounded.  Generators need not be independent: rank,
    not count, decides density.
    """

    def __init__(self, source: Iterable[Mapping[int, object]], count: int | None = None):
        if count is None and isinstance(source, (list, tuple)):
            count = len(source)
        self._it: Iterator[Mapping[int, object]] | None = iter(source)
        self._count = count
        self._cache: list[SparseVec] = []

    @classmethod
    def from_vectors(cls, vectors: Sequence[Mapping[int, object]]) -> "GeneratorSet":
        return cls(list(vectors))

    @classmethod
    def from_jsonl(cls, text: str) -> "GeneratorSet":
        """One generator per line: {"coords": {"1": "3/2", ...}}."""
        vectors = []
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
                coords = doc["coords"]
                vectors.append(
                    _validate_sparse({int(k): parse_rational(str(v)) for k, v in coords.items()})
                )
            except (KeyError, ValueError, TypeError, json.JSONDecodeError) as exc:
                raise ValueError(f"generator line {lineno}: {exc}") from exc
        return cls(vectors)

    @property
    def declared_count(self) -> int | None:
        return self._count

    def is_stream(self) -> bool:
        return self._count is None

    def fetch(self, k: int) -> list[SparseVec]:
        """Materialize up to k generators; shorter means the source ended."""
        while len(self._cache) < k and self._it is not None:
            try:
                raw = next(self._it)
            except StopIteration:
                self._it = None
                if self._count is None:
                    self._count = len(self._cache)
                break
            self._cache.append(_validate_sparse(raw))
        return self._cache[:k]

    def fetch_all(self) -> list[SparseVec]:
        if self._count is None:
            raise ValueError("cannot materialize an unbounded stream")
        return self.fetch(self._count)


@dataclass(frozen=True)
class DensityResult:
    status: str  # DENSE_UP_TO | NOT_DENSE | INCONCLUSIVE
    m: int
    rank: int
    pivot_generators: tuple[int, ...]  # generator indices witnessing the rank
    failing: tuple[int, ...] = ()  # the finite set {1..m} when NOT_DENSE


class _IncrementalRank:
    """Row-echelon store over coordinates 1..m, fed one generator at a time."""

    def __init__(self, m: int):
        self.m = m
        self.reduced: list[tuple[int, SparseVec]] = []  # (pivot coord, vector)

    def add(self, vec: SparseVec) -> bool:
        v = {k: x for k, x in vec.items() if k <= self.m}
        for pivot, basis_vec in self.reduced:
            coef = v.get(pivot)
            if coef:
                factor = coef / basis_vec[pivot]
                for k, x in basis_vec.items():
                    nv = v.get(k, Fraction(0)) - factor * x
                    if nv:
                        v[k] = nv
                    else:
                        v.pop(k, None)
        if not v:
            return False
        pivot = min(v)
        self.reduced.append((pivot, v))
        return True

    @property
    def rank(self) -> int:
        return len(self.reduced)


def density_check(G: GeneratorSet, m: int, max_scan: int | None = None) -> DensityResult:
    """Decide surjectivity of the projection onto coordinates 1..m.

    Finite sets yield DENSE_UP_TO or NOT_DENSE.  For a stream the scan stops
    after max_scan generators (default STREAM_SCAN_FACTOR * m): a verdict of
    INCONCLUSIVE means the rank could still grow with more generators; an
    exhausted stream was finite after all and rank deficiency is decisive.
    """
    if m < 1:
        raise ValueError(f"segment length must be >= 1, got {m}")
    tracker = _IncrementalRank(m)
    pivots: list[int] = []
    budget: int | None = None
    if G.is_stream():
        budget = max_scan if max_scan is not None else STREAM_SCAN_FACTOR * m
    idx = 0
    while tracker.rank < m:
        got = G.fetch(idx + 1)
        if len(got) <= idx:
            # source ended: the family is finite, deficiency is decisive
            return DensityResult(
                status=NOT_DENSE, m=m, rank=tracker.rank,
                pivot_generators=tuple(pivots), failing=tuple(range(1, m + 1)),
            )
        if tracker.add(got[idx]):
            pivots.append(idx)
        idx += 1
        if budget is not None and idx >= budget and tracker.rank < m:
            return DensityResult(
                status=INCONCLUSIVE, m=m, rank=tracker.rank,
                pivot_generators=tuple(pivots),
            )
    return DensityResult(
        status=DENSE_UP_TO, m=m, rank=tracker.rank, pivot_generators=tuple(pivots)
    )


@dataclass(frozen=True)
class BasisVector:
    """b_n on the horizon plus its witnessing generator combination."""

    coords: tuple[Rational, ...]  # coordinates 1..H
    combination: tuple[tuple[int, Rational], ...]  # (generator index, weight)


@dataclass(frozen=True)
class TriangularBasis:
    vectors: tuple[BasisVector, ...]
    horizon: int

    def __len__(self) -> int:
        return len(self.vectors)

    def coord(self, n: int, k: int) -> Rational:
        """pi_k(b_n), both 1-based."""
        return self.vectors[n - 1].coords[k - 1]


def _solve_unit_profiles(gens: list[SparseVec], N: int) -> list[list[Fraction]]:
    """For each n <= N, the generator combination whose coordinate profile on
    1..N is the n-th unit vector: one forward elimination with first-nonzero
    pivoting, N unit right-hand sides, free variables fixed to zero.  Raises
    DensityError naming the coordinate of the first zero row."""
    g = len(gens)
    a = [[gens[c].get(i + 1, Fraction(0)) for c in range(g)] for i in range(N)]
    rhs = [[Fraction(1) if i == j else Fraction(0) for j in range(N)] for i in range(N)]
    pivot_cols: list[int] = []
    for r in range(N):
        pivot = next((c for c in range(g) if a[r][c]), None)
        if pivot is None:
            raise DensityError(coordinate=r + 1)
        pivot_cols.append(pivot)
        for r2 in range(r + 1, N):
            if a[r2][pivot]:
                factor = a[r2][pivot] / a[r][pivot]
                for c in range(g):
                    if a[r][c]:
                        a[r2][c] -= factor * a[r][c]
                for j in range(N):
                    if rhs[r][j]:
                        rhs[r2][j] -= factor * rhs[r][j]
    solutions: list[list[Fraction]] = []
    for j in range(N):
        x = [Fraction(0)] * g
        for r in range(N - 1, -1, -1):
            p = pivot_cols[r]
            acc = rhs[r][j]
            for r2 in range(r + 1, N):
                c2 = pivot_cols[r2]
                if a[r][c2] and x[c2]:
                    acc -= a[r][c2] * x[c2]
            x[p] = acc / a[r][p]
        solutions.append(x)
    return solutions


def build_triangular_basis(G: GeneratorSet, N: int, horizon: int) -> TriangularBasis:
    """Construct b_1..b_N on the given horizon with pi_k(b_n) = delta_{kn}
    for every k <= N (stronger than the triangular requirement k <= n, and
    the deterministic choice: first-nonzero pivoting, zero free variables).
    Requires the generators to be dense up to N; rank deficiency raises a
    DensityError naming the first uncovered coordinate.
    """
    if N < 1:
        raise ValueError(f"basis length must be >= 1, got {N}")
    if horizon < N:
        raise ValueError(f"horizon {horizon} shorter than basis length {N}")

    if G.is_stream():
        verdict = density_check(G, N)
        if verdict.status == INCONCLUSIVE:
            raise ValueError(
                f"stream scan inconclusive at rank {verdict.rank} of {N}; "
                "supply more generators or raise the scan budget"
            )
        gens = G.fetch(verdict.pivot_generators[-1] + 1) if verdict.status == DENSE_UP_TO else G.fetch_all()
    else:
        gens = G.fetch_all()

    vectors = []
    for n, x in enumerate(_solve_unit_profiles(gens, N), start=1):
        coords = [Fraction(0)] * horizon
        combination = []
        for c, weight in enumerate(x):
            if not weight:
                continue
            combination.append((c, weight))
            for k, v in gens[c].items():
                if k <= horizon:
                    coords[k - 1] += weight * v
        for k in range(1, N + 1):
            expected = Fraction(1) if k == n else Fraction(0)
            if coords[k - 1] != expected:
                raise AssertionError(f"unit coordinate profile violated at pi_{k}(b_{n})")
        vectors.append(BasisVector(coords=tuple(coords), combination=tuple(combination)))
    return TriangularBasis(vectors=tuple(vectors), horizon=horizon)


@dataclass(frozen=True)
class CoeffExpansion:
    target: tuple[Rational, ...]  # y restricted to the basis horizon
    coefficients: tuple[Rational, ...]  # a_1..a_N
    stabilization_log: tuple[int, ...]  # per m: least N' with stable pi_m


def expand(y: Sequence, basis: TriangularBasis) -> CoeffExpansion:
    """Coefficients a_1 = y_1, a_n = y_n - sum_{k<n} a_k pi_n(b_k), exact."""
    H = basis.horizon
    if len(y) < H:
        raise ValueError(f"target has {len(y)} coordinates, horizon needs {H}")
    yf = tuple(Fraction(v) for v in y[:H])
    N = len(basis)
    coeffs: list[Fraction] = []
    for n in range(1, N + 1):
        a_n = yf[n - 1]
        for k in range(1, n):
            pik = basis.coord(k, n)
            if pik and coeffs[k - 1]:
                a_n -= coeffs[k - 1] * pik
        coeffs.append(a_n)

    log: list[int] = []
    for m in range(1, N + 1):
        partial = Fraction(0)
        last_bad = 0
        for np_ in range(1, N + 1):
            partial += coeffs[np_ - 1] * basis.coord(np_, m)
            if partial != yf[m - 1]:
                last_bad = np_
        if last_bad >= N:
            raise AssertionError(f"coordinate {m} never stabilized on the horizon")
        log.append(last_bad + 1)
    return CoeffExpansion(target=yf, coefficients=tuple(coeffs), stabilization_log=tuple(log))


@dataclass(frozen=True)
class StabilizationReport:
    N: int
    grid: dict[tuple[int, int], bool]  # (m, N') -> pi_m(S_N') == y_m, m <= N'
    all_true: bool


def verify_stabilization(
    exp: CoeffExpansion, basis: TriangularBasis, y: Sequence, N: int | None = None
) -> StabilizationReport:
    """Exact boolean grid of pi_m(S_N') == y_m over m <= N' <= N."""
    if N is None:
        N = len(basis)
    N = min(N, len(basis))
    yf = [Fraction(v) for v in y[: basis.horizon]]
    grid: dict[tuple[int, int], bool] = {}
    for m in range(1, N + 1):
        partial = Fraction(0)
        for np_ in range(1, N + 1):
            partial += exp.coefficients[np_ - 1] * basis.coord(np_, m)
            if np_ >= m:
                grid[(m, np_)] = partial == yf[m - 1]
    return StabilizationReport(N=N, grid=grid, all_true=all(grid.values()))


def coefficient_functional(basis: TriangularBasis, n: int) -> tuple[Rational, ...]:
    """Weights (c_1..c_n) with b_n^*(y) = sum_k c_k pi_k(y).

    Unrolls b_n^* = pi_n - sum_{k<n} pi_n(b_k) b_k^*; the finiteness of the
    result is the continuity witness.
    """
    if not (1 <= n <= len(basis)):
        raise ValueError(f"functional index {n} out of range 1..{len(basis)}")
    funcs: list[list[Fraction]] = []
    for i in range(1, n + 1):
        w = [Fraction(0)] * i
        w[i - 1] = Fraction(1)
        for k in range(1, i):
            pik = basis.coord(k, i)
            if pik:
                for j in range(k):
                    w[j] -= pik * funcs[k - 1][j]
        funcs.append(w)
    return tuple(funcs[n - 1])


def apply_functional(weights: Sequence[Rational], y: Sequence) -> Rational:
    return sum((Fraction(w) * Fraction(y[i]) for i, w in enumerate(weights)), Fraction(0))


def basis_to_json(basis: TriangularBasis) -> dict:
    return {
        "horizon": basis.horizon,
        "vectors": [
            {
                "coords": [format_rational(v) for v in vec.coords],
                "combination": {str(c): format_rational(w) for c, w in vec.combination},
                "support_size": sum(1 for v in vec.coords if v),
            }
            for vec in basis.vectors
        ],
    }


def expansion_to_json(exp: CoeffExpansion) -> dict:
    return {
        "coefficients": [format_rational(a) for a in exp.coefficients],
        "stabilization_log": list(exp.stabilization_log),
    }
