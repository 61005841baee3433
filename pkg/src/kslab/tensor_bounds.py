"""Bilinear supremum of |measure(f (x) g)| over the unit sup-norm cubes,
certification of the 8/sqrt(pi n) tensor bound, and decay verification.

For fixed g the optimal f is the sign pattern of the per-row inner sums
(rows with zero inner sum contribute nothing; their f value is set to 0 by
convention).  The objective is then convex in g, so the maximum over the
cube is attained at a vertex g in {-1,+1}^n; tensor_sup_exact enumerates
all 2^n vertices.  The convexity derivation is validated by random probing
and by the inequality tensor_sup >= rectangle_sup (indicators lie in the
cube), never trusted alone.

Tensor combinations h = sum_i f_i (x) g_i come in two term forms: explicit
tables pinned to one measure index, and symmetric profiles F(plus-count)
with constant g, which are defined at every index and evaluable in O(n) via
the symmetric fast path.  Decay rows certify |mu_n(h)| <= (8/sqrt(pi n)) *
norm_bound through exact squared comparisons against the pi enclosure.
"""

from __future__ import annotations

import io
import csv
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .exactnum import (
    PI,
    PiEnclosure,
    Rational,
    cmp_sq_below,
    Cmp,
    decimal_str,
    format_rational,
    parse_rational,
    sqrt_enclosure,
)
from .ks_measure import GridFunction, KSMeasure, build, eval_symmetric, eval_tensor

TENSOR_MAX_N = 12

PASS = "PASS"
FAIL = "FAIL"
UNDECIDED = "UNDECIDED"


def _sign_matrix(m: KSMeasure) -> np.ndarray:
    """Dense +-1 matrix of shape (2^n, n); explicit scale only."""
    patterns = np.array([m.row_pattern(s) for s in range(m.rows)], dtype=np.int64)
    bits = (patterns[:, None] >> np.arange(m.n)[None, :]) & 1
    return 1 - 2 * bits


def tensor_sup_exact(m: KSMeasure) -> Rational:
    """Max of |measure(f (x) g)| over sup-norm unit cubes, by vertex
    enumeration with f eliminated in closed form.  Guarded at n <= 12."""
    n = m.n
    if n > TENSOR_MAX_N:
        raise ValueError(f"vertex enumeration limited to n <= {TENSOR_MAX_N}, got n={n}")
    patterns = np.array([m.row_pattern(s) for s in range(m.rows)], dtype=np.int64)
    popcount = np.array([i.bit_count() for i in range(1 << n)], dtype=np.int64)
    best = 0
    for g_vertex in range(1 << n):
        # row inner sum against g: n - 2 * (bits where pattern and g differ)
        sums = n - 2 * popcount[np.bitwise_xor(patterns, g_vertex)]
        total = int(np.abs(sums).sum())  # optimal f = sign of each row sum
        if total > best:
            best = total
    return Fraction(best, n << n)


def certify_bound3(
    n: int,
    sup: Rational,
    pi: PiEnclosure = PI,
    rect_sup: Rational | None = None,
) -> str:
    """PASS iff sup < 8/sqrt(pi n) is rationally certified.

    When the rectangle supremum is supplied, sup >= rect_sup is also
    required (indicator functions lie in the unit cube), as an exact
    consistency check between the two routes.
    """
    if sup < 0:
        raise ValueError("supremum must be nonnegative")
    if rect_sup is not None and sup < rect_sup:
        return FAIL
    verdict = cmp_sq_below(sup, 8, 1, pi, n)
    if verdict is Cmp.CERT_LT:
        return PASS
    if verdict is Cmp.CERT_GT:
        return FAIL
    return UNDECIDED


def random_tensor_probe(m: KSMeasure, trials: int, seed: int) -> float:
    """Max |measure(f (x) g)| over seeded uniform samples from the cube.

    A sanity probe for tensor_sup_exact: the result can never exceed it.
    Deterministic per seed; explicit representation required.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if not m.is_explicit():
        raise ValueError("random_tensor_probe needs an explicit measure")
    rng = np.random.default_rng(seed)
    signs = _sign_matrix(m).astype(np.float64)
    scale = float(m.scale)
    best = 0.0
    chunk = 1024
    done = 0
    while done < trials:
        k = min(chunk, trials - done)
        f = rng.uniform(-1.0, 1.0, size=(k, m.rows))
        g = rng.uniform(-1.0, 1.0, size=(k, m.n))
        vals = np.abs(np.einsum("ij,ij->i", f @ signs, g)) * scale
        best = max(best, float(vals.max()))
        done += k
    return best


# ---------------------------------------------------------------------------
# Tensor combinations


# Named plus-count profiles F(k), k = 0..n, all with sup norm 1 at every n.
_PROFILES: dict[str, Callable[[int, int], Fraction]] = {
    "sign_centered": lambda n, k: Fraction((2 * k > n) - (2 * k < n)),
    "linear_centered": lambda n, k: Fraction(2 * k - n, n),
    "abs_centered": lambda n, k: Fraction(abs(2 * k - n), n),
    "majority": lambda n, k: Fraction(1 if 2 * k > n else 0),
    "constant_one": lambda n, k: Fraction(1),
}


def profile_table(name: str, n: int) -> list[Fraction]:
    fn = _PROFILES[name]
    return [fn(n, k) for k in range(n + 1)]


@dataclass(frozen=True)
class SymmetricTerm:
    """coeff * F_profile (x) g with g constant on the columns.

    Defined for every measure index; sup norm |coeff| * |g_const| since all
    named profiles have sup norm 1.
    """

    profile: str
    coeff: Rational = Fraction(1)
    g_const: Rational = Fraction(1)

    def __post_init__(self) -> None:
        if self.profile not in _PROFILES:
            raise ValueError(f"unknown profile {self.profile!r}")

    def evaluable_at(self, n: int, explicit: bool) -> bool:
        return True

    def sup_norm(self) -> Rational:
        return abs(Fraction(self.coeff)) * abs(Fraction(self.g_const))

    def value_at(self, m: KSMeasure) -> Rational:
        table = profile_table(self.profile, m.n)
        gsum = Fraction(self.g_const) * m.n
        return Fraction(self.coeff) * eval_symmetric(m, table, gsum)


@dataclass(frozen=True)
class ExplicitTerm:
    """A tensor factor pair pinned to a single measure index."""

    n: int
    grid: GridFunction

    def evaluable_at(self, n: int, explicit: bool) -> bool:
        return explicit and n == self.n

    def sup_norm(self) -> Rational:
        return self.grid.sup_norm()

    def value_at(self, m: KSMeasure) -> Rational:
        if not self.evaluable_at(m.n, m.is_explicit()):
            raise ValueError(f"explicit term defined at n={self.n}, measure has n={m.n}")
        return eval_tensor(m, self.grid.f_values, self.grid.g_values)


@dataclass(frozen=True)
class TensorCombo:
    """h = sum of terms; norm_bound = sum of term sup norms >= ||h||_inf."""

    terms: tuple
    name: str = ""

    @property
    def norm_bound(self) -> Rational:
        return sum((t.sup_norm() for t in self.terms), Fraction(0))

    def evaluable_at(self, n: int, explicit: bool) -> bool:
        return all(t.evaluable_at(n, explicit) for t in self.terms)

    def value_at(self, m: KSMeasure) -> Rational:
        return sum((t.value_at(m) for t in self.terms), Fraction(0))


def standard_test_family() -> list[TensorCombo]:
    """Five fixed symmetric combinations, each with norm_bound exactly 1."""
    mk = lambda name, *terms: TensorCombo(terms=terms, name=name)
    return [
        mk("sign_centered", SymmetricTerm("sign_centered")),
        mk("linear_centered", SymmetricTerm("linear_centered")),
        mk("abs_centered", SymmetricTerm("abs_centered")),
        mk("majority", SymmetricTerm("majority")),
        mk(
            "half_sign_half_majority",
            SymmetricTerm("sign_centered", coeff=Fraction(1, 2)),
            SymmetricTerm("majority", coeff=Fraction(1, 2)),
        ),
    ]


def combo_to_json(combo: TensorCombo) -> dict:
    terms = []
    for t in combo.terms:
        if isinstance(t, SymmetricTerm):
            terms.append(
                {
                    "type": "symmetric",
                    "profile": t.profile,
                    "coeff": format_rational(t.coeff),
                    "g_const": format_rational(t.g_const),
                }
            )
        else:
            terms.append(
                {
                    "type": "explicit",
                    "n": t.n,
                    "f": [format_rational(v) for v in t.grid.f_values],
                    "g": [format_rational(v) for v in t.grid.g_values],
                }
            )
    return {"name": combo.name, "terms": terms}


def combo_from_json(doc: dict) -> TensorCombo:
    if not isinstance(doc, dict) or "terms" not in doc:
        raise ValueError("combo document must be an object with a 'terms' list")
    terms = []
    for td in doc["terms"]:
        kind = td.get("type", "symmetric")
        if kind == "symmetric":
            terms.append(
                SymmetricTerm(
                    profile=td["profile"],
                    coeff=parse_rational(td.get("coeff", "1")),
                    g_const=parse_rational(td.get("g_const", "1")),
                )
            )
        elif kind == "explicit":
            f = tuple(parse_rational(v) for v in td["f"])
            g = tuple(parse_rational(v) for v in td["g"])
            n = int(td["n"])
            if len(f) != (1 << n) or len(g) != n:
                raise ValueError(f"explicit term tables do not match n={n}")
            terms.append(ExplicitTerm(n=n, grid=GridFunction(f, g)))
        else:
            raise ValueError(f"unknown term type {kind!r}")
    return TensorCombo(terms=tuple(terms), name=str(doc.get("name", "")))


def family_from_json(doc) -> list[TensorCombo]:
    if isinstance(doc, dict):
        doc = doc.get("combos", None)
    if not isinstance(doc, list):
        raise ValueError("family document must be a list or {'combos': [...]}")
    return [combo_from_json(item) for item in doc]


# ---------------------------------------------------------------------------
# Decay profiles


@dataclass(frozen=True)
class DecayRow:
    n: int
    value: Rational  # exact |mu_n(h)|
    bound_lower: Rational
    bound_upper: Rational
    dominated: bool  # certified value <= (8/sqrt(pi n)) * norm_bound


def _certified_tensor_dominance(value: Rational, norm_bound: Rational, n: int) -> bool:
    """Exact check that |value| <= 8 * norm_bound / sqrt(pi * n).

    value^2 * pi.upper * n <= 64 * norm_bound^2 certifies it (strictly,
    unless value = 0), since pi < pi.upper.
    """
    v = abs(Fraction(value))
    return v * v * PI.upper * n <= 64 * Fraction(norm_bound) ** 2


def decay_profile(h: TensorCombo, n_list: Sequence[int]) -> list[DecayRow]:
    """Exact |mu_n(h)| with the certified dominating bound at each index.

    Raises when some term is not evaluable at a requested index (general
    explicit tables exist at a single n; symmetric terms everywhere).
    """
    nb = h.norm_bound
    rows = []
    for n in n_list:
        m = build(n)
        if not h.evaluable_at(n, m.is_explicit()):
            raise ValueError(f"combination {h.name!r} not evaluable at n={n}")
        value = abs(h.value_at(m))
        lo, hi = _tensor_bound_enclosure(nb, n)
        ok = _certified_tensor_dominance(value, nb, n)
        rows.append(DecayRow(n=n, value=value, bound_lower=lo, bound_upper=hi, dominated=ok))
    return rows


def _tensor_bound_enclosure(norm_bound: Rational, n: int) -> tuple[Rational, Rational]:
    """Rational enclosure of (8/sqrt(pi n)) * norm_bound."""
    lo_s, hi_s = sqrt_enclosure(PI.lower * n)
    _, hi_s2 = sqrt_enclosure(PI.upper * n)
    nb = Fraction(norm_bound)
    return 8 * nb / hi_s2, 8 * nb / lo_s


def decay_csv(rows: Sequence[DecayRow]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["n", "value", "bound_lower", "bound_upper", "pass"])
    for r in rows:
        w.writerow(
            [
                r.n,
                format_rational(r.value),
                format_rational(r.bound_lower),
                format_rational(r.bound_upper),
                "true" if r.dominated else "false",
            ]
        )
    return out.getvalue()


def decay_rows_to_json(rows: Sequence[DecayRow]) -> list[dict]:
    return [
        {
            "n": r.n,
            "value": format_rational(r.value),
            "value_decimal": decimal_str(r.value),
            "bound_lower": format_rational(r.bound_lower),
            "bound_upper": format_rational(r.bound_upper),
            "pass": r.dominated,
        }
        for r in rows
    ]
