"""Subsequence extraction with machine-checkable summability certificates.

Given any strictly increasing unbounded index stream, the greedy rule

    s_n = first unconsumed element >= max(s_{n-1} + 1, n^4)

selects a subsequence with s_n >= n^4, hence 1/sqrt(s_n) <= 1/n^2 and the
tail beyond position N is at most sum_{n>N} 1/n^2 <= 1/N by integral
comparison.  The certificate records rational upper enclosures of each
1/sqrt(s_n) (exact at perfect squares), their sum P_N, and the tail bound,
so the total bound P_N + 1/N is a purely rational object.

Partial sums sum_{n<=M'} |mu_{s_n}(h)| over a tensor combination h are then
uniformly dominated by (8/sqrt(pi)) * norm_bound * (P_M + tail), certified
by squared comparison against the pi enclosure.  The exponent 4 is the
smallest even power making 1/sqrt(n^p) summable with an elementary tail
certificate; the rule is one admissible selection, chosen here for its
closed-form tail, and reports label it as such.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .exactnum import (
    PI,
    Rational,
    decimal_str,
    format_rational,
    recip_sqrt_upper,
    sqrt_enclosure,
)
from .ks_measure import build, total_variation
from .tensor_bounds import TensorCombo

GREEDY_RULE = "greedy: s_n = first stream element >= max(prev+1, n^4)"

DISCLAIMER = (
    "Summability is verified only on the supplied tensor-algebra elements. "
    "Density of the full summability set follows from density of the tensor "
    "algebra (Stone-Weierstrass) and is not a finitely checkable statement; "
    "this report makes no claim beyond the listed elements."
)


@dataclass(frozen=True)
class SubseqCertificate:
    """Strictly increasing indices with a certified bound on sum 1/sqrt(s_n)."""

    rule: str
    indices: tuple[int, ...]
    recip_upper: tuple[Rational, ...]  # certified upper bounds on 1/sqrt(s_n)
    partial_sum_upper: Rational  # P_N = sum of recip_upper
    tail_bound: Rational  # certified bound on the tail beyond position N

    @property
    def total_bound(self) -> Rational:
        return self.partial_sum_upper + self.tail_bound


def extract(k_stream: Iterable[int], length: int) -> SubseqCertificate:
    """Apply the greedy rule to the stream, materializing `length` indices.

    The stream must be strictly increasing (checked as consumed) and
    unbounded (caller's contract); exhaustion before `length` selections
    raises, signaling a finite or bounded stream.
    """
    if length < 1:
        raise ValueError(f"certificate length must be >= 1, got {length}")
    it: Iterator[int] = iter(k_stream)
    indices: list[int] = []
    recips: list[Rational] = []
    prev_stream: int | None = None
    prev_pick = 0
    for pos in range(1, length + 1):
        threshold = max(prev_pick + 1, pos**4)
        while True:
            try:
                candidate = next(it)
            except StopIteration:
                raise ValueError(
                    f"stream exhausted after {len(indices)} selections; "
                    f"needed an element >= {threshold}"
                ) from None
            if prev_stream is not None and candidate <= prev_stream:
                raise ValueError(
                    f"stream not strictly increasing: {candidate} after {prev_stream}"
                )
            prev_stream = candidate
            if candidate >= threshold:
                break
        indices.append(candidate)
        recips.append(recip_sqrt_upper(candidate))
        prev_pick = candidate
    return SubseqCertificate(
        rule=GREEDY_RULE,
        indices=tuple(indices),
        recip_upper=tuple(recips),
        partial_sum_upper=sum(recips, Fraction(0)),
        tail_bound=Fraction(1, length),
    )


@dataclass(frozen=True)
class PartialSumCheck:
    """Prefix sums of |mu_{s_n}(h)| with their certified uniform bound."""

    partial_sums: tuple[Rational, ...]
    bound_lower: Rational
    bound_upper: Rational
    certified: bool  # every prefix sum dominated by (8/sqrt(pi)) * nb * total


def uniform_bound_enclosure(
    cert: SubseqCertificate, norm_bound: Rational, M: int | None = None
) -> tuple[Rational, Rational]:
    """Rational enclosure of (8/sqrt(pi)) * norm_bound * (P_M + tail)."""
    if M is None:
        M = len(cert.indices)
    nb = Fraction(norm_bound)
    total = sum(cert.recip_upper[:M], Fraction(0)) + cert.tail_bound
    lo_s, _ = sqrt_enclosure(PI.lower)
    _, hi_s = sqrt_enclosure(PI.upper)
    return 8 * nb * total / hi_s, 8 * nb * total / lo_s


def strongly_normal_partial_sums(
    cert: SubseqCertificate, h: TensorCombo, M: int | None = None
) -> PartialSumCheck:
    """Exact prefix sums over the first M selected indices, plus the bound.

    Evaluability: above the explicit-scale guard only symmetric-profile
    terms can be evaluated, so general explicit tables are rejected there.
    """
    if M is None:
        M = len(cert.indices)
    if not (1 <= M <= len(cert.indices)):
        raise ValueError(f"M must be in 1..{len(cert.indices)}, got {M}")
    partials: list[Rational] = []
    running = Fraction(0)
    for s in cert.indices[:M]:
        m = build(s)
        if not h.evaluable_at(s, m.is_explicit()):
            raise ValueError(f"combination {h.name!r} not evaluable at index {s}")
        running += abs(h.value_at(m))
        partials.append(running)

    nb = h.norm_bound
    total = sum(cert.recip_upper[:M], Fraction(0)) + cert.tail_bound
    # partial <= 8 * nb * total / sqrt(pi), certified by squaring
    rhs = 64 * nb * nb * total * total
    certified = all(p * p * PI.upper <= rhs for p in partials)
    bound_lower, bound_upper = uniform_bound_enclosure(cert, nb, M)
    return PartialSumCheck(
        partial_sums=tuple(partials),
        bound_lower=bound_lower,
        bound_upper=bound_upper,
        certified=certified,
    )


def strongly_normal_report(
    cert: SubseqCertificate,
    test_family: Sequence[TensorCombo],
    M: int | None = None,
) -> dict:
    """Per-combination bounded-partial-sum verdicts over the certificate.

    Finite evidence only; the report carries an explicit disclaimer field.
    Each selected index is also checked to carry a unit-norm measure.
    """
    if M is None:
        M = len(cert.indices)
    unit_norm = all(total_variation(build(s)) == 1 for s in cert.indices[:M])
    rows = []
    for i, h in enumerate(test_family):
        check = strongly_normal_partial_sums(cert, h, M)
        rows.append(
            {
                "combo": h.name or f"combo_{i}",
                "norm_bound": format_rational(h.norm_bound),
                "partial_sums": [format_rational(p) for p in check.partial_sums],
                "partial_sums_decimal": [decimal_str(p) for p in check.partial_sums],
                "bound_lower": format_rational(check.bound_lower),
                "bound_upper": format_rational(check.bound_upper),
                "bound_upper_decimal": decimal_str(check.bound_upper),
                "verdict": "PASS" if check.certified else "FAIL",
            }
        )
    if not rows:
        verdict = "VACUOUS"
    elif all(r["verdict"] == "PASS" for r in rows):
        verdict = "PASS"
    else:
        verdict = "FAIL"
    return {
        "certificate": certificate_to_json(cert),
        "unit_norm_indices": unit_norm,
        "rows": rows,
        "verdict": verdict,
        "disclaimer": DISCLAIMER,
    }


def certificate_to_json(cert: SubseqCertificate) -> dict:
    return {
        "rule": cert.rule,
        "indices": list(cert.indices),
        "partial_sum_upper": format_rational(cert.partial_sum_upper),
        "tail_bound": format_rational(cert.tail_bound),
    }
