"""Finite-section diagnostics: projection norms, basis constants, and the
section builder over measures."""

import random
from fractions import Fraction

import pytest

from kslab.basic_seq_diag import (
    DegenerateSectionError,
    FiniteSection,
    basis_constant,
    check_section,
    section_of_ks,
    section_report,
)
from kslab.ks_measure import build, eval_symmetric
from kslab.schauder import (
    GeneratorSet,
    apply_functional,
    build_triangular_basis,
    coefficient_functional,
)
from kslab.tensor_bounds import SymmetricTerm, TensorCombo, profile_table, standard_test_family

TOL = 1e-9


def frac_rows(rows):
    return tuple(tuple(Fraction(v) for v in row) for row in rows)


def random_section(rng, n, f):
    while True:
        rows = frac_rows(
            [
                [Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(f)]
                for _ in range(n)
            ]
        )
        section = FiniteSection(rows=rows)
        try:
            check_section(section)
        except DegenerateSectionError:
            continue
        return section


class TestBasisConstant:
    def test_identity_rows(self):
        section = FiniteSection(rows=frac_rows([[1, 0, 0], [0, 1, 0], [0, 0, 1]]))
        k, per_m = basis_constant(section)
        assert abs(k - 1.0) < TOL
        assert all(abs(v - 1.0) < TOL for v in per_m)

    def test_single_row_convention(self):
        section = FiniteSection(rows=frac_rows([[2, 3]]))
        assert basis_constant(section) == (1.0, [1.0])

    def test_near_dependent_rows_inflate(self):
        # rows (1,0) and (1,1/10): take c = (11,-10); the combination has
        # family values (1, -1) while its prefix is (11, 0), so ||P_1|| = 11
        section = FiniteSection(rows=frac_rows([[1, 0], [1, Fraction(1, 10)]]))
        k, per_m = basis_constant(section)
        assert k >= 10
        assert abs(k - 11.0) < 1e-6
        assert per_m == [k]

    def test_k_at_least_one(self):
        rng = random.Random(11)
        for _ in range(10):
            section = random_section(rng, rng.randint(2, 5), rng.randint(5, 8))
            k, _ = basis_constant(section)
            assert k >= 1.0 - TOL

    def test_row_rescaling_invariance(self):
        rng = random.Random(23)
        section = random_section(rng, 4, 7)
        _, per_m = basis_constant(section)
        rows = [list(r) for r in section.rows]
        rows[2] = [Fraction(7, 3) * v for v in rows[2]]  # positive rescale
        _, per_m_scaled = basis_constant(FiniteSection(rows=frac_rows(rows)))
        assert all(
            abs(a - b) <= TOL * max(1.0, abs(a)) for a, b in zip(per_m, per_m_scaled)
        )

    def test_appending_row_never_decreases(self):
        rng = random.Random(37)
        for _ in range(5):
            f = rng.randint(6, 9)
            base = random_section(rng, 4, f)
            k_base, _ = basis_constant(base)
            extra = random_section(rng, 1, f).rows[0]
            extended = FiniteSection(rows=base.rows + (extra,))
            try:
                check_section(extended)
            except DegenerateSectionError:
                continue
            k_ext, _ = basis_constant(extended)
            assert k_ext >= k_base - TOL

    def test_degenerate_zero_row(self):
        section = FiniteSection(rows=frac_rows([[1, 2], [0, 0]]))
        with pytest.raises(DegenerateSectionError):
            basis_constant(section)

    def test_degenerate_dependent_rows(self):
        section = FiniteSection(rows=frac_rows([[1, 2, 0], [2, 4, 0]]))
        with pytest.raises(DegenerateSectionError):
            basis_constant(section)


class TestSectionOfKs:
    def test_constant_family_gives_zero_column(self):
        # column balance wipes the constant tensor, flagged downstream
        family = [TensorCombo(terms=(SymmetricTerm("constant_one"),), name="ones")]
        section = section_of_ks([1, 2], family)
        assert all(v == 0 for row in section.rows for v in row)
        with pytest.raises(DegenerateSectionError):
            check_section(section)

    def test_exact_table_against_symmetric_oracle(self):
        family = standard_test_family() + [
            TensorCombo(terms=(SymmetricTerm("linear_centered", coeff=Fraction(1, 2)),))
        ]
        section = section_of_ks([1, 2, 3], family)
        assert section.n_functionals == 3 and section.n_tests == 6
        for i, s in enumerate([1, 2, 3]):
            m = build(s)
            for j, h in enumerate(family):
                expected = sum(
                    (
                        term.coeff
                        * eval_symmetric(
                            m, profile_table(term.profile, s), term.g_const * s
                        )
                        for term in h.terms
                    ),
                    Fraction(0),
                )
                assert section.rows[i][j] == expected

    def test_empty_indices_rejected(self):
        with pytest.raises(ValueError):
            section_of_ks([], standard_test_family())

    def test_empty_family_rejected(self):
        with pytest.raises(ValueError):
            section_of_ks([1, 2], [])


class TestFunctionalSections:
    def test_triangular_functionals_have_constant_one(self):
        # rows b_n^*(b_m) form the identity, so K = 1 exactly
        gens = GeneratorSet.from_vectors(
            [{1: 1, 2: 1}, {2: 1, 3: -2}, {3: 1, 4: 1}, {4: 2}]
        )
        basis = build_triangular_basis(gens, 4, 5)
        rows = []
        for n in range(1, 5):
            weights = coefficient_functional(basis, n)
            rows.append(
                tuple(
                    apply_functional(weights, basis.vectors[m - 1].coords[: len(weights)])
                    for m in range(1, 5)
                )
            )
        k, per_m = basis_constant(FiniteSection(rows=tuple(rows)))
        assert abs(k - 1.0) < TOL


class TestSectionReport:
    def test_report_shape(self):
        section = FiniteSection(rows=frac_rows([[1, 0], [0, 1]]))
        doc = section_report(section)
        assert doc["n_functionals"] == 2
        assert doc["values"] == [["1", "0"], ["0", "1"]]
        assert "caveat" in doc
        assert float(doc["basis_constant"]) == pytest.approx(1.0, abs=1e-9)
