"""Density checks, triangular basis construction, expansion recursion,
stabilization grids, and coefficient functionals, all exact."""

import random
from fractions import Fraction

import pytest

from kslab.schauder import (
    BasisVector,
    DENSE_UP_TO,
    DensityError,
    GeneratorSet,
    INCONCLUSIVE,
    NOT_DENSE,
    TriangularBasis,
    apply_functional,
    basis_to_json,
    build_triangular_basis,
    coefficient_functional,
    density_check,
    expand,
    expansion_to_json,
    verify_stabilization,
)


def unit_generators(count):
    return GeneratorSet.from_vectors([{k: 1} for k in range(1, count + 1)])


def det3(rows):
    """Cofactor-expansion determinant, the independent 3x3 rank oracle."""
    (a, b, c), (d, e, f), (g, h, i) = rows
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)


def exact_rank(rows):
    mat = [list(map(Fraction, r)) for r in rows]
    rank = 0
    for c in range(len(mat[0]) if mat else 0):
        piv = next((r for r in range(rank, len(mat)) if mat[r][c]), None)
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        for r in range(len(mat)):
            if r != rank and mat[r][c]:
                factor = mat[r][c] / mat[rank][c]
                for c2 in range(len(mat[0])):
                    mat[r][c2] -= factor * mat[rank][c2]
        rank += 1
    return rank


def random_dense_generators(rng, m=20, horizon=30, junk=5):
    """A shuffled family guaranteed dense up to m: a triangular core
    (coordinate k pivot plus a random tail above k) and junk vectors."""
    gens = []
    for k in range(1, m + 1):
        vec = {k: Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.randint(1, 3))}
        for extra in rng.sample(range(k + 1, horizon + 1), k=rng.randint(0, 3)):
            vec[extra] = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
        gens.append(vec)
    for _ in range(junk):
        vec = {
            coord: Fraction(rng.randint(-4, 4), rng.randint(1, 3))
            for coord in rng.sample(range(1, horizon + 1), k=rng.randint(1, 4))
        }
        gens.append({k: v for k, v in vec.items() if v})
    rng.shuffle(gens)
    return GeneratorSet.from_vectors(gens)


class TestDensityCheck:
    def test_unit_sequences_dense(self):
        result = density_check(unit_generators(10), 10)
        assert result.status == DENSE_UP_TO
        assert result.rank == 10

    def test_missing_first_coordinate(self):
        gens = GeneratorSet.from_vectors([{k: 1} for k in range(2, 12)])
        result = density_check(gens, 1)
        assert result.status == NOT_DENSE
        assert result.failing == (1,)

    def test_three_generator_example_with_det_oracle(self):
        vectors = [{1: 1, 2: 1}, {2: 1, 3: 1}, {3: 1}]
        result = density_check(GeneratorSet.from_vectors(vectors), 3)
        assert result.status == DENSE_UP_TO
        matrix = [[Fraction(v.get(c, 0)) for v in vectors] for c in (1, 2, 3)]
        assert det3(matrix) != 0  # elimination oracle agrees

    def test_dependent_generators_counted_by_rank(self):
        gens = GeneratorSet.from_vectors([{1: 1}, {1: 2}, {1: 3, 2: 1}])
        result = density_check(gens, 2)
        assert result.status == DENSE_UP_TO
        assert result.pivot_generators == (0, 2)

    def test_monotone_in_segment_length(self):
        rng = random.Random(77)
        gens = random_dense_generators(rng, m=12, horizon=20)
        assert density_check(gens, 12).status == DENSE_UP_TO
        for m in (1, 5, 12):
            fresh = random_dense_generators(random.Random(77), m=12, horizon=20)
            assert density_check(fresh, m).status == DENSE_UP_TO

    def test_stream_inconclusive_within_budget(self):
        stream = ({k: 1} for k in range(2, 10**6))  # never covers coordinate 1
        result = density_check(GeneratorSet(stream, count=None), 1)
        assert result.status == INCONCLUSIVE

    def test_stream_exhaustion_is_decisive(self):
        stream = iter([{2: 1}, {3: 1}])
        result = density_check(GeneratorSet(stream, count=None), 1)
        assert result.status == NOT_DENSE

    def test_stream_success(self):
        stream = ({k: 1} for k in range(1, 10**6))
        result = density_check(GeneratorSet(stream, count=None), 6)
        assert result.status == DENSE_UP_TO

    def test_random_subsets_inherit_surjectivity(self):
        # the documented reduction: a subprojection of a surjection is
        # surjective; check rank |F| on random subsets F of {1..m}
        rng = random.Random(123)
        gens = random_dense_generators(rng, m=10, horizon=16)
        vectors = gens.fetch_all()
        assert density_check(gens, 10).status == DENSE_UP_TO
        for _ in range(20):
            subset = rng.sample(range(1, 11), k=rng.randint(1, 10))
            rows = [[v.get(c, Fraction(0)) for v in vectors] for c in subset]
            assert exact_rank(rows) == len(subset)

    def test_bad_segment_rejected(self):
        with pytest.raises(ValueError):
            density_check(unit_generators(3), 0)


class TestBuildTriangularBasis:
    def test_unit_generators_give_unit_basis(self):
        basis = build_triangular_basis(unit_generators(8), 5, 8)
        for n in range(1, 6):
            expected = tuple(
                Fraction(1) if k == n else Fraction(0) for k in range(1, 9)
            )
            assert basis.vectors[n - 1].coords == expected

    def test_two_generator_worked_example(self):
        # b_1 = (e_1 + e_2) - e_2 = e_1 and b_2 = e_2, by a 2x2 exact solve
        gens = GeneratorSet.from_vectors([{1: 1, 2: 1}, {2: 1}])
        basis = build_triangular_basis(gens, 2, 4)
        assert basis.vectors[0].coords == (1, 0, 0, 0)
        assert basis.vectors[0].combination == ((0, Fraction(1)), (1, Fraction(-1)))
        assert basis.vectors[1].coords == (0, 1, 0, 0)

    def test_rank_deficiency_names_coordinate(self):
        gens = GeneratorSet.from_vectors([{1: 1, 2: 1}, {2: 1}])
        with pytest.raises(DensityError) as err:
            build_triangular_basis(gens, 3, 5)
        assert err.value.coordinate == 3

    def test_horizon_must_cover_length(self):
        with pytest.raises(ValueError):
            build_triangular_basis(unit_generators(4), 4, 3)

    def test_biorthogonality_on_random_sets(self):
        rng = random.Random(2024)
        for _ in range(3):
            gens = random_dense_generators(rng, m=8, horizon=12)
            basis = build_triangular_basis(gens, 8, 12)
            for n in range(1, 9):
                for k in range(1, 9):
                    assert basis.coord(n, k) == (1 if k == n else 0)

    def test_vectors_lie_in_generator_span(self):
        rng = random.Random(31)
        gens = random_dense_generators(rng, m=6, horizon=10)
        vectors = gens.fetch_all()
        basis = build_triangular_basis(gens, 6, 10)
        for vec in basis.vectors:
            rebuilt = [Fraction(0)] * 10
            for c, w in vec.combination:
                for k, v in vectors[c].items():
                    rebuilt[k - 1] += w * v
            assert tuple(rebuilt) == vec.coords

    def test_deterministic(self):
        gens1 = random_dense_generators(random.Random(5), m=6, horizon=10)
        gens2 = random_dense_generators(random.Random(5), m=6, horizon=10)
        b1 = build_triangular_basis(gens1, 6, 10)
        b2 = build_triangular_basis(gens2, 6, 10)
        assert b1 == b2

    def test_stream_generators(self):
        stream = ({k: 1, k + 1: Fraction(1, 2)} for k in range(1, 10**6))
        basis = build_triangular_basis(GeneratorSet(stream, count=None), 4, 6)
        for n in range(1, 5):
            for k in range(1, 5):
                assert basis.coord(n, k) == (1 if k == n else 0)


class TestExpand:
    def _basis(self):
        gens = GeneratorSet.from_vectors([{1: 1, 2: 1}, {2: 1}])
        return build_triangular_basis(gens, 2, 4)

    def test_basis_vector_expands_to_unit(self):
        basis = build_triangular_basis(unit_generators(6), 4, 6)
        y = list(basis.vectors[2].coords)
        exp = expand(y, basis)
        assert exp.coefficients == (0, 0, 1, 0)

    def test_zero_target(self):
        exp = expand([0, 0, 0, 0], self._basis())
        assert exp.coefficients == (0, 0)

    def test_worked_recursion(self):
        # a_1 = 2, a_2 = 3 - 2 * pi_2(b_1) = 3 - 0
        exp = expand([Fraction(2), Fraction(3), 0, 0], self._basis())
        assert exp.coefficients == (2, 3)

    def test_horizon_mismatch(self):
        with pytest.raises(ValueError):
            expand([1, 2], self._basis())

    def test_general_recursion_against_direct_formula(self):
        # a handmade triangular basis with nonzero entries above the diagonal
        basis = TriangularBasis(
            vectors=(
                BasisVector(coords=(Fraction(1), Fraction(2), Fraction(5)), combination=()),
                BasisVector(coords=(Fraction(0), Fraction(1), Fraction(-3)), combination=()),
                BasisVector(coords=(Fraction(0), Fraction(0), Fraction(1)), combination=()),
            ),
            horizon=3,
        )
        y = [Fraction(4), Fraction(1), Fraction(2)]
        exp = expand(y, basis)
        a1 = y[0]
        a2 = y[1] - a1 * basis.coord(1, 2)
        a3 = y[2] - a1 * basis.coord(1, 3) - a2 * basis.coord(2, 3)
        assert exp.coefficients == (a1, a2, a3)
        report = verify_stabilization(exp, basis, y)
        assert report.all_true

    def test_triangular_dependence_of_coefficients(self):
        # perturbing y at coordinate m changes only a_n for n >= m
        basis = TriangularBasis(
            vectors=(
                BasisVector(coords=(Fraction(1), Fraction(1), Fraction(1), Fraction(0)), combination=()),
                BasisVector(coords=(Fraction(0), Fraction(1), Fraction(4), Fraction(0)), combination=()),
                BasisVector(coords=(Fraction(0), Fraction(0), Fraction(1), Fraction(2)), combination=()),
            ),
            horizon=4,
        )
        y = [Fraction(3), Fraction(-1), Fraction(2), Fraction(0)]
        base = expand(y, basis).coefficients
        y2 = list(y)
        y2[1] += Fraction(5, 7)
        bumped = expand(y2, basis).coefficients
        assert bumped[0] == base[0]
        assert bumped[1] != base[1]


class TestStabilization:
    def test_all_true_for_unit_basis(self):
        basis = build_triangular_basis(unit_generators(8), 6, 8)
        y = [Fraction(i * i - 3, 2) for i in range(1, 9)]
        exp = expand(y, basis)
        report = verify_stabilization(exp, basis, y)
        assert report.all_true
        assert set(report.grid) == {
            (m, np_) for m in range(1, 7) for np_ in range(m, 7)
        }

    def test_sum_of_two_basis_vectors(self):
        gens = GeneratorSet.from_vectors([{1: 1, 2: 1}, {2: 1, 3: 2}, {3: 1}])
        basis = build_triangular_basis(gens, 3, 5)
        y = [a + b for a, b in zip(basis.vectors[0].coords, basis.vectors[1].coords)]
        exp = expand(y, basis)
        assert exp.coefficients == (1, 1, 0)
        assert verify_stabilization(exp, basis, y).all_true

    def test_random_rational_targets(self):
        rng = random.Random(909)
        gens = random_dense_generators(rng, m=10, horizon=20)
        basis = build_triangular_basis(gens, 10, 20)
        for _ in range(5):
            y = [Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(20)]
            exp = expand(y, basis)
            report = verify_stabilization(exp, basis, y)
            assert report.all_true

    def test_stabilization_log_consistent_with_grid(self):
        basis = TriangularBasis(
            vectors=(
                BasisVector(coords=(Fraction(1), Fraction(3)), combination=()),
                BasisVector(coords=(Fraction(0), Fraction(1)), combination=()),
            ),
            horizon=2,
        )
        y = [Fraction(1), Fraction(0)]
        exp = expand(y, basis)
        report = verify_stabilization(exp, basis, y)
        for m, logged in enumerate(exp.stabilization_log, start=1):
            assert logged <= max(m, 1)
            for np_ in range(m, len(basis) + 1):
                assert report.grid[(m, np_)] == (np_ >= logged)


class TestCoefficientFunctional:
    def test_first_functional_is_first_projection(self):
        basis = build_triangular_basis(unit_generators(4), 3, 4)
        assert coefficient_functional(basis, 1) == (1,)

    def test_unit_basis_gives_unit_weights(self):
        basis = build_triangular_basis(unit_generators(5), 5, 5)
        for n in range(1, 6):
            weights = coefficient_functional(basis, n)
            assert weights == tuple(
                Fraction(1) if k == n else Fraction(0) for k in range(1, n + 1)
            )

    def test_worked_two_generator_example(self):
        gens = GeneratorSet.from_vectors([{1: 1, 2: 1}, {2: 1}])
        basis = build_triangular_basis(gens, 2, 4)
        weights = coefficient_functional(basis, 2)
        assert apply_functional(weights, basis.vectors[0].coords) == 0
        assert apply_functional(weights, basis.vectors[1].coords) == 1

    def test_biorthogonality_on_nontrivial_triangular_basis(self):
        basis = TriangularBasis(
            vectors=(
                BasisVector(coords=(Fraction(1), Fraction(2), Fraction(-1)), combination=()),
                BasisVector(coords=(Fraction(0), Fraction(1), Fraction(7)), combination=()),
                BasisVector(coords=(Fraction(0), Fraction(0), Fraction(1)), combination=()),
            ),
            horizon=3,
        )
        for n in range(1, 4):
            weights = coefficient_functional(basis, n)
            for m in range(1, 4):
                value = apply_functional(weights, basis.vectors[m - 1].coords[:n])
                assert value == (1 if m == n else 0)

    def test_index_out_of_range(self):
        basis = build_triangular_basis(unit_generators(3), 2, 3)
        with pytest.raises(ValueError):
            coefficient_functional(basis, 3)


class TestSerialization:
    def test_jsonl_ingest(self):
        text = '{"coords": {"1": "1", "2": "1/2"}}\n\n{"coords": {"2": "1"}}\n'
        gens = GeneratorSet.from_jsonl(text)
        assert gens.fetch_all() == [{1: Fraction(1), 2: Fraction(1, 2)}, {2: Fraction(1)}]

    def test_jsonl_rejects_garbage(self):
        with pytest.raises(ValueError, match="line 1"):
            GeneratorSet.from_jsonl("not json\n")
        with pytest.raises(ValueError, match="line 2"):
            GeneratorSet.from_jsonl('{"coords": {"1": "1"}}\n{"coords": {"0": "1"}}\n')

    def test_basis_and_expansion_json(self):
        gens = GeneratorSet.from_vectors([{1: 1, 2: 1}, {2: 1}])
        basis = build_triangular_basis(gens, 2, 3)
        doc = basis_to_json(basis)
        assert doc["horizon"] == 3
        assert doc["vectors"][0]["coords"] == ["1", "0", "0"]
        assert doc["vectors"][0]["combination"] == {"0": "1", "1": "-1"}
        assert doc["vectors"][0]["support_size"] == 1
        exp = expand([Fraction(2), Fraction(3), 0], basis)
        exp_doc = expansion_to_json(exp)
        assert exp_doc["coefficients"] == ["2", "3"]
        assert exp_doc["stabilization_log"] == [1, 2]
