import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import homogeneous, multivectors
from heatindex.exterior_clifford import (
    CliffordMatrix,
    DimensionError,
    MultiVector,
    all_blades,
    berezin_top,
    chirality,
    clifford_generators,
    degree_part,
    exterior_exp,
    quantize,
    supertrace,
    supertrace_constant,
    symbol_map,
    wedge,
)


def e(n, *idx):
    return MultiVector.basis(n, *idx)


class TestWedge:
    def test_basis_product(self):
        assert wedge(e(2, 1), e(2, 2)) == e(2, 1, 2)

    def test_repeated_generator_vanishes(self):
        assert wedge(e(2, 1), e(2, 1)).is_zero()

    def test_square_of_symplectic_form(self):
        w = e(4, 1, 2) + e(4, 3, 4)
        assert wedge(w, w) == 2 * e(4, 1, 2, 3, 4)

    def test_sign_of_reordering(self):
        assert wedge(e(3, 2), e(3, 1)) == -e(3, 1, 2)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            wedge(e(2, 1), e(4, 1))

    def test_invalid_blade(self):
        with pytest.raises(ValueError):
            MultiVector(2, {(2, 1): 1})

    @given(multivectors(n=4), multivectors(n=4), multivectors(n=4))
    @settings(max_examples=40, deadline=None)
    def test_associative(self, a, b, c):
        assert wedge(wedge(a, b), c).isclose(wedge(a, wedge(b, c)), atol=1e-9)

    @given(st.data(), st.integers(0, 4), st.integers(0, 4))
    @settings(max_examples=40, deadline=None)
    def test_graded_commutative(self, data, p, q):
        a = data.draw(homogeneous(4, p))
        b = data.draw(homogeneous(4, q))
        assert wedge(a, b).isclose((-1) ** (p * q) * wedge(b, a), atol=1e-9)


class TestDegreePart:
    def test_extracts_degree(self):
        a = MultiVector.scalar(2, 1) + e(2, 1) + e(2, 1, 2)
        assert degree_part(a, 2) == e(2, 1, 2)

    def test_missing_degree_is_zero(self):
        assert degree_part(e(4, 1, 2), 3).is_zero()

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            degree_part(e(2, 1), 3)

    @given(multivectors())
    def test_reconstruction(self, a):
        total = MultiVector(a.n)
        for i in range(a.n + 1):
            total = total + degree_part(a, i)
        assert total == a


class TestBerezin:
    def test_scalar(self):
        assert berezin_top(MultiVector.scalar(4, 1)) == 0

    def test_top(self):
        assert berezin_top(5 * e(6, 1, 2, 3, 4, 5, 6)) == 5

    @given(st.data())
    @settings(max_examples=30, deadline=None)
    def test_complementary_product(self, data):
        a = data.draw(homogeneous(4, 1))
        b = data.draw(homogeneous(4, 3))
        # brute force: sum over complementary index pairs with permutation signs
        expected = 0
        for i in range(1, 5):
            rest = tuple(j for j in range(1, 5) if j != i)
            perm = (i,) + rest
            sign = (-1) ** sum(1 for x, y in itertools.combinations(perm, 2) if x > y)
            expected += sign * a[(i,)] * b[rest]
        assert abs(berezin_top(wedge(a, b)) - expected) < 1e-9


class TestExteriorExp:
    def test_nilpotent_series_terminates(self):
        w = e(4, 1, 2) + e(4, 3, 4)
        assert exterior_exp(w) == MultiVector.scalar(4, 1) + w + e(4, 1, 2, 3, 4)

    def test_rejects_odd(self):
        with pytest.raises(ValueError):
            exterior_exp(e(2, 1))


@pytest.mark.parametrize("n", [2, 4, 6, 8])
class TestClifford:
    def test_relations(self, n):
        g = [x.matrix for x in clifford_generators(n)]
        eye = np.eye(g[0].shape[0])
        for i, j in itertools.product(range(n), repeat=2):
            anti = g[i] @ g[j] + g[j] @ g[i]
            assert np.array_equal(anti, -2 * (i == j) * eye)

    def test_grading(self, n):
        G = chirality(n)
        assert np.array_equal(G @ G, np.eye(G.shape[0]))
        for x in clifford_generators(n):
            assert np.allclose(G @ x.matrix + x.matrix @ G, 0, atol=0)

    def test_supertrace_of_top_monomial(self, n):
        assert supertrace(quantize(e(n, *range(1, n + 1)))) == pytest.approx(supertrace_constant(n))


def test_odd_dimension_unsupported():
    with pytest.raises(NotImplementedError):
        clifford_generators(3)


def test_two_dimensional_example():
    g1, g2 = clifford_generators(2)
    assert np.array_equal(chirality(2), np.diag([1, -1]))
    assert supertrace(g1 @ g2) == pytest.approx(-2j)
    assert supertrace(g1) == 0
    assert supertrace(CliffordMatrix(2, np.eye(2))) == 0


def test_symbol_of_monomials():
    g1, g2 = clifford_generators(2)
    assert symbol_map(g1 @ g2, atol=1e-14) == e(2, 1, 2)
    assert symbol_map(CliffordMatrix(2, np.eye(2)), atol=1e-14) == MultiVector.scalar(2, 1)


@given(multivectors())
@settings(max_examples=60, deadline=None)
def test_symbol_quantize_round_trip(a):
    assert symbol_map(quantize(a)).isclose(a, atol=1e-9)


@given(multivectors())
@settings(max_examples=60, deadline=None)
def test_supertrace_top_formula(a):
    assert supertrace(quantize(a)) == pytest.approx(supertrace_constant(a.n) * berezin_top(a), abs=1e-9)


@given(multivectors(n=6, grades={0, 1, 2, 3, 4, 5}))
@settings(max_examples=40, deadline=None)
def test_supertrace_annihilates_lower_degrees(a):
    assert abs(supertrace(quantize(a))) < 1e-9


def test_dense_round_trip():
    v = np.arange(16) + 1j
    assert np.array_equal(MultiVector.from_dense(4, v).to_dense(), v)
    assert len(all_blades(4)) == 16
