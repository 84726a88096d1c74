import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heatindex.charclass import (
    FormField,
    FormMatrix,
    IdempotencyError,
    IdempotentField,
    SphereGrid,
    TorusGrid,
    a_hat,
    ch_de_rham,
    chern_character,
    exterior_derivative,
    integrate_top,
    landau_curvature,
    monopole_curvature,
    real_block,
    rhs_index,
    root_block,
    sphere_curvature,
    x_over_sinh_coefficients,
)
from heatindex.exterior_clifford import MultiVector
from heatindex.models import bott_projection, sphere_projection


def e(n, *idx):
    return MultiVector.basis(n, *idx)


def test_x_over_sinh_taylor():
    # independent check with the known expansion 1 - x^2/6 + 7x^4/360 - 31x^6/15120
    assert x_over_sinh_coefficients(3) == (1, Fraction(-1, 6), Fraction(7, 360), Fraction(-31, 15120))


class TestAHat:
    def test_zero_curvature(self):
        assert a_hat(FormMatrix.zeros(2, 4)) == MultiVector.scalar(4, 1)

    def test_two_generators(self):
        assert a_hat(root_block(e(2, 1, 2))) == MultiVector.scalar(2, 1)

    def test_four_generators_root_convention(self):
        theta = e(4, 1, 2) + e(4, 3, 4)
        got = a_hat(root_block(theta))
        assert got == MultiVector(4, {(): 1, (1, 2, 3, 4): Fraction(-1, 12)})
        assert isinstance(got[(1, 2, 3, 4)], Fraction)

    def test_four_generators_real_block(self):
        # a real rotation generator has eigenvalues +-i theta, flipping the sign
        theta = e(4, 1, 2) + e(4, 3, 4)
        assert a_hat(real_block(theta)) == MultiVector(4, {(): 1, (1, 2, 3, 4): Fraction(1, 12)})

    def test_rejects_non_antisymmetric(self):
        w = e(4, 1, 2)
        with pytest.raises(ValueError):
            a_hat(FormMatrix([[w, w], [w, w]]))

    def test_rejects_non_nilpotent(self):
        with pytest.raises(ValueError):
            FormMatrix([[MultiVector.scalar(2, 1)]])

    @given(st.lists(st.integers(-3, 3), min_size=6, max_size=6))
    @settings(max_examples=30, deadline=None)
    def test_degree_structure(self, cs):
        blades = [(1, 2), (3, 4), (1, 3), (2, 4), (5, 6), (1, 6)]
        x = MultiVector(6, dict(zip(blades, cs)))
        y = MultiVector(6, dict(zip(blades[::-1], cs)))
        z = MultiVector(6)
        R = FormMatrix([[z, x, y], [-x, z, x], [-y, -x, z]])
        out = a_hat(R)
        assert out[()] == 1
        assert all(g % 4 == 0 for g in out.grades())


class TestChern:
    def test_zero(self):
        assert chern_character(FormMatrix.zeros(3, 2)) == MultiVector.scalar(2, 3)

    def test_rank_one(self):
        f = 2.5 * e(2, 1, 2)
        assert chern_character(FormMatrix([[f]])) == MultiVector.scalar(2, 1) - f

    def test_rank_two_diagonal(self):
        f = e(4, 1, 2) + e(4, 3, 4)
        z = MultiVector(4)
        F = FormMatrix([[f, z], [z, -f]])
        assert chern_character(F) == MultiVector.scalar(4, 2) + (f ^ f)

    @given(st.integers(-4, 4), st.integers(-4, 4), st.integers(-4, 4))
    def test_additive(self, a, b, c):
        f1 = FormMatrix([[MultiVector(4, {(1, 2): a, (3, 4): b})]])
        f2 = FormMatrix([[MultiVector(4, {(1, 3): c, (2, 4): a})]])
        both = FormMatrix.direct_sum(f1, f2)
        assert chern_character(both) == chern_character(f1) + chern_character(f2)


class TestIntegrateTop:
    def test_volume(self):
        g = TorusGrid(16)
        assert integrate_top(FormField.constant(g, e(2, 1, 2))) == pytest.approx(1.0, abs=1e-14)

    def test_sin_squared(self):
        g = TorusGrid(32)
        x, _ = g.nodes()
        f = FormField(g, {(1, 2): np.sin(2 * np.pi * x) ** 2})
        assert integrate_top(f) == pytest.approx(0.5, abs=1e-10)

    def test_exact_form_vanishes(self):
        g = TorusGrid(64)
        x, y = g.nodes()
        f = np.exp(np.sin(2 * np.pi * x) * np.cos(2 * np.pi * y))
        h = np.cos(2 * np.pi * (x + 2 * y))
        df, dh = exterior_derivative(f, g), exterior_derivative(h, g)
        assert abs(integrate_top(df ^ dh)) < 1e-8

    def test_sphere_area(self):
        g = SphereGrid(12, 24)
        assert integrate_top(FormField.constant(g, e(2, 1, 2))) == pytest.approx(4 * np.pi, rel=1e-13)

    def test_sphere_exact_form_vanishes(self):
        g = SphereGrid(24, 48)
        th, ph = g.nodes()
        f = np.cos(th) * np.sin(th) * np.cos(ph)
        h = np.sin(th) * np.sin(ph)
        assert abs(integrate_top(exterior_derivative(f, g) ^ exterior_derivative(h, g))) < 1e-8


class TestFormField:
    def test_csv(self, tmp_path):
        g = TorusGrid(4)
        path = FormField.constant(g, MultiVector(2, {(): 1, (1, 2): 2j})).to_csv(tmp_path / "f.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "x,y,scalar_re,scalar_im,e12_re,e12_im"
        assert len(lines) == 17

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            FormField(TorusGrid(4), {(): np.full((4, 4), np.nan)})

    def test_grid_minimum(self):
        with pytest.raises(ValueError):
            TorusGrid(3)


class TestChDeRham:
    def test_constant_projection(self):
        g = TorusGrid(16)
        p = np.array([[1, 1], [1, 1]]) / 2
        ch = ch_de_rham(IdempotentField(g, np.broadcast_to(p, (16, 16, 2, 2))))
        assert np.allclose(ch[()], 1) and np.allclose(ch[(1, 2)], 0)

    def test_identity(self):
        ch = ch_de_rham(IdempotentField.identity(TorusGrid(8), 3))
        assert np.allclose(ch[()], 3)

    @pytest.mark.parametrize("profile, degree", [("trigonometric", 1), ("bump", -1)])
    def test_bott_degree(self, profile, degree):
        e_ = bott_projection(128, profile)
        assert np.allclose(ch_de_rham(e_)[()], 1)
        assert rhs_index(e_) == pytest.approx(degree, abs=1e-6)

    def test_sphere_tautological_projection(self):
        assert rhs_index(sphere_projection(SphereGrid(24, 48))) == pytest.approx(-1.0, abs=1e-10)

    def test_rejects_non_idempotent(self):
        with pytest.raises(IdempotencyError):
            IdempotentField(TorusGrid(4), np.full((4, 4, 2, 2), 0.3))


class TestRhsIndex:
    def test_untwisted_torus(self):
        assert rhs_index(IdempotentField.identity(TorusGrid(8))) == 0

    @pytest.mark.parametrize("k", [-2, 1, 3])
    def test_landau_flux(self, k):
        unit = IdempotentField.identity(TorusGrid(8))
        assert rhs_index(unit, F=landau_curvature(k)) == pytest.approx(k, abs=1e-8)

    @pytest.mark.parametrize("q", [-2, -1, 0, 1, 2])
    def test_monopole_charge(self, q):
        unit = IdempotentField.identity(SphereGrid(8, 16))
        assert rhs_index(unit, R=sphere_curvature(), F=monopole_curvature(q)) == pytest.approx(q, abs=1e-10)

    def test_prefactor_power(self):
        unit = IdempotentField.identity(TorusGrid(8))
        F = landau_curvature(1)
        assert rhs_index(unit, F=F, prefactor_power=0) == pytest.approx(2j * math.pi)
