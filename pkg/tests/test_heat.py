import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heatindex.exterior_clifford import MultiVector
from heatindex.heat import (
    ConvergenceError,
    KernelDomainError,
    flat_torus_heat_kernel,
    getzler_delta,
    getzler_rescale,
    heat_supertrace,
    mehler_kernel,
    oscillator_fd_oracle,
    rescaled_limit_check,
)
from heatindex.models import flat_torus_dirac, landau_model, monopole_model

MAGNETIC = np.array([[0, 1j], [-1j, 0]])


class TestSupertrace:
    def test_flat_torus_vanishes(self):
        assert heat_supertrace(flat_torus_dirac(6), 0.3).value == 0

    @pytest.mark.parametrize("t", [0.05, 0.2, 1.0])
    def test_landau(self, t):
        st_ = heat_supertrace(landau_model(3), t)
        assert st_.value == pytest.approx(3, abs=1e-8)
        assert st_.tail_bound < 1e-8

    def test_monopole(self):
        assert heat_supertrace(monopole_model(-2), 0.5).value == pytest.approx(-2, abs=1e-8)

    def test_rejects_nonpositive_time(self):
        with pytest.raises(ValueError):
            heat_supertrace(landau_model(1), 0.0)

    def test_tail_bound_dominates_truncation(self):
        # coarse cutoff against a fine one: the partial sums differ by at most the bound
        t = 0.02
        coarse, fine = monopole_model(1, 5), monopole_model(1, 60)
        def part(m):
            return float(np.sum(m.multiplicity[m.chirality > 0] * np.exp(-t * m.d2[m.chirality > 0])))
        assert abs(part(fine) - part(coarse)) <= coarse.tail(t)

    @given(st.sampled_from([-3, -1, 1, 2]), st.floats(0.02, 5.0))
    @settings(max_examples=30, deadline=None)
    def test_time_independence(self, q, t):
        for model in (landau_model(q), monopole_model(q)):
            st_ = heat_supertrace(model, t)
            assert abs(st_.value - q) <= 1e-9 + st_.tail_bound


class TestMehler:
    def test_gaussian_limit(self):
        v = np.array([0.3, -0.2])
        t = 0.4
        want = math.exp(-v @ v / (4 * t)) / (4 * math.pi * t)
        assert mehler_kernel(np.zeros((2, 2)), 0.0, t, v) == pytest.approx(want, rel=1e-14)

    def test_twist_factor(self):
        t, f = 0.4, 1.3
        base = mehler_kernel(np.zeros((2, 2)), 0.0, t)
        assert mehler_kernel(np.zeros((2, 2)), f, t) == pytest.approx(base * math.exp(-t * f))

    @pytest.mark.parametrize("b", [0.5, 1.0, 2.0])
    def test_origin_value(self, b):
        t = 0.5
        x = t * b / 2
        assert mehler_kernel(b * MAGNETIC, 0.0, t).real == pytest.approx(x / math.sinh(x) / (4 * math.pi * t))

    def test_real_rotation_block(self):
        t, b = 0.5, 1.0
        x = t * b / 2
        R = np.array([[0, b], [-b, 0]])
        assert mehler_kernel(R, 0.0, t).real == pytest.approx(x / math.sin(x) / (4 * math.pi * t))

    def test_pole(self):
        R = np.array([[0, 1.0], [-1.0, 0]])
        with pytest.raises(KernelDomainError):
            mehler_kernel(R, 0.0, 2 * math.pi)

    def test_form_valued_twist(self):
        F = MultiVector(2, {(1, 2): 1.0})
        out = mehler_kernel(np.zeros((2, 2)), F, 1.0)
        assert out.isclose(MultiVector(2, {(): 1, (1, 2): -1}) * (1 / (4 * math.pi)))

    @given(st.floats(0.0, 3.0), st.floats(0.05, 1.0), st.floats(-1, 1), st.floats(-1, 1))
    @settings(max_examples=40, deadline=None)
    def test_even_and_positive(self, b, t, x, y):
        v = np.array([x, y])
        a = mehler_kernel(b * MAGNETIC, 0.2, t, v)
        c = mehler_kernel(b * MAGNETIC, 0.2, t, -v)
        assert a == pytest.approx(c, rel=1e-12)
        assert a.real > 0 and abs(a.imag) <= 1e-12 * a.real

    @pytest.mark.parametrize("eps", [1e-2, 1e-4, 1e-6])
    def test_small_curvature_converges(self, eps):
        v = np.array([0.2, 0.1])
        g = mehler_kernel(np.zeros((2, 2)), 0.0, 0.3, v)
        assert mehler_kernel(eps * MAGNETIC, 0.0, 0.3, v).real == pytest.approx(g, rel=eps**2)

    def test_series_branch_continuity(self):
        a = mehler_kernel(0.99e-3 / 0.25 * MAGNETIC, 0.0, 0.5, [0.3, 0.0])
        b = mehler_kernel(1.01e-3 / 0.25 * MAGNETIC, 0.0, 0.5, [0.3, 0.0])
        assert a == pytest.approx(b, rel=1e-6)

    def test_four_dimensions(self):
        R = np.zeros((4, 4), dtype=complex)
        R[:2, :2] = MAGNETIC
        R[2:, 2:] = 2 * MAGNETIC
        t = 0.5
        want = (t / 2) / math.sinh(t / 2) * t / math.sinh(t) / (4 * math.pi * t) ** 2
        assert mehler_kernel(R, 0.0, t).real == pytest.approx(want)


class TestOracle:
    def test_free_gaussian(self):
        res = oscillator_fd_oracle(np.zeros((2, 2)), 0.0, 0.25, grid_sizes=(128, 256, 512))
        assert res.value == pytest.approx(1 / (4 * math.pi * 0.25), abs=1e-6)

    def test_second_order(self):
        res = oscillator_fd_oracle(MAGNETIC, 0.3, 0.25)
        assert res.order == pytest.approx(2.0, abs=0.2)

    def test_mass_conservation(self):
        res = oscillator_fd_oracle(np.zeros((2, 2)), 0.0, 0.25, grid_sizes=(64, 128, 256))
        assert res.mass == pytest.approx(1.0, abs=1e-8)

    def test_twist(self):
        t, f = 0.25, 0.7
        res = oscillator_fd_oracle(MAGNETIC, f, t)
        assert res.value == pytest.approx(mehler_kernel(MAGNETIC, f, t).real, abs=1e-6)

    def test_underresolved_grid_fails(self):
        with pytest.raises(ConvergenceError) as info:
            oscillator_fd_oracle(MAGNETIC, 0.0, 0.25, grid_sizes=(4, 6, 8), widths=(0.02, 0.01, 0.005))
        assert info.value.order < 1.5

    def test_input_validation(self):
        with pytest.raises(ValueError):
            oscillator_fd_oracle(np.eye(2), 0.0, 0.25)
        with pytest.raises(ValueError):
            oscillator_fd_oracle(MAGNETIC, 0.0, 0.01)


class TestRescaling:
    def test_constant_function(self):
        c = MultiVector.scalar(2, 3.0)
        r = getzler_rescale(lambda t, v: c, 0.04)
        assert r(1.0).isclose(c * 0.04)

    def test_identity_at_one(self):
        k = lambda t, v: flat_torus_heat_kernel(t, v, 0.7)
        assert getzler_rescale(k, 1.0)(0.3, (0.1, 0.2)).isclose(k(0.3, np.array([0.1, 0.2])))

    @pytest.mark.parametrize("i", [0, 1, 2])
    def test_monomial(self, i):
        blade = tuple(range(1, i + 1))
        alpha = lambda t, v: MultiVector(2, {blade: t * (1 + v[0])})
        u, t, v = 0.09, 0.5, np.array([0.4, 0.0])
        got = getzler_rescale(alpha, u)(t, v)
        want = alpha(u * t, math.sqrt(u) * v) * u ** ((2 - i) / 2)
        assert got.isclose(want, atol=1e-14)

    @given(st.floats(0.01, 1.0), st.floats(0.01, 1.0))
    @settings(max_examples=30, deadline=None)
    def test_group_action(self, u, w):
        alpha = lambda t, v: MultiVector(2, {(): t + v[0], (1,): t * v[1], (1, 2): t**2 + v[0] * v[1]})
        lhs = getzler_delta(getzler_delta(alpha, w), u)(0.7, (0.3, -0.5))
        rhs = getzler_delta(alpha, u * w)(0.7, (0.3, -0.5))
        assert lhs.isclose(rhs, atol=1e-9 * max(1.0, rhs.norm()))

    def test_u_range(self):
        with pytest.raises(ValueError):
            getzler_rescale(lambda t, v: MultiVector(2), 1.5)
        with pytest.raises(ValueError):
            getzler_delta(lambda t, v: MultiVector(2), 0.0)

    def test_torus_kernel_theta_sum(self):
        # at large t the kernel tends to the constant 1 (unit area)
        assert flat_torus_heat_kernel(5.0)[()] == pytest.approx(1.0, rel=1e-12)

    @pytest.mark.parametrize("f", [0.0, 1.0])
    def test_limit(self, f, tmp_path):
        tab = rescaled_limit_check(f)
        assert tab.final_error <= 1e-6
        assert tab.rate >= 0.5
        assert tab.target.isclose(MultiVector(2, {(): 1, (1, 2): -f}) * (1 / (4 * math.pi)))
        lines = tab.to_csv(tmp_path / "r.csv").read_text().splitlines()
        assert len(lines) == 1 + len(tab.u)

    def test_rate_for_twisted_kernel_is_quadratic(self):
        tab = rescaled_limit_check(1.0, np.logspace(-2, -3, 5))
        assert tab.rate == pytest.approx(2.0, abs=0.05)

    def test_rejects_increasing_u(self):
        with pytest.raises(ValueError):
            rescaled_limit_check(0.0, [0.001, 0.01])
