from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ppshear.grid import GridParams, c_factor_array
from ppshear.images import RNGSpec, random_images
from ppshear.weights import (
    CHOICES,
    apply_weight,
    condition_residual,
    condition_residual_direct,
    expand_quarter,
    fit_weights,
    gram_apply,
    gram_extreme_eigenvalues,
    gram_kernel,
    isometry_defect,
    quarter_of,
    uniform_weights,
    weight_basis,
)
from oracles import gram_defect, ppft_matrix


class TestBasis:
    @pytest.mark.parametrize("choice,count", [(1, 7), (2, 5)])
    def test_fixed_sizes(self, choice, count):
        assert len(weight_basis(GridParams(16, 8), choice)) == count

    def test_choice3_has_one_ramp_per_line(self):
        p = GridParams(16, 8)
        b = weight_basis(p, 3)
        assert len(b) == p.N // 2 + 2
        ramp = b.quarters[2]  # line |l| = 1
        assert ramp[5, 1] == 5.0 and ramp[5, 2] == 0.0
        # end rings copy the nearest covered ring
        assert ramp[1, 1] == ramp[2, 1] and ramp[p.K, 1] == ramp[p.K - 1, 1]

    def test_choice0_is_per_orbit(self):
        p = GridParams(4, 2)
        assert len(weight_basis(p, 0)) == p.K * (p.N // 2 + 1) + 1

    def test_basis_sum_nonzero(self):
        for choice in (1, 2, 3):
            b = weight_basis(GridParams(8, 4), choice)
            assert np.all(b.quarters.sum(axis=0) > 0)

    def test_unknown_choice(self):
        with pytest.raises(ValueError):
            weight_basis(GridParams(8, 2), 9)


class TestQuarter:
    @given(st.sampled_from([4, 8, 16]), st.sampled_from([2, 4, 8]), st.integers(0, 2**31))
    def test_round_trip(self, N, R, seed):
        p = GridParams(N, R)
        q = np.random.default_rng(seed).uniform(0, 1, (p.K + 1, N // 2 + 1))
        q[0] = q[0, 0]
        assert np.allclose(quarter_of(p, expand_quarter(p, q)), q, rtol=1e-13)

    def test_entries_share_point_weight(self):
        # the 2(N+1) origin copies carry C^2 = 1/(2(N+1)) of the point weight each
        p = GridParams(8, 2)
        q = np.ones((p.K + 1, 5))
        v = expand_quarter(p, q)
        assert v[:, p.K, :].sum() == pytest.approx(1.0)
        assert np.allclose(v, c_factor_array(p) ** 2)

    def test_bad_shape(self):
        with pytest.raises(ValueError):
            expand_quarter(GridParams(8, 2), np.ones((3, 3)))


class TestConditionResidual:
    @pytest.mark.parametrize("N,R,choice", [(4, 2, 1), (8, 4, 2), (8, 8, 3)])
    def test_fast_matches_direct(self, N, R, choice):
        p = GridParams(N, R)
        w = fit_weights(p, choice)
        assert np.allclose(condition_residual(p, w), condition_residual_direct(p, w.values), atol=1e-10)

    def test_uniform_residual_is_direct_norm(self):
        p = GridParams(4, 2)
        w = uniform_weights(p, 0.01)
        assert w.residual_norm == pytest.approx(np.linalg.norm(condition_residual_direct(p, w.values)))

    @pytest.mark.parametrize("N,R", [(4, 2), (8, 2)])
    def test_gram_kernel_matches_matrix(self, N, R):
        p = GridParams(N, R)
        w = fit_weights(p, 1)
        P = ppft_matrix(N, R)
        G = (P.conj().T @ (w.values.ravel()[:, None] * P)).reshape(N, N, N, N)
        ker = gram_kernel(p, w)
        for x in [(0, 0), (1, 3), (N - 1, 2)]:
            for y in [(0, 0), (2, 1), (N - 1, N - 1)]:
                d = (x[0] - y[0] + N - 1, x[1] - y[1] + N - 1)
                assert G[x + y] == pytest.approx(ker[d], abs=1e-10)


class TestFit:
    def test_exact_regime(self):
        p = GridParams(4, 16)
        w = fit_weights(p, 0)
        assert w.residual_norm < 1e-8
        assert gram_defect(4, 16, w.values) < 1e-8

    @pytest.mark.parametrize("choice", [1, 2, 3])
    def test_coefficients_nonnegative(self, choice):
        w = fit_weights(GridParams(16, 8), choice)
        assert np.all(w.coeffs >= 0) and np.all(w.values >= 0)
        assert w.choice == choice

    def test_fit_beats_uniform(self):
        p = GridParams(16, 8)
        w = fit_weights(p, 1)
        best_uniform = min(uniform_weights(p, c).residual_norm for c in np.geomspace(1e-6, 1e-2, 9))
        assert w.residual_norm < best_uniform

    def test_deterministic(self):
        p = GridParams(16, 8)
        a, b = fit_weights(p, 2), fit_weights(p, 2)
        assert np.array_equal(a.values, b.values) and np.array_equal(a.coeffs, b.coeffs)

    def test_choices_listed(self):
        assert CHOICES == (0, 1, 2, 3)


class TestGram:
    def test_zero_weights_defect_is_one(self):
        p = GridParams(8, 2)
        w = uniform_weights(p, 0.0)
        assert isometry_defect(w, random_images(RNGSpec(0), (8, 8), 2)) == [1.0, 1.0]

    def test_apply_weight_powers(self):
        p = GridParams(4, 2)
        w = fit_weights(p, 1)
        J = np.ones(p.shape)
        assert np.allclose(apply_weight(apply_weight(J, w, 0.5), w, 0.5), apply_weight(J, w, 1))
        assert np.allclose(apply_weight(J, w, 2), w.values**2)
        with pytest.raises(ValueError):
            apply_weight(np.ones((2, 3, 3)), w)

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 2**31))
    def test_gram_is_self_adjoint_and_positive(self, seed):
        w = fit_weights(GridParams(8, 4), 1)
        rng = np.random.default_rng(seed)
        x, y = rng.standard_normal((2, 8, 8)) + 1j * rng.standard_normal((2, 8, 8))
        assert abs(np.vdot(y, gram_apply(x, w)) - np.vdot(gram_apply(y, w), x)) < 1e-10 * 64
        assert np.vdot(x, gram_apply(x, w)).real > 0

    def test_extreme_eigenvalues_match_dense(self):
        p = GridParams(8, 4)
        w = fit_weights(p, 1)
        P = ppft_matrix(8, 4)
        ev = np.linalg.eigvalsh(P.conj().T @ (w.values.ravel()[:, None] * P))
        lo, hi, ok = gram_extreme_eigenvalues(w, 1e-12)
        assert ok
        assert lo == pytest.approx(ev[0], rel=1e-8) and hi == pytest.approx(ev[-1], rel=1e-8)
