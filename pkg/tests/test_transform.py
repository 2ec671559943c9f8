from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ppshear.grid import GridParams
from ppshear.ppft import ppft
from ppshear.shearlets import ShearletCoefficients, SubbandIndex, analyze
from ppshear.transform import (
    CGConfig,
    TransformPlan,
    adjoint_fdst,
    conjugate_gradient,
    fdst,
    inverse_fdst,
    make_plan,
    shear_coefficient_check,
    shear_grid,
)
from ppshear.weights import fit_weights, gram_apply


def _img(seed: int, N: int) -> np.ndarray:
    return np.random.default_rng(seed).standard_normal((N, N))


class TestPlan:
    def test_mismatched_weights(self):
        with pytest.raises(ValueError):
            make_plan(GridParams(8, 2), weights=fit_weights(GridParams(8, 4), 1))

    def test_mismatched_table(self, plan_for):
        a, b = plan_for(8, 2), plan_for(16, 2)
        with pytest.raises(ValueError):
            TransformPlan(a.params, a.weights, a.bank, b.table)


class TestForwardAdjoint:
    @settings(max_examples=10, deadline=None)
    @given(st.sampled_from([(8, 2), (16, 4), (16, 8)]), st.integers(0, 2**31))
    def test_adjoint_identity(self, plan_for, grid, seed):
        plan = plan_for(*grid)
        rng = np.random.default_rng(seed)
        N = plan.params.N
        x = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
        n = plan.table.coefficient_count()
        C = ShearletCoefficients.from_vector(plan.table, rng.standard_normal(n) + 1j * rng.standard_normal(n))
        gap = abs(C.vdot(fdst(plan, x)) - np.vdot(adjoint_fdst(plan, C), x))
        assert gap / (C.norm() * np.linalg.norm(x)) < 1e-11

    def test_frame_operator_is_weighted_gram(self, plan_for):
        # S* S = P* w P because the windowing is exactly tight
        plan = plan_for(16, 8)
        x = _img(1, 16)
        assert np.allclose(adjoint_fdst(plan, fdst(plan, x)), gram_apply(x, plan.weights), atol=1e-12)

    def test_norm_preserved_up_to_weight_defect(self, plan_for):
        plan = plan_for(32, 8)
        x = _img(2, 32)
        ratio = fdst(plan, x).norm() ** 2 / np.sum(x**2)
        assert abs(ratio - 1) < 0.05

    def test_zero_image(self, plan_for):
        plan = plan_for(8, 2)
        assert fdst(plan, np.zeros((8, 8))).norm() == 0.0

    def test_exact_weights_make_adjoint_the_inverse(self):
        plan = make_plan(GridParams(4, 16), choice=0)
        x = _img(3, 4)
        assert np.linalg.norm(adjoint_fdst(plan, fdst(plan, x)) - x) / np.linalg.norm(x) < 1e-8


class TestConjugateGradient:
    def _spd(self, n: int, seed: int) -> np.ndarray:
        rng = np.random.default_rng(seed)
        A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        return A.conj().T @ A + n * np.eye(n)

    def test_solves_hermitian_system(self):
        A = self._spd(12, 0)
        b = np.arange(12.0) + 1j
        res = conjugate_gradient(lambda x: A @ x, b, CGConfig(tol=1e-12, max_iter=100))
        assert res.converged and np.allclose(A @ res.image, b, atol=1e-10)
        assert res.iterations <= 13
        assert len(res.residuals) == res.iterations + 1

    def test_zero_iterations_returns_initial_guess(self):
        A = self._spd(5, 1)
        x0 = np.ones(5, dtype=complex)
        res = conjugate_gradient(lambda x: A @ x, np.zeros(5), CGConfig(max_iter=0, initial=x0))
        assert res.iterations == 0 and np.array_equal(res.image, x0) and not res.converged

    def test_relative_tolerance(self):
        A = self._spd(8, 2)
        b = 1e6 * np.ones(8)
        absolute = conjugate_gradient(lambda x: A @ x, b, CGConfig(tol=1e-3, max_iter=3))
        relative = conjugate_gradient(lambda x: A @ x, b, CGConfig(tol=1e-3, max_iter=50, relative=True))
        assert not absolute.converged
        assert relative.converged and relative.residual <= 1e-3 * np.linalg.norm(b)

    def test_zero_rhs(self):
        res = conjugate_gradient(lambda x: 2 * x, np.zeros(4), CGConfig())
        assert res.converged and res.iterations == 0 and not np.any(res.image)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            CGConfig(tol=0.0)
        with pytest.raises(ValueError):
            CGConfig(max_iter=-1)
        with pytest.raises(ValueError):
            conjugate_gradient(lambda x: x, np.ones(3), CGConfig(initial=np.ones(4)))

    def test_inverse_fdst(self, plan_for):
        plan = plan_for(32, 8)
        x = _img(4, 32)
        res = inverse_fdst(plan, fdst(plan, x), CGConfig(tol=1e-8))
        assert res.converged
        assert np.linalg.norm(res.image - x) / np.linalg.norm(x) < 1e-7
        assert all(b < a for a, b in zip(res.residuals, res.residuals[1:]))


class TestShear:
    def test_shear_grid_moves_columns(self):
        p = GridParams(8, 2)
        J = np.random.default_rng(0).standard_normal(p.shape) + 0j
        out = shear_grid(J, p, 0.5)  # shift by tN/2 = 2
        assert np.array_equal(out[0], J[0])
        assert np.array_equal(out[1, :, :-2], J[1, :, 2:]) and not np.any(out[1, :, -2:])
        back = shear_grid(J, p, -0.25)
        assert np.array_equal(back[1, :, 1:], J[1, :, :-1])

    def test_shear_grid_needs_integer_shift(self):
        with pytest.raises(ValueError):
            shear_grid(np.zeros(GridParams(8, 2).shape), GridParams(8, 2), 0.1)

    @pytest.mark.parametrize("j,s,t", [(1, 0, 0.5), (2, -1, 0.5), (2, 1, -0.5), (3, 0, 0.25), (0, 0, 0.0)])
    def test_covariance_is_exact(self, plan_for, j, s, t):
        plan = plan_for(64, 8)
        assert shear_coefficient_check(plan, _img(5, 64), j, s, t) < 1e-10

    @pytest.mark.parametrize("j,s,t", [(-1, 0, 0.0), (1, 0, 0.25), (1, 1, 0.5)])
    def test_covariance_rejects(self, plan_for, j, s, t):
        with pytest.raises(ValueError):
            shear_coefficient_check(plan_for(16, 8), _img(6, 16), j, s, t)

    def test_windowing_of_sheared_grid_differs_without_relabel(self, plan_for):
        # the check is not vacuous: unrelabelled shears do not match
        plan = plan_for(32, 8)
        J = ppft(_img(7, 32), plan.params)
        c = analyze(J, plan.table, plan.bank)
        ct = analyze(shear_grid(J, plan.params, 0.5), plan.table, plan.bank)
        a, b = ct[SubbandIndex(21, 1, 0)], c[SubbandIndex(21, 1, 0)]
        assert np.max(np.abs(a - b)) > 1e-3
