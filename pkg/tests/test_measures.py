from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ppshear.images import RNGSpec
from ppshear.measures import (
    MEASURES,
    MeasureReport,
    aligned_mask,
    decay_rate,
    hard_threshold,
    holder_exponents,
    keep_largest,
    loglog_slope,
    measure_d1,
    measure_d2,
    measure_d3,
    measure_d4,
    measure_d5,
    measure_d6,
    measure_d7,
    measure_d8,
    quantize,
    reference_shearlet,
    reports_to_csv,
)
from ppshear.shearlets import ShearletCoefficients, SubbandIndex
from ppshear.transform import CGConfig, TransformPlan
from ppshear.weights import uniform_weights
from oracles import power_law


class TestEstimators:
    @given(st.floats(-3, 3), st.floats(-5, 5))
    def test_slope_of_line(self, a, b):
        x = np.arange(6.0)
        assert loglog_slope(x, a * x + b) == pytest.approx(a, abs=1e-9)

    @given(st.floats(-4.0, -0.1), st.integers(8, 300))
    def test_decay_of_power_law(self, rate, n):
        d, degenerate = decay_rate(power_law(n, rate))
        assert not degenerate and d == pytest.approx(rate, rel=1e-9)

    def test_decay_uses_majorant(self):
        # a dip that later recovers does not change the rate of the envelope
        p = power_law(50, -2.0)
        q = p.copy()
        q[10] = 0.0
        assert decay_rate(q)[0] == pytest.approx(decay_rate(p)[0], abs=0.05)

    def test_constant_profile_is_degenerate(self):
        assert decay_rate(np.ones(10)) == (0.0, True)

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 1.7])
    def test_holder_at_cone_tip(self, alpha):
        u = np.arange(-8, 9, dtype=float)
        r = np.hypot(u[:, None], u[None, :])
        h = holder_exponents(r**alpha)
        assert h[8, 8] == pytest.approx(alpha, abs=1e-12)

    def test_holder_of_constant_is_zero(self):
        assert np.allclose(holder_exponents(np.ones((6, 6))), 0.0, atol=1e-9)


class TestReports:
    def test_csv_layout(self):
        r = MeasureReport("d9", "M_x", [(1.0, 0.5), (2.0, 0.25)], {"N": 8, "R": 2, "choice": 1, "seed": 3, "runtime": 9})
        text = r.to_csv()
        assert text == "# measure,id,N,R,choice,seed\n# d9,M_x,8,2,1,3\nabscissa,ordinate\n1.0,0.5\n2.0,0.25\n"
        assert r.ordinates == [0.5, 0.25]
        with pytest.raises(ValueError):
            r.value
        assert list(reports_to_csv([r])) == ["d9_M_x.csv"]

    def test_measure_ids(self):
        assert MEASURES == ("d1", "d2", "d3", "d4", "d5", "d6", "d7", "d8")


class TestSelection:
    def _coeffs(self, plan_for) -> ShearletCoefficients:
        plan = plan_for(8, 2)
        n = plan.table.coefficient_count()
        return ShearletCoefficients.from_vector(plan.table, np.arange(1, n + 1) * (1 + 1j))

    def test_keep_largest(self, plan_for):
        C = self._coeffs(plan_for)
        v = keep_largest(C, 0.25).to_vector()
        n = v.size
        assert np.count_nonzero(v) == round(0.25 * n)
        assert np.all(v[n - round(0.25 * n):] != 0)

    def test_hard_threshold(self, plan_for):
        C = self._coeffs(plan_for)
        v = hard_threshold(C, 10 * np.sqrt(2)).to_vector()
        assert np.count_nonzero(v) == v.size - 9

    def test_quantize(self, plan_for):
        C = self._coeffs(plan_for).map(lambda a: a * 0.3)
        q = quantize(C, 0.5).to_vector()
        assert np.all(np.mod(q.real, 0.5) == 0) and np.all(np.abs(q - C.to_vector()) <= np.sqrt(2) * 0.25 + 1e-12)


class TestMeasures:
    def test_d1_machine_precision(self, plan_for):
        (r,) = measure_d1(plan_for(32, 8), RNGSpec(0))
        assert r.id == "M_alg" and r.value < 1e-12

    def test_d2_zero_weights(self, plan_for):
        p = plan_for(8, 2)
        plan = TransformPlan(p.params, uniform_weights(p.params, 0.0), p.bank, p.table)
        r = {x.id: x for x in measure_d2(plan, RNGSpec(0))}
        assert r["M_isom1"].value == 1.0 and r["M_isom3"].value == 1.0
        assert not r["M_isom2"].metadata["eig_converged"]

    def test_d2_and_d3_agree(self, plan_for):
        plan = plan_for(32, 8)
        d2 = {r.id: r for r in measure_d2(plan, RNGSpec(0), CGConfig())}
        d3 = {r.id: r for r in measure_d3(plan, RNGSpec(0), CGConfig())}
        assert d2["M_isom2"].metadata["eig_converged"]
        assert 1.0 < d2["M_isom2"].value < 2.0
        assert d2["M_isom_mean"].value <= d2["M_isom1"].value
        # S*S = P*wP, so both tightness defects equal the isometry defect
        assert d3["M_tight1"].value == pytest.approx(d2["M_isom1"].value, rel=1e-9)
        assert d3["M_tight2"].value < 1e-6 and d2["M_isom3"].value < 1e-6

    def test_d4(self, plan_for):
        plan = plan_for(32, 8)
        img = reference_shearlet(plan, 3)
        assert np.linalg.norm(img) > 0
        r = {x.id: x.value for x in measure_d4(plan, 3)}
        assert r["M_decay1"] < 0 and r["M_decay2"] < 0
        assert 0 <= r["M_supp"] < 1e-3
        assert np.isfinite(r["M_smooth1"]) and np.isfinite(r["M_smooth2"])
        with pytest.raises(ValueError):
            reference_shearlet(plan, 9)

    def test_d5(self, plan_for):
        (r,) = measure_d5(plan_for(64, 8), 0.5, (1, 2, 3))
        assert [x for x, _ in r.points] == [1.0, 2.0, 3.0]
        assert all(0 <= y < 1 for y in r.ordinates)
        with pytest.raises(ValueError):
            measure_d5(plan_for(64, 8), 0.3, (1,))

    def test_d6(self, plan_for):
        reports = {r.id: r for r in measure_d6(lambda N: plan_for(N, 8), (5, 6), RNGSpec(0), repeats=1)}
        assert set(reports) == {"M_speed1", "M_speed2", "M_speed3", "seconds"}
        assert reports["M_speed1"].value > 0 and len(reports["seconds"].points) == 2

    def test_d7(self, plan_for):
        r = {x.id: x for x in measure_d7(plan_for(64, 8))}
        assert r["M_geo2"].value < r["M_geo1"].value
        assert len(r["aligned_max"].points) == len(r["nonaligned_max"].points) == 5

    def test_aligned_mask_horizontal_line(self, plan_for):
        plan = plan_for(32, 8)
        m = aligned_mask(plan, 0.0)
        assert m[SubbandIndex(11, 2, 0)] and m[SubbandIndex(12, 2, 0)]
        assert not m[SubbandIndex(11, 2, 1)] and not m[SubbandIndex(21, 2, 0)]
        d = aligned_mask(plan, 1.0)
        assert d[SubbandIndex(11, 1, 2)] and d[SubbandIndex(21, 1, 2)]

    def test_d8_monotone(self, plan_for):
        r = {x.id: x for x in measure_d8(plan_for(32, 8), cg=CGConfig(tol=1e-8))}
        t1 = r["M_thres1"].ordinates
        assert all(a <= b for a, b in zip(t1, t1[1:]))
        q = r["M_quant"].ordinates
        assert all(a <= b for a, b in zip(q, q[1:]))

    def test_reports_are_deterministic(self, plan_for):
        plan = plan_for(32, 8)
        a = reports_to_csv(measure_d2(plan, RNGSpec(7)) + measure_d5(plan, 0.5, (1, 2)))
        b = reports_to_csv(measure_d2(plan, RNGSpec(7)) + measure_d5(plan, 0.5, (1, 2)))
        assert a == b
