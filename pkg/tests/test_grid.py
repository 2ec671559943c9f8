from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ppshear.grid import (
    GridParams,
    c_factor_array,
    classify,
    coordinates,
    grid_point,
    kind_array,
    quadrant_of,
)
from oracles import pp_frequencies

sizes = st.sampled_from([4, 8, 16, 32])
rates = st.sampled_from([2, 4, 6, 8, 16])


class TestGridParams:
    def test_shape_and_m0(self):
        p = GridParams(8, 4)
        assert p.shape == (2, 33, 9)
        assert p.K == 16
        assert p.m0 == Fraction(2 * 33, 4)

    @pytest.mark.parametrize("N,R", [(6, 8), (2, 8), (8, 3), (8, 0), (0, 2), (8.0, 2)])
    def test_rejects_bad_sizes(self, N, R):
        with pytest.raises(ValueError):
            GridParams(N, R)

    def test_index(self):
        p = GridParams(4, 2)
        assert p.index(1, -4, -2) == (0, 0, 0)
        assert p.index(2, 4, 2) == (1, 8, 4)


class TestGridPoint:
    def test_sector_coordinates(self):
        p = GridParams(4, 2)
        a = grid_point(p, 1, 2, 1)
        assert (a.omega_x, a.omega_y) == (-1.0, 2.0)
        b = grid_point(p, 2, 2, 1)
        assert (b.omega_x, b.omega_y) == (2.0, -1.0)

    @pytest.mark.parametrize("args", [(3, 0, 0), (1, 5, 0), (1, 0, 3)])
    def test_out_of_range(self, args):
        with pytest.raises(IndexError):
            grid_point(GridParams(4, 2), *args)

    def test_classify(self):
        p = GridParams(8, 2)
        assert classify(p, grid_point(p, 1, 0, 3)).kind == "center"
        assert classify(p, grid_point(p, 1, 0, 3)).c_factor == pytest.approx(1 / math.sqrt(18))
        seam = classify(p, grid_point(p, 2, 3, -4))
        assert seam.kind == "seam" and seam.c_factor == pytest.approx(1 / math.sqrt(2))
        assert classify(p, grid_point(p, 2, 3, 1)).c_factor == 1.0

    def test_quadrants(self):
        p = GridParams(4, 2)
        assert quadrant_of(p, grid_point(p, 1, 1, 0)) == 11
        assert quadrant_of(p, grid_point(p, 1, -1, 0)) == 12
        assert quadrant_of(p, grid_point(p, 2, 1, 0)) == 21
        assert quadrant_of(p, grid_point(p, 2, -1, 0)) == 22
        assert quadrant_of(p, grid_point(p, 2, 0, 1)) == "center"


class TestArrays:
    @given(sizes, rates)
    def test_coordinates_match_direct(self, N, R):
        wx, wy = coordinates(GridParams(N, R))
        ox, oy = pp_frequencies(N, R)
        assert np.array_equal(wx, ox) and np.array_equal(wy, oy)

    @given(sizes, rates)
    def test_coordinates_match_grid_point(self, N, R):
        p = GridParams(N, R)
        wx, wy = coordinates(p)
        for s, k, l in [(1, p.K, -N // 2), (2, -1, 1), (1, 0, 0), (2, p.K - 1, N // 2)]:
            g = grid_point(p, s, k, l)
            assert wx[p.index(s, k, l)] == g.omega_x
            assert wy[p.index(s, k, l)] == g.omega_y

    @given(sizes, rates)
    def test_seams_coincide_across_sectors(self, N, R):
        # l = -N/2 is the diagonal wx = wy in both sectors
        wx, wy = coordinates(GridParams(N, R))
        assert np.array_equal(wx[0, :, 0], wx[1, :, 0])
        assert np.array_equal(wy[0, :, 0], wy[1, :, 0])
        assert np.array_equal(wx[0, :, 0], wy[0, :, 0])

    def test_kind_and_c_factor(self):
        p = GridParams(8, 2)
        kinds = kind_array(p)
        assert kinds[0, p.K, 3] == 2 and kinds[1, 0, 0] == 1 and kinds[1, 1, 1] == 0
        c = c_factor_array(p)
        assert c[0, p.K, 0] == pytest.approx(1 / math.sqrt(18))
        assert np.all(c > 0) and c.max() == 1.0
