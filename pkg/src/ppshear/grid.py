"""Oversampled pseudo-polar frequency grid.

The grid has two sectors. Sector 1 holds the points

    (wx, wy) = (-(2k/R)(2l/N), 2k/R)

and sector 2 holds

    (wx, wy) = (2k/R, -(2k/R)(2l/N))

with radial index ``k`` in ``[-RN/2, RN/2]`` and angular index ``l`` in
``[-N/2, N/2]``. Values on the grid are stored as arrays of shape
``(2, R*N + 1, N + 1)`` where ``[s - 1, k + RN/2, l + N/2]`` addresses the
entry ``(sector=s, k, l)``. Repeated points (the origin and the two diagonals)
are kept as separate entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

import numpy as np
import numpy.typing as npt

__all__ = [
    "GridParams",
    "GridPoint",
    "PointClass",
    "grid_point",
    "classify",
    "quadrant_of",
    "coordinates",
    "kind_array",
    "c_factor_array",
]

Quadrant = Literal[11, 12, 21, 22, "center"]


@dataclass(frozen=True)
class GridParams:
    """Size parameters of the pseudo-polar grid.

    Parameters
    ----------
    N : int
        Image side length, a power of two with ``N >= 4``.
    R : int
        Radial oversampling rate, even and ``>= 2``.

    Attributes
    ----------
    m0 : Fraction
        Fourier denominator ``(2/R)(RN+1)``.
    """

    N: int
    R: int

    def __post_init__(self) -> None:
        N, R = self.N, self.R
        if not isinstance(N, (int, np.integer)) or N < 4 or N & (N - 1):
            raise ValueError(f"N must be a power of two >= 4, got {N!r}")
        if not isinstance(R, (int, np.integer)) or R < 2 or R % 2:
            raise ValueError(f"R must be an even integer >= 2, got {R!r}")

    @property
    def m0(self) -> Fraction:
        return Fraction(2 * (self.R * self.N + 1), self.R)

    @property
    def K(self) -> int:
        """Largest radial index ``RN/2``."""
        return self.R * self.N // 2

    @property
    def n_radial(self) -> int:
        return self.R * self.N + 1

    @property
    def n_angular(self) -> int:
        return self.N + 1

    @property
    def shape(self) -> tuple[int, int, int]:
        return (2, self.n_radial, self.n_angular)

    def index(self, sector: int, k: int, l: int) -> tuple[int, int, int]:
        """Array index of the entry ``(sector, k, l)``."""
        return (sector - 1, k + self.K, l + self.N // 2)


@dataclass(frozen=True)
class GridPoint:
    sector: int
    k: int
    l: int
    omega_x: float
    omega_y: float


@dataclass(frozen=True)
class PointClass:
    kind: Literal["interior", "seam", "center"]
    c_factor: float


def grid_point(params: GridParams, sector: int, k: int, l: int) -> GridPoint:
    """Return the frequency coordinates of the entry ``(sector, k, l)``.

    Raises
    ------
    IndexError
        If ``sector``, ``k`` or ``l`` is out of range.
    """
    if sector not in (1, 2):
        raise IndexError(f"sector must be 1 or 2, got {sector}")
    if abs(k) > params.K:
        raise IndexError(f"k={k} outside [-{params.K}, {params.K}]")
    if abs(l) > params.N // 2:
        raise IndexError(f"l={l} outside [-{params.N // 2}, {params.N // 2}]")
    radial = 2.0 * k / params.R
    angular = -radial * (2.0 * l / params.N)
    if sector == 1:
        wx, wy = angular, radial
    else:
        wx, wy = radial, angular
    # avoid -0.0 so that equality tests on coordinates are sign-agnostic
    return GridPoint(sector, k, l, wx + 0.0, wy + 0.0)


def classify(params: GridParams, p: GridPoint) -> PointClass:
    """Classify a grid point as interior, seam or center and return its C factor."""
    if p.k == 0:
        return PointClass("center", 1.0 / math.sqrt(2 * (params.N + 1)))
    if abs(p.l) == params.N // 2:
        return PointClass("seam", 1.0 / math.sqrt(2.0))
    return PointClass("interior", 1.0)


def quadrant_of(params: GridParams, p: GridPoint) -> Quadrant:
    """Return the quarter-cone label 11, 12, 21, 22 or ``"center"``."""
    if p.k == 0:
        return "center"
    return 10 * p.sector + (1 if p.k > 0 else 2)


def coordinates(params: GridParams) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """Return ``(wx, wy)`` arrays of shape ``params.shape`` for every entry."""
    K, h = params.K, params.N // 2
    k = np.arange(-K, K + 1, dtype=float)[:, None]
    l = np.arange(-h, h + 1, dtype=float)[None, :]
    radial = np.broadcast_to(2.0 * k / params.R, (k.size, l.size))
    angular = -(2.0 * k / params.R) * (2.0 * l / params.N) + 0.0
    wx = np.stack([angular, radial])
    wy = np.stack([radial, angular])
    return wx, wy


def kind_array(params: GridParams) -> npt.NDArray[np.int8]:
    """Entry classification: 0 interior, 1 seam, 2 center."""
    kinds = np.zeros(params.shape, dtype=np.int8)
    kinds[:, :, 0] = 1
    kinds[:, :, -1] = 1
    kinds[:, params.K, :] = 2
    return kinds


def c_factor_array(params: GridParams) -> npt.NDArray[np.float64]:
    """C factor of every entry (1, 1/sqrt(2) on the diagonals, 1/sqrt(2(N+1)) at the origin)."""
    table = np.array([1.0, 1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2 * (params.N + 1))])
    return table[kind_array(params)]
