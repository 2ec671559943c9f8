"""Digital shearlet windows on the pseudo-polar grid.

A subband is addressed by ``(iota, j, s)`` where ``iota`` is one of the cones
11, 12 (sector 1, ``k > 0`` and ``k < 0``) and 21, 22 (sector 2), ``j`` the
scale and ``s`` the shear. Each subband owns a rectangle of ``|k|`` and ``l``
indices on its cone. Row ``n1`` of a block corresponds to ``|k| = k_min + n1``
(so ``k = -(k_min + n1)`` on the cones 12 and 22) and column ``n2`` to
``l = l_min + n2``.

The low-frequency part is one ``3 x (N+1)`` block per sector covering
``k in {-1, 0, 1}`` and every ``l``.

Windows are stored without the boundary factor ``C``. The factor enters the
weighted transform through the weights (see :func:`ppshear.weights.expand_quarter`),
which makes the windowing operator ``W`` satisfy ``W* W = Id`` entry by entry on
pseudo-polar arrays. :func:`shearlet_window` returns the atom window including
``C``.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterator
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import numpy.typing as npt
import scipy.fft as sfft

from .frft import fft2_unaliased, ifft2_unaliased
from .grid import GridParams, c_factor_array

__all__ = [
    "PROFILES",
    "WindowBank",
    "build_window_bank",
    "SubbandIndex",
    "SubbandBlock",
    "SubbandTable",
    "scale_shear_table",
    "lowest_scale",
    "highest_scale",
    "ShearletCoefficients",
    "window_values",
    "low_window_values",
    "shearlet_window",
    "shearlet_atom",
    "analyze",
    "synthesize",
    "window_energy",
    "partition_of_unity",
    "CONES",
]

CONES = (11, 12, 21, 22)
PROFILES = ("c1", "c3", "cinf")


def _nu_c1(x: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    return np.where(x <= 0.5, 2.0 * x * x, 1.0 - 2.0 * (1.0 - x) ** 2)


def _nu_c3(x: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    return x**4 * (35.0 - 84.0 * x + 70.0 * x**2 - 20.0 * x**3)


def _nu_cinf(x: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        b = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return a / (a + b)


_NU: dict[str, Callable[[npt.NDArray[np.float64]], npt.NDArray[np.float64]]] = {
    "c1": _nu_c1,
    "c3": _nu_c3,
    "cinf": _nu_cinf,
}


@dataclass(frozen=True)
class WindowBank:
    """Meyer-type radial profiles and angular bumps.

    Parameters
    ----------
    profile : str
        Smoothness profile of ``nu``: ``"c1"`` (piecewise quadratic, the
        default), ``"c3"`` (degree-7 polynomial) or ``"cinf"``.

    Notes
    -----
    ``W0`` and ``W`` are the Meyer scaling and wavelet profiles, so that
    ``W0(xi)^2 + W(xi)^2 = 1`` for ``|xi| <= 1`` and ``W(xi)^2 = W0(xi/4)^2 - W0(xi)^2``.
    The angular bump is ``V(xi) = sqrt(nu(1 - |xi|))``, supported on ``[-1, 1]``
    with ``V(+-1) = 0`` and ``sum_s V(x - s)^2 = 1``. ``V0`` equals one on
    ``[-1, 1]`` and vanishes outside ``[-3/2, 3/2]``.
    """

    profile: str = "c1"

    def __post_init__(self) -> None:
        if self.profile not in _NU:
            raise ValueError(f"unknown window profile {self.profile!r}; expected one of {PROFILES}")

    def nu(self, x: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """Smooth step: 0 for ``x <= 0``, 1 for ``x >= 1``, ``nu(x) + nu(1-x) = 1``."""
        t = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        return _NU[self.profile](t)

    def W0(self, xi: npt.ArrayLike) -> npt.NDArray[np.float64]:
        a = np.abs(np.asarray(xi, dtype=float))
        mid = np.cos(0.5 * np.pi * self.nu(4.0 / 3.0 * a - 1.0 / 3.0))
        return np.where(a <= 0.25, 1.0, np.where(a <= 1.0, mid, 0.0))

    def W(self, xi: npt.ArrayLike) -> npt.NDArray[np.float64]:
        a = np.abs(np.asarray(xi, dtype=float))
        inner = np.sin(0.5 * np.pi * self.nu(4.0 / 3.0 * a - 1.0 / 3.0))
        outer = np.cos(0.5 * np.pi * self.nu(a / 3.0 - 1.0 / 3.0))
        return np.where((a >= 0.25) & (a <= 1.0), inner, np.where((a > 1.0) & (a <= 4.0), outer, 0.0))

    def V(self, xi: npt.ArrayLike) -> npt.NDArray[np.float64]:
        a = np.abs(np.asarray(xi, dtype=float))
        return np.where(a <= 1.0, np.sqrt(self.nu(1.0 - a)), 0.0)

    def V0(self, xi: npt.ArrayLike) -> npt.NDArray[np.float64]:
        a = np.abs(np.asarray(xi, dtype=float))
        edge = np.cos(0.5 * np.pi * self.nu(2.0 * a - 2.0))
        return np.where(a <= 1.0, 1.0, np.where(a <= 1.5, edge, 0.0))


def build_window_bank(profile: str = "c1") -> WindowBank:
    """Return the window bank for a smoothness profile id."""
    return WindowBank(profile)


def lowest_scale(R: int) -> int:
    """``j_L = -ceil(log4(R/2))``, computed in exact integer arithmetic."""
    j, p = 0, 1
    while 2 * p < R:  # smallest j with 4^j >= R/2
        p *= 4
        j += 1
    return -j


def highest_scale(N: int) -> int:
    """``j_H = ceil(log4(N))``."""
    j, p = 0, 1
    while p < N:
        p *= 4
        j += 1
    return j


@dataclass(frozen=True, order=True)
class SubbandIndex:
    """Cone ``iota`` (11, 12, 21, 22, or 1, 2 for the low-frequency blocks), scale ``j`` and shear ``s``."""

    iota: int
    j: int
    s: int

    @property
    def is_low(self) -> bool:
        return self.iota in (1, 2)

    @property
    def sector(self) -> int:
        return self.iota if self.is_low else self.iota // 10

    @property
    def sign(self) -> int:
        """Sign of ``k`` on the cone (``0`` for low-frequency blocks)."""
        if self.is_low:
            return 0
        return 1 if self.iota % 10 == 1 else -1


@dataclass(frozen=True)
class SubbandBlock:
    """Index rectangle of one subband.

    ``k_range`` holds the inclusive range of ``|k|`` and ``l_range`` the
    inclusive range of ``l``. For low-frequency blocks ``k_range = (-1, 1)``.
    """

    index: SubbandIndex
    k_range: tuple[int, int]
    l_range: tuple[int, int]

    @property
    def L1(self) -> int:
        return self.k_range[1] - self.k_range[0] + 1

    @property
    def L2(self) -> int:
        return self.l_range[1] - self.l_range[0] + 1

    @property
    def shape(self) -> tuple[int, int]:
        return (self.L1, self.L2)

    @property
    def size(self) -> int:
        return self.L1 * self.L2

    def rows(self, params: GridParams) -> slice:
        """Radial slice into axis 1 of a pseudo-polar array, ordered by block row."""
        K = params.K
        a, b = self.k_range
        if self.index.is_low:
            return slice(K - 1, K + 2)
        if self.index.sign > 0:
            return slice(K + a, K + b + 1)
        stop = K - b - 1
        return slice(K - a, stop if stop >= 0 else None, -1)

    def cols(self, params: GridParams) -> slice:
        h = params.N // 2
        return slice(self.l_range[0] + h, self.l_range[1] + h + 1)


def _radial_range(params: GridParams, j: int, jL: int, jH: int) -> tuple[int, int]:
    half_r = Fraction(params.R, 2)
    lo = Fraction(4) ** (j - 1) * half_r
    hi = Fraction(4) ** (j + 1) * half_r
    k_min = 1 if j == jL else max(1, math.ceil(lo))
    k_max = params.K if j == jH else min(params.K, math.floor(hi))
    return k_min, k_max


def _angular_range(params: GridParams, j: int, s: int) -> tuple[int, int]:
    h = params.N // 2
    if j < 0:
        return -h, h
    step = params.N >> (j + 1)  # 2^{-j-1} N
    return max(-h, step * (s - 1)), min(h, step * (s + 1))


@dataclass(frozen=True)
class SubbandTable:
    """All subband rectangles of a grid.

    Attributes
    ----------
    params : GridParams
    j_low, j_high : int
        Lowest and highest scale.
    low : tuple of SubbandBlock
        The two low-frequency blocks (sectors 1 and 2).
    bands : tuple of SubbandBlock
        Subbands ordered by cone, scale and shear.
    """

    params: GridParams
    j_low: int
    j_high: int
    low: tuple[SubbandBlock, SubbandBlock]
    bands: tuple[SubbandBlock, ...]
    _lookup: dict[SubbandIndex, SubbandBlock] = field(repr=False, compare=False, default_factory=dict)

    def __post_init__(self) -> None:
        self._lookup.update({b.index: b for b in self.low + self.bands})

    def __getitem__(self, index: SubbandIndex) -> SubbandBlock:
        try:
            return self._lookup[index]
        except KeyError:
            raise KeyError(f"subband {index} is not part of the table") from None

    def __contains__(self, index: object) -> bool:
        return index in self._lookup

    def scales(self) -> range:
        return range(self.j_low, self.j_high + 1)

    def shears(self, j: int) -> range:
        return range(0, 1) if j < 0 else range(-(2**j), 2**j + 1)

    def blocks(self) -> Iterator[SubbandBlock]:
        yield from self.low
        yield from self.bands

    def coefficient_count(self) -> int:
        return sum(b.size for b in self.blocks())


def scale_shear_table(params: GridParams) -> SubbandTable:
    """Enumerate every subband with its index rectangle.

    Scales run from ``j_L = -ceil(log4(R/2))`` to ``j_H = ceil(log4(N))``. A
    scale ``j`` covers ``4^(j-1) R/2 <= |k| <= 4^(j+1) R/2`` clipped to
    ``[1, RN/2]``; the lowest scale starts at ``|k| = 1`` and the highest runs
    to ``RN/2``. For ``j >= 0`` the shear ``s`` covers
    ``2^(-j-1) N (s-1) <= l <= 2^(-j-1) N (s+1)`` clipped to ``[-N/2, N/2]``;
    negative scales have the single shear 0 covering every ``l``.
    """
    jL, jH = lowest_scale(params.R), highest_scale(params.N)
    h = params.N // 2
    low = (
        SubbandBlock(SubbandIndex(1, jL - 1, 0), (-1, 1), (-h, h)),
        SubbandBlock(SubbandIndex(2, jL - 1, 0), (-1, 1), (-h, h)),
    )
    bands = []
    for iota in CONES:
        for j in range(jL, jH + 1):
            kr = _radial_range(params, j, jL, jH)
            shears = [0] if j < 0 else range(-(2**j), 2**j + 1)
            for s in shears:
                bands.append(SubbandBlock(SubbandIndex(iota, j, s), kr, _angular_range(params, j, s)))
    return SubbandTable(params, jL, jH, low, tuple(bands))


def window_values(params: GridParams, bank: WindowBank, block: SubbandBlock) -> npt.NDArray[np.float64]:
    """Real window samples on a block (boundary factor excluded).

    Subbands use ``W(4^-j 2|k|/R) V^j(s - 2^(j+1) l/N)``; the low-frequency
    blocks use ``W0(4^-jL 2|k|/R) V0(4^-jL (2|k|/R)(2l/N))``.
    """
    idx = block.index
    l = np.arange(block.l_range[0], block.l_range[1] + 1, dtype=float)
    if idx.is_low:
        return low_window_values(params, bank, idx.j + 1)
    k = np.arange(block.k_range[0], block.k_range[1] + 1, dtype=float)
    radial = bank.W(4.0 ** (-idx.j) * 2.0 * k / params.R)
    if idx.j < 0:
        angular = bank.V0(np.zeros_like(l))
    else:
        angular = bank.V(idx.s - 2.0 ** (idx.j + 1) * l / params.N)
    return radial[:, None] * angular[None, :]


def low_window_values(params: GridParams, bank: WindowBank, j_low: int) -> npt.NDArray[np.float64]:
    """Low-frequency window on the ``3 x (N+1)`` block ``k = -1..1``."""
    h = params.N // 2
    k = np.array([-1.0, 0.0, 1.0])
    l = np.arange(-h, h + 1, dtype=float)
    scale = 4.0 ** (-j_low)
    radial = scale * 2.0 * np.abs(k) / params.R
    angular = radial[:, None] * (2.0 * l[None, :] / params.N)
    return bank.W0(radial)[:, None] * bank.V0(angular)


def _c_block(params: GridParams, block: SubbandBlock) -> npt.NDArray[np.float64]:
    c = c_factor_array(params)[block.index.sector - 1]
    return c[block.rows(params), block.cols(params)]


def shearlet_window(params: GridParams, bank: WindowBank, table: SubbandTable, index: SubbandIndex) -> npt.NDArray[np.float64]:
    """Atom window at position zero: ``C`` times the window samples of a block.

    Raises
    ------
    KeyError
        If ``index`` is not in ``table``.
    """
    block = table[index]
    return _c_block(params, block) * window_values(params, bank, block)


def shearlet_atom(
    params: GridParams,
    bank: WindowBank,
    table: SubbandTable,
    index: SubbandIndex,
    m: tuple[int, int],
    with_c: bool = False,
) -> npt.NDArray[np.complex128]:
    """Direct evaluation of one atom on the full pseudo-polar grid.

    The subband atom is ``w(k, l) exp(-2 pi i (m1 n1 / L1 + m2 n2 / L2)) / sqrt(L1 L2)``
    with block-relative indices ``(n1, n2)``; the low-frequency atom is
    ``w(k, l) exp(-2 pi i (m1 k / 3 + m2 l / (N+1))) / sqrt(3 (N+1))`` with
    centered ``m``. With ``with_c`` the boundary factor ``C`` is included.
    """
    block = table[index]
    out = np.zeros(params.shape, dtype=np.complex128)
    w = window_values(params, bank, block)
    if with_c:
        w = w * _c_block(params, block)
    L1, L2 = block.shape
    if index.is_low:
        n1 = np.arange(-1, 2)[:, None]
        n2 = np.arange(-(params.N // 2), params.N // 2 + 1)[None, :]
    else:
        n1 = np.arange(L1)[:, None]
        n2 = np.arange(L2)[None, :]
    phase = np.exp(-2j * np.pi * (m[0] * n1 / L1 + m[1] * n2 / L2))
    out[index.sector - 1, block.rows(params), block.cols(params)] = w * phase / math.sqrt(L1 * L2)
    return out


class ShearletCoefficients:
    """Block-structured shearlet coefficients.

    Parameters
    ----------
    table : SubbandTable
        Geometry the blocks follow.
    blocks : dict, optional
        Map from :class:`SubbandIndex` to complex arrays of the block shape.
        Missing blocks are zero-filled.
    """

    def __init__(self, table: SubbandTable, blocks: dict[SubbandIndex, npt.NDArray[np.complex128]] | None = None):
        self.table = table
        self.blocks: dict[SubbandIndex, npt.NDArray[np.complex128]] = {}
        given = blocks or {}
        for b in table.blocks():
            arr = given.get(b.index)
            if arr is None:
                arr = np.zeros(b.shape, dtype=np.complex128)
            else:
                arr = np.asarray(arr, dtype=np.complex128)
                if arr.shape != b.shape:
                    raise ValueError(f"block {b.index} has shape {arr.shape}, expected {b.shape}")
            self.blocks[b.index] = arr
        extra = set(given) - set(self.blocks)
        if extra:
            raise ValueError(f"blocks {sorted(extra)} are not part of the table")

    @property
    def params(self) -> GridParams:
        return self.table.params

    def __getitem__(self, index: SubbandIndex) -> npt.NDArray[np.complex128]:
        return self.blocks[index]

    def __iter__(self) -> Iterator[SubbandIndex]:
        return iter(self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    @classmethod
    def zeros(cls, table: SubbandTable) -> ShearletCoefficients:
        return cls(table)

    def to_vector(self) -> npt.NDArray[np.complex128]:
        """All coefficients concatenated in table order."""
        return np.concatenate([a.ravel() for a in self.blocks.values()])

    @classmethod
    def from_vector(cls, table: SubbandTable, vec: npt.ArrayLike) -> ShearletCoefficients:
        v = np.asarray(vec, dtype=np.complex128)
        if v.size != table.coefficient_count():
            raise ValueError(f"vector has {v.size} entries, expected {table.coefficient_count()}")
        out, pos = {}, 0
        for b in table.blocks():
            out[b.index] = v[pos : pos + b.size].reshape(b.shape)
            pos += b.size
        return cls(table, out)

    def map(self, fn: Callable[[npt.NDArray[np.complex128]], npt.NDArray[np.complex128]]) -> ShearletCoefficients:
        return ShearletCoefficients(self.table, {k: fn(v) for k, v in self.blocks.items()})

    def norm(self) -> float:
        return float(np.sqrt(sum(np.vdot(a, a).real for a in self.blocks.values())))

    def vdot(self, other: ShearletCoefficients) -> complex:
        """``sum conj(self) * other`` over every block."""
        return complex(sum(np.vdot(self.blocks[k], other.blocks[k]) for k in self.blocks))

    def __add__(self, other: ShearletCoefficients) -> ShearletCoefficients:
        return ShearletCoefficients(self.table, {k: v + other.blocks[k] for k, v in self.blocks.items()})

    def __sub__(self, other: ShearletCoefficients) -> ShearletCoefficients:
        return ShearletCoefficients(self.table, {k: v - other.blocks[k] for k, v in self.blocks.items()})

    def __mul__(self, a: complex) -> ShearletCoefficients:
        return self.map(lambda v: a * v)

    __rmul__ = __mul__


def _check_grid(J: npt.ArrayLike, params: GridParams) -> npt.NDArray[np.complex128]:
    x = np.asarray(J, dtype=np.complex128)
    if x.shape != params.shape:
        raise ValueError(f"pseudo-polar array has shape {x.shape}, expected {params.shape}")
    return x


class _WindowCache:
    """Window arrays keyed by subband, shared by the four cones."""

    def __init__(self, params: GridParams, bank: WindowBank, table: SubbandTable):
        self.values: dict[tuple[int, int], npt.NDArray[np.float64]] = {}
        self.low = low_window_values(params, bank, table.j_low)
        for b in table.bands:
            key = (b.index.j, b.index.s)
            if key not in self.values:
                self.values[key] = window_values(params, bank, b)

    def __call__(self, index: SubbandIndex) -> npt.NDArray[np.float64]:
        return self.low if index.is_low else self.values[(index.j, index.s)]


_CACHE: dict[tuple[GridParams, str], _WindowCache] = {}


def _windows(params: GridParams, bank: WindowBank, table: SubbandTable) -> _WindowCache:
    key = (params, bank.profile)
    cache = _CACHE.get(key)
    if cache is None:
        if len(_CACHE) > 8:
            _CACHE.clear()
        cache = _CACHE[key] = _WindowCache(params, bank, table)
    return cache


def _low_forward(x: npt.NDArray[np.complex128]) -> npt.NDArray[np.complex128]:
    # centered unitary inverse DFT over r1 = -1..1, r2 = -N/2..N/2
    return ifft2_unaliased(x) * math.sqrt(x.shape[0] * x.shape[1])


def _low_adjoint(c: npt.NDArray[np.complex128]) -> npt.NDArray[np.complex128]:
    return fft2_unaliased(c) / math.sqrt(c.shape[0] * c.shape[1])


def analyze(J: npt.ArrayLike, table: SubbandTable, bank: WindowBank) -> ShearletCoefficients:
    """Subband windowing ``W`` of a pseudo-polar array.

    Each block of ``J`` is multiplied by its real window and transformed by a
    unitary inverse 2D DFT whose index origin is the block corner. The
    low-frequency blocks use a centered unitary inverse DFT.

    Parameters
    ----------
    J : array_like
        Pseudo-polar array of shape ``(2, RN+1, N+1)``.
    table : SubbandTable
    bank : WindowBank

    Returns
    -------
    ShearletCoefficients
    """
    params = table.params
    x = _check_grid(J, params)
    win = _windows(params, bank, table)
    out: dict[SubbandIndex, npt.NDArray[np.complex128]] = {}
    for b in table.low:
        sub = x[b.index.sector - 1, b.rows(params), b.cols(params)]
        out[b.index] = _low_forward(sub * win.low)
    # group blocks of equal shape per cone and scale so one batched FFT serves them
    groups: dict[tuple[int, int, tuple[int, int]], list[SubbandBlock]] = {}
    for b in table.bands:
        groups.setdefault((b.index.iota, b.index.j, b.shape), []).append(b)
    for group in groups.values():
        stack = np.stack(
            [x[b.index.sector - 1, b.rows(params), b.cols(params)] * win(b.index) for b in group]
        )
        coeffs = sfft.ifft2(stack, axes=(-2, -1), norm="ortho")
        for b, c in zip(group, coeffs):
            out[b.index] = c
    return ShearletCoefficients(table, out)


def synthesize(C: ShearletCoefficients, table: SubbandTable, bank: WindowBank) -> npt.NDArray[np.complex128]:
    """Adjoint windowing ``W*``: unitary 2D DFT per block, window, add into the grid.

    Raises
    ------
    ValueError
        If ``C`` follows a different geometry than ``table``.
    """
    params = table.params
    if C.table.params != params:
        raise ValueError(f"coefficients for {C.table.params} do not match table for {params}")
    win = _windows(params, bank, table)
    out = np.zeros(params.shape, dtype=np.complex128)
    for b in table.low:
        out[b.index.sector - 1, b.rows(params), b.cols(params)] += _low_adjoint(C[b.index]) * win.low
    groups: dict[tuple[int, int, tuple[int, int]], list[SubbandBlock]] = {}
    for b in table.bands:
        groups.setdefault((b.index.iota, b.index.j, b.shape), []).append(b)
    for group in groups.values():
        spec = sfft.fft2(np.stack([C[b.index] for b in group]), axes=(-2, -1), norm="ortho")
        for b, f in zip(group, spec):
            out[b.index.sector - 1, b.rows(params), b.cols(params)] += f * win(b.index)
    return out


def window_energy(table: SubbandTable, bank: WindowBank) -> npt.NDArray[np.float64]:
    """Per-entry sum of squared windows over every block touching the entry."""
    params = table.params
    win = _windows(params, bank, table)
    out = np.zeros(params.shape)
    for b in table.blocks():
        out[b.index.sector - 1, b.rows(params), b.cols(params)] += win(b.index) ** 2
    return out


def _point_keys(params: GridParams) -> npt.NDArray[np.int64]:
    # integer label of the frequency point of every entry; scaled coordinates are
    # (-k l, k N/2) in sector 1 and (k N/2, -k l) in sector 2
    K, h = params.K, params.N // 2
    k = np.arange(-K, K + 1, dtype=np.int64)[:, None]
    l = np.arange(-h, h + 1, dtype=np.int64)[None, :]
    radial = np.broadcast_to(k * h, (k.size, l.size))
    angular = -k * l
    x = np.stack([angular, radial])
    y = np.stack([radial, angular])
    span = 2 * K * h + 1
    return (x + K * h) * span + (y + K * h)


def partition_of_unity(table: SubbandTable, bank: WindowBank) -> npt.NDArray[np.float64]:
    """Sum of ``C^2 |window|^2`` over every atom and entry at each distinct grid point.

    Returns one value per distinct frequency point; a tight frame needs all of
    them to equal one.
    """
    params = table.params
    e = (c_factor_array(params) ** 2 * window_energy(table, bank)).ravel()
    _, inverse = np.unique(_point_keys(params).ravel(), return_inverse=True)
    return np.bincount(inverse.ravel(), weights=e)
