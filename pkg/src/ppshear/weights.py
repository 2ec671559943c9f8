"""Density-compensation weights that make the pseudo-polar transform nearly isometric.

A weight map assigns a nonnegative value to every stored grid entry. All maps
built here depend only on ``(|k|, |l|)`` and are identical in both sectors, which
realises the four reflection symmetries of the grid. They are described by a
*quarter array* ``Q`` of shape ``(RN/2 + 1, N/2 + 1)`` with ``Q[|k|, |l|]``;
row 0 is the origin and must be constant.

Weights are per stored entry. Repeated points (the origin appears ``2(N+1)``
times, every nonzero diagonal point twice) therefore carry their point weight
split over their copies, and ``P* w P`` sums over all entries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
import scipy.optimize
import scipy.sparse.linalg

from .grid import GridParams, c_factor_array, coordinates
from .ppft import adjoint_ppft, ppft

__all__ = [
    "CHOICES",
    "WeightBasis",
    "WeightMap",
    "weight_basis",
    "expand_quarter",
    "quarter_of",
    "condition_residual",
    "condition_residual_direct",
    "solve_weight_coeffs",
    "fit_weights",
    "uniform_weights",
    "apply_weight",
    "gram_apply",
    "gram_kernel",
    "gram_extreme_eigenvalues",
    "isometry_defect",
]

#: supported basis designs; 0 is the full per-orbit basis used for exact solves
CHOICES = (0, 1, 2, 3)


@dataclass(frozen=True)
class WeightBasis:
    """Basis functions for the weight fit.

    Attributes
    ----------
    choice : int
        Basis design id.
    names : tuple of str
        Short label of every function.
    quarters : numpy.ndarray
        Stack of quarter arrays, shape ``(n, RN/2 + 1, N/2 + 1)``.
    """

    params: GridParams
    choice: int
    names: tuple[str, ...]
    quarters: npt.NDArray[np.float64] = field(repr=False)

    def __len__(self) -> int:
        return len(self.names)


@dataclass(frozen=True)
class WeightMap:
    """Fitted weights.

    Attributes
    ----------
    values : numpy.ndarray
        Per-entry weights, shape ``params.shape``.
    coeffs : numpy.ndarray
        Basis coefficients (empty for maps not produced by a fit).
    residual_norm : float
        l2 norm of the isometry condition residual over ``[-N+1, N-1]^2``.
    """

    params: GridParams
    values: npt.NDArray[np.float64] = field(repr=False)
    coeffs: npt.NDArray[np.float64]
    choice: int = -1
    residual_norm: float = float("nan")

    @property
    def quarter(self) -> npt.NDArray[np.float64]:
        return quarter_of(self.params, self.values)


def _index_grids(params: GridParams) -> tuple[npt.NDArray[np.int64], npt.NDArray[np.int64]]:
    ka = np.arange(params.K + 1)[:, None] * np.ones(params.N // 2 + 1, dtype=np.int64)[None, :]
    la = np.ones(params.K + 1, dtype=np.int64)[:, None] * np.arange(params.N // 2 + 1)[None, :]
    return ka, la


def weight_basis(params: GridParams, choice: int) -> WeightBasis:
    """Build the basis functions of a weight design.

    Parameters
    ----------
    params : GridParams
    choice : int
        1: seven functions (origin, first ring, outer ring split into diagonal
        and off-diagonal parts, diagonal ramp ``|k|``, diagonal ring at
        ``|k| = RN/2 - 3``, off-diagonal ramp ``|k|``).
        2: five functions (origin, outer ring on and off the diagonals, ramps
        ``|k|`` on and off the diagonals starting at ``|k| = 1``).
        3: ``N/2 + 2`` functions (origin and one ramp ``|k|`` per radial line
        ``|l|``). The ramps live on ``2 <= |k| <= RN/2 - 1``; the rings
        ``|k| = 1`` and ``|k| = RN/2`` take the value of the nearest covered
        ring on the same line.
        0: one indicator per symmetry orbit, ``RN^2/4 + RN/2 + 1`` functions.

    Raises
    ------
    ValueError
        For an unknown choice.
    """
    if choice not in CHOICES:
        raise ValueError(f"unknown weight choice {choice!r}; expected one of {CHOICES}")
    K, h = params.K, params.N // 2
    ka, la = _index_grids(params)
    center = (ka == 0).astype(float)
    seam = (la == h) & (ka > 0)
    off = (la < h) & (ka > 0)
    kf = ka.astype(float)
    funcs: list[tuple[str, npt.NDArray[np.float64]]]
    if choice == 1:
        funcs = [
            ("center", center),
            ("ring1", (ka == 1).astype(float)),
            ("outer_seam", ((ka == K) & seam).astype(float)),
            ("outer_interior", ((ka == K) & off).astype(float)),
            ("ramp_seam", kf * ((ka > 1) & (ka < K) & seam)),
            ("ring_seam", ((ka == K - 3) & seam).astype(float)),
            ("ramp_interior", kf * ((ka > 1) & (ka < K) & off)),
        ]
    elif choice == 2:
        funcs = [
            ("center", center),
            ("outer_seam", ((ka == K) & seam).astype(float)),
            ("outer_interior", ((ka == K) & off).astype(float)),
            ("ramp_seam", kf * ((ka >= 1) & (ka < K) & seam)),
            ("ramp_interior", kf * ((ka >= 1) & (ka < K) & off)),
        ]
    elif choice == 3:
        funcs = [("center", center)]
        for l0 in range(h + 1):
            ramp = np.clip(kf, 2.0, K - 1.0)
            funcs.append((f"line{l0}", ramp * ((ka >= 1) & (la == l0))))
    else:
        funcs = [("center", center)]
        for k0 in range(1, K + 1):
            for l0 in range(h + 1):
                q = np.zeros_like(center)
                q[k0, l0] = 1.0
                funcs.append((f"orbit_{k0}_{l0}", q))
    names = tuple(n for n, _ in funcs)
    quarters = np.stack([q for _, q in funcs])
    return WeightBasis(params, choice, names, quarters)


def expand_quarter(params: GridParams, quarter: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """Per-entry weights from point weights given on the quarter cone.

    The point weight ``quarter[|k|, |l|]`` is shared by every stored copy of the
    point, so each entry receives ``C^2`` times it (``C`` from
    :func:`ppshear.grid.c_factor_array`).
    """
    q = np.asarray(quarter, dtype=float)
    if q.shape != (params.K + 1, params.N // 2 + 1):
        raise ValueError(f"quarter array has shape {q.shape}")
    K, h = params.K, params.N // 2
    ki = np.abs(np.arange(-K, K + 1))
    li = np.abs(np.arange(-h, h + 1))
    full = q[ki[:, None], li[None, :]]
    return np.stack([full, full]) * c_factor_array(params) ** 2


def quarter_of(params: GridParams, values: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """Point weights on the quarter cone (inverse of :func:`expand_quarter`)."""
    v = np.asarray(values, dtype=float) / c_factor_array(params) ** 2
    return v[1, params.K:, params.N // 2:].copy()


def _radial_angles(params: GridParams) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    k = np.arange(params.K + 1, dtype=float)
    a = 2.0 * np.pi * k / params.n_radial
    b = 2.0 * np.arange(params.N // 2 + 1) / params.N
    return a, b


def _kernel_quadrant(
    params: GridParams, quarter: npt.NDArray[np.float64], symmetric: bool = True
) -> npt.NDArray[np.float64]:
    """``sum_points w cos(2 pi (u wx + v wy) / m0)`` for ``u, v = 0 .. N-1``.

    ``quarter`` holds point weights. An off-origin point with ``0 < |l| < N/2``
    has 8 images under the grid symmetries, points on the axes or diagonals 4.
    Summing the cosines over an orbit gives the ``u <-> v`` symmetrisation of
    ``mult * cos(a u) cos(a b v)``; with ``symmetric=False`` the unsymmetrised
    form is returned.
    """
    N, h = params.N, params.N // 2
    a, b = _radial_angles(params)
    u = np.arange(N, dtype=float)
    q = quarter.copy()
    F = np.full((N, N), q[0, 0])
    q[0, :] = 0.0
    rows = np.flatnonzero(np.any(q != 0.0, axis=1))
    if rows.size:
        ar = a[rows]
        H = np.zeros((rows.size, N))
        for l0 in np.flatnonzero(np.any(q[rows] != 0.0, axis=0)):
            mult = 4.0 if l0 in (0, h) else 8.0
            coef = mult * q[rows, l0]
            nz = coef != 0.0
            H[nz] += coef[nz, None] * np.cos(np.outer(ar[nz] * b[l0], u))
        F += np.cos(np.outer(u, ar)) @ H
    return 0.5 * (F + F.T) if symmetric else F


def _mirror(quadrant: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    """Extend values on ``[0, N-1]^2`` to ``[-N+1, N-1]^2`` by evenness in each axis."""
    top = np.concatenate([quadrant[:0:-1], quadrant], axis=0)
    return np.concatenate([top[:, :0:-1], top], axis=1)


def _delta(n: int) -> npt.NDArray[np.float64]:
    d = np.zeros((n, n))
    d[0, 0] = 1.0
    return d


def condition_residual(params: GridParams, w: WeightMap | npt.ArrayLike) -> npt.NDArray[np.float64]:
    """Residual of the isometry condition on ``(u, v) in [-N+1, N-1]^2``.

    The condition states that ``sum_entries w(e) cos(2 pi (u wx + v wy) / m0)``
    equals ``delta(u, v)``; it is evaluated on one quarter cone with entry
    multiplicities.

    Parameters
    ----------
    w : WeightMap or array_like
        Weight map, or a full ``params.shape`` array of symmetric weights.

    Returns
    -------
    numpy.ndarray
        ``(2N-1) x (2N-1)`` array; entry ``[u + N - 1, v + N - 1]``.
    """
    values = w.values if isinstance(w, WeightMap) else np.asarray(w, dtype=float)
    F = _kernel_quadrant(params, quarter_of(params, values))
    return _mirror(F - _delta(params.N))


def condition_residual_direct(params: GridParams, values: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """Residual of the isometry condition summed over every stored entry.

    ``O(R N^4)``; intended for small grids.
    """
    v = np.asarray(values, dtype=float).ravel()
    wx, wy = coordinates(params)
    wx, wy = wx.ravel(), wy.ravel()
    m0 = float(params.m0)
    d = np.arange(-params.N + 1, params.N, dtype=float)
    cx = np.cos(2 * np.pi / m0 * np.outer(d, wx))
    sx = np.sin(2 * np.pi / m0 * np.outer(d, wx))
    cy = np.cos(2 * np.pi / m0 * np.outer(d, wy))
    sy = np.sin(2 * np.pi / m0 * np.outer(d, wy))
    out = (cx * v) @ cy.T - (sx * v) @ sy.T
    out[params.N - 1, params.N - 1] -= 1.0
    return out


def _design(params: GridParams, basis: WeightBasis) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """Least-squares system over the nonnegative quadrant, rows scaled to count mirror images."""
    N = params.N
    mult = np.where(np.arange(N) == 0, 1.0, 2.0)
    rw = np.sqrt(np.outer(mult, mult)).ravel()
    A = np.stack([_kernel_quadrant(params, q).ravel() for q in basis.quarters], axis=1)
    return A * rw[:, None], _delta(N).ravel() * rw


def solve_weight_coeffs(params: GridParams, basis: WeightBasis) -> WeightMap:
    """Fit nonnegative basis coefficients to the isometry condition.

    Minimises the l2 norm of :func:`condition_residual` over all of
    ``[-N+1, N-1]^2`` subject to nonnegative coefficients.

    Raises
    ------
    RuntimeError
        If the nonnegative least-squares solver fails; the message carries the
        residual of the best iterate.
    """
    A, rhs = _design(params, basis)
    scale = np.linalg.norm(A, axis=0)
    scale[scale == 0.0] = 1.0
    try:
        c, rnorm = scipy.optimize.nnls(A / scale, rhs, maxiter=50 * A.shape[1])
    except RuntimeError as exc:  # iteration limit
        raise RuntimeError(f"nonnegative least squares failed for choice {basis.choice}: {exc}") from exc
    c = c / scale
    quarter = np.tensordot(c, basis.quarters, axes=1)
    values = expand_quarter(params, quarter)
    return WeightMap(params, values, c, basis.choice, float(rnorm))


def fit_weights(params: GridParams, choice: int = 1) -> WeightMap:
    """Shorthand for ``solve_weight_coeffs(params, weight_basis(params, choice))``."""
    return solve_weight_coeffs(params, weight_basis(params, choice))


def uniform_weights(params: GridParams, value: float = 1.0) -> WeightMap:
    """Constant weight map; its residual norm is evaluated on construction."""
    values = np.full(params.shape, float(value))
    res = float(np.linalg.norm(condition_residual(params, values)))
    return WeightMap(params, values, np.array([value]), -1, res)


def apply_weight(J: npt.ArrayLike, w: WeightMap, power: float = 0.5) -> npt.NDArray[np.complex128]:
    """Multiply a pseudo-polar array by ``w ** power``."""
    x = np.asarray(J)
    if x.shape != w.values.shape:
        raise ValueError(f"pseudo-polar array has shape {x.shape}, weights {w.values.shape}")
    if power == 1:
        return x * w.values
    if power == 0.5:
        return x * np.sqrt(w.values)
    return x * w.values**power


def gram_apply(I: npt.ArrayLike, w: WeightMap) -> npt.NDArray[np.complex128]:
    """Apply ``P* w P`` to an image."""
    return adjoint_ppft(w.values * ppft(I, w.params), w.params)


def gram_kernel(params: GridParams, w: WeightMap | npt.ArrayLike) -> npt.NDArray[np.float64]:
    """Convolution kernel of ``P* w P`` on ``[-N+1, N-1]^2``.

    ``(P* w P I)(x) = sum_y kernel(x - y) I(y)``.
    """
    return condition_residual(params, w) + _mirror(_delta(params.N))


def gram_extreme_eigenvalues(w: WeightMap, tol: float = 1e-10) -> tuple[float, float, bool]:
    """Smallest and largest eigenvalue of ``P* w P`` by Lanczos iteration.

    The operator is real symmetric on real images, so the real space suffices.

    Returns
    -------
    lam_min, lam_max : float
    converged : bool
    """
    N = w.params.N

    def mv(x: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        return gram_apply(x.reshape(N, N), w).real.ravel()

    op = scipy.sparse.linalg.LinearOperator((N * N, N * N), matvec=mv, dtype=float)
    v0 = np.ones(N * N) / N
    converged = True
    vals = []
    for which in ("LA", "SA"):
        try:
            lam = scipy.sparse.linalg.eigsh(op, k=1, which=which, tol=tol, v0=v0, ncv=min(N * N, 40),
                                            return_eigenvectors=False)
            vals.append(float(lam[0]))
        except scipy.sparse.linalg.ArpackNoConvergence as exc:
            converged = False
            vals.append(float(exc.eigenvalues[0]) if len(exc.eigenvalues) else float("nan"))
        except scipy.sparse.linalg.ArpackError:
            # e.g. the zero operator, which annihilates every starting vector
            converged = False
            vals.append(float("nan"))
    return vals[1], vals[0], converged


def isometry_defect(w: WeightMap, images: list[npt.NDArray]) -> list[float]:
    """``||P* w P I - I|| / ||I||`` for every image."""
    return [float(np.linalg.norm(gram_apply(I, w) - I) / np.linalg.norm(I)) for I in images]
