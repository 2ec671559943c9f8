"""Pseudo-polar Fourier transform and its adjoint.

Images are ``N x N`` arrays whose axis 0 is the ``u`` index and axis 1 the
``v`` index, both running over ``-N/2 .. N/2 - 1``. Pseudo-polar arrays follow
the layout of :mod:`ppshear.grid`. The transform evaluates

    P I (wx, wy) = sum_{u,v} I(u, v) exp(-2 pi i (u wx + v wy) / m0)

with ``m0 = (2/R)(RN + 1)`` at every grid entry.
"""

from __future__ import annotations

import numpy as np
import numpy.typing as npt

from .frft import fft1_unaliased, fft1_unaliased_adjoint, frft, frft_adjoint, pad, pad_adjoint
from .grid import GridParams

__all__ = ["ppft", "adjoint_ppft", "sector_fractions"]


def sector_fractions(params: GridParams) -> npt.NDArray[np.float64]:
    """Per-row fraction ``alpha_k = -k / ((RN+1) N/2)`` for ``k = -RN/2 .. RN/2``."""
    k = np.arange(-params.K, params.K + 1, dtype=float)
    return -k / (params.n_radial * (params.N / 2))


def _check_image(I: npt.ArrayLike, params: GridParams) -> npt.NDArray[np.complex128]:
    x = np.asarray(I, dtype=np.complex128)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError(f"image must be square, got shape {x.shape}")
    if x.shape[0] != params.N:
        raise ValueError(f"image side {x.shape[0]} does not match N={params.N}")
    return x


def _sector1(x: npt.NDArray[np.complex128], params: GridParams) -> npt.NDArray[np.complex128]:
    # radial frequencies: centered DFT of length RN+1 along v
    t = fft1_unaliased(pad(x, params.n_radial, axis=1), axis=1)
    # angular direction: pad u to N+1, then one fractional transform per k
    t = pad(t, params.n_angular, axis=0).T
    return frft(t, sector_fractions(params), axis=-1)


def _sector1_adjoint(y: npt.NDArray[np.complex128], params: GridParams) -> npt.NDArray[np.complex128]:
    t = frft_adjoint(y, sector_fractions(params), axis=-1).T
    t = pad_adjoint(t, params.N, axis=0)
    t = fft1_unaliased_adjoint(t, axis=1)
    return pad_adjoint(t, params.N, axis=1)


def ppft(I: npt.ArrayLike, params: GridParams) -> npt.NDArray[np.complex128]:
    """Fast pseudo-polar Fourier transform.

    Parameters
    ----------
    I : array_like
        ``N x N`` image.
    params : GridParams
        Grid description; ``N`` must match the image.

    Returns
    -------
    numpy.ndarray
        Complex array of shape ``(2, RN+1, N+1)``.
    """
    x = _check_image(I, params)
    out = np.empty(params.shape, dtype=np.complex128)
    out[0] = _sector1(x, params)
    out[1] = _sector1(x.T, params)
    return out


def adjoint_ppft(J: npt.ArrayLike, params: GridParams) -> npt.NDArray[np.complex128]:
    """Adjoint pseudo-polar transform.

    Computes ``sum J(w) exp(+2 pi i (u wx + v wy) / m0)`` over all
    ``2 (RN+1)(N+1)`` stored entries, repeated points included.
    """
    y = np.asarray(J, dtype=np.complex128)
    if y.shape != params.shape:
        raise ValueError(f"pseudo-polar array has shape {y.shape}, expected {params.shape}")
    return _sector1_adjoint(y[0], params) + _sector1_adjoint(y[1], params).T
