"""Fractional Fourier transform, centered FFTs and symmetric zero padding.

All routines use centered indexing. A vector of odd length ``M + 1`` is
indexed by ``j = -M/2 .. M/2`` and a vector of even length ``N`` by
``j = -N/2 .. N/2 - 1``; position 0 of the array always holds the most
negative index.
"""

from __future__ import annotations

import numpy as np
import numpy.typing as npt
import scipy.fft as sfft

__all__ = [
    "frft",
    "frft_adjoint",
    "pad",
    "pad_adjoint",
    "fft1_unaliased",
    "fft1_unaliased_adjoint",
    "fft2_unaliased",
    "ifft2_unaliased",
]

# rows transformed per batch in the chirp-z convolution; bounds peak memory
_CHUNK = 512


def _chirp_length(n: int) -> int:
    return sfft.next_fast_len(2 * n - 1)


def frft(c: npt.ArrayLike, alpha: npt.ArrayLike, axis: int = -1) -> npt.NDArray[np.complex128]:
    """Unaliased fractional Fourier transform.

    Computes ``out(k) = sum_{j=-M/2}^{M/2} c(j) exp(-2 pi i j k alpha)`` for
    ``k = -M/2 .. M/2`` along ``axis`` in ``O(M log M)`` operations using the
    chirp-z factorization ``jk = (j^2 + k^2 - (k - j)^2) / 2``.

    Parameters
    ----------
    c : array_like
        Input with odd length ``M + 1`` along ``axis``.
    alpha : float or array_like
        Fraction. An array is broadcast against the remaining axes of ``c``
        so that every transformed vector may use its own fraction.
    axis : int
        Axis to transform.

    Returns
    -------
    numpy.ndarray
        Complex array of the same shape as ``c``.
    """
    x = np.moveaxis(np.asarray(c, dtype=np.complex128), axis, -1)
    n = x.shape[-1]
    if n % 2 == 0:
        raise ValueError(f"frft requires odd length, got {n}")
    a = np.asarray(alpha, dtype=float)
    a = np.broadcast_to(a, x.shape[:-1])
    batch_shape = x.shape[:-1]
    xf = x.reshape(-1, n)
    af = np.ascontiguousarray(a).reshape(-1)
    out = np.empty_like(xf)

    half = (n - 1) // 2
    L = _chirp_length(n)
    j = np.arange(-half, half + 1)
    j2 = (j * j).astype(float)
    d = np.arange(L)
    d = np.where(d <= 2 * half, d, d - L)  # wrapped differences -M..M
    d2 = (d * d).astype(float)

    for start in range(0, xf.shape[0], _CHUNK):
        stop = min(start + _CHUNK, xf.shape[0])
        al = af[start:stop, None]
        pre = np.exp(-1j * np.pi * al * j2)
        kern = np.exp(1j * np.pi * al * d2)
        buf = np.zeros((stop - start, L), dtype=np.complex128)
        buf[:, :n] = xf[start:stop] * pre
        conv = sfft.ifft(sfft.fft(buf, axis=-1) * sfft.fft(kern, axis=-1), axis=-1)
        # conv[n'] carries output index k = n' - M/2 once the origin is re-centred
        out[start:stop] = conv[:, :n] * pre
    return np.moveaxis(out.reshape(*batch_shape, n), -1, axis)


def frft_adjoint(c: npt.ArrayLike, alpha: npt.ArrayLike, axis: int = -1) -> npt.NDArray[np.complex128]:
    """Adjoint of :func:`frft`, equal to ``frft(c, -alpha)``."""
    return frft(c, -np.asarray(alpha, dtype=float), axis=axis)


def pad(c: npt.ArrayLike, m: int, axis: int = -1) -> npt.NDArray[np.complex128]:
    """Symmetric zero padding of an even-length vector to odd length ``m``.

    Entry ``j`` of the input (``j = -N/2 .. N/2 - 1``) lands at index ``j`` of the
    output (``-(m-1)/2 .. (m-1)/2``); all other entries are zero.
    """
    x = np.asarray(c)
    n = x.shape[axis]
    if n % 2:
        raise ValueError(f"pad expects an even input length, got {n}")
    if m % 2 == 0 or m <= n:
        raise ValueError(f"pad target length must be odd and > {n}, got {m}")
    off = (m - 1) // 2 - n // 2
    shape = list(x.shape)
    shape[axis] = m
    out = np.zeros(shape, dtype=np.result_type(x.dtype, np.complex128))
    sl = [slice(None)] * x.ndim
    sl[axis] = slice(off, off + n)
    out[tuple(sl)] = x
    return out


def pad_adjoint(c: npt.ArrayLike, n: int, axis: int = -1) -> npt.NDArray[np.complex128]:
    """Adjoint of :func:`pad`: restriction to indices ``-n/2 .. n/2 - 1``."""
    x = np.asarray(c)
    m = x.shape[axis]
    if n % 2 or m % 2 == 0 or m <= n:
        raise ValueError(f"cannot restrict length {m} to {n}")
    off = (m - 1) // 2 - n // 2
    sl = [slice(None)] * x.ndim
    sl[axis] = slice(off, off + n)
    return np.array(x[tuple(sl)], dtype=np.result_type(x.dtype, np.complex128))


def fft1_unaliased(c: npt.ArrayLike, axis: int = -1) -> npt.NDArray[np.complex128]:
    """Centered DFT ``out(k) = sum_j c(j) exp(-2 pi i j k / L)`` along ``axis``."""
    x = np.asarray(c, dtype=np.complex128)
    return sfft.fftshift(sfft.fft(sfft.ifftshift(x, axes=axis), axis=axis), axes=axis)


def fft1_unaliased_adjoint(c: npt.ArrayLike, axis: int = -1) -> npt.NDArray[np.complex128]:
    """Adjoint of :func:`fft1_unaliased` (conjugate exponent, no scaling)."""
    x = np.asarray(c, dtype=np.complex128)
    n = x.shape[axis]
    return sfft.fftshift(sfft.ifft(sfft.ifftshift(x, axes=axis), axis=axis), axes=axis) * n


def fft2_unaliased(x: npt.ArrayLike) -> npt.NDArray[np.complex128]:
    """Centered 2D DFT of the last two axes, unnormalized.

    With this scaling ``sum |x|^2 = sum |X|^2 / (n1 n2)``.
    """
    a = np.asarray(x, dtype=np.complex128)
    ax = (-2, -1)
    return sfft.fftshift(sfft.fft2(sfft.ifftshift(a, axes=ax), axes=ax), axes=ax)


def ifft2_unaliased(x: npt.ArrayLike) -> npt.NDArray[np.complex128]:
    """Inverse of :func:`fft2_unaliased`."""
    a = np.asarray(x, dtype=np.complex128)
    ax = (-2, -1)
    return sfft.fftshift(sfft.ifft2(sfft.ifftshift(a, axes=ax), axes=ax), axes=ax)
