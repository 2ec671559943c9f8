"""File formats: images, shearlet coefficient containers and the weight cache.

Raw image
    Text line ``img1 N complex`` (``complex`` is 0 or 1), then ``N*N``
    little-endian float64 values in row-major order, interleaved real and
    imaginary parts when complex.
PGM image
    Binary ``P5`` with 8- or 16-bit samples, mapped to ``[0, 1]`` by dividing
    by the maximum gray value. Writing stores the real part clipped to ``[0, 1]``.
Coefficient container
    Text line ``dsh1 N R nblocks``, then per block five little-endian int64
    values ``iota j s L1 L2`` followed by ``L1*L2`` little-endian complex128
    values in row-major order.
Weight cache
    Text line ``ppwt1 N R choice n``, then ``n`` little-endian float64
    coefficients and the full ``2 x (RN+1) x (N+1)`` value grid.

All binary formats round-trip bit-exactly.
"""

from __future__ import annotations

import hashlib
import os
import struct
import tempfile
from pathlib import Path
from typing import BinaryIO

import numpy as np
import numpy.typing as npt

from .grid import GridParams
from .shearlets import ShearletCoefficients, SubbandIndex, scale_shear_table
from .weights import WeightMap, condition_residual, fit_weights

__all__ = [
    "FormatError",
    "read_image",
    "write_image",
    "read_raw",
    "write_raw",
    "read_pgm",
    "write_pgm",
    "read_coefficients",
    "write_coefficients",
    "read_weights",
    "write_weights",
    "WeightCache",
    "atomic_write",
    "CACHE_VERSION",
    "CACHE_ENV",
]

CACHE_VERSION = 1
CACHE_ENV = "PPSHEAR_CACHE_DIR"
_RECORD = struct.Struct("<5q")


class FormatError(ValueError):
    """Malformed or inconsistent file contents."""


def atomic_write(path: str | os.PathLike, data: bytes) -> None:
    """Write ``data`` to a temporary file in the target directory, then rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _header(fh: BinaryIO, magic: str, count: int) -> list[str]:
    line = fh.readline(256)
    try:
        parts = line.decode("ascii").split()
    except UnicodeDecodeError:
        parts = []
    if len(parts) != count + 1 or parts[0] != magic:
        raise FormatError(f"expected a '{magic}' header with {count} fields, got {line[:64]!r}")
    return parts[1:]


def _read_exact(fh: BinaryIO, n: int, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise FormatError(f"truncated {what}: expected {n} bytes, got {len(data)}")
    return data


def _int(text: str, name: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise FormatError(f"header field {name} is not an integer: {text!r}") from None


# ------------------------------------------------------------------- images


def write_raw(path: str | os.PathLike, image: npt.ArrayLike) -> None:
    img = np.asarray(image)
    if img.ndim != 2 or img.shape[0] != img.shape[1]:
        raise ValueError(f"image must be square, got shape {img.shape}")
    cplx = np.iscomplexobj(img)
    body = np.ascontiguousarray(img, dtype="<c16" if cplx else "<f8").tobytes()
    atomic_write(path, f"img1 {img.shape[0]} {int(cplx)}\n".encode() + body)


def read_raw(path: str | os.PathLike) -> npt.NDArray:
    with open(path, "rb") as fh:
        n_txt, c_txt = _header(fh, "img1", 2)
        n = _int(n_txt, "N")
        if n <= 0 or c_txt not in ("0", "1"):
            raise FormatError(f"bad raw image header: N={n_txt}, complex={c_txt}")
        dtype = np.dtype("<c16" if c_txt == "1" else "<f8")
        data = _read_exact(fh, n * n * dtype.itemsize, "image data")
        if fh.read(1):
            raise FormatError("trailing bytes after image data")
    return np.frombuffer(data, dtype=dtype).reshape(n, n).astype(dtype.newbyteorder("="))


def _pgm_header(fh: BinaryIO) -> list[bytes]:
    """Magic, width, height and maxval; comments run from ``#`` to the line end."""
    tokens: list[bytes] = []
    tok = b""
    while len(tokens) < 4:
        ch = fh.read(1)
        if not ch:
            raise FormatError("truncated PGM header")
        if ch == b"#":
            fh.readline()
            ch = b"\n"
        if ch.isspace():
            if tok:
                tokens.append(tok)
                tok = b""
        else:
            tok += ch
            if len(tok) > 16:
                raise FormatError("PGM header token too long")
    # a single whitespace byte (already consumed) separates the header from the pixels
    return tokens


def read_pgm(path: str | os.PathLike) -> npt.NDArray[np.float64]:
    """Read a binary PGM and scale gray values to ``[0, 1]``."""
    with open(path, "rb") as fh:
        magic, *fields = _pgm_header(fh)
        if magic != b"P5":
            raise FormatError("only binary PGM (P5) files are supported")
        if not all(f.isdigit() for f in fields):
            raise FormatError(f"bad PGM header fields {fields}")
        w, h, maxval = (int(f) for f in fields)
        if not 0 < maxval < 65536 or w <= 0 or h <= 0:
            raise FormatError(f"bad PGM geometry {w}x{h} max {maxval}")
        dtype = np.dtype("u1" if maxval < 256 else ">u2")
        data = _read_exact(fh, w * h * dtype.itemsize, "PGM pixels")
    return np.frombuffer(data, dtype=dtype).reshape(h, w).astype(float) / maxval


def write_pgm(path: str | os.PathLike, image: npt.ArrayLike, maxval: int = 255) -> None:
    """Write the real part of an image, clipped to ``[0, 1]``, as binary PGM with ``maxval`` gray levels."""
    img = np.real(np.asarray(image))
    if img.ndim != 2:
        raise ValueError(f"image must be two-dimensional, got shape {img.shape}")
    if not 0 < maxval < 65536:
        raise ValueError(f"maxval must lie in 1..65535, got {maxval}")
    q = np.rint(np.clip(img, 0.0, 1.0) * maxval)
    body = q.astype("u1" if maxval < 256 else ">u2").tobytes()
    h, w = img.shape
    atomic_write(path, f"P5\n{w} {h}\n{maxval}\n".encode() + body)


def read_image(path: str | os.PathLike) -> npt.NDArray:
    """Read a raw or PGM image, chosen by the file's magic bytes."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
    if magic.startswith(b"P5"):
        return read_pgm(path)
    if magic == b"img1":
        return read_raw(path)
    raise FormatError(f"{path}: unknown image format")


def write_image(path: str | os.PathLike, image: npt.ArrayLike) -> None:
    """Write PGM for ``.pgm`` paths and raw otherwise."""
    if str(path).lower().endswith(".pgm"):
        write_pgm(path, image)
    else:
        write_raw(path, image)


# ------------------------------------------------------------- coefficients


def write_coefficients(path: str | os.PathLike, C: ShearletCoefficients) -> None:
    p = C.params
    parts = [f"dsh1 {p.N} {p.R} {len(C)}\n".encode()]
    for idx, arr in C.blocks.items():
        parts.append(_RECORD.pack(idx.iota, idx.j, idx.s, *arr.shape))
        parts.append(np.ascontiguousarray(arr, dtype="<c16").tobytes())
    atomic_write(path, b"".join(parts))


def read_coefficients(path: str | os.PathLike) -> ShearletCoefficients:
    """Read a coefficient container and check it against the subband table of its ``(N, R)``.

    Raises
    ------
    FormatError
        For malformed files or blocks that do not fit the geometry.
    """
    with open(path, "rb") as fh:
        n_txt, r_txt, b_txt = _header(fh, "dsh1", 3)
        try:
            params = GridParams(_int(n_txt, "N"), _int(r_txt, "R"))
        except ValueError as exc:
            raise FormatError(str(exc)) from None
        table = scale_shear_table(params)
        nblocks = _int(b_txt, "nblocks")
        if nblocks != len(table.low) + len(table.bands):
            raise FormatError(f"container has {nblocks} blocks, geometry needs {len(table.low) + len(table.bands)}")
        blocks = {}
        for _ in range(nblocks):
            iota, j, s, L1, L2 = _RECORD.unpack(_read_exact(fh, _RECORD.size, "block record"))
            idx = SubbandIndex(iota, j, s)
            if idx not in table or table[idx].shape != (L1, L2):
                raise FormatError(f"block {idx} with shape {(L1, L2)} does not fit N={params.N}, R={params.R}")
            if idx in blocks:
                raise FormatError(f"duplicate block {idx}")
            data = _read_exact(fh, L1 * L2 * 16, f"block {idx}")
            blocks[idx] = np.frombuffer(data, dtype="<c16").reshape(L1, L2).astype(np.complex128)
        if fh.read(1):
            raise FormatError("trailing bytes after the last block")
    return ShearletCoefficients(table, blocks)


# ------------------------------------------------------------------ weights


def write_weights(path: str | os.PathLike, w: WeightMap) -> None:
    p = w.params
    coeffs = np.ascontiguousarray(w.coeffs, dtype="<f8")
    head = f"ppwt1 {p.N} {p.R} {w.choice} {coeffs.size}\n".encode()
    atomic_write(path, head + coeffs.tobytes() + np.ascontiguousarray(w.values, dtype="<f8").tobytes())


def read_weights(path: str | os.PathLike) -> WeightMap:
    with open(path, "rb") as fh:
        n_txt, r_txt, c_txt, k_txt = _header(fh, "ppwt1", 4)
        try:
            params = GridParams(_int(n_txt, "N"), _int(r_txt, "R"))
        except ValueError as exc:
            raise FormatError(str(exc)) from None
        choice, n = _int(c_txt, "choice"), _int(k_txt, "n")
        if n < 0:
            raise FormatError(f"negative coefficient count {n}")
        coeffs = np.frombuffer(_read_exact(fh, 8 * n, "coefficients"), dtype="<f8").astype(float)
        count = int(np.prod(params.shape))
        values = np.frombuffer(_read_exact(fh, 8 * count, "weight grid"), dtype="<f8").astype(float)
        if fh.read(1):
            raise FormatError("trailing bytes after the weight grid")
    values = values.reshape(params.shape)
    res = float(np.linalg.norm(condition_residual(params, values)))
    return WeightMap(params, values, coeffs, choice, res)


class WeightCache:
    """Directory of fitted weight maps keyed by a hash of ``(N, R, m0, choice, version)``.

    Parameters
    ----------
    root : path, optional
        Cache directory; defaults to ``$PPSHEAR_CACHE_DIR`` or
        ``~/.cache/ppshear``.
    """

    def __init__(self, root: str | os.PathLike | None = None):
        if root is None:
            root = os.environ.get(CACHE_ENV) or Path.home() / ".cache" / "ppshear"
        self.root = Path(root)

    def path(self, params: GridParams, choice: int) -> Path:
        key = f"{params.N}|{params.R}|{params.m0}|{choice}|{CACHE_VERSION}"
        digest = hashlib.sha256(key.encode()).hexdigest()[:16]
        return self.root / f"weights-N{params.N}-R{params.R}-c{choice}-{digest}.ppwt"

    def load(self, params: GridParams, choice: int) -> WeightMap | None:
        """Cached map, or ``None`` when absent or unreadable."""
        path = self.path(params, choice)
        if not path.exists():
            return None
        try:
            w = read_weights(path)
        except (FormatError, OSError):
            return None
        if w.params != params or w.choice != choice:
            return None
        return w

    def get(self, params: GridParams, choice: int, refresh: bool = False) -> tuple[WeightMap, bool]:
        """Return ``(weights, hit)``, fitting and storing the map on a miss."""
        if not refresh:
            w = self.load(params, choice)
            if w is not None:
                return w, True
        w = fit_weights(params, choice)
        write_weights(self.path(params, choice), w)
        return w, False

