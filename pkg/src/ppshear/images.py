"""Test image generators and a seeded random-number specification.

Images use the centered index convention: array index ``i`` holds the
coordinate ``i - N/2``, so the origin sits at index ``N/2`` on both axes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

__all__ = [
    "RNGSpec",
    "random_images",
    "line_image",
    "gaussian_image",
    "parse_generator",
]


@dataclass(frozen=True)
class RNGSpec:
    """Algorithm id and seed of a random stream.

    Identical specs always produce identical sequences; every call to
    :meth:`generator` starts the stream afresh.
    """

    seed: int = 0
    algorithm: str = "pcg64"

    def __post_init__(self) -> None:
        if self.algorithm != "pcg64":
            raise ValueError(f"unsupported generator {self.algorithm!r}; only 'pcg64' is available")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must fit in 64 unsigned bits, got {self.seed}")

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(int(self.seed)))


def random_images(spec: RNGSpec, shape: tuple[int, ...], count: int = 5) -> list[npt.NDArray[np.float64]]:
    """``count`` arrays with independent standard normal entries."""
    rng = spec.generator()
    return [rng.standard_normal(shape) for _ in range(count)]


def _coords(N: int) -> npt.NDArray[np.int64]:
    return np.arange(-(N // 2), N // 2)


def line_image(N: int, t: float = 0.0, transpose: bool = False) -> npt.NDArray[np.float64]:
    """Digital line through the origin.

    The untransposed image is one on the pixels ``v = floor(t u + 1/2)`` with
    ``u`` along axis 0 and ``v`` along axis 1; ``t = 0`` gives ``I(u, v) = delta(v)``.
    With ``transpose`` the roles of ``u`` and ``v`` are swapped.

    Raises
    ------
    ValueError
        If ``|t| > 1``.
    """
    if abs(t) > 1:
        raise ValueError(f"slope must satisfy |t| <= 1, got {t}")
    u = _coords(N)
    v = np.floor(t * u + 0.5).astype(np.int64)
    img = np.zeros((N, N))
    keep = (v >= -(N // 2)) & (v < N // 2)
    img[u[keep] + N // 2, v[keep] + N // 2] = 1.0
    return img.T.copy() if transpose else img


def gaussian_image(N: int, var: float = 256.0) -> npt.NDArray[np.float64]:
    """Samples of ``exp(-(u^2 + v^2) / (2 var))`` on the centered grid; peak value one."""
    u = _coords(N).astype(float)
    r2 = u[:, None] ** 2 + u[None, :] ** 2
    return np.exp(-r2 / (2.0 * var))


def parse_generator(text: str, N: int) -> npt.NDArray[np.float64]:
    """Build an image from a generator description.

    Accepted forms are ``line:t=<slope>[,transpose=1]``, ``gaussian:var=<v>``,
    ``delta`` and ``zero``.

    Raises
    ------
    ValueError
        For an unknown generator or malformed option.
    """
    name, _, rest = text.partition(":")
    opts: dict[str, str] = {}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq:
            raise ValueError(f"malformed generator option {item!r} in {text!r}")
        opts[key.strip()] = val.strip()
    if name == "line":
        t = float(opts.pop("t", 0.0))
        transpose = bool(int(opts.pop("transpose", 0)))
        img = line_image(N, t, transpose)
    elif name == "gaussian":
        img = gaussian_image(N, float(opts.pop("var", 256.0)))
    elif name == "delta":
        img = np.zeros((N, N))
        img[N // 2, N // 2] = 1.0
    elif name == "zero":
        img = np.zeros((N, N))
    else:
        raise ValueError(f"unknown generator {name!r}; expected line, gaussian, delta or zero")
    if opts:
        raise ValueError(f"unknown options {sorted(opts)} for generator {name!r}")
    return img
