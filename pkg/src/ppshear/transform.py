"""Fast digital shearlet transform, its adjoint and its iterative inverse.

The transform is ``S = W sqrt(w) P`` with the pseudo-polar transform ``P``,
weights ``w`` and subband windowing ``W``. Its adjoint is
``S* = P* sqrt(w) W*``. The inverse solves ``P* w P I = P* sqrt(w) W* c`` by
conjugate gradients.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from .grid import GridParams
from .ppft import adjoint_ppft, ppft
from .shearlets import (
    ShearletCoefficients,
    SubbandIndex,
    SubbandTable,
    WindowBank,
    analyze,
    build_window_bank,
    scale_shear_table,
    synthesize,
)
from .weights import WeightMap, apply_weight, fit_weights, gram_apply

__all__ = [
    "TransformPlan",
    "make_plan",
    "CGConfig",
    "CGResult",
    "fdst",
    "adjoint_fdst",
    "inverse_fdst",
    "conjugate_gradient",
    "shear_grid",
    "shear_coefficient_check",
]


@dataclass(frozen=True)
class TransformPlan:
    """Everything the transform needs for one ``(N, R)``.

    Parameters
    ----------
    params : GridParams
    weights : WeightMap
        Must be built for ``params``.
    bank : WindowBank
    table : SubbandTable
        Must be built for ``params``.
    """

    params: GridParams
    weights: WeightMap
    bank: WindowBank
    table: SubbandTable

    def __post_init__(self) -> None:
        if self.weights.params != self.params:
            raise ValueError(f"weights built for {self.weights.params}, plan is {self.params}")
        if self.table.params != self.params:
            raise ValueError(f"subband table built for {self.table.params}, plan is {self.params}")


def make_plan(
    params: GridParams,
    choice: int = 1,
    profile: str = "c1",
    weights: WeightMap | None = None,
) -> TransformPlan:
    """Build a plan, fitting the weights of ``choice`` unless ``weights`` is given."""
    w = weights if weights is not None else fit_weights(params, choice)
    return TransformPlan(params, w, build_window_bank(profile), scale_shear_table(params))


@dataclass(frozen=True)
class CGConfig:
    """Conjugate-gradient settings.

    Parameters
    ----------
    tol : float
        Stop once the residual norm drops to ``tol``. The residual is absolute
        unless ``relative`` is set, in which case it is divided by ``||b||``.
    max_iter : int
        Iteration cap; ``0`` returns the initial guess.
    initial : ndarray, optional
        Starting image, zero by default.
    relative : bool
    """

    tol: float = 1e-6
    max_iter: int = 100
    initial: npt.NDArray[np.complex128] | None = field(default=None, compare=False)
    relative: bool = False

    def __post_init__(self) -> None:
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 0:
            raise ValueError(f"max_iter must be >= 0, got {self.max_iter}")


@dataclass
class CGResult:
    """Outcome of a conjugate-gradient solve.

    ``residuals`` holds ``||r_k||`` for ``k = 0 .. iterations``.
    """

    image: npt.NDArray[np.complex128]
    iterations: int
    converged: bool
    residual: float
    residuals: list[float]


def fdst(plan: TransformPlan, I: npt.ArrayLike) -> ShearletCoefficients:
    """Forward transform ``W sqrt(w) P I``."""
    return analyze(apply_weight(ppft(I, plan.params), plan.weights, 0.5), plan.table, plan.bank)


def adjoint_fdst(plan: TransformPlan, C: ShearletCoefficients) -> npt.NDArray[np.complex128]:
    """Adjoint transform ``P* sqrt(w) W* C``."""
    return adjoint_ppft(apply_weight(synthesize(C, plan.table, plan.bank), plan.weights, 0.5), plan.params)


def conjugate_gradient(apply_A, b: npt.ArrayLike, cfg: CGConfig) -> CGResult:
    """Conjugate gradients for a Hermitian positive definite operator.

    Parameters
    ----------
    apply_A : callable
        Maps an array to ``A x``.
    b : array_like
        Right-hand side.
    cfg : CGConfig
    """
    b = np.asarray(b, dtype=np.complex128)
    x = np.zeros_like(b) if cfg.initial is None else np.array(cfg.initial, dtype=np.complex128)
    if x.shape != b.shape:
        raise ValueError(f"initial guess has shape {x.shape}, expected {b.shape}")
    r = b - apply_A(x) if np.any(x) else b.copy()
    scale = float(np.linalg.norm(b)) if cfg.relative else 1.0
    if scale == 0.0:
        scale = 1.0
    rr = float(np.vdot(r, r).real)
    history = [np.sqrt(rr)]
    p = r.copy()
    k = 0
    while np.sqrt(rr) / scale > cfg.tol and k < cfg.max_iter:
        Ap = apply_A(p)
        alpha = rr / float(np.vdot(p, Ap).real)
        x = x + alpha * p
        r = r - alpha * Ap
        rr_new = float(np.vdot(r, r).real)
        p = r + (rr_new / rr) * p
        rr = rr_new
        k += 1
        history.append(np.sqrt(rr))
    res = float(np.sqrt(rr))
    return CGResult(x, k, res / scale <= cfg.tol, res, history)


def inverse_fdst(plan: TransformPlan, C: ShearletCoefficients, cfg: CGConfig | None = None) -> CGResult:
    """Invert the transform by conjugate gradients on ``P* w P I = P* sqrt(w) W* C``.

    Returns the final iterate with a convergence flag; non-convergence is not
    an exception.
    """
    cfg = cfg or CGConfig()
    b = adjoint_fdst(plan, C)
    return conjugate_gradient(lambda x: gram_apply(x, plan.weights), b, cfg)


def shear_grid(J: npt.ArrayLike, params: GridParams, t: float) -> npt.NDArray[np.complex128]:
    """Exact frequency-domain shear on sector 2: ``J_t(wx, wy) = J(wx, wy - t wx)``.

    On sector 2 this moves column ``l`` to ``l - tN/2``; entries shifted in
    from outside the grid are zero. Sector 1 is left unchanged.

    Raises
    ------
    ValueError
        If ``tN/2`` is not an integer.
    """
    x = np.asarray(J, dtype=np.complex128)
    shift = t * params.N / 2
    if shift != round(shift):
        raise ValueError(f"t*N/2 = {shift} must be an integer")
    d = int(round(shift))
    out = x.copy()
    out[1] = 0.0
    n = params.n_angular
    # out[l] = x[l + d]
    if d >= 0:
        out[1, :, : n - d] = x[1, :, d:]
    else:
        out[1, :, -d:] = x[1, :, : n + d]
    return out


def shear_coefficient_check(plan: TransformPlan, I: npt.ArrayLike, j: int, s: int, t: float) -> float:
    """Shear covariance defect of the windowing on the cones 21 and 22.

    Builds ``J = P I`` and its exact frequency shear ``J_t`` (see
    :func:`shear_grid`) and returns
    ``max_m |c_t(j, s, m) - c(j, s + 2^j t, m)| / ||I||`` over both cones, where
    ``c`` denotes windowing coefficients. With block-corner index origins the
    phase factor is one.

    Raises
    ------
    ValueError
        If ``2^j t`` is not an integer or the shears leave ``(-2^j, 2^j)``.
    """
    if j < 0:
        raise ValueError("shear covariance needs a scale j >= 0")
    shift = 2**j * t
    if shift != round(shift):
        raise ValueError(f"2^j t = {shift} must be an integer")
    s2 = s + int(round(shift))
    lim = 2**j
    if not (-lim < s < lim and -lim < s2 < lim):
        raise ValueError(f"shears {s} and {s2} must lie strictly inside (-{lim}, {lim})")
    x = np.asarray(I, dtype=np.complex128)
    J = ppft(x, plan.params)
    c = analyze(J, plan.table, plan.bank)
    ct = analyze(shear_grid(J, plan.params, t), plan.table, plan.bank)
    worst = 0.0
    for iota in (21, 22):
        a = ct[SubbandIndex(iota, j, s)]
        b = c[SubbandIndex(iota, j, s2)]
        worst = max(worst, float(np.max(np.abs(a - b))))
    return worst / float(np.linalg.norm(x))
