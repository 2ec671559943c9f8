"""Quantitative quality measures for the shearlet transform.

Each ``measure_dX`` returns a list of :class:`MeasureReport`, one per named
sub-measure. Reports hold scalars as a single ``(0, value)`` pair and curves as
explicit ``(abscissa, ordinate)`` pairs. Random inputs come from a
:class:`~ppshear.images.RNGSpec`, so every report is reproducible from the
plan and the seed.
"""

from __future__ import annotations

import io
import math
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from .frft import fft2_unaliased
from .images import RNGSpec, gaussian_image, line_image, random_images
from .shearlets import ShearletCoefficients, SubbandIndex, analyze, synthesize
from .transform import CGConfig, TransformPlan, adjoint_fdst, conjugate_gradient, fdst, inverse_fdst
from .weights import gram_apply, gram_extreme_eigenvalues

__all__ = [
    "MeasureReport",
    "reports_to_csv",
    "decay_rate",
    "holder_exponents",
    "loglog_slope",
    "scale_maxima",
    "aligned_mask",
    "measure_d1",
    "measure_d2",
    "measure_d3",
    "measure_d4",
    "measure_d5",
    "measure_d6",
    "measure_d7",
    "measure_d8",
    "MEASURES",
]

N_IMAGES = 5
_LOG_FLOOR = 1e-300


@dataclass
class MeasureReport:
    """One named measurement.

    Attributes
    ----------
    measure : str
        Family id ``d1`` .. ``d8``.
    id : str
        Sub-measure name such as ``M_alg``.
    points : list of (float, float)
        ``(abscissa, ordinate)`` pairs; scalars use abscissa 0.
    metadata : dict
        ``N``, ``R``, ``choice``, ``seed`` and ``runtime`` in seconds, plus
        optional flags.
    """

    measure: str
    id: str
    points: list[tuple[float, float]]
    metadata: dict = field(default_factory=dict)

    @property
    def value(self) -> float:
        """The ordinate of a scalar report."""
        if len(self.points) != 1:
            raise ValueError(f"{self.id} is a curve with {len(self.points)} points")
        return self.points[0][1]

    @property
    def ordinates(self) -> list[float]:
        return [y for _, y in self.points]

    def to_csv(self) -> str:
        """CSV text: two comment lines naming the run, then ``abscissa,ordinate`` rows.

        Runtime is left out so identical runs produce identical bytes.
        """
        md = self.metadata
        buf = io.StringIO()
        buf.write("# measure,id,N,R,choice,seed\n")
        buf.write(f"# {self.measure},{self.id},{md.get('N', '')},{md.get('R', '')},"
                  f"{md.get('choice', '')},{md.get('seed', '')}\n")
        buf.write("abscissa,ordinate\n")
        for x, y in self.points:
            buf.write(f"{x!r},{y!r}\n")
        return buf.getvalue()


def reports_to_csv(reports: Sequence[MeasureReport]) -> dict[str, str]:
    """Map ``"<measure>_<id>.csv"`` file names to CSV text."""
    return {f"{r.measure}_{r.id}.csv": r.to_csv() for r in reports}


def _scalar(measure: str, name: str, value: float, md: dict) -> MeasureReport:
    return MeasureReport(measure, name, [(0.0, float(value))], dict(md))


def _curve(measure: str, name: str, xs: Sequence[float], ys: Sequence[float], md: dict) -> MeasureReport:
    return MeasureReport(measure, name, [(float(x), float(y)) for x, y in zip(xs, ys)], dict(md))


def _meta(plan: TransformPlan, seed: int | None = None) -> dict:
    md = {"N": plan.params.N, "R": plan.params.R, "choice": plan.weights.choice}
    if seed is not None:
        md["seed"] = seed
    return md


def _rel(a: npt.ArrayLike, b: npt.ArrayLike) -> float:
    b = np.asarray(b)
    return float(np.linalg.norm(np.asarray(a) - b) / np.linalg.norm(b))


# ---------------------------------------------------------------- estimators


def loglog_slope(x: npt.ArrayLike, y: npt.ArrayLike) -> float:
    """Least-squares slope of ``y`` against ``x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xc = x - x.mean()
    den = float(np.dot(xc, xc))
    return 0.0 if den == 0.0 else float(np.dot(xc, y - y.mean()) / den)


def decay_rate(profile: npt.ArrayLike) -> tuple[float, bool]:
    """Decay exponent of a profile sampled outward from a centre.

    The smallest non-increasing majorant is the running maximum scanned from
    the far end. Its logarithm is fitted by least squares against
    ``log(1 + offset)``.

    Returns
    -------
    slope : float
    degenerate : bool
        True when the majorant is constant (slope 0).
    """
    p = np.abs(np.asarray(profile, dtype=float))
    major = np.maximum.accumulate(p[::-1])[::-1]
    logm = np.log(np.maximum(major, _LOG_FLOOR))
    degenerate = bool(np.all(major == major[0]))
    if degenerate:
        return 0.0, True
    return loglog_slope(np.log(np.arange(1, p.size + 1)), logm), False


def _half_line_rates(A: npt.NDArray) -> tuple[npt.NDArray[np.float64], int]:
    """Decay rates along the ``N`` columns then the ``N`` rows, starting at the centre."""
    N = A.shape[0]
    c = N // 2
    rates, degenerate = [], 0
    for col in range(N):
        d, flag = decay_rate(A[c:, col])
        rates.append(d)
        degenerate += flag
    for row in range(N):
        d, flag = decay_rate(A[row, c:])
        rates.append(d)
        degenerate += flag
    return np.array(rates), degenerate


def holder_exponents(A: npt.ArrayLike, radius: int = 4) -> npt.NDArray[np.float64]:
    """Local Hoelder exponent at every pixel.

    At ``x0`` the exponent is the least-squares slope of
    ``log|A(x) - A(x0)|`` against ``log|x - x0|`` over the neighbours with
    ``0 < max(|du|, |dv|) <= radius`` that lie inside the image.
    """
    a = np.asarray(A)
    n0, n1 = a.shape
    sx = np.zeros(a.shape)
    sy = np.zeros(a.shape)
    sxx = np.zeros(a.shape)
    sxy = np.zeros(a.shape)
    cnt = np.zeros(a.shape)
    for du in range(-radius, radius + 1):
        for dv in range(-radius, radius + 1):
            if du == 0 and dv == 0:
                continue
            # target pixels x0 whose neighbour x0 + (du, dv) is inside the image
            t0 = slice(max(0, -du), n0 - max(0, du))
            t1 = slice(max(0, -dv), n1 - max(0, dv))
            s0 = slice(max(0, du), n0 - max(0, -du))
            s1 = slice(max(0, dv), n1 - max(0, -dv))
            x = 0.5 * math.log(du * du + dv * dv)
            y = np.log(np.maximum(np.abs(a[s0, s1] - a[t0, t1]), _LOG_FLOOR))
            sx[t0, t1] += x
            sxx[t0, t1] += x * x
            sy[t0, t1] += y
            sxy[t0, t1] += x * y
            cnt[t0, t1] += 1
    den = cnt * sxx - sx * sx
    return np.where(den > 0, (cnt * sxy - sx * sy) / np.where(den > 0, den, 1.0), 0.0)


# ------------------------------------------------------------ line analysis


def aligned_mask(plan: TransformPlan, t: float, transpose: bool = False) -> dict[SubbandIndex, bool]:
    """Classify every subband as aligned with the line ``v = t u`` or not.

    The line's spectrum lives on ``l = tN/2`` of sector 1 (sector 2 when
    transposed). At scale ``j >= 0`` the aligned shear there is
    ``round(2^j t)``; for ``|t| = 1`` the seam shear ``2^j sign(t)`` of the
    other sector is aligned as well. Negative scales have one block per cone,
    aligned in the line's sector.
    """
    main = 2 if transpose else 1
    out = {}
    for b in plan.table.bands:
        idx = b.index
        if idx.j < 0:
            hit = idx.sector == main or abs(t) == 1
        elif idx.sector == main:
            hit = idx.s == int(np.floor(2**idx.j * t + 0.5))
        else:
            hit = abs(t) == 1 and idx.s == int(2**idx.j * np.sign(t))
        out[idx] = hit
    return out


def scale_maxima(
    plan: TransformPlan, coeffs: ShearletCoefficients, mask: dict[SubbandIndex, bool]
) -> tuple[list[int], list[float], list[float]]:
    """Per scale, the largest aligned and largest non-aligned coefficient modulus."""
    scales = list(plan.table.scales())
    al = {j: 0.0 for j in scales}
    na = {j: 0.0 for j in scales}
    for idx, hit in mask.items():
        m = float(np.max(np.abs(coeffs[idx])))
        target = al if hit else na
        target[idx.j] = max(target[idx.j], m)
    return scales, [al[j] for j in scales], [na[j] for j in scales]


# ------------------------------------------------------------------ measures


def measure_d1(plan: TransformPlan, rng: RNGSpec = RNGSpec(0)) -> list[MeasureReport]:
    """Tight-frame defect ``max_i ||W* W J_i - J_i|| / ||J_i||`` over random grid arrays."""
    t0 = time.perf_counter()
    worst = 0.0
    for J in random_images(rng, plan.params.shape, N_IMAGES):
        back = synthesize(analyze(J, plan.table, plan.bank), plan.table, plan.bank)
        worst = max(worst, _rel(back, J))
    md = _meta(plan, rng.seed) | {"runtime": time.perf_counter() - t0}
    return [_scalar("d1", "M_alg", worst, md)]


def measure_d2(
    plan: TransformPlan, rng: RNGSpec = RNGSpec(0), cg: CGConfig = CGConfig(), eig_tol: float = 1e-8
) -> list[MeasureReport]:
    """Isometry of the weighted pseudo-polar transform.

    Reports ``M_isom1`` (worst of five ``||P* w P I - I|| / ||I||``),
    ``M_isom_mean`` (their mean), ``M_isom2`` (``lambda_max / lambda_min`` of
    ``P* w P``) and ``M_isom3`` (worst conjugate-gradient inversion error of
    ``sqrt(w) P``).
    """
    t0 = time.perf_counter()
    w = plan.weights
    imgs = random_images(rng, (plan.params.N, plan.params.N), N_IMAGES)
    defects = [_rel(gram_apply(I, w), I) for I in imgs]
    lo, hi, ok = gram_extreme_eigenvalues(w, eig_tol)
    inv = []
    for I in imgs:
        b = gram_apply(I, w)  # P* sqrt(w) (sqrt(w) P I)
        inv.append(_rel(conjugate_gradient(lambda x: gram_apply(x, w), b, cg).image, I))
    md = _meta(plan, rng.seed) | {"runtime": time.perf_counter() - t0}
    return [
        _scalar("d2", "M_isom1", max(defects), md),
        _scalar("d2", "M_isom_mean", float(np.mean(defects)), md),
        _scalar("d2", "M_isom2", hi / lo, md | {"eig_converged": ok, "lambda_min": lo, "lambda_max": hi}),
        _scalar("d2", "M_isom3", max(inv), md),
    ]


def measure_d3(plan: TransformPlan, rng: RNGSpec = RNGSpec(0), cg: CGConfig = CGConfig()) -> list[MeasureReport]:
    """Tightness of the full transform: adjoint (``M_tight1``) and CG inverse (``M_tight2``)."""
    t0 = time.perf_counter()
    adj, inv = [], []
    for I in random_images(rng, (plan.params.N, plan.params.N), N_IMAGES):
        C = fdst(plan, I)
        adj.append(_rel(adjoint_fdst(plan, C), I))
        inv.append(_rel(inverse_fdst(plan, C, cg).image, I))
    md = _meta(plan, rng.seed) | {"runtime": time.perf_counter() - t0}
    return [_scalar("d3", "M_tight1", max(adj), md), _scalar("d3", "M_tight2", max(inv), md)]


def reference_shearlet(plan: TransformPlan, j: int = 3) -> npt.NDArray[np.complex128]:
    """Spatial image of the sum of the cone-11 and cone-12 atoms at scale ``j``, shear 0, position 0."""
    if j not in plan.table.scales():
        raise ValueError(f"scale {j} outside [{plan.table.j_low}, {plan.table.j_high}]")
    C = ShearletCoefficients.zeros(plan.table)
    for iota in (11, 12):
        C[SubbandIndex(iota, j, 0)][0, 0] = 1.0
    return adjoint_fdst(plan, C)


def measure_d4(plan: TransformPlan, j: int = 3) -> list[MeasureReport]:
    """Space-frequency localisation of the reference shearlet.

    ``M_decay1`` averages the ``2N`` half-line decay rates of ``|I|``;
    ``M_supp`` is the largest ``|FFT(I)|`` on the centred ``7 x 7`` block over
    the global maximum; ``M_decay2`` sums the first ``N`` frequency-domain
    rates and divides by ``2N``; ``M_smooth1`` and ``M_smooth2`` average the
    local Hoelder exponents of ``I`` and ``FFT(I)``.
    """
    t0 = time.perf_counter()
    img = reference_shearlet(plan, j)
    spec = fft2_unaliased(img)
    N = plan.params.N
    c = N // 2
    d_space, deg1 = _half_line_rates(np.abs(img))
    d_freq, deg2 = _half_line_rates(np.abs(spec))
    a = np.abs(spec)
    supp = float(a[c - 3 : c + 4, c - 3 : c + 4].max() / a.max())
    md = _meta(plan) | {"runtime": time.perf_counter() - t0, "scale": j}
    return [
        _scalar("d4", "M_decay1", float(d_space.mean()), md | {"degenerate_lines": deg1}),
        _scalar("d4", "M_supp", supp, md),
        _scalar("d4", "M_decay2", float(d_freq[:N].sum() / (2 * N)), md | {"degenerate_lines": deg2}),
        _scalar("d4", "M_smooth1", float(holder_exponents(img).mean()), md),
        _scalar("d4", "M_smooth2", float(holder_exponents(spec).mean()), md),
    ]


def measure_d5(plan: TransformPlan, s: float = 0.5, scales: Sequence[int] = (1, 2, 3, 4)) -> list[MeasureReport]:
    """Shear covariance of the transform of a line.

    The reference image is the line ``u = 0``; its sheared version
    ``I_s(u, v) = I(u + s v, v)`` is the digital line ``u = floor(-s v + 1/2)``.
    For each scale the curve value is
    ``max_k ||C_{j,k}(S I_s) - C_{j,k+2^j s}(S I)|| / ||I||`` over shears with
    ``-2^j < k, k + 2^j s < 2^j``, where ``C_{j,k}`` gathers the cones 21 and 22.

    Raises
    ------
    ValueError
        If ``2^j s`` is not an integer for some scale.
    """
    t0 = time.perf_counter()
    N = plan.params.N
    ref = line_image(N, 0.0, transpose=True)
    sheared = line_image(N, -s, transpose=True)
    c0, cs = fdst(plan, ref), fdst(plan, sheared)
    nrm = float(np.linalg.norm(ref))
    vals = []
    for j in scales:
        shift = 2**j * s
        if shift != round(shift):
            raise ValueError(f"2^{j} * {s} is not an integer")
        d = int(round(shift))
        lim = 2**j
        worst = 0.0
        for k in range(-lim + 1, lim):
            if not -lim < k + d < lim:
                continue
            diff = sum(
                np.linalg.norm(cs[SubbandIndex(i, j, k)] - c0[SubbandIndex(i, j, k + d)]) ** 2 for i in (21, 22)
            )
            worst = max(worst, math.sqrt(diff) / nrm)
        vals.append(worst)
    md = _meta(plan) | {"runtime": time.perf_counter() - t0, "shear": s}
    return [_curve("d5", "M_shear", scales, vals, md)]


def measure_d6(
    plan_factory: Callable[[int], TransformPlan],
    sizes: Sequence[int] = (5, 6, 7, 8, 9),
    rng: RNGSpec = RNGSpec(0),
    repeats: int = 3,
) -> list[MeasureReport]:
    """Speed of the forward transform on ``2^i x 2^i`` random images.

    Plans are built outside the timed region. Each size is timed ``repeats``
    times and the median kept. ``M_speed1`` is the least-squares slope of
    ``log s_i`` against ``i`` divided by ``2 log 2``; ``M_speed2`` the mean of
    ``s_i / 4^(i M_speed1)``; ``M_speed3`` the mean ratio to ``numpy.fft.fft2``.
    """
    gen = rng.generator()
    secs, ffts = [], []
    md: dict = {"seed": rng.seed}
    for i in sizes:
        N = 2**i
        plan = plan_factory(N)
        md.update(R=plan.params.R, choice=plan.weights.choice)
        img = gen.standard_normal((N, N))
        fdst(plan, img)  # warm caches outside the timing
        runs, fruns = [], []
        for _ in range(repeats):
            t0 = time.perf_counter()
            fdst(plan, img)
            runs.append(time.perf_counter() - t0)
            t0 = time.perf_counter()
            for _ in range(10):
                np.fft.fft2(img)
            fruns.append((time.perf_counter() - t0) / 10)
        secs.append(float(np.median(runs)))
        ffts.append(float(np.median(fruns)))
    i = np.asarray(sizes, dtype=float)
    d = loglog_slope(i, np.log(secs)) / (2 * math.log(2))
    c = float(np.mean([s / (4.0**k) ** d for s, k in zip(secs, i)]))
    ratio = float(np.mean(np.asarray(secs) / np.asarray(ffts)))
    md["N"] = f"{2 ** sizes[0]}-{2 ** sizes[-1]}"
    return [
        _scalar("d6", "M_speed1", d, md),
        _scalar("d6", "M_speed2", c, md),
        _scalar("d6", "M_speed3", ratio, md),
        _curve("d6", "seconds", [2**k for k in sizes], secs, md),
    ]


D7_SLOPES = ((-1.0, False), (-0.5, False), (0.0, False), (0.5, False), (1.0, False),
             (-0.5, True), (0.0, True), (0.5, True))


def measure_d7(plan: TransformPlan) -> list[MeasureReport]:
    """Decay of aligned and non-aligned coefficients over scale for eight lines.

    The lines have slopes ``-1, -1/2, 0, 1/2, 1`` plus the transposes of the
    middle three. Per scale the largest aligned and non-aligned moduli are
    averaged over the eight images; ``M_geo1`` and ``M_geo2`` are the
    least-squares slopes of their base-2 logarithms against ``j``.
    """
    t0 = time.perf_counter()
    N = plan.params.N
    al_sum = None
    na_sum = None
    for t, tr in D7_SLOPES:
        C = fdst(plan, line_image(N, t, tr))
        scales, al, na = scale_maxima(plan, C, aligned_mask(plan, t, tr))
        al_sum = np.array(al) if al_sum is None else al_sum + al
        na_sum = np.array(na) if na_sum is None else na_sum + na
    al_mean = al_sum / len(D7_SLOPES)
    na_mean = na_sum / len(D7_SLOPES)
    g1 = loglog_slope(scales, np.log2(np.maximum(al_mean, _LOG_FLOOR)))
    g2 = loglog_slope(scales, np.log2(np.maximum(na_mean, _LOG_FLOOR)))
    md = _meta(plan) | {"runtime": time.perf_counter() - t0}
    return [
        _scalar("d7", "M_geo1", g1, md),
        _scalar("d7", "M_geo2", g2, md),
        _curve("d7", "aligned_max", scales, al_mean, md),
        _curve("d7", "nonaligned_max", scales, na_mean, md),
    ]


def keep_largest(C: ShearletCoefficients, fraction: float) -> ShearletCoefficients:
    """Zero all but the ``round(fraction * count)`` coefficients of largest modulus."""
    v = C.to_vector()
    keep = int(round(fraction * v.size))
    out = np.zeros_like(v)
    if keep > 0:
        idx = np.argpartition(np.abs(v), v.size - keep)[v.size - keep :]
        out[idx] = v[idx]
    return ShearletCoefficients.from_vector(C.table, out)


def hard_threshold(C: ShearletCoefficients, level: float) -> ShearletCoefficients:
    """Zero the coefficients with modulus below ``level``."""
    return C.map(lambda a: np.where(np.abs(a) < level, 0.0, a))


def quantize(C: ShearletCoefficients, step: float) -> ShearletCoefficients:
    """Round real and imaginary parts to multiples of ``step``."""
    return C.map(lambda a: (np.round(a.real / step) + 1j * np.round(a.imag / step)) * step)


def measure_d8(
    plan: TransformPlan,
    p1: Sequence[float] = (2, 4, 6, 8, 10),
    p2: Sequence[float] = (0.001, 0.011, 0.021, 0.031, 0.041),
    q: Sequence[float] = (8, 7.5, 7, 6.5, 6),
    cg: CGConfig = CGConfig(),
    var: float = 256.0,
) -> list[MeasureReport]:
    """Reconstruction error after thresholding or quantising the coefficients of a Gaussian.

    ``M_thres1`` keeps the fraction ``2^-p1`` of largest coefficients,
    ``M_thres2`` zeroes coefficients below ``m (1 - 2^-p2)`` and ``M_quant``
    rounds to steps of ``m / 2^q``, where ``m`` is the largest modulus.
    Images are recovered by conjugate gradients.
    """
    t0 = time.perf_counter()
    img = gaussian_image(plan.params.N, var)
    C = fdst(plan, img)
    m = max(float(np.max(np.abs(a))) for a in C.blocks.values())

    def err(D: ShearletCoefficients) -> float:
        return _rel(inverse_fdst(plan, D, cg).image, img)

    t1 = [err(keep_largest(C, 2.0 ** (-p))) for p in p1]
    t2 = [err(hard_threshold(C, m * (1.0 - 2.0 ** (-p)))) for p in p2]
    qq = [err(quantize(C, m / 2.0**k)) for k in q]
    md = _meta(plan) | {"runtime": time.perf_counter() - t0}
    return [
        _curve("d8", "M_thres1", p1, t1, md),
        _curve("d8", "M_thres2", p2, t2, md),
        _curve("d8", "M_quant", q, qq, md),
    ]


MEASURES = ("d1", "d2", "d3", "d4", "d5", "d6", "d7", "d8")
