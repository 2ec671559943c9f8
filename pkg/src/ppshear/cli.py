"""Command-line interface.

Subcommands are ``fdst``, ``adjoint``, ``inverse``, ``weights``, ``measure``
and ``bench``. Exit codes: 0 on success, 1 for bad usage, unreadable input or
geometry mismatch, 2 when the inverse does not converge or the weight fit
fails.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .grid import GridParams
from .images import RNGSpec, parse_generator, random_images
from .io import FormatError, WeightCache, read_coefficients, read_image, write_coefficients, write_image
from .measures import (
    MEASURES,
    MeasureReport,
    measure_d1,
    measure_d2,
    measure_d3,
    measure_d4,
    measure_d5,
    measure_d6,
    measure_d7,
    measure_d8,
    reports_to_csv,
)
from .shearlets import PROFILES, build_window_bank, highest_scale, scale_shear_table
from .transform import CGConfig, TransformPlan, adjoint_fdst, fdst, inverse_fdst
from .weights import CHOICES, isometry_defect

__all__ = ["main", "RunConfig", "build_parser"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILED = 2

DEFAULT_N = 512
DEFAULT_R = 8


class UsageError(Exception):
    """Bad input that maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would exit with 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunConfig:
    """Resolved settings of one invocation.

    ``N`` and ``R`` are ``None`` when not given on the command line, in which
    case commands take them from their input or fall back to 512 and 8.
    """

    command: str
    N: int | None
    R: int | None
    choice: int
    profile: str
    tol: float
    max_iter: int
    seed: int
    cache_dir: str | None
    gen: str | None
    inp: str | None
    out: str | None

    @property
    def n(self) -> int:
        return DEFAULT_N if self.N is None else self.N

    @property
    def r(self) -> int:
        return DEFAULT_R if self.R is None else self.R

    def cg(self) -> CGConfig:
        return CGConfig(tol=self.tol, max_iter=self.max_iter)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=None, help=f"image size N (default {DEFAULT_N})")
    common.add_argument("--r", type=int, default=None, help=f"oversampling factor R (default {DEFAULT_R})")
    common.add_argument("--choice", type=int, default=1, choices=CHOICES, help="weight design (default 1)")
    common.add_argument("--profile", default="c1", choices=PROFILES, help="window profile (default c1)")
    common.add_argument("--tol", type=float, default=1e-6, help="CG residual tolerance (default 1e-6)")
    common.add_argument("--max-iter", type=int, default=100, help="CG iteration cap (default 100)")
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--cache-dir", default=None, help="weight cache directory (default $PPSHEAR_CACHE_DIR)")
    common.add_argument("--gen", default=None, help="built-in input image, e.g. line:t=0 or gaussian:var=256")

    parser = _Parser(prog="ppshear", description="Fast digital shearlet transform on the pseudo-polar grid.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fdst", parents=[common], help="forward transform of an image")
    p.add_argument("--in", dest="inp", help="input image (raw or PGM); alternative to --gen")
    p.add_argument("--out", required=True, help="output coefficient container")

    for name, what in (("adjoint", "adjoint transform"), ("inverse", "CG inverse")):
        p = sub.add_parser(name, parents=[common], help=f"{what} of a coefficient container")
        p.add_argument("--in", dest="inp", required=True, help="input coefficient container")
        p.add_argument("--out", required=True, help="output image (.pgm for PGM, raw otherwise)")

    p = sub.add_parser("weights", parents=[common], help="fit or load cached weights")
    p.add_argument("--refresh", action="store_true", help="refit even when cached")

    p = sub.add_parser("measure", parents=[common], help="run quality measures and write CSVs")
    p.add_argument("ids", nargs="+", choices=(*MEASURES, "all"), help="measures to run")
    p.add_argument("--out-dir", dest="out", default=".", help="directory for CSV files (default .)")

    sub.add_parser("bench", parents=[common], help="time forward, adjoint and inverse transforms")
    return parser


def _config(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=ns.command,
        N=ns.n,
        R=ns.r,
        choice=ns.choice,
        profile=ns.profile,
        tol=ns.tol,
        max_iter=ns.max_iter,
        seed=ns.seed,
        cache_dir=ns.cache_dir,
        gen=ns.gen,
        inp=getattr(ns, "inp", None),
        out=getattr(ns, "out", None),
    )


def _params(N: int, R: int) -> GridParams:
    try:
        return GridParams(N, R)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _plan(cfg: RunConfig, params: GridParams) -> TransformPlan:
    w, _ = WeightCache(cfg.cache_dir).get(params, cfg.choice)
    return TransformPlan(params, w, build_window_bank(cfg.profile), scale_shear_table(params))


def _input_image(cfg: RunConfig) -> np.ndarray:
    if (cfg.inp is None) == (cfg.gen is None):
        raise UsageError("give exactly one of --in and --gen")
    if cfg.gen is not None:
        try:
            return parse_generator(cfg.gen, cfg.n)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    img = read_image(cfg.inp)
    if img.shape[0] != img.shape[1]:
        raise UsageError(f"image must be square, got {img.shape}")
    if cfg.N is not None and cfg.N != img.shape[0]:
        raise UsageError(f"--n {cfg.N} does not match the {img.shape[0]}x{img.shape[0]} input image")
    return img


def _coefficients(cfg: RunConfig):
    C = read_coefficients(cfg.inp)
    p = C.params
    if (cfg.N is not None and cfg.N != p.N) or (cfg.R is not None and cfg.R != p.R):
        raise UsageError(f"container has N={p.N}, R={p.R}; requested N={cfg.N}, R={cfg.R}")
    return C


def cmd_fdst(cfg: RunConfig) -> int:
    img = _input_image(cfg)
    params = _params(img.shape[0], cfg.r)
    write_coefficients(cfg.out, fdst(_plan(cfg, params), img))
    return EXIT_OK


def cmd_adjoint(cfg: RunConfig) -> int:
    C = _coefficients(cfg)
    write_image(cfg.out, adjoint_fdst(_plan(cfg, C.params), C))
    return EXIT_OK


def cmd_inverse(cfg: RunConfig) -> int:
    C = _coefficients(cfg)
    res = inverse_fdst(_plan(cfg, C.params), C, cfg.cg())
    write_image(cfg.out, res.image)
    print(f"iterations {res.iterations} residual {res.residual:.6e}", file=sys.stderr)
    if not res.converged:
        print(f"inverse did not converge: residual {res.residual:.6e} > tol {cfg.tol:g}", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def cmd_weights(cfg: RunConfig, refresh: bool) -> int:
    params = _params(cfg.n, cfg.r)
    cache = WeightCache(cfg.cache_dir)
    w, hit = cache.get(params, cfg.choice, refresh=refresh)
    print(f"cache {'hit' if hit else 'written'} {cache.path(params, cfg.choice)}")
    print(f"N {params.N} R {params.R} choice {w.choice}")
    print("coefficients " + " ".join(f"{c:.12e}" for c in w.coeffs))
    print(f"residual_norm {w.residual_norm:.6e}")
    defects = isometry_defect(w, random_images(RNGSpec(cfg.seed), (params.N, params.N), 5))
    print(f"isometry_defect_mean {np.mean(defects):.6e}")
    print(f"isometry_defect_max {max(defects):.6e}")
    return EXIT_OK


def _run_measure(mid: str, cfg: RunConfig) -> list[MeasureReport]:
    params = _params(cfg.n, cfg.r)
    rng = RNGSpec(cfg.seed)
    if mid == "d6":
        top = int(math.log2(params.N))
        if top < 6:
            raise UsageError("d6 needs N >= 64 to fit a slope over at least two sizes")
        return measure_d6(lambda N: _plan(cfg, _params(N, cfg.r)), tuple(range(5, top + 1)), rng)
    plan = _plan(cfg, params)
    if mid == "d1":
        return measure_d1(plan, rng)
    if mid == "d2":
        return measure_d2(plan, rng, cfg.cg())
    if mid == "d3":
        return measure_d3(plan, rng, cfg.cg())
    if mid == "d4":
        return measure_d4(plan, min(3, highest_scale(params.N)))
    if mid == "d5":
        scales = tuple(j for j in (1, 2, 3, 4) if j <= highest_scale(params.N))
        return measure_d5(plan, scales=scales)
    if mid == "d7":
        return measure_d7(plan)
    return measure_d8(plan, cg=cfg.cg())


def _summary_value(r: MeasureReport) -> str:
    if len(r.points) == 1:
        return f"{r.value:.6g}"
    return " ".join(f"{y:.4g}" for y in r.ordinates)


def cmd_measure(cfg: RunConfig, ids: Sequence[str]) -> int:
    chosen = MEASURES if "all" in ids else tuple(dict.fromkeys(ids))
    out = Path(cfg.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    print(f"{'measure':<8} {'name':<16} value")
    for mid in chosen:
        reports = _run_measure(mid, cfg)
        for name, text in reports_to_csv(reports).items():
            (out / name).write_text(text)
        for r in reports:
            print(f"{r.measure:<8} {r.id:<16} {_summary_value(r)}")
    return EXIT_OK


def cmd_bench(cfg: RunConfig) -> int:
    params = _params(cfg.n, cfg.r)
    t0 = time.perf_counter()
    plan = _plan(cfg, params)
    t_plan = time.perf_counter() - t0
    img = RNGSpec(cfg.seed).generator().standard_normal((params.N, params.N))
    fdst(plan, img)
    t0 = time.perf_counter()
    C = fdst(plan, img)
    t_f = time.perf_counter() - t0
    t0 = time.perf_counter()
    adjoint_fdst(plan, C)
    t_a = time.perf_counter() - t0
    t0 = time.perf_counter()
    res = inverse_fdst(plan, C, cfg.cg())
    t_i = time.perf_counter() - t0
    print(f"N {params.N} R {params.R} choice {cfg.choice} coefficients {C.table.coefficient_count()}")
    print(f"plan     {t_plan:.4f} s")
    print(f"fdst     {t_f:.4f} s")
    print(f"adjoint  {t_a:.4f} s")
    print(f"inverse  {t_i:.4f} s ({res.iterations} iterations, residual {res.residual:.3e})")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    cfg = _config(ns)
    try:
        if cfg.command == "fdst":
            return cmd_fdst(cfg)
        if cfg.command == "adjoint":
            return cmd_adjoint(cfg)
        if cfg.command == "inverse":
            return cmd_inverse(cfg)
        if cfg.command == "weights":
            return cmd_weights(cfg, ns.refresh)
        if cfg.command == "measure":
            return cmd_measure(cfg, ns.ids)
        return cmd_bench(cfg)
    except (UsageError, FormatError, OSError, ValueError) as exc:
        print(f"ppshear: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RuntimeError as exc:
        print(f"ppshear: error: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
