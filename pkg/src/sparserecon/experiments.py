"""Problem generators, metrics and the benchmark sweep.

The tomographic test problem follows the classic setup: a Shepp-Logan
phantom is measured through selected 2-D DFT coefficients on a star of
radial lines, while the unknown is the phantom's orthonormal Haar
coefficient vector.  That composition has exactly orthonormal rows, so the
fast thresholding path applies.

``benchmark_sweep`` reruns each enabled method over a range of sampling
densities and reports PSNR / iteration counts per cell; output is
deterministic for a fixed seed (timings aside).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .dore import dore_run
from .errors import InputError
from .model_selection import adore_run
from .operators import (
    ComposedOperator,
    DenseOperator,
    HaarBasis,
    PartialDft2Operator,
    SensingOperator,
    haar_dwt_2d,
)
from .recon import (
    StoppingRule,
    ecme_run,
    iht_run,
    minimum_norm_estimate,
)

# Ten-ellipse Shepp-Logan head phantom, the community-standard table:
# intensity, semi-axis a, semi-axis b, center x0, center y0, rotation (deg).
SHEPP_LOGAN_ELLIPSES = np.array([
    [1.0,  0.69,   0.92,   0.0,   0.0,     0.0],
    [-0.8, 0.6624, 0.8740, 0.0,  -0.0184,  0.0],
    [-0.2, 0.1100, 0.3100, 0.22,  0.0,   -18.0],
    [-0.2, 0.1600, 0.4100, -0.22, 0.0,    18.0],
    [0.1,  0.2100, 0.2500, 0.0,   0.35,    0.0],
    [0.1,  0.0460, 0.0460, 0.0,   0.1,     0.0],
    [0.1,  0.0460, 0.0460, 0.0,  -0.1,     0.0],
    [0.1,  0.0460, 0.0230, -0.08, -0.605,  0.0],
    [0.1,  0.0230, 0.0230, 0.0,  -0.606,   0.0],
    [0.1,  0.0230, 0.0460, 0.06, -0.605,   0.0],
])


def psnr(reference, estimate) -> float:
    """Peak signal-to-noise ratio 10 log10(range^2 / mse) in dB.

    The peak range comes from the reference; an exact match returns +inf.
    A constant reference has no range and is rejected.
    """
    reference = np.asarray(reference, dtype=float).ravel()
    estimate = np.asarray(estimate, dtype=float).ravel()
    if reference.shape != estimate.shape:
        raise InputError("reference and estimate must have equal length")
    peak = float(reference.max() - reference.min())
    if peak == 0.0:
        raise InputError("PSNR is undefined for a constant reference")
    mse = float(np.mean((estimate - reference) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def phantom(side: int) -> np.ndarray:
    """Shepp-Logan head phantom rasterized on a side x side grid.

    Pixel centers span [-1, 1] in both axes (rows run top to bottom, so the
    y coordinate decreases with the row index); a pixel's value is the sum
    of the intensities of the ellipses containing its center.  Requires a
    power-of-two side of at least 32 so the image composes with the Haar
    transform.
    """
    side = int(side)
    if side < 32:
        raise InputError(f"phantom side must be at least 32, got {side}")
    if side & (side - 1):
        raise InputError(f"phantom side must be a power of two, got {side}")
    axis = (np.arange(side) - (side - 1) / 2.0) / ((side - 1) / 2.0)
    x = np.tile(axis, (side, 1))
    y = np.rot90(x)
    image = np.zeros((side, side))
    for intensity, a, b, x0, y0, deg in SHEPP_LOGAN_ELLIPSES:
        phi = math.radians(deg)
        dx, dy = x - x0, y - y0
        cos_p, sin_p = math.cos(phi), math.sin(phi)
        inside = ((dx * cos_p + dy * sin_p) ** 2 / (a * a)
                  + (dy * cos_p - dx * sin_p) ** 2 / (b * b)) <= 1.0
        image[inside] += intensity
    return image


def radial_mask(side: int, n_lines: int) -> np.ndarray:
    """Boolean DFT-coefficient mask of n_lines radial lines through DC.

    Lines sit at angles k*pi/n_lines and are rasterized one point per
    column (or per row, for the steeper half) at offsets -(side/2 - 1) ..
    side/2 - 1 from the grid center, rounded to the nearest cell.  The
    result is returned in unshifted DFT index convention (DC at [0, 0],
    always included) and is symmetric under the conjugation map
    (k, l) -> (-k mod side, -l mod side).
    """
    side = int(side)
    if side < 2:
        raise InputError("mask side must be at least 2")
    if n_lines < 1:
        raise InputError("need at least one radial line")
    center = side // 2
    shifted = np.zeros((side, side), dtype=bool)
    offsets = np.arange(-(side // 2 - 1), side // 2)
    for k in range(n_lines):
        angle = k * math.pi / n_lines
        tangent = math.tan(angle)
        if abs(tangent) <= 1.0:
            rows = np.rint(tangent * offsets).astype(int)
            shifted[center + rows, center + offsets] = True
        else:
            cols = np.rint(offsets / tangent).astype(int)
            shifted[center + offsets, center + cols] = True
    return np.fft.ifftshift(shifted)


@dataclass(frozen=True)
class ProblemInstance:
    """A reconstruction problem: operator, measurements, optional ground truth."""

    operator: SensingOperator
    y: np.ndarray
    truth: np.ndarray | None
    truth_support_size: int | None
    seed: int


def random_instance(m: int, n_rows: int, r_true: int, noise_sigma: float,
                    seed: int) -> ProblemInstance:
    """Gaussian test ensemble: random dense H, planted r_true-sparse signal.

    Entries of H and the nonzero signal values are standard normal; the
    support is uniform without replacement.  y = H s + noise_sigma * n.
    Fully determined by the seed.
    """
    if not 1 <= n_rows <= m:
        raise InputError(f"need 1 <= N <= m, got N={n_rows}, m={m}")
    if not 0 <= r_true <= m:
        raise InputError(f"r_true={r_true} outside [0, {m}]")
    rng = np.random.default_rng(seed)
    matrix = rng.standard_normal((n_rows, m))
    truth = np.zeros(m)
    support = rng.choice(m, size=r_true, replace=False)
    truth[support] = rng.standard_normal(r_true)
    op = DenseOperator(matrix)
    y = op.apply(truth)
    if noise_sigma > 0:
        y = y + noise_sigma * rng.standard_normal(n_rows)
    return ProblemInstance(
        operator=op, y=y, truth=truth,
        truth_support_size=int(np.count_nonzero(truth)), seed=seed,
    )


def phantom_problem(side: int, n_lines: int, levels=None) -> ProblemInstance:
    """Noiseless tomographic problem: Haar coefficients of the phantom
    measured through the radial-line partial DFT.  The composed operator
    has orthonormal rows by construction."""
    image = phantom(side)
    truth = haar_dwt_2d(image, levels)
    sampler = PartialDft2Operator(radial_mask(side, n_lines))
    op = ComposedOperator(sampler, HaarBasis(side, levels))
    if not op.rows_orthonormal:
        raise InputError("phantom pipeline must have orthonormal rows")
    return ProblemInstance(
        operator=op,
        y=op.apply(truth),
        truth=truth,
        truth_support_size=int(np.count_nonzero(truth)),
        seed=0,
    )


@dataclass(frozen=True)
class ExperimentReport:
    """One benchmark cell: method at one sampling density."""

    method: str
    n_over_m: float
    psnr_db: float
    iterations: int
    elapsed_seconds: float
    r_used: int

    def to_json_dict(self) -> dict:
        return {
            "method": self.method,
            "n_over_m": self.n_over_m,
            "psnr_db": self.psnr_db,
            "iterations": self.iterations,
            "elapsed_seconds": self.elapsed_seconds,
            "r_used": self.r_used,
        }


CSV_HEADER = "method,n_over_m,psnr_db,iterations,elapsed_seconds,r_used"


def report_csv_row(report: ExperimentReport) -> str:
    return (
        f"{report.method},{report.n_over_m:.6f},{report.psnr_db:.6f},"
        f"{report.iterations},{report.elapsed_seconds:.6f},{report.r_used}"
    )


@dataclass(frozen=True)
class BenchConfig:
    """Benchmark sweep settings (parsed from plain key=value text)."""

    side: int = 64
    lines: tuple[int, ...] = (6, 10, 14, 18, 22, 26, 28)
    methods: tuple[str, ...] = ("ecme", "dore", "mn")
    tol: float = 1e-14
    max_iter: int = 50_000
    adore_resolution: int = 64
    seed: int = 0


KNOWN_METHODS = ("ecme", "iht", "dore", "adore", "mn")


def parse_bench_config(text: str) -> BenchConfig:
    """Parse key=value lines; '#' starts a comment, blank lines are skipped."""
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"config line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key == "side":
            values["side"] = int(value)
        elif key == "lines":
            values["lines"] = tuple(int(v) for v in value.split(",") if v.strip())
        elif key == "methods":
            methods = tuple(v.strip() for v in value.split(",") if v.strip())
            unknown = [mth for mth in methods if mth not in KNOWN_METHODS]
            if unknown:
                raise InputError(f"unknown methods in config: {unknown}")
            values["methods"] = methods
        elif key == "tol":
            values["tol"] = float(value)
        elif key == "max_iter":
            values["max_iter"] = int(value)
        elif key == "adore_resolution":
            values["adore_resolution"] = int(value)
        elif key == "seed":
            values["seed"] = int(value)
        else:
            raise InputError(f"config line {lineno}: unknown key {key!r}")
    return BenchConfig(**values)


def _run_method(method: str, problem: ProblemInstance, r: int,
                stop: StoppingRule, adore_resolution: int):
    """Returns (estimate_vector, iterations, elapsed)."""
    op, y = problem.operator, problem.y
    if method == "ecme":
        res = ecme_run(op, y, r, stop=stop)
    elif method == "iht":
        res = iht_run(op, y, r, stop=stop)
    elif method == "dore":
        res = dore_run(op, y, r, stop=stop)
    elif method == "adore":
        auto = adore_run(op, y, resolution=adore_resolution, stop=stop)
        return auto.final.estimate.s, auto.final.iterations, \
            auto.final.elapsed_seconds, auto.r_selected
    elif method == "mn":
        start = time.perf_counter()
        est = minimum_norm_estimate(op, y)
        return est, 0, time.perf_counter() - start, 0
    else:
        raise InputError(f"unknown method {method!r}")
    return res.estimate.s, res.iterations, res.elapsed_seconds, r


def benchmark_sweep(config: BenchConfig) -> list[ExperimentReport]:
    """Run every enabled method at every sampling density.

    The unknown is the phantom's Haar coefficient vector; PSNR is computed
    between the reference image and the synthesized estimate.  Cells are
    ordered by (density, method order in the config), deterministically.
    """
    stop = StoppingRule(tol=config.tol, max_iter=config.max_iter)
    reports: list[ExperimentReport] = []
    m = config.side * config.side
    basis = HaarBasis(config.side)
    for n_lines in config.lines:
        problem = phantom_problem(config.side, n_lines)
        reference_image = basis.synthesize(problem.truth)
        r = problem.truth_support_size
        for method in config.methods:
            est, iterations, elapsed, r_used = _run_method(
                method, problem, r, stop, config.adore_resolution
            )
            estimate_image = basis.synthesize(est)
            reports.append(ExperimentReport(
                method=method,
                n_over_m=problem.operator.n_rows / m,
                psnr_db=psnr(reference_image, estimate_image),
                iterations=iterations,
                elapsed_seconds=elapsed,
                r_used=r_used,
            ))
    return reports
