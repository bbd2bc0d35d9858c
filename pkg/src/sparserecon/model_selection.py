"""Sparsity-level selection: the USS score, golden-section search, and the
automatic (ADORE) driver.

The unconstrained sparsity selection score trades representation accuracy
against model size:

    USS(r) = -1/2 r ln(N/m) - 1/2 (N - r - 2) ln( sigma2(r) / b )

with b = y^T (H H^T)^{-1} y / N the variance of the empty model, so
USS(0) = 0 and the score is invariant to rescaling y.  When the fitted
variance hits zero the score diverges to +infinity with growth rate
(N - r - 2) / 2; sentinel values are therefore ranked by N - r - 2, which
prefers the smallest such r.

``exact_ml_bruteforce`` enumerates supports to produce the exact
maximum-likelihood variance for tiny instances; it doubles as the oracle
for validating the selection rule.  ``adore_run`` replaces the intractable
exact variance with the accelerated solver's estimate and drives an
integer golden-section search over r in [0, ceil(N/2)].
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .dore import dore_run
from .errors import InputError, SizeGuardError
from .matrix_analysis import _as_matrix
from .operators import DenseOperator, SensingOperator
from .recon import ParamEstimate, ReconstructionResult, StoppingRule

BRUTE_FORCE_GUARD = 1_000_000
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0  # 0.618...
ZERO_VARIANCE_REL = 1e-12


@dataclass(frozen=True)
class UssEvaluation:
    """Score of one candidate sparsity level.

    ``uss_value`` may be +/-inf; infinite scores are ordered by
    ``growth_rate`` = N - r - 2 (the divergence rate), so among perfect
    fits the smallest r wins.  ``sort_key`` is a total order usable
    directly as a comparison key.
    """

    r: int
    sigma2_est: float
    uss_value: float
    growth_rate: int

    @property
    def sort_key(self) -> tuple[float, float]:
        if math.isinf(self.uss_value):
            if self.uss_value > 0:
                return (2.0, float(self.growth_rate))
            return (0.0, 0.0)
        return (1.0, self.uss_value)


class UssScorer:
    """USS evaluator with the empty-model variance computed once."""

    def __init__(self, op: SensingOperator, y):
        y = np.asarray(y, dtype=float)
        if y.shape != (op.n_rows,):
            raise InputError(f"y must have length {op.n_rows}, got shape {y.shape}")
        baseline = float(y @ op.gram_solve(y)) / op.n_rows
        if baseline <= 0.0:
            raise InputError("USS needs a nonzero measurement vector")
        self.op = op
        self.n_rows = op.n_rows
        self.n_cols = op.n_cols
        self.baseline = baseline
        self.zero_cutoff = ZERO_VARIANCE_REL * baseline

    def evaluate(self, r: int, sigma2_est: float) -> UssEvaluation:
        if sigma2_est < 0:
            raise InputError("sigma2_est must be nonnegative")
        growth = self.n_rows - r - 2
        if sigma2_est <= self.zero_cutoff:
            if growth > 0:
                value = math.inf
            elif growth == 0:
                value = -0.5 * r * math.log(self.n_rows / self.n_cols)
            else:
                value = -math.inf
        else:
            value = (
                -0.5 * r * math.log(self.n_rows / self.n_cols)
                - 0.5 * growth * math.log(sigma2_est / self.baseline)
            )
        return UssEvaluation(r=r, sigma2_est=float(sigma2_est),
                             uss_value=value, growth_rate=growth)


def uss_objective(op: SensingOperator, y, r: int, sigma2_est: float) -> float:
    """USS score as an extended real; see :class:`UssScorer` for the ranking
    of infinite values."""
    return UssScorer(op, y).evaluate(r, sigma2_est).uss_value


def _operator_and_matrix(op):
    if isinstance(op, DenseOperator):
        return op, op.matrix
    if isinstance(op, SensingOperator):
        raise InputError("the brute-force search needs an explicit dense matrix")
    matrix = _as_matrix(op)
    return DenseOperator(matrix), matrix


def exact_ml_bruteforce(op, y, r: int, guard: int = BRUTE_FORCE_GUARD) -> ParamEstimate:
    """Exact maximum-likelihood fit at level r by support enumeration.

    Solves the gram-weighted least squares on every size-r support and
    returns the parameter pair with the globally smallest variance.
    Intended for tiny instances; refuses when C(m, r) exceeds the guard.
    """
    dense, matrix = _operator_and_matrix(op)
    n, m = matrix.shape
    y = np.asarray(y, dtype=float)
    if y.shape != (n,):
        raise InputError(f"y must have length {n}, got shape {y.shape}")
    if not 0 <= r <= m:
        raise InputError(f"sparsity level r={r} outside [0, {m}]")
    if math.comb(m, r) > guard:
        raise SizeGuardError(
            f"C({m},{r})={math.comb(m, r)} supports exceed the brute-force "
            f"guard of {guard}"
        )
    weighted_y = dense.gram_solve(y)
    base = float(y @ weighted_y)
    if r == 0:
        return ParamEstimate(np.zeros(m), base / n, 0)
    if dense.rows_orthonormal:
        weighted_h = matrix
    else:
        weighted_h = dense.gram_factor.solve(matrix)
    best_error = math.inf
    best_support: tuple[int, ...] = ()
    best_coeffs = None
    for support_set in combinations(range(m), r):
        idx = list(support_set)
        normal = matrix[:, idx].T @ weighted_h[:, idx]
        rhs = matrix[:, idx].T @ weighted_y
        try:
            coeffs = np.linalg.solve(normal, rhs)
        except np.linalg.LinAlgError:
            coeffs = np.linalg.lstsq(normal, rhs, rcond=None)[0]
        error = base - float(rhs @ coeffs)
        if error < best_error:
            best_error = error
            best_support = support_set
            best_coeffs = coeffs
    s = np.zeros(m)
    s[list(best_support)] = best_coeffs
    return ParamEstimate(s, max(best_error, 0.0) / n, r)


def golden_section_r_search(evaluator, r_max: int, resolution: int = 1) -> int:
    """Integer golden-section maximization of ``evaluator`` over [0, r_max].

    Interior probes sit at b - floor(0.618 (b - a)) and a + floor(0.618
    (b - a)); the surviving probe is reused each shrink so one new
    evaluation is paid per step, and every evaluation is cached so no r is
    scored twice.  The bracket stops shrinking once it is shorter than
    ``resolution``; brackets of width <= 2 are swept exhaustively.  Returns
    the probed r with the largest value (ties to the smallest r).  Exact
    for unimodal evaluators at resolution 1.
    """
    if r_max < 1:
        raise InputError("r_max must be at least 1")
    if not 1 <= resolution < r_max:
        raise InputError(f"resolution must lie in [1, r_max), got {resolution}")
    cache: dict[int, object] = {}

    def scored(r: int):
        if r not in cache:
            cache[r] = evaluator(r)
        return cache[r]

    a, b = 0, r_max
    gap = math.floor(GOLDEN * (b - a))
    low, high = b - gap, a + gap
    if low > high:
        low, high = high, low
    if low == high:
        high = min(low + 1, b)
    while b - a >= max(resolution, 3):
        if scored(low) < scored(high):
            a = low
            low = high
            high = a + math.floor(GOLDEN * (b - a))
            if high <= low:
                high = min(low + 1, b)
            if high == low:
                break
        else:
            b = high
            high = low
            low = b - math.floor(GOLDEN * (b - a))
            if low >= high:
                low = max(high - 1, a)
            if low == high:
                break
    if b - a <= 2:
        for r in range(a, b + 1):
            scored(r)
    best = max(cache, key=lambda r: (cache[r], -r))
    return best


@dataclass
class AdoreResult:
    """Outcome of the automatic run: selected level, every probed score,
    the reconstruction at the selected level, and how many full solver runs
    the search spent."""

    r_selected: int
    evaluations: list[UssEvaluation]
    final: ReconstructionResult
    dore_runs: int

    def to_json_dict(self) -> dict:
        return {
            "r_selected": self.r_selected,
            "dore_runs": self.dore_runs,
            "probed": [
                {"r": e.r, "sigma2": e.sigma2_est, "uss": e.uss_value}
                for e in self.evaluations
            ],
            "final": self.final.to_json_dict(),
        }


def adore_run(op: SensingOperator, y, resolution: int = 1,
              stop: StoppingRule | None = None,
              r_max: int | None = None) -> AdoreResult:
    """Automatic reconstruction with the sparsity level chosen by USS.

    Golden-section search over r in [0, ceil(N/2)] scores each probed level
    with the accelerated solver's variance estimate; r = 0 is scored from
    the empty-model variance directly, at no solver cost.
    """
    y = np.asarray(y, dtype=float)
    scorer = UssScorer(op, y)  # validates y != 0
    if r_max is None:
        r_max = math.ceil(op.n_rows / 2)
    runs: dict[int, ReconstructionResult] = {}
    evaluations: dict[int, UssEvaluation] = {}

    def evaluator(r: int):
        if r == 0:
            evaluation = scorer.evaluate(0, scorer.baseline)
        else:
            result = dore_run(op, y, r, stop=stop)
            runs[r] = result
            evaluation = scorer.evaluate(r, result.estimate.sigma2)
        evaluations[r] = evaluation
        return evaluation.sort_key

    start = time.perf_counter()
    if r_max == 1:
        # nothing to subdivide: score both candidate levels directly
        keys = {r: evaluator(r) for r in (0, 1)}
        r_selected = max(keys, key=lambda r: (keys[r], -r))
    else:
        r_selected = golden_section_r_search(
            evaluator, r_max, min(resolution, r_max - 1)
        )
    if r_selected in runs:
        final = runs[r_selected]
    else:  # r = 0: the empty model needs no solver run
        final = ReconstructionResult(
            estimate=ParamEstimate(np.zeros(op.n_cols), scorer.baseline, 0),
            trace=[op.n_rows * scorer.baseline],
            iterations=0,
            converged=True,
            elapsed_seconds=time.perf_counter() - start,
        )
    return AdoreResult(
        r_selected=r_selected,
        evaluations=[evaluations[r] for r in sorted(evaluations)],
        final=final,
        dore_runs=len(runs),
    )
