"""Core hard-thresholding reconstruction.

The estimator treats the measurements y = H z as coming from a Gaussian
vector z centered on an unknown sparse signal s with unknown variance
sigma^2.  For a fixed sparsity level r, the maximum-likelihood fit is
approached by alternating

    z      = s + H^T (H H^T)^{-1} (y - H s)     (signal refinement)
    s_next = T_r(z)                             (keep r largest magnitudes)
    sigma2 = (y - H s)^T (H H^T)^{-1} (y - H s) / N

which monotonically decreases the weighted squared error

    E(s) = N * sigma2_hat(s) = (y - H s)^T (H H^T)^{-1} (y - H s).

With orthonormal rows (H H^T = I) the refinement step is exactly one
iterative-hard-thresholding (IHT) step; ``iht_run`` is that special case
and shares the identical code path, so its iterates match ``ecme_run``
bit for bit.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .operators import SensingOperator

DEFAULT_TOL = 1e-14
DEFAULT_MAX_ITER = 50_000


def hard_threshold(x, r: int) -> np.ndarray:
    """Keep the r largest-magnitude entries of x, zero out the rest.

    Ties in magnitude are broken toward the lower index (stable sort), so
    the output is deterministic across platforms.  Kept entries are copied
    verbatim; the rest are literal zeros.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise InputError("hard_threshold expects a 1-D vector")
    if not 0 <= r <= x.size:
        raise InputError(f"sparsity level r={r} outside [0, {x.size}]")
    out = np.zeros_like(x)
    if r == 0:
        return out
    keep = np.argsort(-np.abs(x), kind="stable")[:r]
    out[keep] = x[keep]
    return out


def support(x) -> np.ndarray:
    """Indices of the nonzero entries (exact-zero test, 0-based, sorted)."""
    return np.flatnonzero(np.asarray(x))


@dataclass(frozen=True)
class ParamEstimate:
    """Signal/variance parameter pair tagged with its sparsity level.

    Invariants: the signal has at most r nonzeros and sigma2 >= 0.
    """

    s: np.ndarray
    sigma2: float
    r: int

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        object.__setattr__(self, "s", s)
        if self.sigma2 < 0:
            raise InputError(f"sigma2 must be nonnegative, got {self.sigma2}")
        if self.r < 0:
            raise InputError(f"sparsity level must be nonnegative, got {self.r}")
        if np.count_nonzero(s) > self.r:
            raise InputError(
                f"signal has {np.count_nonzero(s)} nonzeros, above sparsity level {self.r}"
            )


@dataclass(frozen=True)
class StoppingRule:
    """Stop when ||s_next - s||^2 / m < tol, or after max_iter updates."""

    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER

    def __post_init__(self):
        if not self.tol > 0:
            raise InputError("tol must be positive")
        if self.max_iter < 1:
            raise InputError("max_iter must be at least 1")


@dataclass
class ReconstructionResult:
    """Final estimate plus the per-iteration objective trace.

    ``trace`` holds E(s) = N * sigma2 for the initial point and after each
    update; it is nonincreasing.  ``branches`` is populated only by the
    overrelaxed solver and records which candidate each decision step took.
    """

    estimate: ParamEstimate
    trace: list[float]
    iterations: int
    converged: bool
    elapsed_seconds: float
    branches: list[str] | None = field(default=None)

    def to_json_dict(self) -> dict:
        out = {
            "iterations": self.iterations,
            "converged": self.converged,
            "final_sigma2": float(self.estimate.sigma2),
            "trace": [float(v) for v in self.trace],
            "elapsed_seconds": self.elapsed_seconds,
        }
        if self.branches is not None:
            out["branches"] = list(self.branches)
        return out


def sigma2_hat(op: SensingOperator, y, s) -> float:
    """Closed-form variance estimate (y - Hs)^T (H H^T)^{-1} (y - Hs) / N.

    Zero exactly when y = H s; tiny negative rounding is clamped to 0.
    """
    y = np.asarray(y, dtype=float)
    residual = y - op.apply(s)
    value = float(residual @ op.gram_solve(residual)) / op.n_rows
    return max(value, 0.0)


def weighted_error(op: SensingOperator, y, s) -> float:
    """Weighted squared error E(s) = N * sigma2_hat(s)."""
    return op.n_rows * sigma2_hat(op, y, s)


def ecme_step(op: SensingOperator, y, theta: ParamEstimate) -> ParamEstimate:
    """One refinement: gram-weighted signal update, threshold, variance update."""
    y = np.asarray(y, dtype=float)
    z = theta.s + op.apply_adjoint(op.gram_solve(y - op.apply(theta.s)))
    s_next = hard_threshold(z, theta.r)
    return ParamEstimate(s_next, sigma2_hat(op, y, s_next), theta.r)


def _initial_signal(op: SensingOperator, r: int, s0) -> np.ndarray:
    if s0 is None:
        return np.zeros(op.n_cols)
    s0 = np.asarray(s0, dtype=float)
    if s0.shape != (op.n_cols,):
        raise InputError(f"s0 must have length {op.n_cols}, got shape {s0.shape}")
    if np.count_nonzero(s0) > r:
        return hard_threshold(s0, r)
    return s0.copy()


def _iterate(op: SensingOperator, y, r: int, s0, stop: StoppingRule) -> ReconstructionResult:
    y = np.asarray(y, dtype=float)
    if y.shape != (op.n_rows,):
        raise InputError(f"y must have length {op.n_rows}, got shape {y.shape}")
    if not 0 <= r <= op.n_cols:
        raise InputError(f"sparsity level r={r} outside [0, {op.n_cols}]")
    start = time.perf_counter()
    s = _initial_signal(op, r, s0)
    theta = ParamEstimate(s, sigma2_hat(op, y, s), r)
    trace = [op.n_rows * theta.sigma2]
    converged = False
    iterations = 0
    for _ in range(stop.max_iter):
        theta_next = ecme_step(op, y, theta)
        iterations += 1
        trace.append(op.n_rows * theta_next.sigma2)
        delta = float(np.sum((theta_next.s - theta.s) ** 2)) / op.n_cols
        theta = theta_next
        if delta < stop.tol:
            converged = True
            break
    return ReconstructionResult(
        estimate=theta,
        trace=trace,
        iterations=iterations,
        converged=converged,
        elapsed_seconds=time.perf_counter() - start,
    )


def ecme_run(op: SensingOperator, y, r: int, s0=None,
             stop: StoppingRule | None = None) -> ReconstructionResult:
    """Iterate ecme_step from s0 (default 0) until the stopping rule fires.

    An initial estimate with more than r nonzeros is thresholded first.
    """
    return _iterate(op, y, r, s0, stop or StoppingRule())


def iht_run(op: SensingOperator, y, r: int, s0=None,
            stop: StoppingRule | None = None) -> ReconstructionResult:
    """Iterative hard thresholding; requires orthonormal rows.

    With H H^T = I the gram solve is the identity map, so this is the same
    iteration as :func:`ecme_run` minus the solve.  The shared code path
    makes the two runs bit-for-bit identical on such operators.
    """
    if not op.rows_orthonormal:
        raise InputError("IHT path requires orthonormal rows")
    return _iterate(op, y, r, s0, stop or StoppingRule())


def minimum_norm_estimate(op: SensingOperator, y) -> np.ndarray:
    """Minimum-norm solution H^T (H H^T)^{-1} y of H s = y (ignores sparsity)."""
    y = np.asarray(y, dtype=float)
    return op.apply_adjoint(op.gram_solve(y))


def empirical_bayes_estimate(op: SensingOperator, y, theta: ParamEstimate) -> np.ndarray:
    """Posterior-mean refinement s + H^T (H H^T)^{-1} (y - H s).

    Measurement-consistent (H applied to the output reproduces y) but not
    r-sparse in general; useful for approximately sparse signals.
    """
    y = np.asarray(y, dtype=float)
    return theta.s + op.apply_adjoint(op.gram_solve(y - op.apply(theta.s)))
