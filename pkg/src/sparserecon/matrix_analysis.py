"""Exact combinatorial measures of a sensing matrix.

The central quantity is the sparse subspace quotient: for a nonzero
r-sparse s,

    ssq(s, H) = s^T H^T (H H^T)^{-1} H s / s^T s  in [0, 1],

the normalized energy of the projection of s onto the row space of H.
Its minimum over all r-sparse vectors reduces to a minimum over size-r
supports A of lambda_min(H_A^T (H H^T)^{-1} H_A), which this module
enumerates exactly (with a hard guard on the number of supports).  The
restricted isometry constant and the spark are computed the same way.
Eigenvalue work always happens on the r x r restricted forms, never on
m x m matrices.

``certify`` bundles the measures into a machine-readable certificate with
two recovery flags per sparsity level:

* uniqueness of the sparsest solution requires min 2r-SSQ > 0, and
* guaranteed exact/near-optimal thresholding recovery requires
  min 2r-SSQ > 0.5.

Randomized fallbacks (sampled supports) exist for matrices too large for
enumeration; they are labeled non-exact and never feed certificates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
import scipy.linalg

from .errors import InputError, SizeGuardError
from .operators import DenseOperator, SensingOperator

MIN_SSQ_GUARD = 10_000_000
_ZERO_EIG_TOL = 1e-14


def _as_matrix(h) -> np.ndarray:
    if isinstance(h, DenseOperator):
        return h.matrix
    if isinstance(h, SensingOperator):
        raise InputError("exact matrix analysis needs an explicit dense matrix")
    h = np.asarray(h, dtype=float)
    if h.ndim != 2:
        raise InputError("expected a 2-D matrix")
    return h


def _weighted_columns(h: np.ndarray) -> np.ndarray:
    """Solve (H H^T) X = H once; column i holds (H H^T)^{-1} h_i."""
    gram = h @ h.T
    try:
        return scipy.linalg.cho_solve((np.linalg.cholesky(gram), True), h)
    except np.linalg.LinAlgError as exc:
        raise InputError("not a proper sensing matrix: rows are rank deficient") from exc


def _check_guard(m: int, r: int, guard: int) -> None:
    if math.comb(m, r) > guard:
        raise SizeGuardError(
            f"enumerating C({m},{r})={math.comb(m, r)} supports exceeds the "
            f"guard of {guard}; use the sampled (non-exact) mode instead"
        )


def ssq(s, h) -> float:
    """Sparse subspace quotient of a nonzero vector against a proper matrix."""
    h = _as_matrix(h)
    s = np.asarray(s, dtype=float)
    if s.shape != (h.shape[1],):
        raise InputError(f"s must have length {h.shape[1]}, got shape {s.shape}")
    energy = float(s @ s)
    if energy == 0.0:
        raise InputError("ssq is undefined for the zero vector")
    hs = h @ s
    gram = h @ h.T
    try:
        solved = scipy.linalg.cho_solve((np.linalg.cholesky(gram), True), hs)
    except np.linalg.LinAlgError as exc:
        raise InputError("not a proper sensing matrix: rows are rank deficient") from exc
    return min(max(float(hs @ solved) / energy, 0.0), 1.0)


def min_ssq(h, r: int, guard: int = MIN_SSQ_GUARD) -> tuple[float, tuple[int, ...]]:
    """Exact minimum r-SSQ and a support attaining it.

    Enumerates size-r supports lexicographically and minimizes the smallest
    eigenvalue of H_A^T (H H^T)^{-1} H_A.  Stops early once an exactly
    singular restriction is found (the minimum cannot drop below zero).
    """
    h = _as_matrix(h)
    n, m = h.shape
    if not 1 <= r <= m:
        raise InputError(f"sparsity level r={r} outside [1, {m}]")
    if r > n:
        # any size-r restriction is rank deficient
        return 0.0, tuple(range(r))
    _check_guard(m, r, guard)
    weighted = _weighted_columns(h)
    best = np.inf
    best_support: tuple[int, ...] = tuple(range(r))
    for support_set in combinations(range(m), r):
        idx = list(support_set)
        restricted = h[:, idx].T @ weighted[:, idx]
        smallest = float(np.linalg.eigvalsh(restricted)[0])
        if smallest < best:
            best = smallest
            best_support = support_set
            if best <= _ZERO_EIG_TOL:
                best = 0.0
                break
    return min(max(best, 0.0), 1.0), best_support


def ric(h, r: int, guard: int = MIN_SSQ_GUARD) -> tuple[float, tuple[int, ...]]:
    """Exact restricted isometry constant for sparsity level r, with a
    support attaining the worst deviation of H_A^T H_A eigenvalues from 1."""
    h = _as_matrix(h)
    n, m = h.shape
    if not 1 <= r <= m:
        raise InputError(f"sparsity level r={r} outside [1, {m}]")
    _check_guard(m, r, guard)
    gram_full = h.T @ h
    worst = -np.inf
    worst_support: tuple[int, ...] = tuple(range(r))
    for support_set in combinations(range(m), r):
        idx = np.asarray(support_set)
        eigs = np.linalg.eigvalsh(gram_full[np.ix_(idx, idx)])
        deviation = max(abs(1.0 - eigs[0]), abs(eigs[-1] - 1.0))
        if deviation > worst:
            worst = deviation
            worst_support = support_set
    return float(worst), worst_support


def min_ssq_sampled(h, r: int, n_samples: int = 10_000, seed: int = 0
                    ) -> tuple[float, tuple[int, ...]]:
    """NON-EXACT: minimum r-SSQ over sampled supports.

    Upper bound on the true minimum (sampling can only miss the worst
    support).  Never feeds certificates.
    """
    h = _as_matrix(h)
    n, m = h.shape
    if not 1 <= r <= m:
        raise InputError(f"sparsity level r={r} outside [1, {m}]")
    if r > n:
        return 0.0, tuple(range(r))
    weighted = _weighted_columns(h)
    rng = np.random.default_rng(seed)
    best, best_support = np.inf, tuple(range(r))
    for _ in range(n_samples):
        idx = np.sort(rng.choice(m, size=r, replace=False))
        restricted = h[:, idx].T @ weighted[:, idx]
        smallest = float(np.linalg.eigvalsh(restricted)[0])
        if smallest < best:
            best, best_support = smallest, tuple(int(i) for i in idx)
    return min(max(best, 0.0), 1.0), best_support


def ric_sampled(h, r: int, n_samples: int = 10_000, seed: int = 0
                ) -> tuple[float, tuple[int, ...]]:
    """NON-EXACT: restricted isometry constant over sampled supports.

    Lower bound on the true constant (sampling can only miss the worst
    support).  Never feeds certificates.
    """
    h = _as_matrix(h)
    n, m = h.shape
    if not 1 <= r <= m:
        raise InputError(f"sparsity level r={r} outside [1, {m}]")
    gram_full = h.T @ h
    rng = np.random.default_rng(seed)
    worst, worst_support = -np.inf, tuple(range(r))
    for _ in range(n_samples):
        idx = np.sort(rng.choice(m, size=r, replace=False))
        eigs = np.linalg.eigvalsh(gram_full[np.ix_(idx, idx)])
        deviation = max(abs(1.0 - eigs[0]), abs(eigs[-1] - 1.0))
        if deviation > worst:
            worst, worst_support = deviation, tuple(int(i) for i in idx)
    return float(worst), worst_support


def spark(h, guard: int = MIN_SSQ_GUARD) -> int:
    """Smallest number of linearly dependent columns (N+1 if none by size N).

    Rank tests use column-pivoted QR with tolerance 1e-10 * ||H||_2.
    Searches subset sizes in increasing order and stops at the first
    dependent subset found.
    """
    h = _as_matrix(h)
    n, m = h.shape
    total = sum(math.comb(m, k) for k in range(1, n + 1))
    if total > guard:
        raise SizeGuardError(
            f"spark search would enumerate {total} column subsets, above the "
            f"guard of {guard}"
        )
    tol = 1e-10 * np.linalg.norm(h, 2)
    for k in range(1, n + 1):
        for subset in combinations(range(m), k):
            r_factor = scipy.linalg.qr(h[:, list(subset)], mode="r", pivoting=True)[0]
            diag = np.abs(np.diag(r_factor))
            rank = int(np.count_nonzero(diag > tol)) if diag.size else 0
            if rank < k:
                return k
    return n + 1


def urp(h, guard: int = MIN_SSQ_GUARD) -> bool:
    """Unique representation property: every N x N column submatrix invertible."""
    h = _as_matrix(h)
    return spark(h, guard) == h.shape[0] + 1


def coherence(h) -> float:
    """Largest-magnitude normalized inner product of two distinct columns."""
    h = _as_matrix(h)
    norms = np.linalg.norm(h, axis=0)
    if np.any(norms == 0):
        return 1.0
    normalized = h / norms
    gram = np.abs(normalized.T @ normalized)
    np.fill_diagonal(gram, 0.0)
    return float(gram.max())


@dataclass(frozen=True)
class SparsityMeasures:
    """Exact per-level measures with the supports attaining them."""

    r: int
    rho_min: float
    worst_support: tuple[int, ...]
    gamma: float
    ric_support: tuple[int, ...]


@dataclass(frozen=True)
class RecoveryFlags:
    """Certified guarantees at level r, both driven by the min 2r-SSQ value."""

    r: int
    rho_2r_min: float
    p0_unique: bool          # min 2r-SSQ > 0: sparsest solution is unique
    recovery_guaranteed: bool  # min 2r-SSQ > 0.5: thresholding recovery holds


@dataclass(frozen=True)
class MatrixCertificate:
    """Exact analysis summary for a dense sensing matrix.

    ``spark`` is None when the exact spark search would blow the guard; in
    that case ``spark_min`` still carries the certified lower bound implied
    by the strictly positive min-SSQ values that were computed.
    """

    n_rows: int
    n_cols: int
    spark: int | None
    spark_min: int
    urp: bool | None
    coherence: float
    per_r: tuple[SparsityMeasures, ...]
    flags: tuple[RecoveryFlags, ...]

    def to_json_dict(self) -> dict:
        return {
            "n_rows": self.n_rows,
            "n_cols": self.n_cols,
            "spark": self.spark,
            "spark_min": self.spark_min,
            "urp": self.urp,
            "coherence": self.coherence,
            "per_r": [
                {
                    "r": e.r,
                    "rho_min": e.rho_min,
                    "worst_support": list(e.worst_support),
                    "gamma": e.gamma,
                    "ric_support": list(e.ric_support),
                }
                for e in self.per_r
            ],
            "guarantees": [
                {
                    "r": f.r,
                    "rho_2r_min": f.rho_2r_min,
                    "p0_unique": f.p0_unique,
                    "recovery_guaranteed": f.recovery_guaranteed,
                }
                for f in self.flags
            ],
        }


def certify(h, r_max: int, guard: int = MIN_SSQ_GUARD) -> MatrixCertificate:
    """Exact certificate of the matrix measures for levels 1..r_max.

    The recovery flags at level r consult the min 2r-SSQ (zero whenever
    2r > N, without enumeration).  The exact spark is included when its
    search fits the guard; otherwise only the lower bound implied by the
    computed min-SSQ values is certified.
    """
    h = _as_matrix(h)
    n, m = h.shape
    if not 1 <= r_max <= m:
        raise InputError(f"r_max={r_max} outside [1, {m}]")
    rho_cache: dict[int, float] = {}
    per_r = []
    for r in range(1, r_max + 1):
        rho, rho_support = min_ssq(h, r, guard)
        rho_cache[r] = rho
        gamma, gamma_support = ric(h, r, guard)
        per_r.append(SparsityMeasures(r, rho, rho_support, gamma, gamma_support))
    flags = []
    for r in range(1, r_max + 1):
        two_r = 2 * r
        if two_r > n:
            rho_2r = 0.0
        elif two_r in rho_cache:
            rho_2r = rho_cache[two_r]
        else:
            rho_2r = min_ssq(h, min(two_r, m), guard)[0]
            rho_cache[two_r] = rho_2r
        flags.append(RecoveryFlags(r, rho_2r, rho_2r > 0.0, rho_2r > 0.5))
    try:
        exact_spark = spark(h, guard)
        known_urp: bool | None = exact_spark == n + 1
    except SizeGuardError:
        exact_spark = None
        known_urp = None
    spark_min = 1 + max(
        (r for r, rho in rho_cache.items() if rho > 0.0), default=0
    )
    if exact_spark is not None:
        spark_min = exact_spark
    return MatrixCertificate(
        n_rows=n,
        n_cols=m,
        spark=exact_spark,
        spark_min=spark_min,
        urp=known_urp,
        coherence=coherence(h),
        per_r=tuple(per_r),
        flags=tuple(flags),
    )


@dataclass(frozen=True)
class FixedPointReport:
    """Stationarity check result; truthy when every allowed derivative vanishes."""

    ok: bool
    allowed: tuple[int, ...]
    violations: tuple[tuple[int, float], ...]
    threshold: float
    gradient_scale: float

    def __bool__(self) -> bool:
        return self.ok


def verify_fixed_point(op: SensingOperator, y, s_star, r: int,
                       rtol: float = 1e-6) -> FixedPointReport:
    """First-order stationarity of E(s) at an r-sparse point.

    The gradient is grad E = -2 H^T (H H^T)^{-1} (y - H s).  Perturbing
    coordinate i keeps the point r-sparse only when {i} united with the
    support still has at most r elements, so with a full support only the
    r supported derivatives are checked; otherwise all of them are.

    Tolerance is relative to the gradient magnitude at s_star and at the
    zero vector, whichever is larger, which keeps the check meaningful both
    for exact fits (whole gradient ~ 0) and noisy ones.
    """
    y = np.asarray(y, dtype=float)
    s_star = np.asarray(s_star, dtype=float)
    nonzeros = np.flatnonzero(s_star)
    if nonzeros.size > r:
        raise InputError(f"point has {nonzeros.size} nonzeros, above level r={r}")
    gradient = -2.0 * op.apply_adjoint(op.gram_solve(y - op.apply(s_star)))
    gradient_at_zero = -2.0 * op.apply_adjoint(op.gram_solve(y))
    scale = max(float(np.max(np.abs(gradient))),
                float(np.max(np.abs(gradient_at_zero))))
    threshold = rtol * scale
    if nonzeros.size == r:
        allowed = nonzeros
    else:
        allowed = np.arange(op.n_cols)
    bad = [(int(i), float(abs(gradient[i])))
           for i in allowed if abs(gradient[i]) > threshold]
    return FixedPointReport(
        ok=not bad,
        allowed=tuple(int(i) for i in allowed),
        violations=tuple(bad),
        threshold=threshold,
        gradient_scale=scale,
    )
