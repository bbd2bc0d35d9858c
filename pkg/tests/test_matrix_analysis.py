"""Exact matrix measures: SSQ, RIC, spark, certificates, stationarity."""

import numpy as np
import pytest

from sparserecon import (
    DenseOperator,
    InputError,
    SizeGuardError,
    certify,
    coherence,
    dct_matrix,
    ecme_run,
    hard_threshold,
    min_ssq,
    min_ssq_sampled,
    ric,
    ric_sampled,
    spark,
    ssq,
    StoppingRule,
    support,
    urp,
    verify_fixed_point,
)


# ------------------------------------------------------------------------ ssq

def test_ssq_square_invertible_is_one():
    rng = np.random.default_rng(0)
    H = rng.standard_normal((5, 5))
    for _ in range(5):
        s = rng.standard_normal(5)
        assert ssq(s, H) == pytest.approx(1.0, abs=1e-10)


def test_ssq_null_space_is_zero(toy_matrix):
    # columns satisfy h1 + h2 - h3 = 0, so [1, 1, -1] is in the null space
    assert ssq(np.array([1.0, 1.0, -1.0]), toy_matrix) == pytest.approx(0.0, abs=1e-12)


def test_ssq_dual_formula_cross_check(toy_matrix):
    s = np.array([1.0, -1.0, 0.0])
    full = ssq(s, toy_matrix)
    # restricted-support oracle: s_A^T H_A^T (H H^T)^{-1} H_A s_A / s_A^T s_A
    idx = support(s)
    HA = toy_matrix[:, idx]
    sA = s[idx]
    W = np.linalg.inv(toy_matrix @ toy_matrix.T)
    restricted = float(sA @ HA.T @ W @ HA @ sA) / float(sA @ sA)
    assert abs(full - restricted) <= 1e-10


def test_ssq_zero_vector_rejected(toy_matrix):
    with pytest.raises(InputError):
        ssq(np.zeros(3), toy_matrix)


def test_ssq_bounds_random():
    rng = np.random.default_rng(1)
    H = rng.standard_normal((6, 14))
    for _ in range(25):
        s = hard_threshold(rng.standard_normal(14), int(rng.integers(1, 7)))
        if not s.any():
            continue
        assert 0.0 <= ssq(s, H) <= 1.0


# -------------------------------------------------------------------- min_ssq

def test_min_ssq_toy_value(toy_matrix):
    value, attained = min_ssq(toy_matrix, 2)
    assert abs(value - 1 / 3) <= 1e-12
    # the attaining support really achieves the value
    idx = np.asarray(attained)
    W = np.linalg.inv(toy_matrix @ toy_matrix.T)
    M = toy_matrix[:, idx].T @ W @ toy_matrix[:, idx]
    assert np.linalg.eigvalsh(M)[0] == pytest.approx(value, abs=1e-12)


def test_min_ssq_golden_matrix(bench_dct_matrix):
    value, _ = min_ssq(bench_dct_matrix, 2)
    assert round(value, 3) == 0.503
    assert value > 0.5


def test_min_ssq_r_above_n_is_zero():
    rng = np.random.default_rng(2)
    H = rng.standard_normal((3, 9))
    value, attained = min_ssq(H, 4)
    assert value == 0.0
    assert len(attained) == 4


def test_min_ssq_monotone_in_r():
    rng = np.random.default_rng(3)
    H = rng.standard_normal((6, 10))
    values = [min_ssq(H, r)[0] for r in range(1, 7)]
    for lo, hi in zip(values[1:], values[:-1]):
        assert lo <= hi + 1e-12


def test_min_ssq_row_transform_invariance():
    rng = np.random.default_rng(4)
    H = rng.standard_normal((5, 9))
    base, _ = min_ssq(H, 2)
    s = hard_threshold(rng.standard_normal(9), 2)
    base_ssq = ssq(s, H)
    for _ in range(5):
        q, _ = np.linalg.qr(rng.standard_normal((5, 5)))
        G = q @ np.diag(rng.uniform(0.5, 2.0, size=5))
        assert abs(ssq(s, G @ H) - base_ssq) <= 1e-10
        assert abs(min_ssq(G @ H, 2)[0] - base) <= 1e-8


def test_min_ssq_enumeration_is_lower_bound_of_sampling():
    # the enumerated minimum lower-bounds the quotient of every random
    # sparse vector (100k draws, vectorized)
    rng = np.random.default_rng(5)
    H = rng.standard_normal((6, 12))
    r = 3
    exact, _ = min_ssq(H, r)
    projector = H.T @ np.linalg.solve(H @ H.T, H)
    n_draws = 100_000
    supports = np.argsort(rng.random((n_draws, 12)), axis=1)[:, :r]
    amplitudes = rng.standard_normal((n_draws, r))
    signals = np.zeros((n_draws, 12))
    np.put_along_axis(signals, supports, amplitudes, axis=1)
    quotients = np.einsum("ij,ij->i", signals @ projector, signals) \
        / np.einsum("ij,ij->i", signals, signals)
    assert exact <= quotients.min() + 1e-12


def test_min_ssq_guard():
    rng = np.random.default_rng(6)
    H = rng.standard_normal((30, 60))
    with pytest.raises(SizeGuardError):
        min_ssq(H, 15, guard=1000)


# ------------------------------------------------------------------------ ric

def test_ric_orthonormal_columns_zero():
    T = dct_matrix(8)  # orthogonal: every column subset orthonormal
    value, _ = ric(T, 2)
    assert value <= 1e-12


def test_ric_toy_matrix_golden_ratio(toy_matrix):
    value, attained = ric(toy_matrix, 2)
    assert abs(value - 1.618) <= 1e-3
    assert value > 1.0
    assert set(attained) in ({0, 2}, {1, 2})


def test_ric_golden_matrix(bench_dct_matrix):
    value, _ = ric(bench_dct_matrix, 2)
    assert round(value, 3) == 0.497


def test_ric_guard():
    rng = np.random.default_rng(7)
    H = rng.standard_normal((30, 60))
    with pytest.raises(SizeGuardError):
        ric(H, 15, guard=1000)


# ---------------------------------------------------------------------- spark

def test_spark_invertible_square():
    rng = np.random.default_rng(8)
    H = rng.standard_normal((5, 5))
    assert spark(H) == 6


def test_spark_toy_matrix(toy_matrix):
    # columns 1 + 2 - 3 = 0: three dependent columns, no dependent pair
    assert spark(toy_matrix) == 3


def test_spark_random_gaussian_is_full():
    rng = np.random.default_rng(9)
    H = rng.standard_normal((8, 16))
    assert spark(H) == 9
    assert urp(H)


def test_spark_detects_duplicate_column():
    rng = np.random.default_rng(10)
    H = rng.standard_normal((4, 8))
    H[:, 5] = 2.0 * H[:, 2]
    assert spark(H) == 2
    assert not urp(H)


def test_spark_guard():
    rng = np.random.default_rng(11)
    H = rng.standard_normal((20, 40))
    with pytest.raises(SizeGuardError):
        spark(H, guard=1000)


# --------------------------------------------------- eigenvalue range (URP)

def test_restricted_eigenvalue_bounds_urp():
    """On URP matrices: lambda_min > 0 for dim(A) <= N and lambda_max < 1
    for dim(A) <= m - N, over every enumerated support."""
    from itertools import combinations

    rng = np.random.default_rng(12)
    n, m = 6, 9
    H = rng.standard_normal((n, m))
    assert urp(H)
    weighted = np.linalg.solve(H @ H.T, H)
    for k in range(1, n + 1):
        for A in combinations(range(m), k):
            idx = list(A)
            eigs = np.linalg.eigvalsh(H[:, idx].T @ weighted[:, idx])
            assert eigs[0] > 0.0
            if k <= m - n:
                assert eigs[-1] < 1.0


# ------------------------------------------------------------------ coherence

def test_coherence_toy(toy_matrix):
    assert coherence(toy_matrix) == pytest.approx(1 / np.sqrt(2), abs=1e-12)


# -------------------------------------------------------------------- certify

def test_certify_toy(toy_matrix):
    cert = certify(toy_matrix, 1)
    assert cert.spark == 3 and cert.urp
    flag = cert.flags[0]
    assert flag.r == 1
    assert flag.p0_unique          # min 2-SSQ = 1/3 > 0
    assert not flag.recovery_guaranteed  # 1/3 <= 0.5
    assert abs(flag.rho_2r_min - 1 / 3) <= 1e-12


def test_certify_golden_matrix_recovery(bench_dct_matrix):
    cert = certify(bench_dct_matrix, 1)
    flag = cert.flags[0]
    assert flag.p0_unique and flag.recovery_guaranteed
    assert round(flag.rho_2r_min, 3) == 0.503
    # spark search on 21x32 blows the guard; the certificate still carries
    # the bound implied by the positive min-SSQ values
    assert cert.spark is None
    assert cert.spark_min >= 3
    assert cert.urp is None


def test_certify_r_beyond_half_n():
    rng = np.random.default_rng(13)
    H = rng.standard_normal((4, 8))
    cert = certify(H, 3)
    flag = cert.flags[-1]  # r = 3, 2r = 6 > N = 4
    assert flag.rho_2r_min == 0.0
    assert not flag.p0_unique and not flag.recovery_guaranteed


def test_certificate_invariants_random():
    rng = np.random.default_rng(14)
    H = rng.standard_normal((5, 9))
    cert = certify(H, 4)
    rhos = [e.rho_min for e in cert.per_r]
    assert all(0.0 <= v <= 1.0 for v in rhos)
    assert all(lo <= hi + 1e-12 for lo, hi in zip(rhos[1:], rhos[:-1]))
    for entry in cert.per_r:  # rho_min > 0 iff spark > r
        assert (entry.rho_min > 0) == (cert.spark > entry.r)
    payload = cert.to_json_dict()
    assert payload["spark"] == cert.spark
    assert len(payload["per_r"]) == 4
    assert len(payload["guarantees"]) == 4


# ------------------------------------------------------------- sampled modes

def test_sampled_modes_bound_exact_values():
    rng = np.random.default_rng(15)
    H = rng.standard_normal((6, 13))
    exact_rho, _ = min_ssq(H, 3)
    exact_gamma, _ = ric(H, 3)
    approx_rho, _ = min_ssq_sampled(H, 3, n_samples=200, seed=1)
    approx_gamma, _ = ric_sampled(H, 3, n_samples=200, seed=1)
    assert approx_rho >= exact_rho - 1e-12   # upper bound on the minimum
    assert approx_gamma <= exact_gamma + 1e-12  # lower bound on the maximum


# --------------------------------------------------------------- fixed points

def test_fixed_point_verifier_on_converged_runs():
    rng = np.random.default_rng(16)
    for trial in range(100):
        n, m, r = 10, 28, 3
        op = DenseOperator(rng.standard_normal((n, m)))
        truth = hard_threshold(rng.standard_normal(m), r)
        y = op.apply(truth)
        if trial % 2:
            y = y + 0.1 * rng.standard_normal(n)
        res = ecme_run(op, y, r, stop=StoppingRule(tol=1e-24, max_iter=5000))
        if not res.converged:
            continue
        report = verify_fixed_point(op, y, res.estimate.s, r)
        assert report.ok, report.violations


def test_fixed_point_allowed_set_logic():
    rng = np.random.default_rng(17)
    op = DenseOperator(rng.standard_normal((6, 12)))
    truth = hard_threshold(rng.standard_normal(12), 2)
    y = op.apply(truth) + 0.2 * rng.standard_normal(6)
    res = ecme_run(op, y, 2, stop=StoppingRule(tol=1e-24, max_iter=5000))
    s_star = res.estimate.s
    assert np.count_nonzero(s_star) == 2
    # full support: only the supported derivatives are inspected
    report = verify_fixed_point(op, y, s_star, 2)
    assert set(report.allowed) == set(support(s_star))
    # extra slack (r=3): every coordinate becomes an allowed direction
    report3 = verify_fixed_point(op, y, s_star, 3)
    assert len(report3.allowed) == 12


def test_fixed_point_detects_perturbation():
    rng = np.random.default_rng(18)
    op = DenseOperator(rng.standard_normal((8, 16)))
    truth = hard_threshold(rng.standard_normal(16), 3)
    y = op.apply(truth) + 0.05 * rng.standard_normal(8)
    res = ecme_run(op, y, 3, stop=StoppingRule(tol=1e-24, max_iter=5000))
    perturbed = res.estimate.s.copy()
    idx = support(perturbed)[0]
    perturbed[idx] *= 1.05
    report = verify_fixed_point(op, y, perturbed, 3)
    assert not report
    assert report.violations


def test_fixed_point_rejects_overdense_point():
    rng = np.random.default_rng(19)
    op = DenseOperator(rng.standard_normal((4, 8)))
    with pytest.raises(InputError):
        verify_fixed_point(op, rng.standard_normal(4), rng.standard_normal(8), 2)
