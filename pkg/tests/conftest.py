"""Shared fixtures: the two benchmark matrices used throughout the suite."""

import numpy as np
import pytest

from sparserecon import DenseOperator, PartialDctOperator, partial_dct_matrix

# 21 rows of the 32-point orthonormal type-II DCT (0-based indices).  This
# selection is the golden benchmark matrix: its exact min 2-SSQ is 0.503
# and its exact 2-RIC is 0.497, so it certifies 1-sparse recovery while
# failing the classic isometry requirement.
DCT_BENCH_N = 32
DCT_BENCH_ROWS = (1, 2, 3, 4, 6, 8, 9, 11, 12, 13, 15, 17, 19, 20, 21,
                  23, 26, 28, 29, 30, 31)


@pytest.fixture(scope="session")
def toy_matrix():
    """2x3 matrix with min 2-SSQ = 1/3 and 2-RIC = golden ratio."""
    return np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])


@pytest.fixture(scope="session")
def toy_operator(toy_matrix):
    return DenseOperator(toy_matrix)


@pytest.fixture(scope="session")
def bench_dct_matrix():
    return partial_dct_matrix(DCT_BENCH_N, DCT_BENCH_ROWS)


@pytest.fixture(scope="session")
def bench_dct_operator():
    return PartialDctOperator(DCT_BENCH_N, DCT_BENCH_ROWS)


@pytest.fixture(scope="session")
def bench_dct_dense(bench_dct_matrix):
    return DenseOperator(bench_dct_matrix)
