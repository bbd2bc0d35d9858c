"""Sensing operators: H as a matrix or in matrix-free form.

Every operator exposes the same surface: ``apply`` (H v), ``apply_adjoint``
(H^T w) and ``gram_solve`` (solve (H H^T) x = b).  A "proper" operator is
N x m with N <= m and full row rank, so H H^T is symmetric positive
definite and the gram system is solvable.  When the rows of H are
orthonormal (H H^T = I), ``gram_solve`` is the identity map and returns
its argument unchanged; downstream iterations then take the cheap path
with no extra arithmetic.

Concrete kinds:

* ``DenseOperator``       -- explicit N x m matrix, Cholesky gram factor
* ``IdentityOperator``    -- square identity
* ``PartialDctOperator``  -- selected rows of the orthonormal type-II DCT
* ``PartialDft2Operator`` -- selected 2-D DFT coefficients of an image,
                             embedded as a real row-orthonormal operator
* ``ComposedOperator``    -- sampling operator composed with an
                             orthonormal synthesis basis (H = Phi Psi)

The 2-D Haar transform used by the composed operator lives here too
(``haar_dwt_2d`` / ``haar_idwt_2d``), in its orthonormal normalization so
that the composed operator keeps exactly orthonormal rows.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
import scipy.fft
import scipy.linalg

from .errors import InputError

_ORTHO_TOL = 1e-10
_SQRT2 = math.sqrt(2.0)


def _as_vector(v, length: int, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size != length:
        raise InputError(
            f"{name} must be a length-{length} vector, got shape {v.shape}"
        )
    return v


@dataclass(frozen=True)
class GramFactor:
    """Cholesky factor of H H^T, precomputed once so repeated solves are cheap."""

    size: int
    lower: np.ndarray  # L with H H^T = L L^T
    spd: bool = True

    def solve(self, b: np.ndarray) -> np.ndarray:
        """Solve (H H^T) x = b; b may be a vector or a matrix of columns."""
        return scipy.linalg.cho_solve((self.lower, True), b)

    def reconstruct(self) -> np.ndarray:
        """Multiply the factor back, L L^T."""
        return self.lower @ self.lower.T


class SensingOperator(ABC):
    """Abstract N x m sensing operator with gram-system support.

    Operators are immutable after construction and safe to share across
    threads; all operations are pure.
    """

    def __init__(self, n_rows: int, n_cols: int, rows_orthonormal: bool, kind: str):
        if n_rows < 1 or n_cols < 1:
            raise InputError("operator dimensions must be positive")
        if n_rows > n_cols:
            raise InputError(
                f"not a proper sensing matrix: N={n_rows} exceeds m={n_cols}"
            )
        self.n_rows = n_rows
        self.n_cols = n_cols
        self.rows_orthonormal = rows_orthonormal
        self.kind = kind

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_rows, self.n_cols)

    @abstractmethod
    def apply(self, v) -> np.ndarray:
        """Return H v for a length-m vector v."""

    @abstractmethod
    def apply_adjoint(self, w) -> np.ndarray:
        """Return H^T w for a length-N vector w."""

    def gram_solve(self, b) -> np.ndarray:
        """Return x with (H H^T) x = b.

        Row-orthonormal operators return ``b`` unchanged (H H^T = I); the
        dense kind overrides this with a Cholesky solve.
        """
        b = np.asarray(b, dtype=float)
        if b.shape != (self.n_rows,):
            raise InputError(
                f"gram_solve expects a length-{self.n_rows} vector, got shape {b.shape}"
            )
        if self.rows_orthonormal:
            return b
        raise NotImplementedError  # pragma: no cover - concrete kinds override

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return (
            f"{type(self).__name__}(N={self.n_rows}, m={self.n_cols}, "
            f"kind={self.kind!r}, rows_orthonormal={self.rows_orthonormal})"
        )


def probe_rows_orthonormal(op: SensingOperator, tol: float = _ORTHO_TOL) -> bool:
    """Check H H^T = I by probing.

    Uses the full basis for small N (exact check of every column of H H^T)
    and a handful of random probes otherwise.  Probing keeps the check
    affordable for matrix-free kinds.
    """
    n = op.n_rows
    if n <= 64:
        probes = np.eye(n)
    else:
        rng = np.random.default_rng(0)
        probes = rng.standard_normal((5, n))
    for w in probes:
        back = op.apply(op.apply_adjoint(w))
        if np.max(np.abs(back - w)) > tol * max(1.0, np.max(np.abs(w))):
            return False
    return True


class DenseOperator(SensingOperator):
    """Explicit dense sensing matrix with a precomputed gram factorization.

    The one-off Cholesky of H H^T is the only O(N^3) cost; every later
    gram_solve is a pair of triangular solves.  Rows detected orthonormal
    (max |H H^T - I| <= 1e-10) switch gram_solve to the identity map.
    """

    def __init__(self, matrix):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2:
            raise InputError("sensing matrix must be 2-D")
        if not np.isfinite(matrix).all():
            raise InputError("sensing matrix entries must be finite")
        n_rows, n_cols = matrix.shape
        gram = matrix @ matrix.T
        orthonormal = bool(
            np.max(np.abs(gram - np.eye(n_rows))) <= _ORTHO_TOL
        )
        super().__init__(n_rows, n_cols, orthonormal, "dense")
        self.matrix = matrix
        if orthonormal:
            self.gram_factor = None
        else:
            try:
                lower = np.linalg.cholesky(gram)
            except np.linalg.LinAlgError as exc:
                raise InputError(
                    "not a proper sensing matrix: H H^T is not positive definite "
                    "(rank-deficient rows)"
                ) from exc
            self.gram_factor = GramFactor(size=n_rows, lower=lower)

    def apply(self, v) -> np.ndarray:
        v = _as_vector(v, self.n_cols, "v")
        return self.matrix @ v

    def apply_adjoint(self, w) -> np.ndarray:
        w = _as_vector(w, self.n_rows, "w")
        return self.matrix.T @ w

    def gram_solve(self, b) -> np.ndarray:
        b = _as_vector(b, self.n_rows, "b")
        if self.rows_orthonormal:
            return b
        return self.gram_factor.solve(b)


class IdentityOperator(SensingOperator):
    """Square identity operator (N = m)."""

    def __init__(self, n: int):
        super().__init__(n, n, True, "identity")

    def apply(self, v) -> np.ndarray:
        return _as_vector(v, self.n_cols, "v")

    def apply_adjoint(self, w) -> np.ndarray:
        return _as_vector(w, self.n_rows, "w")


def dct_matrix(n: int) -> np.ndarray:
    """The n x n orthonormal type-II DCT matrix T, with T[k] the k-th basis row."""
    return scipy.fft.dct(np.eye(n), type=2, norm="ortho", axis=0)


def partial_dct_matrix(n_cols: int, rows) -> np.ndarray:
    """Dense submatrix of the orthonormal type-II DCT given 0-based row indices."""
    rows = _check_row_indices(rows, n_cols)
    return dct_matrix(n_cols)[rows, :]


def _check_row_indices(rows, n_cols: int) -> np.ndarray:
    rows = np.asarray(rows, dtype=int)
    if rows.ndim != 1 or rows.size == 0:
        raise InputError("row index list must be a nonempty 1-D sequence")
    if rows.min() < 0 or rows.max() >= n_cols:
        raise InputError("row indices out of range")
    if np.unique(rows).size != rows.size:
        raise InputError("row indices must be distinct")
    return rows


class PartialDctOperator(SensingOperator):
    """Selected rows of the orthonormal type-II DCT, applied matrix-free.

    Rows of the orthonormal DCT matrix are orthonormal, so any distinct
    row selection yields H H^T = I exactly.
    """

    def __init__(self, n_cols: int, rows):
        rows = _check_row_indices(rows, n_cols)
        if rows.size > n_cols:
            raise InputError("cannot select more rows than columns")
        super().__init__(rows.size, n_cols, True, "partial-dct")
        self._rows = rows
        if not probe_rows_orthonormal(self):
            raise InputError("partial DCT row selection failed orthonormality check")

    def apply(self, v) -> np.ndarray:
        v = _as_vector(v, self.n_cols, "v")
        return scipy.fft.dct(v, type=2, norm="ortho")[self._rows]

    def apply_adjoint(self, w) -> np.ndarray:
        w = _as_vector(w, self.n_rows, "w")
        full = np.zeros(self.n_cols)
        full[self._rows] = w
        return scipy.fft.idct(full, type=2, norm="ortho")


# ----------------------------------------------------------------------
# 2-D Haar wavelet transform (orthonormal / "Daubechies-2" filters)
# ----------------------------------------------------------------------

def _check_square_pow2(side: int) -> int:
    side = int(side)
    if side < 1 or side & (side - 1):
        raise InputError(f"image side must be a power of two, got {side}")
    return side


def _check_levels(side: int, levels) -> int:
    max_levels = side.bit_length() - 1
    if max_levels < 1:
        raise InputError("image side must be at least 2 to transform")
    if levels is None:
        return max_levels
    levels = int(levels)
    if not 1 <= levels <= max_levels:
        raise InputError(
            f"levels must be between 1 and log2(side)={max_levels}, got {levels}"
        )
    return levels


def haar_dwt_2d(image, levels=None) -> np.ndarray:
    """Orthonormal multilevel 2-D Haar analysis of a square image.

    The image side must be a power of two.  Returns the coefficient array
    flattened to a vector (nested quadrant layout, approximation block in
    the top-left corner).  With 1/sqrt(2) filters the transform is exactly
    orthogonal: energy is preserved and ``haar_idwt_2d`` inverts it.
    """
    image = np.asarray(image, dtype=float)
    if image.ndim != 2 or image.shape[0] != image.shape[1]:
        raise InputError(f"expected a square 2-D image, got shape {image.shape}")
    side = _check_square_pow2(image.shape[0])
    levels = _check_levels(side, levels)
    out = image.copy()
    size = side
    for _ in range(levels):
        block = out[:size, :size]
        lo = (block[:, 0::2] + block[:, 1::2]) / _SQRT2
        hi = (block[:, 0::2] - block[:, 1::2]) / _SQRT2
        block = np.hstack([lo, hi])
        lo = (block[0::2, :] + block[1::2, :]) / _SQRT2
        hi = (block[0::2, :] - block[1::2, :]) / _SQRT2
        out[:size, :size] = np.vstack([lo, hi])
        size //= 2
    return out.ravel()


def haar_idwt_2d(coeffs, levels=None) -> np.ndarray:
    """Inverse of :func:`haar_dwt_2d`; returns the square image."""
    coeffs = np.asarray(coeffs, dtype=float).ravel()
    side = math.isqrt(coeffs.size)
    if side * side != coeffs.size:
        raise InputError("coefficient vector length is not a perfect square")
    side = _check_square_pow2(side)
    levels = _check_levels(side, levels)
    out = coeffs.reshape(side, side).copy()
    size = side >> (levels - 1)
    while size <= side:
        block = out[:size, :size]
        half = size // 2
        lo, hi = block[:half, :], block[half:, :]
        step = np.empty((size, size))
        step[0::2, :] = (lo + hi) / _SQRT2
        step[1::2, :] = (lo - hi) / _SQRT2
        lo, hi = step[:, :half].copy(), step[:, half:].copy()
        step[:, 0::2] = (lo + hi) / _SQRT2
        step[:, 1::2] = (lo - hi) / _SQRT2
        out[:size, :size] = step
        size *= 2
    return out


class HaarBasis:
    """Orthonormal 2-D Haar synthesis/analysis pair on flattened vectors."""

    def __init__(self, side: int, levels=None):
        self.side = _check_square_pow2(side)
        self.levels = _check_levels(self.side, levels)
        self.size = self.side * self.side

    def synthesize(self, coeffs) -> np.ndarray:
        """Coefficients -> image, flattened."""
        return haar_idwt_2d(coeffs, self.levels).ravel()

    def analyze(self, image_vec) -> np.ndarray:
        """Image (flattened) -> coefficients."""
        image_vec = np.asarray(image_vec, dtype=float)
        return haar_dwt_2d(image_vec.reshape(self.side, self.side), self.levels)


# ----------------------------------------------------------------------
# Partial 2-D DFT with real-valued embedding
# ----------------------------------------------------------------------

class PartialDft2Operator(SensingOperator):
    """Real-embedded partial 2-D DFT of a (flattened) square image.

    The mask selects frequencies of the unitary 2-D DFT (DC at index
    [0, 0]).  Each conjugate pair of selected frequencies is kept once and
    contributes two measurement rows, sqrt(2) * Re and sqrt(2) * Im of the
    coefficient; self-conjugate frequencies contribute their (real) value
    directly.  This makes the rows exactly orthonormal, so the whole
    pipeline stays in real arithmetic with a trivial gram system.

    Measurement layout: self-conjugate rows first, then the real parts of
    every pair, then the imaginary parts, each block in lexicographic
    frequency order.
    """

    def __init__(self, mask):
        mask = np.asarray(mask)
        if mask.ndim != 2 or mask.shape[0] != mask.shape[1]:
            raise InputError(f"mask must be a square 2-D array, got {mask.shape}")
        mask = mask.astype(bool)
        if not mask.any():
            raise InputError("mask selects no frequencies")
        side = mask.shape[0]
        self_conj, pairs, seen = [], [], set()
        for k, l in np.argwhere(mask):
            k, l = int(k), int(l)
            conj = ((-k) % side, (-l) % side)
            rep = min((k, l), conj)
            if rep in seen:
                continue
            seen.add(rep)
            if conj == (k, l):
                self_conj.append(rep)
            else:
                pairs.append(rep)
        self._self = np.array(sorted(self_conj), dtype=int).reshape(-1, 2)
        self._pairs = np.array(sorted(pairs), dtype=int).reshape(-1, 2)
        n_rows = len(self._self) + 2 * len(self._pairs)
        super().__init__(n_rows, side * side, True, "partial-dft2")
        self.side = side
        if not probe_rows_orthonormal(self):
            raise InputError("partial DFT mask failed orthonormality check")

    def apply(self, v) -> np.ndarray:
        v = _as_vector(v, self.n_cols, "v")
        spectrum = np.fft.fft2(v.reshape(self.side, self.side)) / self.side
        parts = []
        if len(self._self):
            parts.append(spectrum[self._self[:, 0], self._self[:, 1]].real)
        if len(self._pairs):
            z = spectrum[self._pairs[:, 0], self._pairs[:, 1]]
            parts.append(_SQRT2 * z.real)
            parts.append(_SQRT2 * z.imag)
        return np.concatenate(parts)

    def apply_adjoint(self, w) -> np.ndarray:
        w = _as_vector(w, self.n_rows, "w")
        coeffs = np.zeros((self.side, self.side), dtype=complex)
        n_self, n_pairs = len(self._self), len(self._pairs)
        if n_self:
            coeffs[self._self[:, 0], self._self[:, 1]] = w[:n_self]
        if n_pairs:
            re = w[n_self:n_self + n_pairs]
            im = w[n_self + n_pairs:]
            coeffs[self._pairs[:, 0], self._pairs[:, 1]] = _SQRT2 * (re + 1j * im)
        return (self.side * np.fft.ifft2(coeffs).real).ravel()


def partial_dft2_operator(mask) -> PartialDft2Operator:
    """Build the real-embedded partial 2-D DFT operator for a frequency mask."""
    return PartialDft2Operator(mask)


class ComposedOperator(SensingOperator):
    """Sampling operator composed with an orthonormal synthesis basis.

    H = Phi Psi: the signal vector holds transform coefficients, Psi
    synthesizes the image, Phi samples it.  Because Psi is orthogonal,
    H H^T = Phi Phi^T and the gram solve delegates to the sampler.
    """

    def __init__(self, sampling: SensingOperator, basis: HaarBasis):
        if sampling.n_cols != basis.size:
            raise InputError(
                f"sampling operator works on length-{sampling.n_cols} images but "
                f"the basis produces length-{basis.size} images"
            )
        super().__init__(
            sampling.n_rows, basis.size, sampling.rows_orthonormal, "composed"
        )
        self.sampling = sampling
        self.basis = basis

    def apply(self, v) -> np.ndarray:
        v = _as_vector(v, self.n_cols, "v")
        return self.sampling.apply(self.basis.synthesize(v))

    def apply_adjoint(self, w) -> np.ndarray:
        return self.basis.analyze(self.sampling.apply_adjoint(w))

    def gram_solve(self, b) -> np.ndarray:
        return self.sampling.gram_solve(b)
