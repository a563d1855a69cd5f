"""Dense symmetric linear algebra behind every optimizer update.

All eigen-routines work on plain float64 ``numpy`` arrays, return eigenvalues
in ascending order, and apply a deterministic sign convention so repeated runs
produce bit-identical output.  Generalized problems ``A v = eta * C v`` are
solved by Cholesky whitening of ``C``; a small ridge ladder repairs constraint
matrices that are positive semi-definite only up to rounding.
"""

from __future__ import annotations

from typing import Literal, NamedTuple

import numpy as np
import scipy.linalg

from .errors import (
    CholeskyError,
    DimensionMismatchError,
    DimensionTooLargeError,
    NonFiniteError,
    NonSquareError,
    NonSymmetricError,
)

# Multipliers of trace(C)/n tried, in order, when a Cholesky factorization
# fails; past the last rung the constraint matrix is declared indefinite.
RIDGE_LADDER = (1e-10, 1e-8, 1e-6)

# Relative tolerance below which a leading eigenvector component is treated as
# zero by the sign convention.
SIGN_TOL = 1e-12

SYMMETRY_RTOL = 1e-10


class SymEigResult(NamedTuple):
    """Eigenvalues (ascending) and the matching eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_dense(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite float64 2-D array."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionMismatchError(f"{name} must be 2-D, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{name} contains NaN or infinity")
    return arr


def check_square_symmetric(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Validate shape and symmetry (relative Frobenius tolerance 1e-10)."""
    arr = as_dense(a, name)
    if arr.shape[0] != arr.shape[1]:
        raise NonSquareError(f"{name} must be square, got shape {arr.shape}")
    scale = np.linalg.norm(arr)
    if scale == 0.0:
        return arr
    if np.linalg.norm(arr - arr.T) > SYMMETRY_RTOL * scale:
        raise NonSymmetricError(f"{name} is not symmetric within rtol={SYMMETRY_RTOL}")
    return arr


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip eigenvector columns so the first non-negligible entry is positive.

    An entry counts as non-negligible when its magnitude exceeds SIGN_TOL
    times the column's max magnitude; all-zero columns are left alone.
    """
    out = vectors.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        peak = np.max(np.abs(col))
        if peak == 0.0:
            continue
        lead = np.flatnonzero(np.abs(col) > SIGN_TOL * peak)
        if lead.size and col[lead[0]] < 0.0:
            out[:, j] = -col
    return out


def sym_eig(a) -> SymEigResult:
    """Full eigendecomposition of a symmetric matrix.

    Eigenvalues come back ascending; eigenvector columns carry the package's
    deterministic sign convention and are orthonormal.
    """
    arr = check_square_symmetric(a, "A")
    w, v = np.linalg.eigh(arr)
    return SymEigResult(w, _fix_signs(v))


def gram(y) -> np.ndarray:
    """Linear-kernel Gram matrix Y^T Y of a (dim x n_samples) embedding."""
    arr = as_dense(y, "Y")
    k = arr.T @ arr
    return (k + k.T) / 2.0


def trace_form(y, m) -> float:
    """Evaluate trace(Y M Y^T) for an embedding Y (dim x n) and symmetric M."""
    yarr = as_dense(y, "Y")
    marr = as_dense(m, "M")
    if marr.shape[0] != marr.shape[1]:
        raise NonSquareError(f"M must be square, got shape {marr.shape}")
    if yarr.shape[1] != marr.shape[0]:
        raise DimensionMismatchError(
            f"Y has {yarr.shape[1]} columns but M is {marr.shape[0]}x{marr.shape[1]}"
        )
    return float(np.sum((yarr @ marr) * yarr))


class PencilSolver:
    """Repeated solves of ``A v = eta * C v`` for one fixed SPD constraint C.

    The Cholesky factor of C is computed once (climbing the ridge ladder when
    C is only semi-definite) and reused for every A.  ``constraint=None``
    stands for the identity and skips the whitening entirely.
    """

    def __init__(self, constraint: np.ndarray | None, n: int):
        self.n = n
        self.ridge = 0.0
        if constraint is None:
            self._chol = None
            return
        c = check_square_symmetric(constraint, "C")
        if c.shape[0] != n:
            raise DimensionMismatchError(f"C is {c.shape[0]}x{c.shape[0]}, expected {n}x{n}")
        self._chol, self.ridge = _cholesky_with_ridge(c)

    def extreme(self, a, d: int, side: Literal["smallest", "largest"]) -> SymEigResult:
        """The d smallest or largest eigenpairs, eigenvalues ascending.

        Returned vectors x satisfy x^T (C + ridge*I) x = 1.
        """
        arr = check_square_symmetric(a, "A")
        if arr.shape[0] != self.n:
            raise DimensionMismatchError(f"A is {arr.shape[0]}x{arr.shape[0]}, expected {self.n}")
        if not 1 <= d <= self.n:
            raise DimensionTooLargeError(f"requested {d} eigenpairs of a size-{self.n} pencil")
        if side not in ("smallest", "largest"):
            raise ValueError(f"side must be 'smallest' or 'largest', got {side!r}")
        if self._chol is None:
            w, v = np.linalg.eigh(arr)
        else:
            low = self._chol
            t = scipy.linalg.solve_triangular(low, arr, lower=True)
            white = scipy.linalg.solve_triangular(low, t.T, lower=True).T
            white = (white + white.T) / 2.0
            w, u = np.linalg.eigh(white)
            v = scipy.linalg.solve_triangular(low, u, lower=True, trans="T")
        if side == "smallest":
            w, v = w[:d], v[:, :d]
        else:
            w, v = w[-d:], v[:, -d:]
        return SymEigResult(w, _fix_signs(v))


def gen_eig_extreme(a, c, d: int, side: Literal["smallest", "largest"] = "smallest") -> SymEigResult:
    """Extreme eigenpairs of the symmetric-definite pencil (A, C).

    ``c=None`` means the identity, which reduces to ``sym_eig`` restricted to
    d pairs.  Eigenvalues ascending; vectors C-orthonormal (against the ridged
    C when the ladder was needed).
    """
    arr = as_dense(a, "A")
    return PencilSolver(c, arr.shape[0]).extreme(arr, d, side)


def _cholesky_with_ridge(c: np.ndarray) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor of C, ridging the diagonal if needed.

    Tries C as-is, then C + eps*I for eps in RIDGE_LADDER * trace(C)/n.
    Returns (factor, ridge_used); raises CholeskyError past the last rung.
    """
    n = c.shape[0]
    scale = np.trace(c) / n
    if scale <= 0.0:
        scale = 1.0
    ridges = (0.0,) + tuple(r * scale for r in RIDGE_LADDER)
    for eps in ridges:
        try:
            mat = c if eps == 0.0 else c + eps * np.eye(n)
            return scipy.linalg.cholesky(mat, lower=True), eps
        except np.linalg.LinAlgError:
            continue
    raise CholeskyError(
        f"constraint matrix is not positive definite after ridge ladder {RIDGE_LADDER}"
    )
