"""Cholesky factorization and cached solves for the ADMM x-update.

The x-update solves ``(A^T A + rho I) w = rhs`` once per iteration with the
same matrix, so the factor is computed once and reused.

Two modes are supported:

- ``direct`` (p <= n): factor the p x p matrix ``A^T A + rho I``.
- ``inversion-lemma`` (p > n): factor the n x n matrix ``A A^T + rho I`` and
  apply the matrix inversion lemma

      (A^T A + rho I)^{-1} r = (r - A^T (A A^T + rho I)^{-1} A r) / rho

Matrices are plain C-ordered (row-major) float64 numpy arrays.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .exceptions import DimensionMismatch, NotPositiveDefinite

DIRECT = "direct"
INVERSION_LEMMA = "inversion-lemma"


def _as_matrix(M, name="matrix"):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise DimensionMismatch(f"{name} must be a non-empty 2-D array, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def _as_vector(v, name="vector"):
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise DimensionMismatch(f"{name} must be 1-D, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    return v


def cholesky(M, sym_tol=1e-10):
    """Lower-triangular Cholesky factor ``L`` with ``L @ L.T == M``.

    Parameters
    ----------
    M : (m, m) array_like
        Symmetric positive-definite matrix.
    sym_tol : float
        Allowed relative asymmetry ``||M - M^T||_F / ||M||_F``.

    Raises
    ------
    NotPositiveDefinite
        If ``M`` is not symmetric or a pivot is not strictly positive.
    """
    M = _as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")
    scale = np.linalg.norm(M)
    if scale == 0.0:
        raise NotPositiveDefinite("zero matrix is not positive definite")
    if np.linalg.norm(M - M.T) > sym_tol * scale:
        raise NotPositiveDefinite("matrix is not symmetric")
    try:
        L = np.linalg.cholesky(M)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    if np.any(np.diag(L) <= 0.0):
        raise NotPositiveDefinite("non-positive pivot")
    return L


@dataclass(frozen=True)
class RidgeSystemFactor:
    """Cached factorization of ``A^T A + rho I`` for a fixed ``(A, rho)``.

    Attributes
    ----------
    A : ndarray, shape (n, p)
    rho : float
    mode : {"direct", "inversion-lemma"}
    factor : ndarray
        Lower Cholesky factor, p x p in direct mode, n x n otherwise.
    Atb : ndarray, shape (p,)
        Cached ``A^T b``.
    """

    A: np.ndarray
    rho: float
    mode: str
    factor: np.ndarray
    Atb: np.ndarray

    @property
    def n_features(self):
        return self.A.shape[1]

    def solve(self, rhs):
        return ridge_solve(self, rhs)


def build_ridge_factor(A, b, rho, mode=None):
    """Factor the ridge system once, outside the ADMM loop.

    ``mode=None`` picks ``direct`` when ``p <= n`` and ``inversion-lemma``
    otherwise; passing a mode forces it (used to cross-check the two).
    """
    A = _as_matrix(A, "A")
    b = _as_vector(b, "b")
    n, p = A.shape
    if b.shape[0] != n:
        raise DimensionMismatch(f"A has {n} rows but b has length {b.shape[0]}")
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    if np.any(~A.any(axis=0)):
        raise ValueError("A has an all-zero column")
    if mode is None:
        mode = DIRECT if p <= n else INVERSION_LEMMA
    if mode == DIRECT:
        M = A.T @ A
    elif mode == INVERSION_LEMMA:
        M = A @ A.T
    else:
        raise ValueError(f"unknown mode {mode!r}")
    M[np.diag_indices_from(M)] += rho
    L = cholesky(M)
    A = A.copy()
    Atb = A.T @ b
    for arr in (A, L, Atb):
        arr.setflags(write=False)
    return RidgeSystemFactor(A=A, rho=float(rho), mode=mode, factor=L, Atb=Atb)


def _cho_solve(L, rhs):
    y = solve_triangular(L, rhs, lower=True, check_finite=False)
    return solve_triangular(L, y, lower=True, trans="T", check_finite=False)


def ridge_solve(f, rhs):
    """Return ``w`` solving ``(A^T A + rho I) w = rhs`` using the cached factor."""
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != (f.n_features,):
        raise DimensionMismatch(f"rhs must have shape ({f.n_features},), got {rhs.shape}")
    if f.mode == DIRECT:
        return _cho_solve(f.factor, rhs)
    A = f.A
    return (rhs - A.T @ _cho_solve(f.factor, A @ rhs)) / f.rho
