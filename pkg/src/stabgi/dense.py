"""Dense-matrix primitives with an explicit tolerance contract.

Matrices are plain 2-D float64 numpy arrays, validated at API boundaries
by :func:`as_matrix` (finite entries, positive dimensions).  Every rank
decision made anywhere in the package bottoms out in
:func:`rank_factorization`; the default numerical-rank threshold is
``sigma_max * max(rows, cols) * 2**-52`` and is configurable wherever it
is consumed.

All functions are pure and operate on immutable inputs, so they are safe
to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, SingularMatrixError

EPS = float(np.finfo(np.float64).eps)  # 2**-52

# Relative margin below which a square matrix is treated as singular:
# sigma_min <= INV_REL_TOL * sigma_max refuses to invert.
INV_REL_TOL = 1e-10


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate ``a`` as a finite 2-D float64 matrix and return it.

    Raises
    ------
    InputError
        If ``a`` is not 2-D, has a zero dimension, or contains NaN/inf.
    """
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2:
        raise InputError(f"{name} must be 2-D, got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InputError(f"{name} must have positive dimensions, got {arr.shape}")
    if not np.isfinite(arr).all():
        raise InputError(f"{name} contains non-finite entries")
    return arr


def spectral_norm(m: np.ndarray) -> float:
    """Largest singular value of ``m`` (0.0 for an empty matrix)."""
    m = np.asarray(m, dtype=float)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def default_rank_tol(m: np.ndarray) -> float:
    """Default numerical-rank threshold sigma_max * max(shape) * eps.

    Floored at machine epsilon so the returned tolerance is always
    positive (a zero matrix still gets a usable threshold).
    """
    m = np.asarray(m, dtype=float)
    sigma_max = spectral_norm(m)
    return max(sigma_max * max(m.shape) * EPS, EPS)


@dataclass(frozen=True, eq=False)
class RankFactorization:
    """Rank-revealing factorization of a matrix M.

    ``range_basis`` holds orthonormal columns spanning the column space,
    ``null_basis`` orthonormal columns spanning the null space, so that
    ``rank + null_basis.shape[1] == M.shape[1]``.
    """

    rank: int
    range_basis: np.ndarray
    null_basis: np.ndarray
    tol_used: float


def rank_factorization(m: np.ndarray, tol: float | None = None) -> RankFactorization:
    """SVD-based rank decision with orthonormal range and null bases.

    Singular values strictly above ``tol`` are counted in the rank.  When
    ``tol`` is absent the default threshold of :func:`default_rank_tol`
    is used.  Deterministic for fixed input.
    """
    m = as_matrix(m)
    if tol is not None and not tol > 0:
        raise InputError(f"tol must be positive, got {tol}")
    u, s, vh = np.linalg.svd(m)
    if tol is None:
        sigma_max = float(s[0]) if s.size else 0.0
        tol = max(sigma_max * max(m.shape) * EPS, EPS)
    rank = int(np.sum(s > tol))
    range_basis = np.ascontiguousarray(u[:, :rank])
    null_basis = np.ascontiguousarray(vh[rank:, :].T)
    return RankFactorization(rank, range_basis, null_basis, float(tol))


def singular_extremes(m: np.ndarray) -> tuple[float, float]:
    """Return (sigma_max, sigma_min) of ``m``.

    sigma_min is the smallest of the min(rows, cols) singular values.
    """
    m = as_matrix(m)
    s = np.linalg.svd(m, compute_uv=False)
    return float(s[0]), float(s[-1])


def solve_square(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve A X = B for square, invertible-to-tolerance A.

    Raises
    ------
    SingularMatrixError
        When sigma_min(A) <= 1e-10 * sigma_max(A); the error carries the
        offending sigma_min.
    InputError
        On shape mismatch or a non-square A.
    """
    a = as_matrix(a, "A")
    b_arr = np.asarray(b, dtype=float)
    vector_rhs = b_arr.ndim == 1
    if vector_rhs:
        b_arr = b_arr[:, None]
    b_arr = as_matrix(b_arr, "B")
    if a.shape[0] != a.shape[1]:
        raise InputError(f"A must be square, got {a.shape}")
    if b_arr.shape[0] != a.shape[0]:
        raise InputError(f"A and B have incompatible shapes: {a.shape} vs {b_arr.shape}")
    sigma_max, sigma_min = singular_extremes(a)
    if not sigma_min > INV_REL_TOL * sigma_max or sigma_max == 0.0:
        raise SingularMatrixError(
            f"matrix is singular to tolerance (sigma_min={sigma_min:.3e}, "
            f"sigma_max={sigma_max:.3e})",
            sigma_min=sigma_min,
        )
    x = np.linalg.solve(a, b_arr)
    return x[:, 0] if vector_rhs else x


def inverse(a: np.ndarray) -> np.ndarray:
    """Inverse of a square matrix via :func:`solve_square` against I."""
    a = as_matrix(a, "A")
    return solve_square(a, np.eye(a.shape[0]))
