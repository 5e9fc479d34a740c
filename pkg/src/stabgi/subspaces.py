"""Tolerance-aware subspace arithmetic.

A subspace of R^n is represented by an orthonormal basis stored column
by column (zero columns for the trivial subspace) together with the
tolerance that governs its dimension decisions.  Sums and intersections
reduce to rank decisions on concatenated bases; equality of subspaces is
judged in the gap metric (sine of the largest principal angle), because
bases are non-unique but principal angles are.

These operations serve as the independent set-theoretic oracle for every
range/null-space identity checked elsewhere in the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dense import as_matrix, rank_factorization, spectral_norm
from .errors import ComplementError, DimensionError, InputError

# Default absolute threshold for subspace dimension decisions.  Bases are
# orthonormal, so the singular values being judged live in [0, sqrt(2)].
DEFAULT_TOL = 1e-10

# Gap distance at or below which two equal-dimensional subspaces are
# considered equal.
EQUALITY_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class Subspace:
    """A linear subspace of R^{ambient_dim} with an orthonormal basis."""

    ambient_dim: int
    basis: np.ndarray = field(repr=False)
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if self.ambient_dim < 1:
            raise InputError(f"ambient_dim must be positive, got {self.ambient_dim}")
        if not self.tol > 0:
            raise InputError(f"tol must be positive, got {self.tol}")
        b = np.asarray(self.basis, dtype=float)
        if b.ndim != 2 or b.shape[0] != self.ambient_dim:
            raise InputError(
                f"basis must be {self.ambient_dim} x k, got shape {b.shape}"
            )
        if b.shape[1] > self.ambient_dim:
            raise InputError(
                f"basis has {b.shape[1]} columns in ambient dimension {self.ambient_dim}"
            )
        if b.size and not np.isfinite(b).all():
            raise InputError("basis contains non-finite entries")
        gram = b.T @ b
        if b.shape[1] and np.max(np.abs(gram - np.eye(b.shape[1]))) > 1e-12:
            raise InputError("basis columns are not orthonormal to 1e-12")
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        """Orthogonal projector onto the subspace."""
        return self.basis @ self.basis.T

    def residual(self, v: np.ndarray) -> float:
        """Distance ||(I - Pi) v|| from a vector to the subspace."""
        v = np.asarray(v, dtype=float).reshape(-1)
        if v.shape[0] != self.ambient_dim:
            raise DimensionError("vector has wrong ambient dimension")
        return float(np.linalg.norm(v - self.basis @ (self.basis.T @ v)))

    @classmethod
    def trivial(cls, n: int, tol: float = DEFAULT_TOL) -> "Subspace":
        return cls(n, np.zeros((n, 0)), tol)

    @classmethod
    def full(cls, n: int, tol: float = DEFAULT_TOL) -> "Subspace":
        return cls(n, np.eye(n), tol)

    @classmethod
    def span(cls, vectors, tol: float | None = None) -> "Subspace":
        """Subspace spanned by the columns of ``vectors``.

        The spanning set need not be orthonormal or independent; an
        orthonormal basis is extracted by a rank factorization at the
        supplied (or default) tolerance.
        """
        m = as_matrix(vectors, "spanning set")
        rf = rank_factorization(m, tol)
        return cls(m.shape[0], rf.range_basis, tol if tol is not None else DEFAULT_TOL)


def range_space(m: np.ndarray, tol: float | None = None) -> Subspace:
    """Column space of a matrix as a Subspace."""
    m = as_matrix(m)
    rf = rank_factorization(m, tol)
    return Subspace(m.shape[0], rf.range_basis, tol if tol is not None else DEFAULT_TOL)


def null_space(m: np.ndarray, tol: float | None = None) -> Subspace:
    """Null space of a matrix as a Subspace."""
    m = as_matrix(m)
    rf = rank_factorization(m, tol)
    return Subspace(m.shape[1], rf.null_basis, tol if tol is not None else DEFAULT_TOL)


def _check_ambient(u: Subspace, v: Subspace) -> None:
    if u.ambient_dim != v.ambient_dim:
        raise DimensionError(
            f"ambient dimensions differ: {u.ambient_dim} vs {v.ambient_dim}"
        )


def sum(u: Subspace, v: Subspace) -> Subspace:
    """Subspace sum U + V under the coarser of the two tolerances."""
    _check_ambient(u, v)
    tol = max(u.tol, v.tol)
    stacked = np.hstack([u.basis, v.basis])
    if stacked.shape[1] == 0:
        return Subspace.trivial(u.ambient_dim, tol)
    rf = rank_factorization(stacked, tol)
    return Subspace(u.ambient_dim, rf.range_basis, tol)


def intersect(u: Subspace, v: Subspace) -> tuple[Subspace, np.ndarray | None]:
    """Intersection U ∩ V and, when nontrivial, a unit witness vector.

    The intersection is read off the null space of the concatenated
    basis matrix [B_U | -B_V]: a null vector (c; d) certifies
    B_U c = B_V d, a vector lying in both subspaces.  The witness is
    within distance ~tol of both U and V.
    """
    _check_ambient(u, v)
    tol = max(u.tol, v.tol)
    p, q = u.dim, v.dim
    if p == 0 or q == 0:
        return Subspace.trivial(u.ambient_dim, tol), None
    k = np.hstack([u.basis, -v.basis])
    _, s, vh = np.linalg.svd(k)
    rank = int(np.sum(s > tol))
    nullity = p + q - rank
    if nullity <= 0:
        return Subspace.trivial(u.ambient_dim, tol), None
    coeffs = vh[rank:, :].T  # (p+q, nullity)
    raw = u.basis @ coeffs[:p, :]  # columns have norm ~ 1/sqrt(2)
    rf = rank_factorization(raw)
    basis = rf.range_basis[:, :nullity]
    w = Subspace(u.ambient_dim, basis, tol)
    witness = basis[:, 0].copy()
    return w, witness


def intersection_margin(u: Subspace, v: Subspace) -> float:
    """Decisive singular value for "U ∩ V is trivial".

    The intersection is trivial iff this value exceeds the coarser of
    the two tolerances.  Returns +inf when either subspace is trivial
    and 0.0 when dim U + dim V exceeds the ambient dimension (the
    intersection is then nontrivial by dimension count).
    """
    _check_ambient(u, v)
    if u.dim == 0 or v.dim == 0:
        return float("inf")
    if u.dim + v.dim > u.ambient_dim:
        return 0.0
    s = np.linalg.svd(np.hstack([u.basis, -v.basis]), compute_uv=False)
    return float(s[-1])


def sum_full_margin(u: Subspace, v: Subspace) -> float:
    """Decisive singular value for "U + V is the whole ambient space".

    The sum is full iff this value exceeds the coarser tolerance.  When
    dim U + dim V < ambient_dim the sum cannot be full and 0.0 is
    returned.
    """
    _check_ambient(u, v)
    n = u.ambient_dim
    stacked = np.hstack([u.basis, v.basis])
    if stacked.shape[1] < n:
        return 0.0
    s = np.linalg.svd(stacked, compute_uv=False)
    return float(s[n - 1])


def is_complement(u: Subspace, v: Subspace) -> bool:
    """True iff U ∩ V = {0} and dim U + dim V = ambient_dim."""
    _check_ambient(u, v)
    if u.dim + v.dim != u.ambient_dim:
        return False
    tol = max(u.tol, v.tol)
    return intersection_margin(u, v) > tol


def distance(u: Subspace, v: Subspace) -> float:
    """Gap distance: sine of the largest principal angle.

    Defined for equal-dimensional subspaces; returns the 1.0 sentinel on
    a dimension mismatch (callers can detect the mismatch by comparing
    dims, as :func:`equal` does).  Computed as the largest singular
    value of (I - Pi_U) B_V, which is exact for small angles.
    """
    _check_ambient(u, v)
    if u.dim != v.dim:
        return 1.0
    if u.dim == 0:
        return 0.0
    r = v.basis - u.basis @ (u.basis.T @ v.basis)
    return min(1.0, spectral_norm(r))


def equal(u: Subspace, v: Subspace, tol: float = EQUALITY_TOL) -> bool:
    """Subspace equality: equal dims and gap distance at most ``tol``."""
    return u.dim == v.dim and distance(u, v) <= tol


def orthogonal_complement(u: Subspace) -> Subspace:
    """Orthogonal complement of U in its ambient space."""
    n, k = u.ambient_dim, u.dim
    if k == 0:
        return Subspace.full(n, u.tol)
    uu, _, _ = np.linalg.svd(u.basis, full_matrices=True)
    return Subspace(n, np.ascontiguousarray(uu[:, k:]), u.tol)


def random_complement(u: Subspace, seed: int) -> Subspace:
    """A random complement of U, deterministic for fixed seed.

    Draws ambient_dim - dim(U) standard-normal vectors and keeps their
    span when the pair is comfortably complementary, measured by
    sigma_min of the stacked bases; near-degenerate draws are redrawn,
    at most 100 times.
    """
    n, k = u.ambient_dim, u.dim
    if k == n:
        return Subspace.trivial(n, u.tol)
    if k == 0:
        return Subspace.full(n, u.tol)
    rng = np.random.default_rng(seed)
    for _ in range(100):
        g = rng.standard_normal((n, n - k))
        rf = rank_factorization(g)
        if rf.rank < n - k:
            continue
        cand = rf.range_basis
        s = np.linalg.svd(np.hstack([u.basis, cand]), compute_uv=False)
        if s[-1] >= 1e-3:
            return Subspace(n, cand, u.tol)
    raise ComplementError("no well-conditioned complement found in 100 draws")
