"""Construction and verification of generalized inverses.

A generalized inverse of T is a map S with T S T = T and S T S = S.  It
is determined by a choice of complements: M for the null space of T in
the domain and W for the range of T in the codomain.  The induced
idempotents P = I - S T (onto N(T) along M) and Q = T S (onto R(T)
along W) are carried alongside T and S in a :class:`GiBundle`.

Choosing the orthogonal complements yields the Moore-Penrose inverse,
which additionally satisfies the two symmetry conditions (T S)^T = T S
and (S T)^T = S T.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import subspaces
from .dense import as_matrix, rank_factorization, solve_square, spectral_norm
from .errors import ComplementError, DimensionError
from .subspaces import Subspace

# Residual threshold (times the scale (1+||T||)(1+||S||)) at which a
# candidate inverse is accepted.
DEFAULT_VERIFY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class GiResiduals:
    """The four defining residual norms of a candidate inverse.

    r1 = ||T S T - T||, r2 = ||S T S - S||, idem_p = ||P^2 - P|| for
    P = I - S T, idem_q likewise for Q = T S; all spectral norms, raw
    (unscaled).  ``passed`` records whether all four are at most
    tol * (1 + ||T||)(1 + ||S||).
    """

    r1: float
    r2: float
    idem_p: float
    idem_q: float
    scale: float
    tol: float
    passed: bool


@dataclass(frozen=True, eq=False)
class GiBundle:
    """An operator T with a generalized inverse S and its idempotents."""

    T: np.ndarray = field(repr=False)
    S: np.ndarray = field(repr=False)
    P: np.ndarray = field(repr=False)
    Q: np.ndarray = field(repr=False)
    residuals: GiResiduals


@dataclass(frozen=True, eq=False)
class ComplementChoice:
    """Prescribed complements: M for N(T) in the domain, W for R(T) in
    the codomain."""

    M: Subspace
    W: Subspace


def verify_gi(t: np.ndarray, s: np.ndarray, tol: float = DEFAULT_VERIFY_TOL) -> GiResiduals:
    """Compute the defining residuals of a candidate inverse S for T.

    Pass/fail is judged at ``tol`` times the scale
    (1 + ||T||)(1 + ||S||), which keeps the verdict meaningful for
    ill-scaled inputs.
    """
    t = as_matrix(t, "T")
    s = as_matrix(s, "S")
    if s.shape != (t.shape[1], t.shape[0]):
        raise DimensionError(
            f"S must be {t.shape[1]} x {t.shape[0]} for T of shape {t.shape}, "
            f"got {s.shape}"
        )
    st = s @ t
    ts = t @ s
    p = np.eye(t.shape[1]) - st
    r1 = spectral_norm(ts @ t - t)
    r2 = spectral_norm(st @ s - s)
    idem_p = spectral_norm(p @ p - p)
    idem_q = spectral_norm(ts @ ts - ts)
    scale = (1.0 + spectral_norm(t)) * (1.0 + spectral_norm(s))
    passed = max(r1, r2, idem_p, idem_q) <= tol * scale
    return GiResiduals(r1, r2, idem_p, idem_q, scale, tol, passed)


def _require_complement(u: Subspace, v: Subspace, what: str) -> None:
    """Raise ComplementError with a witness or deficit if U, V do not
    split the ambient space."""
    if u.ambient_dim != v.ambient_dim:
        raise DimensionError(
            f"{what}: ambient dimensions differ ({u.ambient_dim} vs {v.ambient_dim})"
        )
    if u.dim + v.dim != u.ambient_dim:
        deficit = u.ambient_dim - u.dim - v.dim
        raise ComplementError(
            f"{what}: dimensions {u.dim} + {v.dim} != ambient {u.ambient_dim}",
            deficit=deficit,
        )
    if not subspaces.is_complement(u, v):
        _, witness = subspaces.intersect(u, v)
        raise ComplementError(f"{what}: subspaces intersect nontrivially", witness=witness)


def oblique_projector(v: Subspace, w: Subspace) -> np.ndarray:
    """Idempotent with range V and null space W, for complementary V, W.

    Built as [B_V | 0] [B_V | B_W]^{-1}; raises ComplementError (with an
    intersection witness or dimension deficit) when V and W do not split
    the space.
    """
    _require_complement(v, w, "oblique projector")
    n = v.ambient_dim
    if v.dim == 0:
        return np.zeros((n, n))
    if w.dim == 0:
        return np.eye(n)
    a = np.hstack([v.basis, w.basis])
    target = np.hstack([v.basis, np.zeros((n, w.dim))])
    return solve_square(a.T, target.T).T


def build_gi(
    t: np.ndarray,
    choice: ComplementChoice,
    tol: float | None = None,
    verify_tol: float = DEFAULT_VERIFY_TOL,
) -> GiBundle:
    """The unique generalized inverse of T determined by a complement choice.

    S restricts T to M, inverts that restriction on R(T), composes with
    the projector onto R(T) along W, and extends by zero on W.  The
    result satisfies T S T = T, S T S = S, T S = Q and S T = I - P.

    A rank-0 T yields S = 0 with P = I, Q = 0; a square full-rank T
    yields S = T^{-1}.
    """
    t = as_matrix(t, "T")
    m_dim, n_dim = t.shape
    rf = rank_factorization(t, tol)
    null_t = Subspace(n_dim, rf.null_basis)
    range_t = Subspace(m_dim, rf.range_basis)
    _require_complement(choice.M, null_t, "M vs N(T)")
    _require_complement(choice.W, range_t, "W vs R(T)")
    r = rf.rank
    if r == 0:
        s = np.zeros((n_dim, m_dim))
    else:
        q_proj = oblique_projector(range_t, choice.W)
        b_m = choice.M.basis
        b_r = rf.range_basis
        restricted = b_r.T @ t @ b_m  # coordinates of T|_M on R(T)
        s = b_m @ solve_square(restricted, b_r.T @ q_proj)
    p = np.eye(n_dim) - s @ t
    q = t @ s
    residuals = verify_gi(t, s, verify_tol)
    return GiBundle(t, s, p, q, residuals)


def orthogonal_choice(t: np.ndarray, tol: float | None = None) -> ComplementChoice:
    """The orthogonal complement choice (row space of T, range of T^perp)."""
    t = as_matrix(t, "T")
    rf = rank_factorization(t, tol)
    m = subspaces.orthogonal_complement(Subspace(t.shape[1], rf.null_basis))
    w = subspaces.orthogonal_complement(Subspace(t.shape[0], rf.range_basis))
    return ComplementChoice(m, w)


def random_choice(t: np.ndarray, seed: int, tol: float | None = None) -> ComplementChoice:
    """A seeded random oblique complement choice for T."""
    t = as_matrix(t, "T")
    rf = rank_factorization(t, tol)
    rng = np.random.default_rng(seed)
    s1, s2 = (int(x) for x in rng.integers(2**63, size=2))
    m = subspaces.random_complement(Subspace(t.shape[1], rf.null_basis), s1)
    w = subspaces.random_complement(Subspace(t.shape[0], rf.range_basis), s2)
    return ComplementChoice(m, w)


def moore_penrose(t: np.ndarray, tol: float | None = None) -> GiBundle:
    """The Moore-Penrose inverse: the generalized inverse for orthogonal
    complements.  Satisfies all four defining conditions including the
    symmetry of T S and S T."""
    return build_gi(t, orthogonal_choice(t, tol), tol)


def range_projector_norm(bundle: GiBundle) -> float:
    """Operator norm of the idempotent Q = T S.

    At least 1 (up to roundoff) whenever Q is nonzero: a nonzero
    idempotent fixes its range.
    """
    return spectral_norm(bundle.Q)
