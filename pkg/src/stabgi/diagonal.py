"""Truncated diagonal operators with closed-form perturbation oracles.

A diagonal operator acts as e_k -> t_k e_k on the first N coordinates.
Growth of the entries across the truncation stands in for unbounded
behavior; every quantity reported here is an exact statement about the
truncation only, never a claim about an intended infinite extension
(``tail_note`` records that extension as free-text metadata and plays no
computational role).

Because everything is per-coordinate, stability, carrier bijectivity,
the updated inverse, the relative-bound constant and the range-closure
margin all have closed forms, which makes this model the exact oracle
for cross-validating the dense-matrix pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, InputError

# Entries at or below this magnitude form the zero pattern.  Read, not
# inferred: independent of the dense pipeline's rank tolerance.
ZERO_TOL = 1e-14

# Relative invertibility margin for the per-coordinate carrier entries,
# mirroring the dense pipeline's threshold.
INV_REL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class DiagonalOperator:
    """Diagonal entries t_0 .. t_{N-1} of a truncated operator."""

    entries: np.ndarray = field(repr=False)
    tail_note: str = ""

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float).reshape(-1)
        if e.size < 1:
            raise InputError("a diagonal operator needs at least one entry")
        if not np.isfinite(e).all():
            raise InputError("entries contain non-finite values")
        object.__setattr__(self, "entries", e)
        object.__setattr__(self, "_zero_mask", np.abs(e) <= ZERO_TOL)

    @property
    def truncation(self) -> int:
        return int(self.entries.size)

    @property
    def zero_mask(self) -> np.ndarray:
        """Boolean mask of the zero pattern {k : |t_k| <= 1e-14}."""
        return self._zero_mask


@dataclass(frozen=True, eq=False)
class DiagAnalysis:
    """Closed-form analysis of a perturbed diagonal pair.

    ``range_closed_margin`` is a proxy: the smallest nonzero |t_k + d_k|
    on the truncation.  ``c`` is the norm of the per-coordinate range
    projector (1 unless the operator is identically zero); ``b_min`` the
    smallest relative bound max |d_k / t_k| over the nonzero pattern.
    """

    stable: bool
    bijective: bool
    G_entries: np.ndarray | None
    range_closed_margin: float
    c: float
    b_min: float
    bc: float


def diag_gi(t: DiagonalOperator) -> DiagonalOperator:
    """Per-coordinate generalized inverse: 1/t_k off the zero pattern."""
    s = np.zeros_like(t.entries)
    nz = ~t.zero_mask
    s[nz] = 1.0 / t.entries[nz]
    return DiagonalOperator(s)


def _check_pair(t: DiagonalOperator, d: DiagonalOperator) -> None:
    if t.truncation != d.truncation:
        raise DimensionError(
            f"truncations differ: {t.truncation} vs {d.truncation}"
        )


def diag_analyze(t: DiagonalOperator, d: DiagonalOperator) -> DiagAnalysis:
    """Analyze the perturbation t -> t + d coordinate by coordinate.

    Stability means d vanishes (to the zero-pattern tolerance) on the
    zero pattern of t; bijectivity means every carrier entry
    1 + d_k / t_k clears the relative invertibility margin.  The updated
    inverse has entries 1/(t_k + d_k) off the zero pattern and is
    reported only when bijective.
    """
    _check_pair(t, d)
    z = t.zero_mask
    nz = ~z
    stable = bool(np.all(np.abs(d.entries[z]) <= ZERO_TOL))

    w = np.ones_like(t.entries)
    w[nz] = 1.0 + d.entries[nz] / t.entries[nz]
    thr = INV_REL_TOL * float(np.max(np.abs(w)))
    bijective = bool(np.min(np.abs(w)) > thr)

    g_entries = None
    if bijective:
        g_entries = np.zeros_like(t.entries)
        g_entries[nz] = 1.0 / (t.entries[nz] + d.entries[nz])

    tbar = t.entries + d.entries
    nonzero_tbar = np.abs(tbar) > ZERO_TOL
    if nonzero_tbar.any():
        range_closed_margin = float(np.min(np.abs(tbar[nonzero_tbar])))
    else:
        range_closed_margin = float("inf")

    c = 1.0 if nz.any() else 0.0
    b_min = float(np.max(np.abs(d.entries[nz] / t.entries[nz]))) if nz.any() else 0.0
    return DiagAnalysis(
        stable=stable,
        bijective=bijective,
        G_entries=g_entries,
        range_closed_margin=range_closed_margin,
        c=c,
        b_min=b_min,
        bc=b_min * c,
    )


def diag_tbound(t: DiagonalOperator, d: DiagonalOperator, b: float) -> float:
    """Exact minimal a with ||d x|| <= a ||x|| + b ||t x|| on the truncation.

    For diagonal pairs the sphere maximum of ||d x|| - b ||t x|| is
    attained at a coordinate vector whenever it is nonnegative, so the
    minimal constant is max(0, max_k(|d_k| - b |t_k|)).
    """
    _check_pair(t, d)
    if b < 0:
        raise InputError("b must be nonnegative")
    return float(max(0.0, np.max(np.abs(d.entries) - b * np.abs(t.entries))))


def embed(t: DiagonalOperator) -> np.ndarray:
    """The N x N dense diagonal matrix of the operator."""
    return np.diag(t.entries)
