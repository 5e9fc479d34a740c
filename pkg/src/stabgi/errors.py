"""Exception types shared across the package.

The CLI maps these onto its exit-code contract: input and parse problems
exit 1, violated operation preconditions (non-complementary subspaces,
incompatible shapes, missing bijectivity) exit 2, and verification
failures exit 3.
"""

from __future__ import annotations

import numpy as np


class StabgiError(Exception):
    """Base class for all library errors."""


class InputError(StabgiError):
    """Invalid input data: non-finite entries, bad dimensions, parse errors."""


class DimensionError(StabgiError):
    """Operands live in incompatible spaces (ambient or shape mismatch)."""


class SingularMatrixError(StabgiError):
    """A square solve was requested for a matrix singular to tolerance."""

    def __init__(self, message: str, sigma_min: float = 0.0):
        super().__init__(message)
        self.sigma_min = float(sigma_min)


class ComplementError(StabgiError):
    """A subspace pair required to be complementary is not.

    Carries either a unit witness vector in the intersection or the
    dimension deficit, whichever explains the failure.
    """

    def __init__(
        self,
        message: str,
        witness: np.ndarray | None = None,
        deficit: int | None = None,
    ):
        super().__init__(message)
        self.witness = witness
        self.deficit = deficit


class PreconditionError(StabgiError):
    """An operation was called outside its stated hypotheses."""
