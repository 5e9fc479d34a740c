from __future__ import annotations

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0FFEE)


def write_csv(path, matrix) -> str:
    """Write a matrix in the CLI's CSV format and return the path."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    lines = [",".join(repr(float(x)) for x in row) for row in matrix]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)
