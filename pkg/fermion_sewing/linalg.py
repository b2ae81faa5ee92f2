"""Dense complex linear algebra for the truncated sewing matrices.

Determinants come from a pivoted LU factorisation. Solves go through the
same factorisation and refuse numerically singular systems instead of
returning garbage.

References:
 - https://docs.scipy.org/doc/scipy/reference/generated/scipy.linalg.lu_factor.html

"""

from __future__ import annotations

import cmath
import itertools
import math
from collections.abc import Iterable

import numpy as np
import scipy.linalg

from .const import LOGGER, BranchAmbiguityError, LinearSolveFailure

_LOGGER = LOGGER.getChild("linalg")

PIVOT_RATIO_FLOOR = 1e-14  # Smallest admissible |u_min| / |u_max| in an LU factor


def _factor(matrix: np.ndarray, what: str) -> tuple[np.ndarray, np.ndarray]:
    try:
        lu, piv = scipy.linalg.lu_factor(np.asarray(matrix, dtype=complex), check_finite=True)
    except (ValueError, np.linalg.LinAlgError) as exception:
        raise LinearSolveFailure(f"{what}: LU factorisation failed") from exception
    return lu, piv


def lu_det(matrix: np.ndarray, what: str = "determinant") -> complex:
    """Determinant from a partially pivoted LU factorisation."""
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.size == 0:
        return 1 + 0j
    lu, piv = _factor(matrix, what)
    swaps = int(np.count_nonzero(piv != np.arange(piv.size)))
    return complex((-1) ** swaps * np.prod(np.diag(lu)))


def solve(matrix: np.ndarray, rhs: np.ndarray, what: str = "linear solve") -> np.ndarray:
    """Solve matrix @ x = rhs, raising LinearSolveFailure on a singular system."""
    lu, piv = _factor(matrix, what)
    diagonal = np.abs(np.diag(lu))
    ratio = diagonal.min() / diagonal.max() if diagonal.max() > 0 else 0.0
    _LOGGER.debug("%s: pivot ratio %.3e", what, ratio)
    if ratio < PIVOT_RATIO_FLOOR:
        raise LinearSolveFailure(
            f"{what}: matrix numerically singular (pivot ratio {ratio:.3e})"
        )
    return scipy.linalg.lu_solve((lu, piv), np.asarray(rhs, dtype=complex))


def _subindices(size: int, length: int) -> Iterable[tuple[int, ...]]:
    return itertools.combinations(range(size), length)


def principal_minor_sum(matrix: np.ndarray, max_size: int | None = None) -> complex:
    """sum_n sum_{|j|=n} det R(j, j), which equals det(I + R) when complete."""
    matrix = np.asarray(matrix, dtype=complex)
    size = matrix.shape[0]
    top = size if max_size is None else min(max_size, size)
    total = 0j
    for n in range(top + 1):
        for j in _subindices(size, n):
            total += lu_det(matrix[np.ix_(j, j)])
    return total


def block_minor_expansion(
    a: np.ndarray, b: np.ndarray, max_size: int | None = None
) -> complex:
    """sum_m (-1)^m sum_{|k|=|l|=m} det A(k, l) det B(l, k).

    Complete, this is det(I - AB). Truncating m keeps every term up to the
    corresponding order in the entries.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    size = a.shape[0]
    top = size if max_size is None else min(max_size, size)
    total = 0j
    for m in range(top + 1):
        for k in _subindices(size, m):
            for l in _subindices(size, m):
                minor_a = lu_det(a[np.ix_(k, l)])
                if minor_a == 0:
                    continue
                total += (-1) ** m * minor_a * lu_det(b[np.ix_(l, k)])
    return total


def off_diagonal_block(a: np.ndarray, b: np.ndarray, t: complex = 1.0) -> np.ndarray:
    """The 2M x 2M matrix [[0, t A], [B / t, 0]]."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    zero = np.zeros_like(a)
    return np.block([[zero, t * a], [b / t, zero]])


def tracked_sqrt(samples: Iterable[complex], what: str = "square root") -> complex:
    """Square root continued along a sampled path starting at 1.

    Each sample picks the root nearest the previous one. A phase increment
    above pi/2 between consecutive samples is too coarse to track.
    """
    previous_value = 1 + 0j
    root = 1 + 0j
    for value in samples:
        value = complex(value)
        if value == 0:
            raise BranchAmbiguityError(f"{what}: path passes through zero")
        step = cmath.phase(value / previous_value)
        if abs(step) > math.pi / 2:
            raise BranchAmbiguityError(
                f"{what}: phase increment {step:.3f} too large to track"
            )
        candidate = cmath.sqrt(value)
        root = candidate if abs(candidate - root) <= abs(candidate + root) else -candidate
        previous_value = value
    return root
