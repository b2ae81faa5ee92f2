"""Tests for determinants, guarded solves and tracked square roots."""

from __future__ import annotations

import cmath
import math

import numpy as np
import pytest

from fermion_sewing.const import BranchAmbiguityError, LinearSolveFailure
from fermion_sewing.linalg import (
    block_minor_expansion,
    lu_det,
    off_diagonal_block,
    principal_minor_sum,
    solve,
    tracked_sqrt,
)


def random_matrix(size: int, seed: int, scale: float = 1.0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return scale * (rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size)))


class TestLuDet:
    def test_matches_numpy(self):
        """LU determinant agrees with numpy."""
        matrix = random_matrix(5, 1)
        expected = np.linalg.det(matrix)
        assert abs(lu_det(matrix) - expected) < 1e-12 * abs(expected)

    def test_empty(self):
        """The empty determinant is one."""
        assert lu_det(np.zeros((0, 0))) == 1

    def test_non_finite(self):
        """NaN entries surface as LinearSolveFailure."""
        with pytest.raises(LinearSolveFailure):
            lu_det(np.array([[np.nan, 0], [0, 1]]))


class TestSolve:
    def test_solution(self):
        """The solution satisfies the system."""
        matrix = random_matrix(4, 2) + 4 * np.eye(4)
        rhs = np.arange(4, dtype=complex)
        assert np.allclose(matrix @ solve(matrix, rhs), rhs)

    @pytest.mark.filterwarnings("ignore")
    def test_singular(self):
        """A singular system is refused."""
        with pytest.raises(LinearSolveFailure):
            solve(np.array([[1.0, 2.0], [2.0, 4.0]]), np.array([1.0, 0.0]))


class TestMinorExpansions:
    def test_principal_minor_sum(self):
        """Complete principal minor sum is det(I + R)."""
        matrix = random_matrix(4, 3, 0.3)
        expected = np.linalg.det(np.eye(4) + matrix)
        assert abs(principal_minor_sum(matrix) - expected) < 1e-12

    def test_block_minor_expansion(self):
        """Complete block minor expansion is det(I - AB)."""
        a, b = random_matrix(3, 4, 0.4), random_matrix(3, 5, 0.4)
        expected = np.linalg.det(np.eye(3) - a @ b)
        assert abs(block_minor_expansion(a, b) - expected) < 1e-12

    def test_truncated_expansion(self):
        """Stopping at m = 1 leaves an error of fourth order in the entries."""
        a, b = random_matrix(3, 6, 1e-3), random_matrix(3, 7, 1e-3)
        expected = np.linalg.det(np.eye(3) - a @ b)
        assert abs(block_minor_expansion(a, b, max_size=1) - expected) < 1e-10

    def test_scaling_independence(self):
        """det(I - [[0, tA], [B/t, 0]]) does not depend on t."""
        a, b = random_matrix(3, 8, 0.4), random_matrix(3, 9, 0.4)
        reference = np.linalg.det(np.eye(3) - b @ a)
        for t in (1.0, 0.3j, 2.5 - 1j):
            value = lu_det(np.eye(6) - off_diagonal_block(a, b, t))
            assert abs(value - reference) < 1e-12


class TestTrackedSqrt:
    def test_constant_path(self):
        """A path that stays at 1 gives root 1."""
        assert tracked_sqrt([1.0, 1.0]) == 1

    def test_winding(self):
        """Going once around zero lands on the other branch."""
        path = [cmath.exp(2j * math.pi * j / 64) for j in range(1, 65)]
        assert abs(tracked_sqrt(path) + 1) < 1e-12

    def test_through_zero(self):
        """A path through zero has no determinate branch."""
        with pytest.raises(BranchAmbiguityError):
            tracked_sqrt([0.5, 0.0, 0.5])

    def test_coarse_path(self):
        """A phase jump above pi/2 is refused."""
        with pytest.raises(BranchAmbiguityError):
            tracked_sqrt([1.0, -1.0])
