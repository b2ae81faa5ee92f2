"""Tests for Fock labels and square-bracket duals."""

from __future__ import annotations

import pytest

from fermion_sewing.coeffs import eps_quarter
from fermion_sewing.fock import FockLabel, enumerate_labels, square_bracket_dual


class TestFockLabel:
    def test_weight(self):
        """Each mode k carries weight k - 1/2."""
        label = FockLabel((1, 3), (2,))
        assert label.twice_weight == 1 + 5 + 3
        assert label.weight == 4.5

    def test_parity(self):
        """Parity counts the modes mod 2."""
        assert FockLabel((1,), (1,)).parity == 0
        assert FockLabel((), (2,)).parity == 1

    def test_increasing_modes(self):
        """Modes must strictly increase."""
        with pytest.raises(ValueError):
            FockLabel((2, 2), ())

    def test_positive_modes(self):
        """Modes start at one."""
        with pytest.raises(ValueError):
            FockLabel((0,), ())

    def test_swapped(self):
        """Swapping exchanges psi+ and psi- modes."""
        assert FockLabel((1,), (2, 3)).swapped() == FockLabel((2, 3), (1,))


class TestEnumerateLabels:
    def test_vacuum_only(self):
        """Below weight one only the vacuum has s = t."""
        assert enumerate_labels(0.5) == [FockLabel()]

    def test_neutral_labels(self):
        """Weight <= 2 with s = t, ordered by weight then modes."""
        assert enumerate_labels(2.0) == [
            FockLabel(),
            FockLabel((1,), (1,)),
            FockLabel((1,), (2,)),
            FockLabel((2,), (1,)),
        ]

    def test_charged_labels(self):
        """t = s + 1 picks the odd labels."""
        assert enumerate_labels(2.0, excess=1) == [FockLabel((), (1,)), FockLabel((), (2,))]

    def test_weight_cap_respected(self):
        """No label exceeds the cap."""
        assert all(label.weight <= 3.5 for label in enumerate_labels(3.5))


class TestSquareBracketDual:
    def test_vacuum(self):
        """The vacuum is self-dual with coefficient one."""
        coefficient, dual = square_bracket_dual(FockLabel(), 0.01, -1j)
        assert coefficient == 1
        assert dual == FockLabel()

    def test_even_label(self):
        """Psi[(1), (2)] pairs with Psi[(2), (1)] and picks up -eps^2."""
        eps = 0.01 + 0.02j
        coefficient, dual = square_bracket_dual(FockLabel((1,), (2,)), eps, -1j)
        assert dual == FockLabel((2,), (1,))
        assert coefficient == pytest.approx(-(eps**2))

    def test_odd_label(self):
        """An odd label carries one factor of the sewing-map branch."""
        eps = 0.04
        coefficient, dual = square_bracket_dual(FockLabel((), (1,)), eps, -1j)
        assert dual == FockLabel((1,), ())
        assert coefficient == pytest.approx(1j * eps_quarter(eps) ** 2)
