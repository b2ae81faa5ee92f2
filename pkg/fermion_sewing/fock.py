"""Fock basis of the rank two free fermion.

A label Psi[k, l] stands for psi+[-k_1] ... psi+[-k_s] psi-[-l_1] ... psi-[-l_t] 1
with 1 <= k_1 < ... < k_s and 1 <= l_1 < ... < l_t.
"""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass

from .coeffs import eps_quarter


@dataclass(frozen=True)
class FockLabel:
    """Mode indices of a Fock vector."""

    k: tuple[int, ...] = ()
    l: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        for name in ("k", "l"):
            modes = tuple(int(v) for v in getattr(self, name))
            if any(v < 1 for v in modes):
                raise ValueError(f"{name} modes must be positive, got {modes}")
            if any(a >= b for a, b in zip(modes, modes[1:])):
                raise ValueError(f"{name} modes must strictly increase, got {modes}")
            object.__setattr__(self, name, modes)

    @property
    def s(self) -> int:
        return len(self.k)

    @property
    def t(self) -> int:
        return len(self.l)

    @property
    def twice_weight(self) -> int:
        """2 wt, an integer since every mode carries weight k - 1/2."""
        return sum(2 * v - 1 for v in self.k) + sum(2 * v - 1 for v in self.l)

    @property
    def weight(self) -> float:
        return self.twice_weight / 2

    @property
    def parity(self) -> int:
        return (self.s + self.t) % 2

    def swapped(self) -> FockLabel:
        """Psi[l, k]."""
        return FockLabel(self.l, self.k)

    def __str__(self) -> str:
        return f"Psi[{list(self.k)}, {list(self.l)}]"


def _increasing_modes(start: int, budget: int) -> Iterator[tuple[int, ...]]:
    """Strictly increasing mode tuples from `start` with sum(2k - 1) <= budget."""
    yield ()
    k = start
    while 2 * k - 1 <= budget:
        for rest in _increasing_modes(k + 1, budget - (2 * k - 1)):
            yield (k, *rest)
        k += 1


def enumerate_labels(weight_cap: float, excess: int = 0) -> list[FockLabel]:
    """All labels with t = s + excess and weight <= weight_cap.

    Ordered by weight, then lexicographically in (k, l).
    """
    budget = int(2 * weight_cap + 1e-9)
    labels = []
    for k in _increasing_modes(1, budget):
        used = sum(2 * v - 1 for v in k)
        for l in _increasing_modes(1, budget - used):
            if len(l) == len(k) + excess:
                labels.append(FockLabel(k, l))
    labels.sort(key=lambda label: (label.twice_weight, label.k, label.l))
    return labels


def square_bracket_dual(
    label: FockLabel, eps: complex, mobius_xi: complex
) -> tuple[complex, FockLabel]:
    """Dual of Psi[k, l] under the sewing pairing.

    Returns (c, Psi[l, k]) with c = (-1)^(st) (-xi)^p eps^wt, where xi is the
    branch of the sewing map and eps^wt uses the principal square root.
    """
    root = eps_quarter(eps) ** 2
    coefficient = (
        (-1) ** (label.s * label.t)
        * (-mobius_xi) ** label.parity
        * root**label.twice_weight
    )
    return coefficient, label.swapped()
