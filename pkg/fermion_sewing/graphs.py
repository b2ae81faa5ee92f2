"""Rotationless cycle graphs and the product form of det(I - W1 W2).

A cycle graph with nodes k_1, ..., k_2n carries the weight

    zeta = prod_i W1(k_(2i-1), k_(2i)) W2(k_(2i), k_(2i+1)),   k_(2n+1) = k_1

and det(I - W1 W2) = prod (1 - zeta) over the rotationless graphs. Only even
rotations preserve the alternation of W1 and W2 edges, so rotationless graphs
are the Lyndon words over the alphabet of node pairs (k_(2i-1), k_(2i)).

References:
 - https://en.wikipedia.org/wiki/Lyndon_word
 - https://doi.org/10.1006/jagm.1999.1009 (prenecklace generation)

"""

from __future__ import annotations

import cmath
from collections.abc import Callable, Iterator
from dataclasses import dataclass

from .coeffs import TruncatedMatrix
from .const import LOGGER, IndexOutOfRangeError

_LOGGER = LOGGER.getChild("graphs")

LetterCost = Callable[[int, int], int]


def heisenberg_cost(a: int, b: int) -> int:
    """eps-order contributed by the node pair (a, b) to a zeta_A weight."""
    return a + b


def fermion_cost(a: int, b: int) -> int:
    """eps-order contributed by the node pair (a, b) to a zeta_F weight."""
    return a + b - 1


@dataclass(frozen=True)
class CycleGraph:
    """Node labels of an oriented cycle, read from a distinguished odd node."""

    labels: tuple[int, ...]

    def __post_init__(self) -> None:
        labels = tuple(int(k) for k in self.labels)
        if len(labels) < 2 or len(labels) % 2:
            raise ValueError(f"a cycle graph needs an even number >= 2 of nodes, got {labels}")
        if any(k < 1 for k in labels):
            raise ValueError(f"node labels must be positive, got {labels}")
        object.__setattr__(self, "labels", labels)

    @property
    def halflen(self) -> int:
        return len(self.labels) // 2

    def rotations(self) -> Iterator[tuple[int, ...]]:
        """The labels under every even rotation, the identity first."""
        for shift in range(0, len(self.labels), 2):
            yield self.labels[shift:] + self.labels[:shift]

    @property
    def rotationless(self) -> bool:
        return sum(1 for r in self.rotations() if r == self.labels) == 1

    def cost(self, letter_cost: LetterCost) -> int:
        pairs = zip(self.labels[::2], self.labels[1::2])
        return sum(letter_cost(a, b) for a, b in pairs)


def canonical(g: CycleGraph) -> CycleGraph:
    return CycleGraph(min(g.rotations()))


def enumerate_rotationless(
    max_halflen: int,
    max_label: int,
    budget: int | None = None,
    letter_cost: LetterCost = fermion_cost,
) -> list[CycleGraph]:
    """Every rotationless graph with at most 2 max_halflen nodes, in canonical form.

    Lyndon words over the pairs (a, b), 1 <= a, b <= max_label, are generated
    as prenecklaces. A prefix whose cost already exceeds `budget` is pruned,
    which is exact because every letter costs at least one.
    """
    if max_halflen < 1 or max_label < 1:
        raise ValueError("max_halflen and max_label must be positive")
    alphabet = [(a, b) for a in range(1, max_label + 1) for b in range(1, max_label + 1)]
    costs = [letter_cost(a, b) for a, b in alphabet]
    limit = float("inf") if budget is None else budget
    word = [0] * (max_halflen + 1)
    found: list[CycleGraph] = []

    def emit(length: int) -> None:
        labels = [node for index in word[1 : length + 1] for node in alphabet[index]]
        found.append(CycleGraph(tuple(labels)))

    def extend(t: int, period: int, spent: int) -> None:
        # word[1:t] is a prenecklace with the given period
        if t > 1 and period == t - 1:
            emit(t - 1)
        if t > max_halflen:
            return
        start = word[t - period] if t > 1 else 0
        for letter in range(start, len(alphabet)):
            if spent + costs[letter] > limit:
                continue
            word[t] = letter
            extend(t + 1, period if letter == start and t > 1 else t, spent + costs[letter])

    extend(1, 1, 0)
    _LOGGER.debug(
        "%d rotationless graphs up to half-length %d, labels <= %d, budget %s",
        len(found),
        max_halflen,
        max_label,
        budget,
    )
    return found


def _entry(matrix: TruncatedMatrix, k: int, l: int) -> complex:
    if k > matrix.order or l > matrix.order:
        raise IndexOutOfRangeError(
            f"label ({k}, {l}) beyond the truncation order {matrix.order}"
        )
    return matrix(k, l)


def zeta_weight(g: CycleGraph, w1: TruncatedMatrix, w2: TruncatedMatrix) -> complex:
    labels = g.labels
    size = len(labels)
    weight = 1 + 0j
    for i in range(0, size, 2):
        weight *= _entry(w1, labels[i], labels[i + 1])
        weight *= _entry(w2, labels[i + 1], labels[(i + 2) % size])
    return weight


def product_expansion(
    w1: TruncatedMatrix,
    w2: TruncatedMatrix,
    max_halflen: int,
    max_label: int,
    budget: int | None = None,
    letter_cost: LetterCost = fermion_cost,
) -> complex:
    """prod (1 - zeta) over the enumerated rotationless graphs."""
    if max_label > min(w1.order, w2.order):
        raise IndexOutOfRangeError(
            f"max_label {max_label} exceeds the truncation order {min(w1.order, w2.order)}"
        )
    product = 1 + 0j
    for g in enumerate_rotationless(max_halflen, max_label, budget, letter_cost):
        product *= 1 - zeta_weight(g, w1, w2)
    return product


def jacobi_product(
    a1: TruncatedMatrix,
    a2: TruncatedMatrix,
    f1: TruncatedMatrix,
    f2: TruncatedMatrix,
    budget: int,
) -> complex:
    """prod_A (1 - zeta_A)^(1/2) prod_F (1 - zeta_F), graphs of eps-order <= budget.

    Matches det(I - A1 A2)^(1/2) det(I - F1 F2) through eps^budget.
    """
    if budget < 1:
        raise ValueError(f"budget must be positive, got {budget}")
    heisenberg = 1 + 0j
    for g in enumerate_rotationless(
        max(1, budget // 2), min(a1.order, a2.order, budget), budget, heisenberg_cost
    ):
        heisenberg *= cmath.sqrt(1 - zeta_weight(g, a1, a2))
    fermion = product_expansion(
        f1, f2, budget, min(f1.order, f2.order, budget), budget, fermion_cost
    )
    return heisenberg * fermion
