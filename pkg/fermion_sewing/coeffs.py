"""Laurent coefficient layer.

C and D collect the two-variable expansions

    P_1(x - y)     = 1/(x - y) + sum_{k,l>=1} C(k, l) x^(k-1) y^(l-1)
    P_1(z + x - y) = sum_{k,l>=1} D(k, l, z) x^(k-1) y^(l-1)

and the sewing matrices F_a, A_a and the half-form vectors h_a, hbar_a are
their epsilon-weighted truncations to indices 1 <= k, l <= M.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.special import gammaln

from .const import LOGGER, DomainViolationError
from .qseries import (
    DEFAULT_POLICY,
    ModularParam,
    SeriesPolicy,
    TwistData,
    eisenstein_classical,
    eisenstein_twisted,
    weierstrass_twisted,
)

if TYPE_CHECKING:
    from .sewing import SewingConfig

_LOGGER = LOGGER.getChild("coeffs")


@dataclass(frozen=True)
class TruncatedMatrix:
    """Dense M x M truncation; entry (k, l) with 1-based k, l sits at [k-1, l-1]."""

    order: int
    entries: np.ndarray

    def __post_init__(self) -> None:
        entries = np.array(self.entries, dtype=complex)
        if self.order < 1 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"expected a square matrix of order >= 1, got {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise ValueError("matrix entries must be finite")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    def __call__(self, k: int, l: int) -> complex:
        return complex(self.entries[k - 1, l - 1])


@dataclass(frozen=True)
class HalfFormVector:
    """Entries 1..M of h_a(x) or hbar_a(x) at the point x on torus a."""

    order: int
    entries: np.ndarray
    point: complex
    torus: int

    def __post_init__(self) -> None:
        entries = np.array(self.entries, dtype=complex)
        if self.order < 1 or entries.shape != (self.order,):
            raise ValueError(f"expected a vector of length {self.order}")
        if not np.all(np.isfinite(entries)):
            raise ValueError("vector entries must be finite")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    def __call__(self, k: int) -> complex:
        return complex(self.entries[k - 1])


def binomial(n: int, k: int) -> float:
    """Binomial coefficient, through log-gamma once exact integers would grow large."""
    if k < 0 or k > n:
        return 0.0
    if n <= 20:
        return float(math.comb(n, k))
    return math.exp(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


def c_coeff(
    k: int,
    l: int,
    twist: TwistData,
    m: ModularParam,
    pol: SeriesPolicy = DEFAULT_POLICY,
) -> complex:
    """C(k, l) = (-1)^l binom(k+l-2, k-1) E_{k+l-1}[theta, phi](tau)."""
    if k < 1 or l < 1:
        raise ValueError(f"indices must be positive, got ({k}, {l})")
    return (-1) ** l * binomial(k + l - 2, k - 1) * eisenstein_twisted(k + l - 1, twist, m, pol)


def d_coeff(
    k: int,
    l: int,
    z: complex,
    twist: TwistData,
    m: ModularParam,
    pol: SeriesPolicy = DEFAULT_POLICY,
) -> complex:
    """D(k, l, z) = (-1)^(k+1) binom(k+l-2, k-1) P_{k+l-1}[theta, phi](z, tau)."""
    if k < 1 or l < 1:
        raise ValueError(f"indices must be positive, got ({k}, {l})")
    return (
        (-1) ** (k + 1)
        * binomial(k + l - 2, k - 1)
        * weierstrass_twisted(k + l - 1, twist, z, m, pol)
    )


def eps_quarter(eps: complex) -> complex:
    """Principal fourth root; its square is the principal square root."""
    return cmath.sqrt(cmath.sqrt(eps))


def f_matrix(a: int, cfg: SewingConfig, twist: TwistData) -> TruncatedMatrix:
    """F_a(k, l) = eps^((k+l-1)/2) C(k, l, tau_a)."""
    size = cfg.order
    m = cfg.modular(a)
    root = eps_quarter(cfg.eps) ** 2
    eisenstein = [eisenstein_twisted(n, twist, m, cfg.pol) for n in range(1, 2 * size)]
    entries = np.empty((size, size), dtype=complex)
    for k in range(1, size + 1):
        for l in range(1, size + 1):
            weight = k + l - 1
            entries[k - 1, l - 1] = (
                root**weight
                * (-1) ** l
                * binomial(k + l - 2, k - 1)
                * eisenstein[weight - 1]
            )
    _LOGGER.debug("F_%d built at order %d", a, size)
    return TruncatedMatrix(size, entries)


def a_matrix(a: int, cfg: SewingConfig) -> TruncatedMatrix:
    """Heisenberg sewing matrix.

    A_a(k, l) = eps^((k+l)/2) (-1)^(k+1) (k+l-1)! / (sqrt(kl) (k-1)! (l-1)!) E_{k+l}(tau_a)
    """
    size = cfg.order
    m = cfg.modular(a)
    root = eps_quarter(cfg.eps) ** 2
    eisenstein = {n: eisenstein_classical(n, m, cfg.pol) for n in range(2, 2 * size + 1)}
    entries = np.empty((size, size), dtype=complex)
    for k in range(1, size + 1):
        for l in range(1, size + 1):
            # (k+l-1)! / ((k-1)! (l-1)!) = (k+l-1) binom(k+l-2, k-1)
            ratio = (k + l - 1) * binomial(k + l - 2, k - 1) / math.sqrt(k * l)
            entries[k - 1, l - 1] = (
                root ** (k + l) * (-1) ** (k + 1) * ratio * eisenstein[k + l]
            )
    return TruncatedMatrix(size, entries)


def _check_puncture(a: int, x: complex, cfg: SewingConfig) -> None:
    inner = abs(cfg.eps) / cfg.radius(3 - a)
    if abs(x) < inner:
        raise DomainViolationError(
            f"point {x} lies inside the excised disk |z| < {inner:.6g} of torus {a}"
        )


def h_vector(a: int, x: complex, cfg: SewingConfig, twist: TwistData) -> HalfFormVector:
    """h_a(k, x) = eps^(k/2 - 1/4) D(1, k, tau_a, x)."""
    _check_puncture(a, x, cfg)
    m = cfg.modular(a)
    quarter = eps_quarter(cfg.eps)
    entries = [
        quarter ** (2 * k - 1) * d_coeff(1, k, x, twist, m, cfg.pol)
        for k in range(1, cfg.order + 1)
    ]
    return HalfFormVector(cfg.order, np.asarray(entries), complex(x), a)


def hbar_vector(a: int, y: complex, cfg: SewingConfig, twist: TwistData) -> HalfFormVector:
    """hbar_a(k, y) = eps^(k/2 - 1/4) D(k, 1, tau_a, -y)."""
    _check_puncture(a, y, cfg)
    m = cfg.modular(a)
    quarter = eps_quarter(cfg.eps)
    entries = [
        quarter ** (2 * k - 1) * d_coeff(k, 1, -y, twist, m, cfg.pol)
        for k in range(1, cfg.order + 1)
    ]
    return HalfFormVector(cfg.order, np.asarray(entries), complex(y), a)


def h_vector_dz(a: int, x: complex, cfg: SewingConfig, twist: TwistData) -> np.ndarray:
    """d/dx of h_a(x), using d/dx P_k = -k P_(k+1)."""
    m = cfg.modular(a)
    quarter = eps_quarter(cfg.eps)
    return np.asarray(
        [
            quarter ** (2 * k - 1) * -k * weierstrass_twisted(k + 1, twist, x, m, cfg.pol)
            for k in range(1, cfg.order + 1)
        ]
    )


def hbar_vector_dz(a: int, y: complex, cfg: SewingConfig, twist: TwistData) -> np.ndarray:
    """d/dy of hbar_a(y)."""
    m = cfg.modular(a)
    quarter = eps_quarter(cfg.eps)
    return np.asarray(
        [
            quarter ** (2 * k - 1)
            * (-1) ** (k + 1)
            * k
            * weierstrass_twisted(k + 1, twist, -y, m, cfg.pol)
            for k in range(1, cfg.order + 1)
        ]
    )
