"""Foundational q-series: Bernoulli polynomials, twisted Eisenstein series,
twisted Weierstrass functions, theta functions with real characteristics,
the Dedekind eta function and the genus one prime form.

The lattice of the torus with modulus tau is 2*pi*i*(Z*tau + Z), so
q = exp(2*pi*i*tau) and q_z = exp(z).

References:
 - https://dlmf.nist.gov/24.2 (Bernoulli polynomials)
 - https://dlmf.nist.gov/20.2 (theta functions)

"""

from __future__ import annotations

import cmath
import itertools
import math
from collections.abc import Callable, Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial import Polynomial
from scipy.special import bernoulli, comb

from .const import (
    DEFAULT_MAX_TERMS,
    DEFAULT_REL_TOL,
    DEFAULT_THETA_CAP,
    LOGGER,
    MIN_MAX_TERMS,
    NonConvergentError,
    OutOfStripError,
    SingularPointError,
    SINGULAR_DISTANCE,
)

_LOGGER = LOGGER.getChild("qseries")

TWO_PI_I = 2j * math.pi


@dataclass(frozen=True)
class SeriesPolicy:
    """Early termination and hard caps for every truncated sum."""

    rel_tol: float = DEFAULT_REL_TOL
    max_terms: int = DEFAULT_MAX_TERMS
    theta_cap: int = DEFAULT_THETA_CAP  # Largest shell radius of a theta lattice sum

    def __post_init__(self) -> None:
        if not 0 < self.rel_tol < 1:
            raise ValueError(f"rel_tol must lie in (0, 1), got {self.rel_tol}")
        if self.max_terms < MIN_MAX_TERMS:
            raise ValueError(f"max_terms must be at least {MIN_MAX_TERMS}, got {self.max_terms}")
        if self.theta_cap < 1:
            raise ValueError(f"theta_cap must be positive, got {self.theta_cap}")


DEFAULT_POLICY = SeriesPolicy()


@dataclass(frozen=True)
class ModularParam:
    """A point tau of the upper half-plane."""

    tau: complex

    def __post_init__(self) -> None:
        object.__setattr__(self, "tau", complex(self.tau))
        if self.tau.imag <= 0:
            raise ValueError(f"tau {self.tau} not in upper half-plane")

    @property
    def q(self) -> complex:
        return cmath.exp(TWO_PI_I * self.tau)

    def qpow(self, x: float) -> complex:
        """Return q**x on the branch exp(2*pi*i*tau*x)."""
        return cmath.exp(TWO_PI_I * self.tau * x)

    @property
    def strip_width(self) -> float:
        """Return 2*pi*Im(tau), so that |q| = exp(-strip_width)."""
        return 2 * math.pi * self.tau.imag


def frac(x: float) -> float:
    """Fractional part in [0, 1), never rounding up to 1.0."""
    part = x % 1.0
    return 0.0 if part == 1.0 else part


def unit_phase(x: float) -> complex:
    """Return exp(2*pi*i*x), exact at the quarter turns."""
    part = frac(x)
    exact = {0.0: 1 + 0j, 0.25: 1j, 0.5: -1 + 0j, 0.75: -1j}
    if part in exact:
        return exact[part]
    return cmath.exp(TWO_PI_I * part)


@dataclass(frozen=True)
class TwistData:
    """Characteristics (alpha, beta) of one torus.

    theta = -exp(-2*pi*i*beta) and phi = -exp(2*pi*i*alpha) are the
    multipliers of the Szego kernel; lam = frac(alpha + 1/2) is stored once
    and never recomputed from phi.
    """

    alpha: float
    beta: float
    lam: float = field(init=False)

    def __post_init__(self) -> None:
        for name, value in (("alpha", self.alpha), ("beta", self.beta)):
            if not 0 <= value < 1:
                raise ValueError(f"{name} must lie in [0, 1), got {value}")
        object.__setattr__(self, "lam", frac(self.alpha + 0.5))

    @property
    def theta(self) -> complex:
        return -unit_phase(-self.beta)

    @property
    def phi(self) -> complex:
        return -unit_phase(self.alpha)

    @property
    def is_trivial(self) -> bool:
        """Return True for (theta, phi) = (1, 1)."""
        return self.alpha == 0.5 and self.beta == 0.5

    def inverse(self) -> TwistData:
        """Return the characteristics (theta^-1, phi^-1)."""
        return TwistData(frac(-self.alpha), frac(-self.beta))

    @classmethod
    def from_unitary(cls, theta: complex, phi: complex) -> TwistData:
        """Recover (alpha, beta) from the multipliers, with branch in [0, 1)."""
        beta = frac(-cmath.phase(-theta) / (2 * math.pi))
        alpha = frac(cmath.phase(-phi) / (2 * math.pi))
        return cls(alpha, beta)


TRIVIAL_TWIST = TwistData(0.5, 0.5)


def sum_series(terms: Iterable[complex], pol: SeriesPolicy, what: str) -> complex:
    """Sum terms until two consecutive ones fall below rel_tol * |partial sum|."""
    total = 0j
    quiet = 0
    count = 0
    for count, term in enumerate(terms, start=1):
        total += term
        if abs(term) <= pol.rel_tol * abs(total):
            quiet += 1
            if quiet == 2:
                return total
        else:
            quiet = 0
        if count >= pol.max_terms:
            raise NonConvergentError(
                f"{what}: no convergence after {pol.max_terms} terms"
            )
    _LOGGER.debug("%s: finite sum of %d terms", what, count)
    return total


def bernoulli_poly(n: int, lam: float) -> float:
    """Return B_n(lam), from q_z^lam / (q_z - 1) = 1/z + sum B_n(lam)/n! z^(n-1)."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    numbers = bernoulli(n)
    return float(
        sum(comb(n, k, exact=True) * numbers[k] * lam ** (n - k) for k in range(n + 1))
    )


def eisenstein_twisted(
    n: int, twist: TwistData, m: ModularParam, pol: SeriesPolicy = DEFAULT_POLICY
) -> complex:
    """Twisted Eisenstein series E_n[theta, phi](tau).

    E_n = -B_n(lam)/n!
          + 1/(n-1)! sum'_{r>=0} (r+lam)^(n-1) x_r / (1 - x_r),   x_r = q^(r+lam) / theta
          + (-1)^n/(n-1)! sum_{r>=1} (r-lam)^(n-1) y_r / (1 - y_r),  y_r = theta q^(r-lam)

    The primed sum omits r = 0 exactly when (theta, phi) = (1, 1).
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    lam = twist.lam
    theta = twist.theta
    start = 1 if twist.is_trivial else 0

    def upper() -> Iterator[complex]:
        for r in itertools.count(start):
            x = m.qpow(r + lam) / theta
            yield (r + lam) ** (n - 1) * x / (1 - x)

    def lower() -> Iterator[complex]:
        for r in itertools.count(1):
            y = theta * m.qpow(r - lam)
            yield (r - lam) ** (n - 1) * y / (1 - y)

    scale = 1 / math.factorial(n - 1)
    head = -bernoulli_poly(n, lam) / math.factorial(n)
    return (
        head
        + scale * sum_series(upper(), pol, f"E_{n} upper sum")
        + (-1) ** n * scale * sum_series(lower(), pol, f"E_{n} lower sum")
    )


def eisenstein_classical(
    n: int, m: ModularParam, pol: SeriesPolicy = DEFAULT_POLICY
) -> complex:
    """Classical E_n(tau) = E_n[1, 1](tau), normalised so E_2(i*inf) = -1/12."""
    return eisenstein_twisted(n, TRIVIAL_TWIST, m, pol)


@lru_cache(maxsize=256)
def _geometric_numerator(order: int, start: float) -> Polynomial:
    """N with (u d/du)^order [u^start / (1-u)] = u^start N(u) / (1-u)^(order+1)."""
    numerator = Polynomial([1.0])
    one_minus_u = Polynomial([1.0, -1.0])
    u = Polynomial([0.0, 1.0])
    for j in range(order):
        numerator = (start * numerator + u * numerator.deriv()) * one_minus_u + (
            j + 1
        ) * u * numerator
    return numerator


def check_strip(z: complex, m: ModularParam) -> None:
    """Raise OutOfStripError unless |q| < |q_z| < 1/|q|."""
    if abs(z.real) >= m.strip_width:
        raise OutOfStripError(
            f"Re z = {z.real:.6g} outside the strip |Re z| < {m.strip_width:.6g}"
        )


def weierstrass_twisted(
    k: int,
    twist: TwistData,
    z: complex,
    m: ModularParam,
    pol: SeriesPolicy = DEFAULT_POLICY,
) -> complex:
    """Twisted Weierstrass function P_k[theta, phi](z, tau).

    P_k = (-1)^k/(k-1)! sum'_{n in Z+lam} n^(k-1) q_z^n / (1 - q^n/theta).

    The positive-n geometric part is summed in closed form, which leaves two
    q-series converging on |q| < |q_z| < 1/|q|.
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    z = complex(z)
    check_strip(z, m)
    one_minus_u = -complex(np.expm1(z))
    if abs(one_minus_u) < SINGULAR_DISTANCE:
        raise SingularPointError(f"P_{k} evaluated at the lattice point {z}")

    lam = twist.lam
    theta = twist.theta
    first = lam if lam > 0 else 1.0
    u = cmath.exp(z)
    geometric = (
        cmath.exp(first * z)
        * complex(_geometric_numerator(k - 1, first)(u))
        / one_minus_u**k
    )

    def positive() -> Iterator[complex]:
        for r in itertools.count():
            n = first + r
            x = m.qpow(n) / theta
            yield n ** (k - 1) * cmath.exp(n * z) * x / (1 - x)

    def negative() -> Iterator[complex]:
        for r in itertools.count(1):
            nu = r - lam
            y = theta * m.qpow(nu)
            yield (-nu) ** (k - 1) * cmath.exp(-nu * z) * y / (1 - y)

    total = geometric + sum_series(positive(), pol, f"P_{k} positive sum")
    total -= sum_series(negative(), pol, f"P_{k} negative sum")
    if k == 1 and lam == 0 and not twist.is_trivial:
        total += 1 / (1 - 1 / theta)
    return (-1) ** k / math.factorial(k - 1) * total


def _theta_lattice(
    alpha: Sequence[float],
    beta: Sequence[float],
    z: Sequence[complex],
    omega: np.ndarray,
    pol: SeriesPolicy,
    weight: Callable[[np.ndarray], np.ndarray] | None = None,
) -> complex:
    genus = len(alpha)
    a = np.asarray(alpha, dtype=float)
    shift = np.asarray(z, dtype=complex) + TWO_PI_I * np.asarray(beta, dtype=float)
    total = 0j
    scale = 0.0
    for radius in range(pol.theta_cap + 1):
        shell = [
            n
            for n in itertools.product(range(-radius, radius + 1), repeat=genus)
            if max((abs(c) for c in n), default=0) == radius
        ]
        points = np.asarray(shell, dtype=float) + a
        exponent = 1j * math.pi * np.einsum("ni,ij,nj->n", points, omega, points)
        terms = np.exp(exponent + points @ shift)
        if weight is not None:
            terms = terms * weight(points)
        contribution = complex(terms.sum())
        total += contribution
        scale += float(np.abs(terms).sum())
        if radius > 0 and abs(contribution) <= pol.rel_tol * scale:
            return total
    raise NonConvergentError(f"theta lattice sum exceeded shell cap {pol.theta_cap}")


def _as_period_matrix(omega: complex | Sequence[Sequence[complex]], genus: int) -> np.ndarray:
    matrix = np.atleast_2d(np.asarray(omega, dtype=complex))
    if matrix.shape != (genus, genus):
        raise ValueError(f"Omega must be {genus}x{genus}, got shape {matrix.shape}")
    if not np.allclose(matrix, matrix.T):
        raise ValueError("Omega must be symmetric")
    if np.any(np.linalg.eigvalsh(matrix.imag) <= 0):
        raise ValueError("Im Omega must be positive definite")
    return matrix


def theta_char(
    g: int,
    alpha: Sequence[float],
    beta: Sequence[float],
    z: Sequence[complex],
    omega: complex | Sequence[Sequence[complex]],
    pol: SeriesPolicy = DEFAULT_POLICY,
) -> complex:
    """Theta function with real characteristics.

    theta[alpha, beta](z | Omega)
        = sum_{n in Z^g} exp(i*pi*(n+alpha).Omega.(n+alpha) + (n+alpha).(z + 2*pi*i*beta))

    Parameters
    ----------
    g : 1 or 2
    alpha, beta : real vectors of length g
    z : complex vector of length g
    omega : g x g symmetric matrix with positive-definite imaginary part

    Returns
    -------
    theta : complex
    """
    if g not in (1, 2):
        raise ValueError(f"genus must be 1 or 2, got {g}")
    if not len(alpha) == len(beta) == len(z) == g:
        raise ValueError("alpha, beta and z must all have length g")
    return _theta_lattice(alpha, beta, z, _as_period_matrix(omega, g), pol)


def theta_char_dz(
    alpha: float,
    beta: float,
    z: complex,
    m: ModularParam,
    pol: SeriesPolicy = DEFAULT_POLICY,
) -> complex:
    """The z-derivative of the genus one theta[alpha, beta](z, tau)."""
    return _theta_lattice(
        [alpha], [beta], [z], np.array([[m.tau]]), pol, weight=lambda p: p[:, 0]
    )


def theta1(z: complex, m: ModularParam, pol: SeriesPolicy = DEFAULT_POLICY) -> complex:
    return theta_char(1, [0.5], [0.5], [z], [[m.tau]], pol)


def dedekind_eta(m: ModularParam, pol: SeriesPolicy = DEFAULT_POLICY) -> complex:
    """q^(1/24) * prod_{n>=1} (1 - q^n)."""
    q = m.q
    product = 1 + 0j
    quiet = 0
    power = 1 + 0j
    for n in range(1, pol.max_terms + 1):
        power *= q
        product *= 1 - power
        quiet = quiet + 1 if abs(power) <= pol.rel_tol else 0
        if quiet == 2:
            return m.qpow(1 / 24) * product
    raise NonConvergentError(f"eta product: no convergence after {pol.max_terms} factors")


def lattice_distance(z: complex, m: ModularParam) -> float:
    """Distance from z to the nearest point of 2*pi*i*(Z*tau + Z)."""
    w = z / TWO_PI_I
    row = round(w.imag / m.tau.imag)
    best = math.inf
    for dm in (-1, 0, 1):
        mm = row + dm
        col = round((w - mm * m.tau).real)
        for dn in (-1, 0, 1):
            best = min(best, abs(z - TWO_PI_I * (mm * m.tau + col + dn)))
    return best


def k1_prime(z: complex, m: ModularParam, pol: SeriesPolicy = DEFAULT_POLICY) -> complex:
    """Genus one prime form K(z, tau) = theta_1(z, tau) / theta_1'(0, tau)."""
    z = complex(z)
    if lattice_distance(z, m) < SINGULAR_DISTANCE:
        raise SingularPointError(f"K(z) evaluated at the lattice point {z}")
    return theta1(z, m, pol) / theta_char_dz(0.5, 0.5, 0j, m, pol)


def p1_theta_quotient(
    z: complex, twist: TwistData, m: ModularParam, pol: SeriesPolicy = DEFAULT_POLICY
) -> complex:
    """P_1[theta, phi](z) as theta[alpha, beta](z) / (theta[alpha, beta](0) K(z))."""
    numerator = theta_char(1, [twist.alpha], [twist.beta], [z], [[m.tau]], pol)
    denominator = theta_char(1, [twist.alpha], [twist.beta], [0j], [[m.tau]], pol)
    return numerator / denominator / k1_prime(z, m, pol)
