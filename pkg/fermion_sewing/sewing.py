"""Sewing two tori into a genus two surface.

Two punctured tori are joined along the annuli |eps|/r_2 <= |z_1| <= r_1 and
|eps|/r_1 <= |z_2| <= r_2 through z_1 z_2 = eps. This module holds the
sewing domain, the block matrix Q and the genus two Szego kernel built from
the genus one data of the two tori.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .coeffs import TruncatedMatrix, eps_quarter, f_matrix, h_vector, hbar_vector
from .const import (
    DEFAULT_ORDER,
    DEFAULT_RADIUS_FRACTION,
    LOGGER,
    DegenerateTwistError,
    DomainViolationError,
)
from .linalg import lu_det, off_diagonal_block, solve
from .qseries import (
    DEFAULT_POLICY,
    ModularParam,
    SeriesPolicy,
    TwistData,
    weierstrass_twisted,
)

_LOGGER = LOGGER.getChild("sewing")


def min_lattice_distance(m: ModularParam) -> float:
    """Shortest nonzero vector of the lattice 2*pi*i*(Z*tau + Z).

    |m*tau + n| >= |m| Im(tau) and the vector n = 1 has length one, so only
    rows with |m| <= 1/Im(tau) can beat it.
    """
    tau = m.tau
    rows = math.ceil(1 / tau.imag) + 1
    best = 1.0
    for row in range(-rows, rows + 1):
        span = math.ceil(abs(row * tau.real)) + 2
        for col in range(-span, span + 1):
            if row == 0 and col == 0:
                continue
            best = min(best, abs(row * tau + col))
    return 2 * math.pi * best


@dataclass(frozen=True)
class SewingConfig:
    """Parameters (tau_1, tau_2, eps) of the sewn surface plus numerical controls.

    r1 and r2 default to DEFAULT_RADIUS_FRACTION * D(q_a) when left as None.
    """

    tau1: ModularParam
    tau2: ModularParam
    eps: complex
    xi: complex = 1j
    r1: float | None = None
    r2: float | None = None
    order: int = DEFAULT_ORDER
    pol: SeriesPolicy = DEFAULT_POLICY
    d1: float = field(init=False, repr=False, compare=False)
    d2: float = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "eps", complex(self.eps))
        object.__setattr__(self, "xi", complex(self.xi))
        if self.xi not in (1j, -1j):
            raise ValueError(f"xi must be +i or -i, got {self.xi}")
        if self.order < 1:
            raise ValueError(f"truncation order must be positive, got {self.order}")
        object.__setattr__(self, "d1", min_lattice_distance(self.tau1))
        object.__setattr__(self, "d2", min_lattice_distance(self.tau2))
        for a in (1, 2):
            radius = self.radius(a)
            if not 0 < radius < self.distance(a) / 2:
                raise DomainViolationError(
                    f"r{a} = {radius:.6g} must lie in (0, D(q{a})/2 = {self.distance(a) / 2:.6g})"
                )

    def modular(self, a: int) -> ModularParam:
        return self.tau1 if a == 1 else self.tau2

    def distance(self, a: int) -> float:
        return self.d1 if a == 1 else self.d2

    def radius(self, a: int) -> float:
        given = self.r1 if a == 1 else self.r2
        return DEFAULT_RADIUS_FRACTION * self.distance(a) if given is None else given

    @property
    def bound(self) -> float:
        """1/4 D(q_1) D(q_2), the supremum of |eps| on the sewing domain."""
        return self.d1 * self.d2 / 4

    @property
    def mobius_xi(self) -> complex:
        """Branch of the sewing map used by square-bracket duals and annulus transport."""
        return -self.xi

    @property
    def eps_root(self) -> complex:
        return eps_quarter(self.eps) ** 2

    def with_eps(self, eps: complex) -> SewingConfig:
        return replace(self, eps=eps)

    def with_order(self, order: int) -> SewingConfig:
        return replace(self, order=order)

    def with_xi(self, xi: complex) -> SewingConfig:
        return replace(self, xi=xi)

    def swapped(self) -> SewingConfig:
        """The same surface with the torus labels exchanged."""
        return replace(self, tau1=self.tau2, tau2=self.tau1, r1=self.r2, r2=self.r1)


@dataclass(frozen=True)
class SurfacePoint:
    """A point of the punctured torus `torus`, in its local coordinate."""

    torus: int
    z: complex

    def __post_init__(self) -> None:
        if self.torus not in (1, 2):
            raise ValueError(f"torus index must be 1 or 2, got {self.torus}")
        object.__setattr__(self, "z", complex(self.z))


@dataclass(frozen=True)
class BlockQ:
    """[[0, xi F_1], [-xi F_2, 0]] as one 2M x 2M array."""

    order: int
    matrix: np.ndarray


def in_domain(cfg: SewingConfig) -> bool:
    return abs(cfg.eps) < cfg.bound


def require_domain(cfg: SewingConfig) -> None:
    """Raise DomainViolationError unless cfg lies in the sewing domain."""
    if not in_domain(cfg):
        raise DomainViolationError(
            f"|eps| = {abs(cfg.eps):.6g} outside the sewing domain |eps| < {cfg.bound:.6g}"
        )
    if abs(cfg.eps) > cfg.radius(1) * cfg.radius(2):
        raise DomainViolationError(
            f"|eps| = {abs(cfg.eps):.6g} exceeds r1 r2 = {cfg.radius(1) * cfg.radius(2):.6g}"
        )


def require_nondegenerate(*twists: TwistData) -> None:
    for twist in twists:
        if twist.is_trivial:
            raise DegenerateTwistError(
                "characteristics (theta, phi) = (1, 1) are not supported at genus two"
            )


@lru_cache(maxsize=128)
def sewing_matrices(
    cfg: SewingConfig, t1: TwistData, t2: TwistData
) -> tuple[TruncatedMatrix, TruncatedMatrix]:
    """(F_1, F_2) after the domain and twist checks, cached per configuration."""
    require_domain(cfg)
    require_nondegenerate(t1, t2)
    return f_matrix(1, cfg, t1), f_matrix(2, cfg, t2)


def build_q(cfg: SewingConfig, t1: TwistData, t2: TwistData) -> BlockQ:
    f1, f2 = sewing_matrices(cfg, t1, t2)
    return BlockQ(cfg.order, off_diagonal_block(cfg.xi * f1.entries, -cfg.xi * f2.entries))


def det_i_minus_q(cfg: SewingConfig, t1: TwistData, t2: TwistData) -> complex:
    q = build_q(cfg, t1, t2)
    value = lu_det(np.eye(2 * q.order) - q.matrix, "det(I - Q)")
    _LOGGER.debug("det(I - Q) = %s at eps = %s, M = %d", value, cfg.eps, cfg.order)
    return value


def det_i_minus_ff(cfg: SewingConfig, t1: TwistData, t2: TwistData) -> complex:
    """det(I - F_1 F_2) at M x M."""
    f1, f2 = sewing_matrices(cfg, t1, t2)
    return lu_det(np.eye(cfg.order) - f1.entries @ f2.entries, "det(I - F1 F2)")


def szego_g1(
    x: complex,
    y: complex,
    twist: TwistData,
    m: ModularParam,
    pol: SeriesPolicy = DEFAULT_POLICY,
) -> complex:
    """Scalar part P_1[theta, phi](x - y) of the genus one Szego kernel."""
    require_nondegenerate(twist)
    return weierstrass_twisted(1, twist, complex(x) - complex(y), m, pol)


def _twist_of(a: int, t1: TwistData, t2: TwistData) -> TwistData:
    return t1 if a == 1 else t2


def szego_g2(
    x: SurfacePoint,
    y: SurfacePoint,
    cfg: SewingConfig,
    t1: TwistData,
    t2: TwistData,
) -> complex:
    """Genus two Szego kernel from the genus one data of both tori.

    Same torus a:   S_a(x, y) + h_a(x) (I - F_abar F_a)^-1 F_abar hbar_a(y)^T
    Across tori:    xi (-1)^abar h_a(x) (I - F_abar F_a)^-1 hbar_abar(y)^T
    """
    f1, f2 = sewing_matrices(cfg, t1, t2)
    a = x.torus
    other = 3 - a
    f_a, f_other = (f1, f2) if a == 1 else (f2, f1)
    resolvent = np.eye(cfg.order) - f_other.entries @ f_a.entries
    h = h_vector(a, x.z, cfg, _twist_of(a, t1, t2)).entries
    if y.torus == a:
        hbar = hbar_vector(a, y.z, cfg, _twist_of(a, t1, t2)).entries
        rhs = f_other.entries @ hbar
        correction = h @ solve(resolvent, rhs, "szego_g2 same-torus solve")
        return szego_g1(x.z, y.z, _twist_of(a, t1, t2), cfg.modular(a), cfg.pol) + correction
    hbar = hbar_vector(other, y.z, cfg, _twist_of(other, t1, t2)).entries
    sign = (-1) ** other
    return cfg.xi * sign * (h @ solve(resolvent, hbar, "szego_g2 cross-torus solve"))


def half_form_rows(
    points: list[SurfacePoint], cfg: SewingConfig, t1: TwistData, t2: TwistData, bar: bool
) -> np.ndarray:
    """Rows h(x) (or hbar(x)) of length 2M, zero on the other torus' block."""
    rows = np.zeros((len(points), 2 * cfg.order), dtype=complex)
    build = hbar_vector if bar else h_vector
    for i, point in enumerate(points):
        values = build(point.torus, point.z, cfg, _twist_of(point.torus, t1, t2)).entries
        offset = 0 if point.torus == 1 else cfg.order
        rows[i, offset : offset + cfg.order] = values
    return rows


def xi_block(cfg: SewingConfig) -> np.ndarray:
    """Xi = [[0, xi I], [-xi I, 0]]."""
    eye = np.eye(cfg.order)
    zero = np.zeros_like(eye)
    return np.block([[zero, cfg.xi * eye], [-cfg.xi * eye, zero]])


def disconnected_kernel(
    x: SurfacePoint, y: SurfacePoint, cfg: SewingConfig, t1: TwistData, t2: TwistData
) -> complex:
    """S^(1,1): the genus one kernel on a common torus, zero across tori."""
    if x.torus != y.torus:
        return 0j
    return szego_g1(x.z, y.z, _twist_of(x.torus, t1, t2), cfg.modular(x.torus), cfg.pol)


def szego_g2_block(
    x: SurfacePoint,
    y: SurfacePoint,
    cfg: SewingConfig,
    t1: TwistData,
    t2: TwistData,
) -> complex:
    """S^(2) = S^(1,1)(x, y) + h(x) Xi (I - Q)^-1 hbar(y)^T on the 2M block space."""
    q = build_q(cfg, t1, t2)
    h = half_form_rows([x], cfg, t1, t2, bar=False)[0]
    hbar = half_form_rows([y], cfg, t1, t2, bar=True)[0]
    column = solve(np.eye(2 * q.order) - q.matrix, hbar, "szego_g2_block solve")
    return disconnected_kernel(x, y, cfg, t1, t2) + h @ xi_block(cfg) @ column


def annulus_transport(point: SurfacePoint, cfg: SewingConfig) -> tuple[SurfacePoint, complex]:
    """Identify an annulus point with its image on the other torus.

    Returns (image, factor) with S^(2)(x, point) = factor * S^(2)(x, image),
    image = eps / z and factor = (-1)^abar xi eps^(1/2) / z.
    """
    a = point.torus
    other = 3 - a
    z = point.z
    if cfg.eps == 0:
        raise DomainViolationError("the annulus is empty at eps = 0")
    if not abs(cfg.eps) / cfg.radius(other) <= abs(z) <= cfg.radius(a):
        raise DomainViolationError(
            f"point {z} on torus {a} is outside the sewing annulus"
        )
    image = SurfacePoint(other, cfg.eps / z)
    factor = (-1) ** other * cfg.xi * cfg.eps_root / z
    return image, factor

