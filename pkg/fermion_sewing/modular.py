"""Modular group actions at genus one and two.

SL(2, Z) acts on a torus modulus and its characteristics. At genus two the
group G = (SL(2, Z) x SL(2, Z)) x| Z_2 acts on (tau_1, tau_2, eps): gamma_1
and gamma_2 act on one torus each and the involution beta exchanges them.
"""

from __future__ import annotations

import cmath
from collections.abc import Callable, Sequence
from dataclasses import dataclass, replace
from enum import StrEnum
from fractions import Fraction

from .const import LOGGER, DegenerateTwistError, DomainViolationError
from .fermion import CharPair
from .qseries import ModularParam, TwistData
from .sewing import SewingConfig, SurfacePoint, in_domain

_LOGGER = LOGGER.getChild("modular")


@dataclass(frozen=True)
class SL2Element:
    """Integer matrix (a b; c d) of determinant one."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self) -> None:
        if self.a * self.d - self.b * self.c != 1:
            raise ValueError(f"({self.a} {self.b}; {self.c} {self.d}) has determinant != 1")

    def __matmul__(self, other: SL2Element) -> SL2Element:
        return SL2Element(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> SL2Element:
        return SL2Element(self.d, -self.b, -self.c, self.a)

    def automorphy(self, tau: complex) -> complex:
        """c tau + d."""
        return self.c * tau + self.d


IDENTITY = SL2Element(1, 0, 0, 1)
S = SL2Element(0, -1, 1, 0)
T = SL2Element(1, 1, 0, 1)


class Generator(StrEnum):
    """Letters of a word in G."""

    Gamma1 = "gamma1"
    Gamma2 = "gamma2"
    Beta = "beta"


@dataclass(frozen=True)
class GStep:
    kind: Generator
    gamma: SL2Element = IDENTITY


@dataclass(frozen=True)
class GElement:
    """A word in G, acting rightmost letter first."""

    word: tuple[GStep, ...] = ()

    @classmethod
    def gamma1(cls, gamma: SL2Element) -> GElement:
        return cls((GStep(Generator.Gamma1, gamma),))

    @classmethod
    def gamma2(cls, gamma: SL2Element) -> GElement:
        return cls((GStep(Generator.Gamma2, gamma),))

    @classmethod
    def beta(cls) -> GElement:
        return cls((GStep(Generator.Beta),))

    def __matmul__(self, other: GElement) -> GElement:
        return GElement(self.word + other.word)

    def reduced(self) -> GElement:
        """Merge neighbouring gammas on the same torus and cancel beta pairs."""
        stack: list[GStep] = []
        for step in self.word:
            if stack and step.kind == stack[-1].kind:
                top = stack.pop()
                if step.kind != Generator.Beta:
                    merged = top.gamma @ step.gamma
                    if merged != IDENTITY:
                        stack.append(GStep(step.kind, merged))
                continue
            stack.append(step)
        return GElement(tuple(stack))

    @property
    def only_beta(self) -> bool:
        return all(step.kind == Generator.Beta for step in self.word)


def act_tau(g: SL2Element, m: ModularParam) -> ModularParam:
    """(a tau + b) / (c tau + d)."""
    return ModularParam((g.a * m.tau + g.b) / g.automorphy(m.tau))


def act_char(g: SL2Element, twist: TwistData) -> TwistData:
    """(theta, phi) -> (theta^a phi^b, theta^c phi^d).

    With theta = exp(2 pi i (1/2 - beta)) and phi = exp(2 pi i (alpha + 1/2))
    the exponents transform linearly, which is done in exact rationals.
    """
    alpha = Fraction(twist.alpha)
    beta = Fraction(twist.beta)
    new_beta = (g.a * beta - g.b * alpha - Fraction(g.a + g.b + 1, 2)) % 1
    new_alpha = (g.d * alpha - g.c * beta + Fraction(g.c + g.d + 1, 2)) % 1
    image = TwistData(float(new_alpha), float(new_beta))
    if image.is_trivial:
        raise DegenerateTwistError(
            f"({twist.alpha}, {twist.beta}) maps to the characteristics (1, 1)"
        )
    return image


def _step_moduli(step: GStep, cfg: SewingConfig) -> SewingConfig:
    if step.kind == Generator.Beta:
        return cfg.swapped()
    gamma = step.gamma
    if step.kind == Generator.Gamma1:
        return replace(
            cfg,
            tau1=act_tau(gamma, cfg.tau1),
            eps=cfg.eps / gamma.automorphy(cfg.tau1.tau),
            r1=None,
        )
    return replace(
        cfg,
        tau2=act_tau(gamma, cfg.tau2),
        eps=cfg.eps / gamma.automorphy(cfg.tau2.tau),
        r2=None,
    )


def _step_chars(step: GStep, chars: CharPair) -> CharPair:
    if step.kind == Generator.Beta:
        return chars.swapped()
    if step.kind == Generator.Gamma1:
        return CharPair(act_char(step.gamma, chars.t1), chars.t2)
    return CharPair(chars.t1, act_char(step.gamma, chars.t2))


def act_config(
    g: GElement, cfg: SewingConfig, chars: CharPair
) -> tuple[SewingConfig, CharPair]:
    """Image of (tau_1, tau_2, eps) and the characteristics under g."""
    for step in reversed(g.word):
        cfg, chars = _step_moduli(step, cfg), _step_chars(step, chars)
    if not in_domain(cfg):
        raise DomainViolationError(f"image eps = {cfg.eps} leaves the sewing domain")
    return cfg, chars


def transport_point(g: SL2Element, m: ModularParam, z: complex) -> tuple[complex, complex]:
    """z -> z / (c tau + d) with its half-form factor (c tau + d)^(-1/2)."""
    factor = g.automorphy(m.tau)
    return z / factor, 1 / cmath.sqrt(factor)


def _transport_step(
    step: GStep, cfg: SewingConfig, point: SurfacePoint
) -> tuple[SurfacePoint, complex]:
    if step.kind == Generator.Beta:
        return SurfacePoint(3 - point.torus, point.z), 1 + 0j
    acted = 1 if step.kind == Generator.Gamma1 else 2
    if point.torus != acted:
        return point, 1 + 0j
    z, weight = transport_point(step.gamma, cfg.modular(acted), point.z)
    return SurfacePoint(acted, z), weight


def act_points(
    g: GElement, cfg: SewingConfig, points: Sequence[SurfacePoint]
) -> tuple[list[SurfacePoint], complex]:
    """Transport points along g; returns the images and the product of half-form factors."""
    moved = list(points)
    total = 1 + 0j
    for step in reversed(g.word):
        next_points = []
        for point in moved:
            image, weight = _transport_step(step, cfg, point)
            next_points.append(image)
            total *= weight
        moved = next_points
        cfg = _step_moduli(step, cfg)
    return moved, total


Quantity = Callable[[SewingConfig, CharPair, Sequence[SurfacePoint]], complex]


@dataclass(frozen=True)
class InvarianceReport:
    """Outcome of one invariance comparison."""

    original: complex
    image: complex
    residual: float
    tol: float
    exact: bool
    passed: bool
    skipped: bool = False
    reason: str = ""


def check_invariance(
    quantity: Quantity,
    g: GElement,
    cfg: SewingConfig,
    chars: CharPair,
    tol: float,
    points: Sequence[SurfacePoint] = (),
) -> InvarianceReport:
    """Compare quantity at (cfg, chars, points) with its value at the image under g.

    Pure beta words with every point on one torus are compared as complex
    numbers; everything else at modulus level. Images outside the sewing
    domain are reported as skipped.
    """
    try:
        image_cfg, image_chars = act_config(g, cfg, chars)
    except (DomainViolationError, DegenerateTwistError) as exception:
        _LOGGER.info("invariance check skipped: %s", exception)
        return InvarianceReport(0j, 0j, 0.0, tol, False, False, True, str(exception))
    image_points, weight = act_points(g, cfg, points)
    original = quantity(cfg, chars, points)
    image = quantity(image_cfg, image_chars, image_points) * weight
    exact = g.only_beta and len({p.torus for p in points}) <= 1
    scale = abs(original) or 1.0
    if exact:
        residual = abs(image - original) / scale
    else:
        residual = abs(abs(image) - abs(original)) / scale
    return InvarianceReport(original, image, residual, tol, exact, residual <= tol)
