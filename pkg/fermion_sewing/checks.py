"""Named identity suites behind the `check` command.

Each suite evaluates one identity numerically at a handful of points and
returns a CheckReport with the worst residual found.
"""

from __future__ import annotations

import cmath
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .coeffs import a_matrix
from .const import LOGGER
from .fermion import (
    CharPair,
    CutoffPolicy,
    gen_form_2n,
    gen_form_direct_oracle,
    heisenberg_det,
    virasoro_bracket,
    virasoro_onept,
    z1_partition,
    z2_direct_oracle,
    z2_partition,
)
from .graphs import jacobi_product
from .linalg import block_minor_expansion, lu_det, off_diagonal_block, principal_minor_sum
from .modular import (
    S,
    T,
    GElement,
    act_char,
    act_tau,
    check_invariance,
)
from .qseries import (
    ModularParam,
    TwistData,
    bernoulli_poly,
    dedekind_eta,
    eisenstein_twisted,
    theta_char,
    unit_phase,
)
from .sewing import (
    SewingConfig,
    SurfacePoint,
    annulus_transport,
    det_i_minus_ff,
    det_i_minus_q,
    sewing_matrices,
    szego_g1,
    szego_g2,
    szego_g2_block,
)

_LOGGER = LOGGER.getChild("checks")

DEFAULT_W = SurfacePoint(1, 0.8 + 0.5j)
DEFAULT_Z = SurfacePoint(2, 0.7 - 0.6j)
ORACLE_FRACTION = 1e-3  # |eps| / bound where the oracle suites compare values
LEMMA_SIZE = 3  # Leading block size for the minor expansions


@dataclass(frozen=True)
class CheckContext:
    """Everything a suite may use; suites ignore what they do not need."""

    cfg: SewingConfig
    chars: CharPair
    cut: CutoffPolicy = field(default_factory=CutoffPolicy)
    budget: int = 6
    seed: int = 0
    points: tuple[SurfacePoint, SurfacePoint] = (DEFAULT_W, DEFAULT_Z)


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one suite."""

    name: str
    residual: float
    tol: float
    passed: bool
    fitted_order: float | None = None
    details: dict[str, float] = field(default_factory=dict)


def _relative(a: complex, b: complex) -> float:
    return abs(a - b) / (abs(b) or 1.0)


def _fit_order(coarse: float, fine: float, ratio: float = 2.0) -> float:
    """Exponent p with residual ~ eps^p from residuals at eps and eps / ratio."""
    if fine == 0 or coarse == 0:
        return math.inf
    return math.log(coarse / fine) / math.log(ratio)


def random_twist(rng: np.random.Generator, lam_range: tuple[float, float] | None = None) -> TwistData:
    """A random nondegenerate twist, optionally with lam restricted to a range."""
    while True:
        alpha, beta = rng.random(2)
        twist = TwistData(float(alpha), float(beta))
        if twist.is_trivial:
            continue
        if lam_range is not None and not lam_range[0] <= twist.lam <= lam_range[1]:
            continue
        return twist


def random_tau(rng: np.random.Generator) -> ModularParam:
    return ModularParam(complex(rng.uniform(-0.5, 0.5), rng.uniform(0.8, 1.5)))


def eisenstein_modularity(ctx: CheckContext) -> CheckReport:
    """E_k(gamma.char)(gamma.tau) = (c tau + d)^k E_k(char)(tau)."""
    rng = np.random.default_rng(ctx.seed)
    pol = ctx.cfg.pol
    worst = 0.0
    for tau in (1j, 0.3 + 0.9j):
        m = ModularParam(tau)
        for gamma in (S, T, T @ S @ T):
            for _ in range(10):
                twist = random_twist(rng)
                image = act_char(gamma, twist)
                image_m = act_tau(gamma, m)
                for k in range(1, 7):
                    lhs = eisenstein_twisted(k, image, image_m, pol)
                    rhs = gamma.automorphy(tau) ** k * eisenstein_twisted(k, twist, m, pol)
                    worst = max(worst, _relative(lhs, rhs))
    tol = 1e-9
    return CheckReport("eisenstein-modularity", worst, tol, worst < tol)


def q_limit(ctx: CheckContext) -> CheckReport:
    """E_n(char)(20i) against its constant term -B_n(lam)/n!."""
    rng = np.random.default_rng(ctx.seed)
    m = ModularParam(20j)
    worst = 0.0
    for _ in range(10):
        twist = random_twist(rng, (0.25, 0.75))
        for n in range(1, 9):
            limit = -bernoulli_poly(n, twist.lam) / math.factorial(n)
            worst = max(worst, abs(eisenstein_twisted(n, twist, m, ctx.cfg.pol) - limit))
    tol = 1e-10
    return CheckReport("q-limit", worst, tol, worst < tol)


def _oracle_fit(
    cfg: SewingConfig, evaluate: Callable[[SewingConfig], tuple[complex, complex]]
) -> tuple[float, float, float, float]:
    """Relative residual at ORACLE_FRACTION of the bound, plus the order fitted at 0.2 and 0.1.

    `evaluate` returns (oracle, closed form) at one configuration; every
    evaluation keeps the phase of cfg.eps.
    """
    phase = cmath.exp(1j * cmath.phase(cfg.eps)) if cfg.eps else 1

    def at(fraction: float) -> tuple[complex, complex]:
        return evaluate(cfg.with_eps(fraction * cfg.bound * phase))

    def gap(fraction: float) -> float:
        oracle, closed = at(fraction)
        return abs(oracle - closed)

    residual = _relative(*at(ORACLE_FRACTION))
    coarse, fine = gap(0.2), gap(0.1)
    return residual, coarse, fine, _fit_order(coarse, fine)


def partition_oracle(ctx: CheckContext) -> CheckReport:
    """Z2 from det(I - Q) against the Fock-basis sum, plus the residual order."""
    chars, cut = ctx.chars, ctx.cut
    residual, coarse, fine, order = _oracle_fit(
        ctx.cfg, lambda cfg: (z2_direct_oracle(cfg, chars, cut), z2_partition(cfg, chars))
    )
    tol = 1e-9
    passed = residual < tol and order > cut.weight_cap
    return CheckReport(
        "partition-oracle",
        residual,
        tol,
        passed,
        order,
        {"residual_at_0.2_bound": coarse, "residual_at_0.1_bound": fine},
    )


def _lemma_residual(f1: np.ndarray, f2: np.ndarray, xi: complex) -> float:
    """The minor expansions and the t-scaled block against det(I - F1 F2) on leading blocks."""
    a, b = f1[:LEMMA_SIZE, :LEMMA_SIZE], f2[:LEMMA_SIZE, :LEMMA_SIZE]
    reference = lu_det(np.eye(LEMMA_SIZE) - a @ b)
    q = off_diagonal_block(xi * a, -xi * b)
    scaled = off_diagonal_block(xi * a, -xi * b, t=0.5 + 0.3j)
    return max(
        _relative(block_minor_expansion(a, b), reference),
        _relative(principal_minor_sum(-q), reference),
        _relative(lu_det(np.eye(2 * LEMMA_SIZE) - scaled), reference),
    )


def det_q(ctx: CheckContext) -> CheckReport:
    """det(I - Q) = det(I - F1 F2), independent of xi, over random configurations."""
    rng = np.random.default_rng(ctx.seed)
    worst_ff = 0.0
    worst_xi = 0.0
    worst_lemma = 0.0
    for _ in range(20):
        tau1, tau2 = random_tau(rng), random_tau(rng)
        base = SewingConfig(tau1, tau2, 0, order=ctx.cfg.order, pol=ctx.cfg.pol)
        eps = 0.3 * base.bound * rng.random() * cmath.exp(2j * math.pi * rng.random())
        cfg = base.with_eps(eps)
        t1, t2 = random_twist(rng), random_twist(rng)
        value = det_i_minus_q(cfg, t1, t2)
        worst_ff = max(worst_ff, _relative(det_i_minus_ff(cfg, t1, t2), value))
        worst_xi = max(worst_xi, _relative(det_i_minus_q(cfg.with_xi(-cfg.xi), t1, t2), value))
        f1, f2 = sewing_matrices(cfg, t1, t2)
        worst_lemma = max(worst_lemma, _lemma_residual(f1.entries, f2.entries, cfg.xi))
    passed = worst_ff < 1e-12 and worst_xi < 1e-14 and worst_lemma < 1e-12
    return CheckReport(
        "det-q",
        max(worst_ff, worst_xi, worst_lemma),
        1e-12,
        passed,
        details={"det_ff": worst_ff, "xi_flip": worst_xi, "det_lemma": worst_lemma},
    )


def genform_oracle(ctx: CheckContext) -> CheckReport:
    """Z2 S2(w, z) against the split Fock-basis sum for n = 1, plus the residual order."""
    w, z = ctx.points
    chars, cut = ctx.chars, ctx.cut
    residual, coarse, fine, order = _oracle_fit(
        ctx.cfg,
        lambda cfg: (
            gen_form_direct_oracle([w], [z], cfg, chars, cut),
            gen_form_2n([w], [z], cfg, chars),
        ),
    )
    tol = 1e-6
    passed = residual < tol and order > cut.weight_cap
    return CheckReport(
        "genform-oracle",
        residual,
        tol,
        passed,
        order,
        {"residual_at_0.2_bound": coarse, "residual_at_0.1_bound": fine},
    )


def szego_structure(ctx: CheckContext) -> CheckReport:
    """Residue, small-eps reduction, skew symmetry, block equivalence and annulus transport of S2."""
    cfg, chars = ctx.cfg, ctx.chars
    w, z = ctx.points
    details: dict[str, float] = {}
    passed = True
    for separation in (1e-2, 1e-3):
        near = SurfacePoint(w.torus, w.z - separation)
        error = abs(separation * szego_g2(w, near, cfg, chars.t1, chars.t2) - 1)
        details[f"residue_{separation:g}"] = error
        passed &= error < 2 * separation

    # (alpha, beta) = (0, 0) on torus 2 has E_1 = 0, so the correction is O(eps^2)
    reduction_chars = CharPair(chars.t1, TwistData(0.0, 0.0))
    tiny = cfg.with_eps(1e-6)
    near_s2 = szego_g2(w, SurfacePoint(1, w.z - 0.5), tiny, reduction_chars.t1, reduction_chars.t2)
    near_s1 = szego_g1(w.z, w.z - 0.5, reduction_chars.t1, cfg.tau1, cfg.pol)
    details["reduction"] = abs(near_s2 - near_s1)
    passed &= details["reduction"] < 1e-8

    skew = 0.0
    block = 0.0
    inverse = (chars.t1.inverse(), chars.t2.inverse())
    for x, y in ((w, SurfacePoint(1, w.z - 0.5)), (w, z)):
        value = szego_g2(x, y, cfg, chars.t1, chars.t2)
        flipped = szego_g2(y, x, cfg, *inverse)
        skew = max(skew, _relative(-flipped, value))
        block = max(block, _relative(szego_g2_block(x, y, cfg, chars.t1, chars.t2), value))
    details["skew"] = skew
    details["block"] = block
    passed &= skew < 1e-9 and block < 1e-11

    # annulus identification at the geometric-mean radius, where both truncations are negligible
    phase = cmath.exp(1j * cmath.phase(cfg.eps)) if cfg.eps else 1
    neck = cfg.with_eps(ORACLE_FRACTION * cfg.bound * phase)
    other = 3 - w.torus
    radius = math.sqrt(abs(neck.eps) * neck.radius(w.torus) / neck.radius(other))
    point = SurfacePoint(w.torus, radius * cmath.exp(0.7j))
    image, factor = annulus_transport(point, neck)
    direct = szego_g2(w, point, neck, chars.t1, chars.t2)
    moved = factor * szego_g2(w, image, neck, chars.t1, chars.t2)
    details["annulus"] = _relative(moved, direct)
    passed &= details["annulus"] < 1e-9
    return CheckReport("szego-structure", max(details.values()), 1e-8, bool(passed), details=details)


def _jacobi_residual(cfg: SewingConfig, chars: CharPair, budget: int) -> float:
    a1, a2 = a_matrix(1, cfg), a_matrix(2, cfg)
    f1, f2 = sewing_matrices(cfg, chars.t1, chars.t2)
    product = jacobi_product(a1, a2, f1, f2, budget)
    closed = cmath.sqrt(heisenberg_det(cfg)) * det_i_minus_ff(cfg, chars.t1, chars.t2)
    return abs(product - closed)


def jacobi_product_check(ctx: CheckContext) -> CheckReport:
    """Cycle-graph product against det(I - A1 A2)^(1/2) det(I - F1 F2)."""
    cfg, chars, budget = ctx.cfg, ctx.chars, ctx.budget
    cfg = cfg.with_order(max(cfg.order, budget))
    phase = cmath.exp(1j * cmath.phase(cfg.eps)) if cfg.eps else 1
    residual = _jacobi_residual(cfg.with_eps(0.02 * cfg.bound * phase), chars, budget)
    coarse = _jacobi_residual(cfg.with_eps(0.2 * cfg.bound * phase), chars, budget)
    fine = _jacobi_residual(cfg.with_eps(0.1 * cfg.bound * phase), chars, budget)
    order = _fit_order(coarse, fine)
    exact = _jacobi_residual(cfg.with_order(1).with_eps(0.02 * cfg.bound * phase), chars, budget)
    passed = order > budget and exact < 1e-15
    return CheckReport(
        "jacobi-product",
        exact,
        1e-15,
        passed,
        order,
        {"residual_at_0.02_bound": residual},
    )


def bosonization(ctx: CheckContext) -> CheckReport:
    """Z1 product formula against exp(-2 pi i alpha beta) theta[alpha, beta] / eta."""
    rng = np.random.default_rng(ctx.seed)
    pol = ctx.cfg.pol
    worst = 0.0
    for _ in range(10):
        twist = random_twist(rng)
        m = random_tau(rng)
        theta = theta_char(1, [twist.alpha], [twist.beta], [0j], [[m.tau]], pol)
        boson = unit_phase(-twist.alpha * twist.beta) * theta / dedekind_eta(m, pol)
        worst = max(worst, _relative(z1_partition(twist, m, pol), boson))
    tol = 1e-10
    return CheckReport("bosonization", worst, tol, worst < tol)


def _z2_quantity(cfg: SewingConfig, chars: CharPair, points: Sequence[SurfacePoint]) -> complex:
    return z2_partition(cfg, chars)


def _genform_quantity(
    cfg: SewingConfig, chars: CharPair, points: Sequence[SurfacePoint]
) -> complex:
    w, z = points
    return gen_form_2n([w], [z], cfg, chars)


def modular_invariance(ctx: CheckContext) -> CheckReport:
    """|Z1|, |Z2| and |G_1| under the generators of the modular groups."""
    rng = np.random.default_rng(ctx.seed)
    pol = ctx.cfg.pol
    details: dict[str, float] = {}
    passed = True
    worst_z1 = 0.0
    for _ in range(10):
        twist = random_twist(rng)
        m = random_tau(rng)
        for gamma in (S, T):
            image = z1_partition(act_char(gamma, twist), act_tau(gamma, m), pol)
            worst_z1 = max(worst_z1, abs(abs(image) - abs(z1_partition(twist, m, pol))) / abs(image))
    details["z1"] = worst_z1
    passed &= worst_z1 < 1e-8
    generators = {
        "gamma1=T": GElement.gamma1(T),
        "gamma1=S": GElement.gamma1(S),
        "gamma2=T": GElement.gamma2(T),
        "gamma2=S": GElement.gamma2(S),
        "beta": GElement.beta(),
    }
    for name, g in generators.items():
        report = check_invariance(_z2_quantity, g, ctx.cfg, ctx.chars, 1e-12 if name == "beta" else 1e-8)
        if report.skipped:
            _LOGGER.info("Z2 under %s skipped: %s", name, report.reason)
            continue
        details[f"z2 {name}"] = report.residual
        passed &= report.passed
        report = check_invariance(_genform_quantity, g, ctx.cfg, ctx.chars, 1e-6, ctx.points)
        details[f"genform {name}"] = report.residual
        passed &= report.passed
    return CheckReport("modular-invariance", max(details.values()), 1e-6, bool(passed), details=details)


def virasoro_limit(ctx: CheckContext) -> CheckReport:
    """Direction independence of the Virasoro limit and its agreement with the exact bracket."""
    cfg, chars = ctx.cfg, ctx.chars
    w = ctx.points[0]
    point = w if w.torus == 1 else SurfacePoint(1, w.z)
    along_real = virasoro_onept(point, cfg, chars, direction=1)
    along_imag = virasoro_onept(point, cfg, chars, direction=1j)
    isotropy = _relative(along_imag, along_real)
    plus, minus = SurfacePoint(1, point.z + 1e-4), SurfacePoint(1, point.z - 1e-4)
    averaged = (virasoro_bracket(plus, minus, cfg, chars) + virasoro_bracket(minus, plus, cfg, chars)) / 2
    bracket = averaged * z2_partition(cfg, chars)
    agreement = _relative(bracket, along_real)
    passed = isotropy < 1e-6
    return CheckReport(
        "virasoro-limit",
        isotropy,
        1e-6,
        passed,
        details={"isotropy": isotropy, "bracket_at_1e-4": agreement},
    )


CHECKS: dict[str, Callable[[CheckContext], CheckReport]] = {
    "eisenstein-modularity": eisenstein_modularity,
    "q-limit": q_limit,
    "partition-oracle": partition_oracle,
    "det-q": det_q,
    "genform-oracle": genform_oracle,
    "szego-structure": szego_structure,
    "jacobi-product": jacobi_product_check,
    "bosonization": bosonization,
    "modular-invariance": modular_invariance,
    "virasoro-limit": virasoro_limit,
}


def run_check(name: str, ctx: CheckContext) -> CheckReport:
    try:
        suite = CHECKS[name]
    except KeyError as exception:
        raise ValueError(f"unknown check {name!r}; choose from {sorted(CHECKS)}") from exception
    _LOGGER.debug("running check %s", name)
    return suite(ctx)
