"""Free fermion partition and correlation functions at genus one and two.

Genus one quantities are the closed forms of the rank two free fermion on a
torus. Genus two quantities come in two flavours: determinant formulas
built from the sewing matrices, and direct sums over the Fock basis that
serve as independent oracles for them.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .coeffs import (
    a_matrix,
    c_coeff,
    d_coeff,
    h_vector,
    h_vector_dz,
    hbar_vector,
    hbar_vector_dz,
)
from .const import (
    DEFAULT_BRANCH_SAMPLES,
    DEFAULT_WEIGHT_CAP,
    LIMIT_REL_TOL,
    LOGGER,
    DomainError,
    DomainViolationError,
    LimitUnstableError,
    NonConvergentError,
)
from .fock import FockLabel, enumerate_labels, square_bracket_dual
from .linalg import lu_det, solve, tracked_sqrt
from .qseries import (
    DEFAULT_POLICY,
    ModularParam,
    SeriesPolicy,
    TwistData,
    dedekind_eta,
    weierstrass_twisted,
)
from .sewing import (
    SewingConfig,
    SurfacePoint,
    build_q,
    det_i_minus_q,
    disconnected_kernel,
    half_form_rows,
    require_domain,
    require_nondegenerate,
    sewing_matrices,
    szego_g2,
    xi_block,
)

_LOGGER = LOGGER.getChild("fermion")


@dataclass(frozen=True)
class CharPair:
    """Characteristics of torus 1 and torus 2."""

    t1: TwistData
    t2: TwistData

    def __post_init__(self) -> None:
        require_nondegenerate(self.t1, self.t2)

    def twist(self, a: int) -> TwistData:
        return self.t1 if a == 1 else self.t2

    def swapped(self) -> CharPair:
        return CharPair(self.t2, self.t1)


@dataclass(frozen=True)
class CutoffPolicy:
    """Hard walls for the Fock-basis oracle sums."""

    weight_cap: float = DEFAULT_WEIGHT_CAP
    max_insertions: int = 4

    def __post_init__(self) -> None:
        if self.weight_cap < 0 or (2 * self.weight_cap) % 1:
            raise ValueError(
                f"weight_cap must be a non-negative half-integer, got {self.weight_cap}"
            )
        if self.max_insertions < 0:
            raise ValueError("max_insertions must be non-negative")


_c = lru_cache(maxsize=8192)(c_coeff)
_d = lru_cache(maxsize=8192)(d_coeff)


# Genus one


@lru_cache(maxsize=256)
def z1_partition(
    twist: TwistData, m: ModularParam, pol: SeriesPolicy = DEFAULT_POLICY
) -> complex:
    """Rank two torus partition function.

    q^(alpha^2/2 - 1/24) prod_{l>=1} (1 - q^(l-1/2+alpha)/theta) (1 - theta q^(l-1/2-alpha))
    """
    alpha = twist.alpha
    theta = twist.theta
    product = 1 + 0j
    quiet = 0
    for l in range(1, pol.max_terms + 1):
        x = m.qpow(l - 0.5 + alpha) / theta
        y = theta * m.qpow(l - 0.5 - alpha)
        product *= (1 - x) * (1 - y)
        quiet = quiet + 1 if max(abs(x), abs(y)) <= pol.rel_tol else 0
        if quiet == 2:
            return m.qpow(alpha**2 / 2 - 1 / 24) * product
    raise NonConvergentError(f"Z1 product: no convergence after {pol.max_terms} factors")


def z1_partition_rank1(
    twist: TwistData, m: ModularParam, pol: SeriesPolicy = DEFAULT_POLICY
) -> complex:
    """Rank one torus partition function for alpha, beta in {0, 1/2}.

    Its square is z1_partition at the same characteristics.
    """
    if twist.alpha not in (0.0, 0.5) or twist.beta not in (0.0, 0.5) or twist.is_trivial:
        raise DomainViolationError(
            f"rank one characteristics must be in {{0, 1/2}}, not both 1/2; got "
            f"({twist.alpha}, {twist.beta})"
        )
    alpha = twist.alpha
    theta = twist.theta
    product = 1 + 0j
    quiet = 0
    for l in range(1, pol.max_terms + 1):
        x = theta * m.qpow(l - 0.5 + alpha)
        product *= 1 - x
        quiet = quiet + 1 if abs(x) <= pol.rel_tol else 0
        if quiet == 2:
            prefactor = m.qpow(alpha**2 / 4 - 1 / 48)
            if alpha == 0.5:
                prefactor *= math.sqrt(2)
            return prefactor * product
    raise NonConvergentError(f"rank one Z1: no convergence after {pol.max_terms} factors")


def _fock_ratio(label: FockLabel, twist: TwistData, m: ModularParam, pol: SeriesPolicy) -> complex:
    if label.s != label.t:
        return 0j
    size = label.s
    matrix = [[_c(k, l, twist, m, pol) for l in label.l] for k in label.k]
    return (-1) ** (size * (size - 1) // 2) * lu_det(np.array(matrix, dtype=complex).reshape(size, size))


def z1_fock_onept(
    label: FockLabel, twist: TwistData, m: ModularParam, pol: SeriesPolicy = DEFAULT_POLICY
) -> complex:
    """Torus one-point function of Psi[k, l]; zero unless s = t."""
    require_nondegenerate(twist)
    return z1_partition(twist, m, pol) * _fock_ratio(label, twist, m, pol)


def z1_gen_2npt(
    ws: Sequence[complex],
    zs: Sequence[complex],
    twist: TwistData,
    m: ModularParam,
    pol: SeriesPolicy = DEFAULT_POLICY,
) -> complex:
    """det(P_1(w_i - z_j)) Z1, the genus one generating function."""
    if len(ws) != len(zs):
        raise ValueError(f"need as many w as z, got {len(ws)} and {len(zs)}")
    matrix = np.array(
        [[weierstrass_twisted(1, twist, w - z, m, pol) for z in zs] for w in ws],
        dtype=complex,
    ).reshape(len(ws), len(zs))
    return z1_partition(twist, m, pol) * lu_det(matrix)


def _dressed_ratio(
    side: int,
    points: Sequence[complex],
    label: FockLabel,
    twist: TwistData,
    m: ModularParam,
    pol: SeriesPolicy,
) -> complex:
    n = len(points)
    if side == 1:
        if label.t != label.s + n:
            return 0j
        size = label.t
        rows = [[_d(1, l, w, twist, m, pol) for l in label.l] for w in points]
        rows += [[_c(k, l, twist, m, pol) for l in label.l] for k in label.k]
        sign = (-1) ** (size * (size - 1) // 2)
    elif side == 2:
        if label.s != label.t + n:
            return 0j
        size = label.s
        rows = [
            [_d(k, 1, -z, twist, m, pol) for z in points]
            + [_c(k, l, twist, m, pol) for l in label.l]
            for k in label.k
        ]
        sign = (-1) ** (size * (size + 1) // 2 + label.s * label.t)
    else:
        raise ValueError(f"side must be 1 or 2, got {side}")
    return sign * lu_det(np.array(rows, dtype=complex).reshape(size, size))


def z1_dressed_onept(
    side: int,
    points: Sequence[complex],
    label: FockLabel,
    twist: TwistData,
    m: ModularParam,
    pol: SeriesPolicy = DEFAULT_POLICY,
) -> complex:
    """One-point function of Psi[k, l] dressed with fermion insertions.

    Side 1 inserts psi+ at each point and needs t = s + n; the matrix has
    rows D(1, l_j, w_i) followed by rows C(k_i, l_j). Side 2 inserts psi-
    and needs s = t + n; its matrix has columns D(k_i, 1, -z_j) followed by
    columns C(k_i, l_j).
    """
    require_nondegenerate(twist)
    return z1_partition(twist, m, pol) * _dressed_ratio(side, points, label, twist, m, pol)


def _mixed_ratio(
    w: complex, z: complex, label: FockLabel, twist: TwistData, m: ModularParam, pol: SeriesPolicy
) -> complex:
    if label.s != label.t:
        return 0j
    size = label.s
    top = [weierstrass_twisted(1, twist, w - z, m, pol)]
    top += [_d(1, l, w, twist, m, pol) for l in label.l]
    rows = [top] + [
        [_d(k, 1, -z, twist, m, pol)] + [_c(k, l, twist, m, pol) for l in label.l]
        for k in label.k
    ]
    return (-1) ** (size * (size - 1) // 2) * lu_det(np.array(rows, dtype=complex))


def z1_mixed_onept(
    w: complex,
    z: complex,
    label: FockLabel,
    twist: TwistData,
    m: ModularParam,
    pol: SeriesPolicy = DEFAULT_POLICY,
) -> complex:
    """One-point function of Psi[k, l] with psi+(w) and psi-(z) on the same torus."""
    require_nondegenerate(twist)
    return z1_partition(twist, m, pol) * _mixed_ratio(w, z, label, twist, m, pol)


# Genus two: determinant formulas


def _ray_root(w1: np.ndarray, w2: np.ndarray, shift: int, samples: int) -> complex:
    """det(I - W1 W2)^(1/2) tracked along eps -> t eps, t in (0, 1].

    Entry (k, l) of either matrix scales like t^((k + l - shift)/2) on the ray.
    """
    size = w1.shape[0]
    index = np.arange(1, size + 1)
    exponent = (index[:, None] + index[None, :] - shift) / 2
    eye = np.eye(size)

    def det_at(t: float) -> complex:
        scale = t**exponent
        return lu_det(eye - (w1 * scale) @ (w2 * scale), "det along the eps ray")

    path = (det_at(t) for t in np.linspace(0, 1, samples + 1)[1:])
    return tracked_sqrt(path, "det(I - W1 W2)^(1/2)")


def z2_partition(cfg: SewingConfig, chars: CharPair) -> complex:
    """Z1(tau_1) Z1(tau_2) det(I - Q)."""
    value = det_i_minus_q(cfg, chars.t1, chars.t2)
    return (
        z1_partition(chars.t1, cfg.tau1, cfg.pol)
        * z1_partition(chars.t2, cfg.tau2, cfg.pol)
        * value
    )


def z2_partition_rank1(
    cfg: SewingConfig, chars: CharPair, samples: int = DEFAULT_BRANCH_SAMPLES
) -> complex:
    """Rank one genus two partition function, det(I - Q)^(1/2) continued from eps = 0."""
    f1, f2 = sewing_matrices(cfg, chars.t1, chars.t2)
    root = _ray_root(f1.entries, f2.entries, 1, samples)
    return (
        z1_partition_rank1(chars.t1, cfg.tau1, cfg.pol)
        * z1_partition_rank1(chars.t2, cfg.tau2, cfg.pol)
        * root
    )


def gen_form_2n(
    ws: Sequence[SurfacePoint],
    zs: Sequence[SurfacePoint],
    cfg: SewingConfig,
    chars: CharPair,
) -> complex:
    """Z2 det(S2(w_i, z_j)), psi+ at the w_i and psi- at the z_j."""
    if len(ws) != len(zs):
        raise ValueError(f"need as many w as z, got {len(ws)} and {len(zs)}")
    n = len(ws)
    kernel = np.array(
        [[szego_g2(w, z, cfg, chars.t1, chars.t2) for z in zs] for w in ws],
        dtype=complex,
    ).reshape(n, n)
    return z2_partition(cfg, chars) * lu_det(kernel, "det S2")


def gen_form_block(
    ws: Sequence[SurfacePoint],
    zs: Sequence[SurfacePoint],
    cfg: SewingConfig,
    chars: CharPair,
) -> complex:
    """Z1 Z1 det[[S11, H+ Xi], [-H-, I - Q]], which equals Z2 det S2."""
    if len(ws) != len(zs):
        raise ValueError(f"need as many w as z, got {len(ws)} and {len(zs)}")
    n = len(ws)
    q = build_q(cfg, chars.t1, chars.t2)
    s11 = np.array(
        [[disconnected_kernel(w, z, cfg, chars.t1, chars.t2) for z in zs] for w in ws],
        dtype=complex,
    ).reshape(n, n)
    h_plus = half_form_rows(list(ws), cfg, chars.t1, chars.t2, bar=False)
    h_minus = half_form_rows(list(zs), cfg, chars.t1, chars.t2, bar=True).T
    block = np.block(
        [
            [s11, h_plus @ xi_block(cfg)],
            [-h_minus, np.eye(2 * q.order) - q.matrix],
        ]
    )
    return (
        z1_partition(chars.t1, cfg.tau1, cfg.pol)
        * z1_partition(chars.t2, cfg.tau2, cfg.pol)
        * lu_det(block, "generating form block determinant")
    )


# Genus two: Fock-basis oracles


def _weighted_sum(terms: Callable[[FockLabel], complex], labels: list[FockLabel]) -> complex:
    total = 0j
    for label in labels:
        total += terms(label)
    return total


def z2_direct_oracle(cfg: SewingConfig, chars: CharPair, cut: CutoffPolicy) -> complex:
    """sum_u Z1_1(u) Z1_2(ubar) over Fock labels of weight <= W."""
    require_domain(cfg)
    labels = enumerate_labels(cut.weight_cap)
    _LOGGER.debug("partition oracle over %d labels at W = %s", len(labels), cut.weight_cap)

    def term(label: FockLabel) -> complex:
        coefficient, dual = square_bracket_dual(label, cfg.eps, cfg.mobius_xi)
        return (
            coefficient
            * _fock_ratio(label, chars.t1, cfg.tau1, cfg.pol)
            * _fock_ratio(dual, chars.t2, cfg.tau2, cfg.pol)
        )

    return (
        z1_partition(chars.t1, cfg.tau1, cfg.pol)
        * z1_partition(chars.t2, cfg.tau2, cfg.pol)
        * _weighted_sum(term, labels)
    )


def gen_form_direct_oracle(
    ws: Sequence[SurfacePoint],
    zs: Sequence[SurfacePoint],
    cfg: SewingConfig,
    chars: CharPair,
    cut: CutoffPolicy,
) -> complex:
    """Fock-basis sum for the generating form with psi+ on torus 1 and psi- on torus 2."""
    require_domain(cfg)
    if len(ws) != len(zs):
        raise ValueError(f"need as many w as z, got {len(ws)} and {len(zs)}")
    if any(w.torus != 1 for w in ws) or any(z.torus != 2 for z in zs):
        raise DomainError("the split oracle takes every w on torus 1 and every z on torus 2")
    n = len(ws)
    if n > cut.max_insertions:
        raise ValueError(f"{n} insertions exceed the cap of {cut.max_insertions}")
    w_coords = [w.z for w in ws]
    z_coords = [z.z for z in zs]
    labels = enumerate_labels(cut.weight_cap, excess=n)

    def term(label: FockLabel) -> complex:
        coefficient, dual = square_bracket_dual(label, cfg.eps, cfg.mobius_xi)
        return (
            coefficient
            * _dressed_ratio(1, w_coords, label, chars.t1, cfg.tau1, cfg.pol)
            * _dressed_ratio(2, z_coords, dual, chars.t2, cfg.tau2, cfg.pol)
        )

    sign = (-1) ** (n * (n - 1) // 2 + n)
    return (
        sign
        * z1_partition(chars.t1, cfg.tau1, cfg.pol)
        * z1_partition(chars.t2, cfg.tau2, cfg.pol)
        * _weighted_sum(term, labels)
    )


def two_point_oracle_same_torus(
    w: SurfacePoint,
    z: SurfacePoint,
    cfg: SewingConfig,
    chars: CharPair,
    cut: CutoffPolicy,
) -> complex:
    """Fock-basis sum for the n = 1 generating form with psi+(w), psi-(z) on one torus."""
    require_domain(cfg)
    if w.torus != z.torus:
        raise DomainError("both insertions must lie on the same torus")
    a = w.torus
    other = 3 - a
    m_a, m_other = cfg.modular(a), cfg.modular(other)
    labels = enumerate_labels(cut.weight_cap)

    def term(label: FockLabel) -> complex:
        coefficient, dual = square_bracket_dual(label, cfg.eps, cfg.mobius_xi)
        return (
            coefficient
            * _mixed_ratio(w.z, z.z, label, chars.twist(a), m_a, cfg.pol)
            * _fock_ratio(dual, chars.twist(other), m_other, cfg.pol)
        )

    return (
        z1_partition(chars.t1, cfg.tau1, cfg.pol)
        * z1_partition(chars.t2, cfg.tau2, cfg.pol)
        * _weighted_sum(term, labels)
    )


# Virasoro and Heisenberg


def virasoro_bracket(
    w: SurfacePoint, z: SurfacePoint, cfg: SewingConfig, chars: CharPair
) -> complex:
    """1/2 (d/dw - d/dz) S2(w, z) + 1/(w - z)^2 for w, z on one torus.

    Uses the exact derivatives of the kernel, so the double pole cancels
    analytically up to the P_2 subtraction.
    """
    if w.torus != z.torus:
        raise DomainError("the Virasoro bracket needs both points on one torus")
    a = w.torus
    twist = chars.twist(a)
    m = cfg.modular(a)
    f1, f2 = sewing_matrices(cfg, chars.t1, chars.t2)
    f_a, f_other = (f1, f2) if a == 1 else (f2, f1)
    resolvent = np.eye(cfg.order) - f_other.entries @ f_a.entries
    hbar = hbar_vector(a, z.z, cfg, twist).entries
    dhbar = hbar_vector_dz(a, z.z, cfg, twist)
    x_hbar = solve(resolvent, f_other.entries @ hbar, "virasoro solve")
    x_dhbar = solve(resolvent, f_other.entries @ dhbar, "virasoro solve")
    h = h_vector(a, w.z, cfg, twist).entries
    dh = h_vector_dz(a, w.z, cfg, twist)
    separation = w.z - z.z
    singular = -weierstrass_twisted(2, twist, separation, m, cfg.pol) + 1 / separation**2
    return singular + 0.5 * (dh @ x_hbar - h @ x_dhbar)


def _richardson(values: Sequence[complex]) -> list[complex]:
    return [(4 * fine - coarse) / 3 for coarse, fine in zip(values, values[1:])]


def virasoro_onept(
    z: SurfacePoint,
    cfg: SewingConfig,
    chars: CharPair,
    direction: complex = 1,
    step: float | None = None,
) -> complex:
    """Z2 lim_{w -> z} [1/2 (d/dw - d/dz) S2(w, z) + 1/(w - z)^2].

    The bracket is evaluated exactly at the pairs (z + d, z - d) and
    (z - d, z + d), with d = h, h/2, h/4 along `direction`. Twisted kernels
    carry odd terms in d, so the two orderings are averaged; one Richardson
    pass then removes the d^2 term and the two extrapolants must agree to
    LIMIT_REL_TOL.
    """
    if z.torus != 1:
        raise DomainError("the Virasoro one-point form is evaluated on torus 1")
    unit = complex(direction) / abs(direction)
    if step is None:
        step = 1e-2 * min(abs(z.z), cfg.distance(1) / (2 * math.pi))

    def bracket(h: float) -> complex:
        plus, minus = SurfacePoint(1, z.z + h * unit), SurfacePoint(1, z.z - h * unit)
        return (virasoro_bracket(plus, minus, cfg, chars) + virasoro_bracket(minus, plus, cfg, chars)) / 2

    coarse, fine = _richardson([bracket(step), bracket(step / 2), bracket(step / 4)])
    _LOGGER.debug("Virasoro extrapolants %s and %s", coarse, fine)
    if abs(coarse - fine) > LIMIT_REL_TOL * abs(fine):
        raise LimitUnstableError(
            f"Richardson extrapolants differ: {coarse} against {fine}"
        )
    return z2_partition(cfg, chars) * fine


def heisenberg_det(cfg: SewingConfig) -> complex:
    """det(I - A_1 A_2) at M x M."""
    require_domain(cfg)
    a1, a2 = a_matrix(1, cfg), a_matrix(2, cfg)
    return lu_det(np.eye(cfg.order) - a1.entries @ a2.entries, "det(I - A1 A2)")


def z2_heisenberg(cfg: SewingConfig, samples: int = DEFAULT_BRANCH_SAMPLES) -> complex:
    """1 / (eta(tau_1) eta(tau_2) det(I - A_1 A_2)^(1/2))."""
    require_domain(cfg)
    a1, a2 = a_matrix(1, cfg), a_matrix(2, cfg)
    root = _ray_root(a1.entries, a2.entries, 0, samples)
    return 1 / (dedekind_eta(cfg.tau1, cfg.pol) * dedekind_eta(cfg.tau2, cfg.pol) * root)
