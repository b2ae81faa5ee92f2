"""Tests for the modular group action on the sewing parameters."""

from __future__ import annotations

import cmath

import pytest

from fermion_sewing.const import DegenerateTwistError
from fermion_sewing.fermion import CharPair, gen_form_2n, z1_partition, z2_partition
from fermion_sewing.modular import (
    IDENTITY,
    S,
    T,
    GElement,
    SL2Element,
    act_char,
    act_config,
    act_points,
    act_tau,
    check_invariance,
    transport_point,
)
from fermion_sewing.qseries import TRIVIAL_TWIST, ModularParam, TwistData
from fermion_sewing.sewing import SewingConfig, SurfacePoint

CHARS = CharPair(TwistData(0.3, 0.1), TwistData(0.0, 0.4))
W = SurfacePoint(1, 0.8 + 0.5j)
Z = SurfacePoint(2, 0.7 - 0.6j)


def config(eps: complex = 0.2 + 0.1j) -> SewingConfig:
    return SewingConfig(ModularParam(1j), ModularParam(1.2j), eps, order=12)


def z2_quantity(cfg, chars, points):
    return z2_partition(cfg, chars)


def genform_quantity(cfg, chars, points):
    w, z = points
    return gen_form_2n([w], [z], cfg, chars)


class TestSL2Element:
    def test_determinant(self):
        """Only determinant one is accepted."""
        with pytest.raises(ValueError):
            SL2Element(2, 0, 0, 1)

    def test_products(self):
        """S squares to -I and T times its inverse is the identity."""
        assert S @ S == SL2Element(-1, 0, 0, -1)
        assert T @ T.inverse() == IDENTITY

    def test_act_tau(self):
        """S fixes i and T shifts by one."""
        assert act_tau(S, ModularParam(1j)).tau == pytest.approx(1j)
        assert act_tau(T, ModularParam(0.2 + 1j)).tau == pytest.approx(1.2 + 1j)


class TestActChar:
    def test_t(self):
        """T keeps alpha and shifts beta to beta - alpha + 1/2."""
        image = act_char(T, TwistData(0.3, 0.1))
        assert image.alpha == pytest.approx(0.3)
        assert image.beta == pytest.approx(0.3)

    def test_s(self):
        """S sends (alpha, beta) to (1 - beta, alpha)."""
        image = act_char(S, TwistData(0.2, 0.35))
        assert image.alpha == pytest.approx(0.65)
        assert image.beta == pytest.approx(0.2)

    def test_multipliers(self):
        """(theta, phi) -> (theta^a phi^b, theta^c phi^d)."""
        twist = TwistData(0.2, 0.35)
        g = S @ T
        image = act_char(g, twist)
        theta = twist.theta**g.a * twist.phi**g.b
        phi = twist.theta**g.c * twist.phi**g.d
        assert image.theta == pytest.approx(theta)
        assert image.phi == pytest.approx(phi)

    def test_trivial(self):
        """The trivial characteristics are refused."""
        with pytest.raises(DegenerateTwistError):
            act_char(S, TRIVIAL_TWIST)

    def test_modulus_of_z1(self):
        """|Z1| is invariant under S and T."""
        twist = TwistData(0.3, 0.1)
        m = ModularParam(0.1 + 1.1j)
        reference = abs(z1_partition(twist, m))
        for g in (S, T):
            value = abs(z1_partition(act_char(g, twist), act_tau(g, m)))
            assert value == pytest.approx(reference, rel=1e-10)


class TestGElement:
    def test_reduced_gammas(self):
        """Neighbouring gammas on one torus merge and cancel."""
        g = GElement.gamma1(T) @ GElement.gamma1(T.inverse())
        assert g.reduced().word == ()

    def test_reduced_betas(self):
        """beta is an involution."""
        assert (GElement.beta() @ GElement.beta()).reduced().word == ()

    def test_different_tori_kept(self):
        """Gammas on different tori do not merge."""
        g = GElement.gamma1(T) @ GElement.gamma2(T)
        assert len(g.reduced().word) == 2

    def test_only_beta(self):
        """only_beta spots pure torus swaps."""
        assert GElement.beta().only_beta
        assert not GElement.gamma1(S).only_beta


class TestActConfig:
    def test_beta(self):
        """beta swaps tori and characteristics."""
        cfg, chars = act_config(GElement.beta(), config(), CHARS)
        assert cfg.tau1 == ModularParam(1.2j)
        assert chars.t1 == CHARS.t2
        assert cfg.eps == config().eps

    def test_gamma1(self):
        """gamma1 acts on tau_1 and rescales eps by 1 / (c tau_1 + d)."""
        cfg, chars = act_config(GElement.gamma1(S), config(), CHARS)
        assert cfg.tau1.tau == pytest.approx(1j)
        assert cfg.eps == pytest.approx(config().eps / 1j)
        assert chars.t2 == CHARS.t2

    def test_transport_point(self):
        """z -> z / (c tau + d) with weight (c tau + d)^(-1/2)."""
        z, weight = transport_point(S, ModularParam(1j), 0.5 + 0.2j)
        assert z == pytest.approx((0.5 + 0.2j) / 1j)
        assert weight == pytest.approx(1 / cmath.sqrt(1j))

    def test_act_points(self):
        """Only points on the acted torus move."""
        moved, weight = act_points(GElement.gamma1(S), config(), [W, Z])
        assert moved[0].z == pytest.approx(W.z / 1j)
        assert moved[1] == Z
        assert weight == pytest.approx(1 / cmath.sqrt(1j))


class TestInvariance:
    def test_beta_exact(self):
        """Z2 is exactly invariant under the torus swap."""
        report = check_invariance(z2_quantity, GElement.beta(), config(), CHARS, 1e-12)
        assert report.exact
        assert report.passed

    @pytest.mark.parametrize("gamma", [T, S, T @ S])
    def test_gamma1_modulus(self, gamma):
        """|Z2| is invariant under the modular group of torus 1."""
        report = check_invariance(z2_quantity, GElement.gamma1(gamma), config(), CHARS, 1e-8)
        assert not report.exact
        assert report.passed

    def test_gamma2_modulus(self):
        """|Z2| is invariant under the modular group of torus 2."""
        report = check_invariance(z2_quantity, GElement.gamma2(T), config(), CHARS, 1e-8)
        assert report.passed

    def test_beta_generating_form(self):
        """Swapping tori preserves |Z2 S2(w, z)| for points on both tori."""
        report = check_invariance(
            genform_quantity, GElement.beta(), config(), CHARS, 1e-10, points=(W, Z)
        )
        assert not report.exact
        assert report.passed
