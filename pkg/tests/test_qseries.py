"""Tests for the q-series layer."""

from __future__ import annotations

import cmath
import math

import numpy as np
import pytest

from fermion_sewing.const import NonConvergentError, OutOfStripError, SingularPointError
from fermion_sewing.qseries import (
    TRIVIAL_TWIST,
    ModularParam,
    SeriesPolicy,
    TwistData,
    bernoulli_poly,
    dedekind_eta,
    eisenstein_classical,
    eisenstein_twisted,
    frac,
    k1_prime,
    p1_theta_quotient,
    theta1,
    theta_char,
    unit_phase,
    weierstrass_twisted,
)

TWIST = TwistData(0.2, 0.35)
LAM_03 = TwistData(0.8, 0.1)  # lam = frac(0.8 + 1/2) = 0.3


def brute_theta(alpha: float, beta: float, z: complex, tau: complex, cap: int = 32) -> complex:
    return sum(
        cmath.exp(1j * math.pi * (n + alpha) ** 2 * tau + (n + alpha) * (z + 2j * math.pi * beta))
        for n in range(-cap, cap + 1)
    )


class TestSeriesPolicy:
    def test_rejects_bad_tolerance(self):
        """rel_tol outside (0, 1) is refused."""
        with pytest.raises(ValueError):
            SeriesPolicy(rel_tol=0)

    def test_rejects_tiny_term_cap(self):
        """max_terms below eight is refused."""
        with pytest.raises(ValueError):
            SeriesPolicy(max_terms=4)

    def test_hard_cap_raises(self):
        """A slowly converging series hits its cap and says so."""
        pol = SeriesPolicy(max_terms=8)
        with pytest.raises(NonConvergentError):
            eisenstein_twisted(2, TWIST, ModularParam(0.01j), pol)


class TestTwistData:
    def test_lambda_is_shifted_alpha(self):
        """lam = frac(alpha + 1/2)."""
        assert LAM_03.lam == pytest.approx(0.3)
        assert TwistData(0.25, 0.0).lam == pytest.approx(0.75)

    def test_multipliers_are_unimodular(self):
        """|theta| = |phi| = 1 and phi = exp(2 pi i lam)."""
        assert abs(abs(TWIST.theta) - 1) < 1e-15
        assert abs(abs(TWIST.phi) - 1) < 1e-15
        assert abs(TWIST.phi - cmath.exp(2j * math.pi * TWIST.lam)) < 1e-14

    def test_trivial_twist(self):
        """(alpha, beta) = (1/2, 1/2) is exactly (theta, phi) = (1, 1)."""
        assert TRIVIAL_TWIST.is_trivial
        assert TRIVIAL_TWIST.theta == 1
        assert TRIVIAL_TWIST.phi == 1
        assert not TWIST.is_trivial

    def test_inverse_inverts_multipliers(self):
        """The inverse characteristics carry theta^-1 and phi^-1."""
        inverse = TWIST.inverse()
        assert abs(inverse.theta * TWIST.theta - 1) < 1e-14
        assert abs(inverse.phi * TWIST.phi - 1) < 1e-14

    def test_from_unitary(self):
        """Characteristics are recovered from their multipliers."""
        recovered = TwistData.from_unitary(TWIST.theta, TWIST.phi)
        assert recovered.alpha == pytest.approx(TWIST.alpha)
        assert recovered.beta == pytest.approx(TWIST.beta)

    def test_out_of_range(self):
        """alpha and beta live in [0, 1)."""
        with pytest.raises(ValueError):
            TwistData(1.0, 0.0)

    def test_unit_phase_quarter_turns(self):
        """Quarter turns are exact."""
        assert unit_phase(0.25) == 1j
        assert unit_phase(-0.5) == -1
        assert frac(-0.25) == 0.75


class TestBernoulli:
    def test_first_polynomial(self):
        """B_1(lam) = lam - 1/2."""
        assert bernoulli_poly(1, 0.3) == pytest.approx(-0.2)

    def test_second_number(self):
        """B_2(0) = 1/6."""
        assert bernoulli_poly(2, 0.0) == pytest.approx(1 / 6)

    def test_reflection(self):
        """B_n(1 - lam) = (-1)^n B_n(lam)."""
        assert bernoulli_poly(3, 0.75) == pytest.approx(-bernoulli_poly(3, 0.25))
        assert bernoulli_poly(4, 0.75) == pytest.approx(bernoulli_poly(4, 0.25))

    def test_n_must_be_positive(self):
        """n = 0 is refused."""
        with pytest.raises(ValueError):
            bernoulli_poly(0, 0.5)


class TestEisenstein:
    def test_q_limit(self):
        """At tau = 20i only the constant term -B_n(lam)/n! survives."""
        m = ModularParam(20j)
        for n in range(1, 9):
            limit = -bernoulli_poly(n, LAM_03.lam) / math.factorial(n)
            assert abs(eisenstein_twisted(n, LAM_03, m) - limit) < 1e-10

    def test_classical_e2_limit(self):
        """E_2(i inf) = -1/12."""
        assert abs(eisenstein_classical(2, ModularParam(20j)) + 1 / 12) < 1e-12

    def test_classical_is_trivial_twist(self):
        """E_4 classical equals the twisted series at (1, 1)."""
        m = ModularParam(1j)
        assert abs(eisenstein_classical(4, m) - eisenstein_twisted(4, TRIVIAL_TWIST, m)) < 1e-13

    def test_classical_odd_weight_vanishes(self):
        """E_3(i) = 0."""
        assert abs(eisenstein_classical(3, ModularParam(1j))) < 1e-13

    def test_t_transformation(self):
        """E_k[theta phi, phi](tau + 1) = E_k[theta, phi](tau)."""
        tau = 0.1 + 0.8j
        shifted = TwistData(TWIST.alpha, frac(TWIST.beta - TWIST.alpha + 0.5))
        assert abs(shifted.theta - TWIST.theta * TWIST.phi) < 1e-14
        for k in (1, 2, 3):
            lhs = eisenstein_twisted(k, shifted, ModularParam(tau + 1))
            rhs = eisenstein_twisted(k, TWIST, ModularParam(tau))
            assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(rhs))

    def test_classical_s_transformation(self):
        """E_4(-1/tau) = tau^4 E_4(tau)."""
        tau = 0.3 + 0.9j
        lhs = eisenstein_classical(4, ModularParam(-1 / tau))
        rhs = tau**4 * eisenstein_classical(4, ModularParam(tau))
        assert abs(lhs - rhs) < 1e-10 * abs(rhs)


class TestWeierstrass:
    def test_simple_pole(self):
        """z P_1(z) -> 1 as z -> 0."""
        z = 1e-4
        assert abs(z * weierstrass_twisted(1, TWIST, z, ModularParam(0.9j)) - 1) < 1e-3

    def test_period_multiplier(self):
        """P_1(z + 2 pi i) = phi P_1(z)."""
        m = ModularParam(0.9j)
        z = 0.3 + 0.2j
        shifted = weierstrass_twisted(1, TWIST, z + 2j * math.pi, m)
        assert abs(shifted - TWIST.phi * weierstrass_twisted(1, TWIST, z, m)) < 1e-10

    def test_theta_quotient(self):
        """P_1 agrees with theta[alpha, beta](z) / (theta[alpha, beta](0) K(z))."""
        m = ModularParam(0.9j)
        z = 0.3 + 0.2j
        series = weierstrass_twisted(1, TWIST, z, m)
        quotient = p1_theta_quotient(z, TWIST, m)
        assert abs(series - quotient) < 1e-10 * abs(series)

    def test_laurent_expansion(self):
        """P_1(z) - [1/z - sum_{n<=4} E_n z^(n-1)] shrinks like z^4."""
        m = ModularParam(2j)
        coefficients = [eisenstein_twisted(n, LAM_03, m) for n in range(1, 5)]

        def remainder(z: complex) -> float:
            head = 1 / z - sum(e * z ** (n - 1) for n, e in enumerate(coefficients, start=1))
            return abs(weierstrass_twisted(1, LAM_03, z, m) - head)

        coarse, fine = remainder(0.1), remainder(0.05)
        assert coarse < 1e-6
        assert fine < coarse / 8

    def test_derivative_relation(self):
        """d/dz P_1 = -P_2, by a central difference."""
        m = ModularParam(0.9j)
        z = 0.4 - 0.3j
        h = 1e-5
        numeric = (
            weierstrass_twisted(1, TWIST, z + h, m) - weierstrass_twisted(1, TWIST, z - h, m)
        ) / (2 * h)
        assert abs(numeric + weierstrass_twisted(2, TWIST, z, m)) < 1e-6

    def test_outside_strip(self):
        """|Re z| >= 2 pi Im tau is refused."""
        m = ModularParam(0.5j)
        with pytest.raises(OutOfStripError):
            weierstrass_twisted(1, TWIST, 3.5, m)

    def test_lattice_point(self):
        """z = 0 is a pole."""
        with pytest.raises(SingularPointError):
            weierstrass_twisted(1, TWIST, 0, ModularParam(1j))


class TestTheta:
    def test_odd_characteristic_vanishes(self):
        """theta[1/2, 1/2](0) = 0."""
        assert abs(theta1(0, ModularParam(1j))) < 1e-14

    def test_brute_force(self):
        """Genus one theta at (0, 0), tau = i, against a direct sum."""
        value = theta_char(1, [0.0], [0.0], [0j], [[1j]])
        assert abs(value - brute_theta(0.0, 0.0, 0j, 1j)) < 1e-13

    def test_quasi_periodicity(self):
        """theta[alpha, beta](z + 2 pi i) = exp(2 pi i alpha) theta[alpha, beta](z)."""
        z = 0.3 - 0.4j
        tau = 0.2 + 1.1j
        value = theta_char(1, [0.3], [0.7], [z], [[tau]])
        shifted = theta_char(1, [0.3], [0.7], [z + 2j * math.pi], [[tau]])
        assert abs(shifted - cmath.exp(2j * math.pi * 0.3) * value) < 1e-11 * abs(value)

    def test_genus_two_factorizes(self):
        """A diagonal period matrix splits the genus two sum."""
        tau1, tau2 = 1j, 0.4 + 1.2j
        omega = np.diag([tau1, tau2])
        joint = theta_char(2, [0.3, 0.0], [0.1, 0.5], [0j, 0j], omega)
        product = theta_char(1, [0.3], [0.1], [0j], [[tau1]]) * theta_char(
            1, [0.0], [0.5], [0j], [[tau2]]
        )
        assert abs(joint - product) < 1e-12 * abs(product)

    def test_rejects_non_symmetric(self):
        """Omega must be symmetric."""
        with pytest.raises(ValueError):
            theta_char(2, [0, 0], [0, 0], [0j, 0j], [[1j, 0.1], [0.2, 1j]])


class TestEtaAndPrimeForm:
    def test_eta_at_i(self):
        """eta(i) = Gamma(1/4) / (2 pi^(3/4))."""
        expected = math.gamma(0.25) / (2 * math.pi**0.75)
        assert abs(dedekind_eta(ModularParam(1j)) - expected) < 1e-12

    def test_eta_t_shift(self):
        """eta(tau + 1) = exp(i pi / 12) eta(tau)."""
        value = dedekind_eta(ModularParam(0.8j))
        shifted = dedekind_eta(ModularParam(1 + 0.8j))
        assert abs(shifted - cmath.exp(1j * math.pi / 12) * value) < 1e-12

    def test_eta_cusp(self):
        """eta q^(-1/24) -> 1 at the cusp."""
        m = ModularParam(20j)
        assert abs(dedekind_eta(m) / m.qpow(1 / 24) - 1) < 1e-13

    def test_prime_form_normalised(self):
        """K(z) / z -> 1 as z -> 0."""
        z = 1e-4 + 1e-4j
        assert abs(k1_prime(z, ModularParam(1j)) / z - 1) < 1e-6

    def test_prime_form_odd(self):
        """K(-z) = -K(z)."""
        m = ModularParam(1j)
        z = 1 + 0.5j
        assert abs(k1_prime(-z, m) + k1_prime(z, m)) < 1e-12

    def test_prime_form_self_convergence(self):
        """Doubling the theta shell cap does not move K."""
        m = ModularParam(1j)
        z = 1 + 0.5j
        loose = k1_prime(z, m, SeriesPolicy(theta_cap=32))
        tight = k1_prime(z, m, SeriesPolicy(theta_cap=64))
        assert abs(loose - tight) < 1e-12

    def test_prime_form_singular(self):
        """Lattice points are refused."""
        with pytest.raises(SingularPointError):
            k1_prime(2j * math.pi, ModularParam(1j))
