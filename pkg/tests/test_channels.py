"""Tests for the forward/reverse attack and depolarizing-channel models."""

import numpy as np
import pytest

from sqkd.channels import (
    DepolarizingChannel,
    ForwardAttack,
    ReverseAttack,
    apply_depolarizing,
    depolarizing_dilation,
    derive_vectors,
    induced_transit_matrix,
    random_attack,
    random_symmetric_attack,
    random_unitary,
)
from sqkd.qmath import MINUS, PLUS, DensityOperator, DomainError, InvariantViolation, ket


def unitarity_residuals(attack):
    cross = np.vdot(attack.e00, attack.e10) + np.vdot(attack.e01, attack.e11)
    col0 = np.vdot(attack.e00, attack.e00).real + np.vdot(attack.e01, attack.e01).real
    col1 = np.vdot(attack.e10, attack.e10).real + np.vdot(attack.e11, attack.e11).real
    return abs(cross), abs(col0 - 1.0), abs(col1 - 1.0)


class TestForwardAttack:
    def test_unbiased_sends_plus(self):
        np.testing.assert_allclose(ForwardAttack(0.0).state().amplitudes, PLUS.amplitudes, atol=1e-12)

    def test_biased_amplitudes(self):
        state = ForwardAttack(0.3).state()
        np.testing.assert_allclose(state.amplitudes, [np.sqrt(0.8), np.sqrt(0.2)], atol=1e-12)

    def test_boundary_rejected(self):
        for b in (0.5, -0.5, 0.7):
            with pytest.raises(InvariantViolation):
                ForwardAttack(b)

    def test_orthogonal_state(self):
        assert abs(ForwardAttack(0.0).orthogonal_state().inner(MINUS) - 1.0) < 1e-12
        np.testing.assert_allclose(
            ForwardAttack(0.3).orthogonal_state().amplitudes,
            [np.sqrt(0.2), -np.sqrt(0.8)],
            atol=1e-12,
        )

    def test_orthogonality_for_random_bias(self):
        rng = np.random.default_rng(21)
        for b in rng.uniform(-0.5, 0.5, size=100):
            fwd = ForwardAttack(float(np.clip(b, -0.499, 0.499)))
            assert abs(fwd.state().inner(fwd.orthogonal_state())) < 1e-12
            assert abs(fwd.alpha**2 + fwd.beta**2 - 1.0) < 1e-12


class TestDepolarizingChannel:
    def test_identity_at_zero(self):
        rng = np.random.default_rng(22)
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        rho = DensityOperator(np.outer(v, v.conj()) / np.vdot(v, v).real)
        np.testing.assert_allclose(DepolarizingChannel(0.0).apply(rho).matrix, rho.matrix, atol=1e-15)

    def test_full_mixing_at_one(self):
        rho = ket(0, 2).projector()
        np.testing.assert_allclose(DepolarizingChannel(1.0).apply(rho).matrix, np.eye(2) / 2, atol=1e-15)

    def test_zero_state_partial(self):
        out = apply_depolarizing(ket(0, 2).projector(), DepolarizingChannel(0.2))
        np.testing.assert_allclose(out.matrix, np.diag([0.9, 0.1]), atol=1e-15)

    def test_parameter_domain(self):
        with pytest.raises(InvariantViolation):
            DepolarizingChannel(-0.1)
        with pytest.raises(InvariantViolation):
            DepolarizingChannel(1.1)


class TestReverseAttack:
    def test_identity_from_unitary(self):
        attack = ReverseAttack.from_unitary(np.eye(4), 2)
        np.testing.assert_allclose(attack.e00, [1, 0], atol=1e-12)
        np.testing.assert_allclose(attack.e11, [1, 0], atol=1e-12)
        np.testing.assert_allclose(attack.e01, [0, 0], atol=1e-12)
        np.testing.assert_allclose(attack.e10, [0, 0], atol=1e-12)

    def test_bit_flip_from_unitary(self):
        # X on the transit qubit swaps which transit branch each column feeds:
        # both conclusive vectors move to the flipped slots.
        x = np.array([[0, 1], [1, 0]])
        attack = ReverseAttack.from_unitary(np.kron(x, np.eye(2)), 2)
        np.testing.assert_allclose(attack.e00, [0, 0], atol=1e-12)
        np.testing.assert_allclose(attack.e11, [0, 0], atol=1e-12)
        np.testing.assert_allclose(attack.e01, [1, 0], atol=1e-12)
        np.testing.assert_allclose(attack.e10, [1, 0], atol=1e-12)

    def test_random_unitary_residuals(self):
        rng = np.random.default_rng(23)
        for eve_dim in (2, 4):
            for _ in range(20):
                attack = random_attack(rng, eve_dim)
                assert max(unitarity_residuals(attack)) < 1e-10

    def test_rejects_non_unitary(self):
        with pytest.raises(DomainError):
            ReverseAttack.from_unitary(np.ones((4, 4)), 2)

    def test_rejects_inconsistent_vectors(self):
        one = np.array([1.0, 0.0])
        with pytest.raises(InvariantViolation):
            ReverseAttack(one, one, one, one)

    def test_kraus_completeness_required(self):
        with pytest.raises(DomainError):
            ReverseAttack.from_kraus([np.eye(2) * 0.5])


class TestDepolarizingDilation:
    def test_zero_noise_is_identity_probe(self):
        attack = depolarizing_dilation(0.0)
        np.testing.assert_allclose(attack.e00, [1, 0, 0, 0], atol=1e-12)
        np.testing.assert_allclose(attack.e01, np.zeros(4), atol=1e-12)

    def test_full_noise_mixes_everything(self):
        attack = depolarizing_dilation(1.0)
        for state in (ket(0, 2), ket(1, 2), PLUS):
            out = induced_transit_matrix(attack, state.projector().matrix)
            np.testing.assert_allclose(out, np.eye(2) / 2, atol=1e-12)

    def test_plus_state_against_channel_oracle(self):
        channel = DepolarizingChannel(0.3)
        attack = depolarizing_dilation(0.3)
        expected = channel.apply(PLUS.projector()).matrix
        np.testing.assert_allclose(
            induced_transit_matrix(attack, PLUS.projector().matrix), expected, atol=1e-12
        )

    def test_induced_channel_matches_on_operator_basis(self):
        # Agreement on all four matrix units pins the channel itself.
        for p in (0.0, 0.1, 0.3, 0.7, 1.0):
            attack = depolarizing_dilation(p)
            for i in range(2):
                for j in range(2):
                    unit = np.zeros((2, 2), dtype=complex)
                    unit[i, j] = 1.0
                    expected = (1 - p) * unit + (p / 2) * np.trace(unit) * np.eye(2)
                    np.testing.assert_allclose(
                        induced_transit_matrix(attack, unit), expected, atol=1e-12
                    )

    def test_parameter_domain(self):
        with pytest.raises(DomainError):
            depolarizing_dilation(-0.01)
        with pytest.raises(DomainError):
            depolarizing_dilation(1.01)


class TestDerivedVectors:
    def test_identity_attack_hand_values(self):
        v = derive_vectors(ForwardAttack(0.0), ReverseAttack.identity())
        np.testing.assert_allclose(v.g_plus, [1.0], atol=1e-12)
        np.testing.assert_allclose(v.g_minus, [0.0], atol=1e-12)
        np.testing.assert_allclose(v.l1, [1.0], atol=1e-12)
        np.testing.assert_allclose(v.l2, [1.0], atol=1e-12)

    def test_g_vectors_carry_unit_weight(self):
        rng = np.random.default_rng(24)
        for _ in range(50):
            fwd = ForwardAttack(float(rng.uniform(-0.49, 0.49)))
            v = derive_vectors(fwd, random_attack(rng, 4))
            total = np.vdot(v.g_plus, v.g_plus).real + np.vdot(v.g_minus, v.g_minus).real
            assert abs(total - 1.0) < 1e-10

    def test_l1_two_expressions_agree(self):
        rng = np.random.default_rng(25)
        for _ in range(50):
            fwd = ForwardAttack(float(rng.uniform(-0.49, 0.49)))
            attack = random_attack(rng, 2)
            v = derive_vectors(fwd, attack)
            alt = np.sqrt(2.0) * (fwd.alpha * attack.e01 + fwd.beta * attack.e11)
            np.testing.assert_allclose(v.l1, alt, atol=1e-10)

    def test_x_error_weight_in_unit_interval(self):
        rng = np.random.default_rng(26)
        for _ in range(50):
            fwd = ForwardAttack(float(rng.uniform(-0.49, 0.49)))
            v = derive_vectors(fwd, random_attack(rng, 4))
            e_x = np.vdot(v.g_minus, v.g_minus).real
            assert -1e-12 <= e_x <= 1.0 + 1e-12

    def test_hadamard_basis_vectors(self):
        rng = np.random.default_rng(27)
        attack = random_attack(rng, 2)
        v = derive_vectors(ForwardAttack(0.1), attack)
        np.testing.assert_allclose(
            v.f_plus0, 0.5 * (attack.e00 + attack.e01 + attack.e10 + attack.e11), atol=1e-12
        )
        np.testing.assert_allclose(
            v.f_minus1, 0.5 * (attack.e00 - attack.e01 - attack.e10 + attack.e11), atol=1e-12
        )


class TestRandomSymmetricAttack:
    def test_balances_disturbance_weights(self):
        rng = np.random.default_rng(28)
        for eve_dim in (2, 4):
            for _ in range(10):
                attack = random_symmetric_attack(rng, eve_dim)
                gap = abs(
                    np.vdot(attack.e10, attack.e10).real - np.vdot(attack.e01, attack.e01).real
                )
                assert gap < 1e-6
                assert attack.is_symmetric
                assert max(unitarity_residuals(attack)) < 1e-9

    def test_haar_helper_is_unitary(self):
        rng = np.random.default_rng(29)
        u = random_unitary(rng, 6)
        np.testing.assert_allclose(u.conj().T @ u, np.eye(6), atol=1e-10)
