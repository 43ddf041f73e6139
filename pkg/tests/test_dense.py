import numpy as np
import pytest
from scipy.linalg import expm

from orucsim.dense import (
    GeneratorSet,
    apply_unitary,
    channel_distance,
    exp_pauli_sum,
    haar_unitary,
    pauli_matrix,
    ptm_of_unitary,
)
from orucsim.paulis import PauliString, enumerate_paulis


def P(label):
    return PauliString.from_label(label)


class TestPtmOfUnitary:
    def test_identity_channel(self):
        assert np.allclose(ptm_of_unitary(np.eye(2)), np.eye(4))

    def test_x_conjugation_negates_y_and_z(self):
        t = ptm_of_unitary(pauli_matrix(P("X")))
        assert np.allclose(t, np.diag([1, 1, -1, -1]))

    def test_orthogonality(self):
        rng = np.random.default_rng(0)
        for n in (1, 2, 3):
            t = ptm_of_unitary(haar_unitary(n, rng))
            assert np.allclose(t.T @ t, np.eye(4**n), atol=1e-9)


class TestChannelDistance:
    def test_zero_on_equal(self):
        t = ptm_of_unitary(haar_unitary(1, np.random.default_rng(3)))
        assert channel_distance(t, t) == 0.0

    def test_identity_vs_x_channel(self):
        d = channel_distance(np.eye(4), ptm_of_unitary(pauli_matrix(P("X"))))
        assert d == pytest.approx(np.sqrt(2.0), abs=1e-12)

    def test_symmetry(self):
        rng = np.random.default_rng(4)
        a = ptm_of_unitary(haar_unitary(2, rng))
        b = ptm_of_unitary(haar_unitary(2, rng))
        assert channel_distance(a, b) == channel_distance(b, a)

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            channel_distance(np.eye(4), np.eye(16))


class TestHaar:
    def test_unitarity(self):
        rng = np.random.default_rng(5)
        for n in (1, 2, 3):
            u = haar_unitary(n, rng)
            assert np.max(np.abs(u.conj().T @ u - np.eye(2**n))) < 1e-12

    def test_seed_determinism(self):
        u1 = haar_unitary(2, np.random.default_rng(9))
        u2 = haar_unitary(2, np.random.default_rng(9))
        assert np.array_equal(u1, u2)

    @pytest.mark.parametrize("n", [1, 2])
    def test_first_moment(self, n):
        # E |Tr U|^2 = 1 for the Haar measure
        rng = np.random.default_rng(11)
        vals = [abs(np.trace(haar_unitary(n, rng))) ** 2 for _ in range(10_000)]
        assert np.mean(vals) == pytest.approx(1.0, abs=0.05)


class TestExpPauliSum:
    def test_single_x_generator_matches_closed_form(self):
        u = exp_pauli_sum(GeneratorSet((P("X"),), np.array([0.5])), 1.0)
        expected = np.cos(0.5) * np.eye(2) + 1j * np.sin(0.5) * pauli_matrix(P("X"))
        assert np.allclose(u, expected, atol=1e-12)

    def test_zero_coefficients_give_identity(self):
        u = exp_pauli_sum(GeneratorSet((P("XZ"), P("YY")), np.zeros(2)), 1.0)
        assert np.allclose(u, np.eye(4))

    def test_inverse_property(self):
        rng = np.random.default_rng(6)
        gens = tuple(p for p in enumerate_paulis(2) if not p.is_identity())
        coeffs = rng.normal(size=len(gens))
        u = exp_pauli_sum(GeneratorSet(gens, coeffs), 1.0)
        v = exp_pauli_sum(GeneratorSet(gens, coeffs), -1.0)
        assert np.max(np.abs(u @ v - np.eye(4))) < 1e-12

    def test_matches_scaling_and_squaring_oracle(self):
        rng = np.random.default_rng(7)
        gens = tuple(p for p in enumerate_paulis(2) if not p.is_identity())
        for _ in range(5):
            coeffs = rng.normal(size=len(gens))
            h = sum(c * pauli_matrix(p) for c, p in zip(coeffs, gens))
            assert np.max(np.abs(
                exp_pauli_sum(GeneratorSet(gens, coeffs), 0.7) - expm(0.7j * h)
            )) < 1e-10

    def test_unitarity(self):
        rng = np.random.default_rng(8)
        gens = (P("XI"), P("ZZ"))
        u = exp_pauli_sum(GeneratorSet(gens, rng.normal(size=2)), 1.0)
        assert np.max(np.abs(u.conj().T @ u - np.eye(4))) < 1e-12

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            exp_pauli_sum(GeneratorSet((P("X"),), np.array([np.nan])), 1.0)


class TestApplyUnitary:
    def test_identity_leaves_state(self):
        rho = np.array([[0.5, 0.1], [0.1, 0.5]], dtype=complex)
        assert np.allclose(apply_unitary(np.eye(2), rho), rho)

    def test_x_flips_ground_state(self):
        rho = np.diag([1.0, 0.0]).astype(complex)
        out = apply_unitary(pauli_matrix(P("X")), rho)
        assert np.allclose(out, np.diag([0.0, 1.0]))

    def test_trace_and_hermiticity_preserved(self):
        rng = np.random.default_rng(12)
        g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        rho = g @ g.conj().T
        rho /= np.trace(rho)
        out = apply_unitary(haar_unitary(2, rng), rho)
        assert np.trace(out) == pytest.approx(1.0, abs=1e-12)
        assert np.max(np.abs(out - out.conj().T)) < 1e-12

    def test_dim_mismatch(self):
        with pytest.raises(ValueError):
            apply_unitary(np.eye(2), np.eye(4))
