import numpy as np
import pytest

from orucsim.channels import (
    Composition,
    GeneralRUC,
    OrucChannel,
    PauliChannel,
    ProbabilityVector,
    SparseMultiplicative,
    UnitaryChannel,
    WeylChannel,
    WeylIndex,
    adjoint_channel,
    apply_channel_exact,
    apply_channel_sampled,
    clifford_conjugated_pauli_probs,
    fidelities_from_probs,
    probs_from_fidelities,
    ptm_of,
    weyl_matrix,
)
from orucsim.dense import (
    GeneratorSet,
    channel_distance,
    exp_pauli_sum,
    haar_unitary,
    pauli_matrix,
    ptm_from_apply,
    ptm_of_unitary,
)
from orucsim.paulis import PauliString, enumerate_paulis


def P(label):
    return PauliString.from_label(label)


BENCH_P = np.array([0.6, 0.05, 0.3, 0.05])


def bench_target():
    sup = tuple(enumerate_paulis(1))
    probs = ProbabilityVector(sup, BENCH_P)
    u = exp_pauli_sum(GeneratorSet((P("X"),), np.array([0.5])), 1.0)
    v = exp_pauli_sum(GeneratorSet((P("Z"),), np.array([-0.5])), 1.0)
    return OrucChannel(u, probs, v)


def random_density(n, rng):
    g = rng.normal(size=(2**n, 2**n)) + 1j * rng.normal(size=(2**n, 2**n))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


class TestProbabilityVector:
    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            ProbabilityVector((P("I"), P("X")), np.array([1.2, -0.2]))

    def test_sum_checked(self):
        with pytest.raises(ValueError):
            ProbabilityVector((P("I"), P("X")), np.array([0.6, 0.5]))

    def test_duplicate_support_rejected(self):
        with pytest.raises(ValueError):
            ProbabilityVector((P("X"), P("X")), np.array([0.5, 0.5]))


class TestApplyExact:
    def test_trivial_oruc_is_identity(self):
        sup = tuple(enumerate_paulis(1))
        spec = OrucChannel(np.eye(2, dtype=complex), ProbabilityVector.point_mass(sup), np.eye(2, dtype=complex))
        rho = random_density(1, np.random.default_rng(0))
        assert np.allclose(apply_channel_exact(spec, rho), rho)

    def test_pure_x_channel_flips_z(self):
        sup = tuple(enumerate_paulis(1))
        spec = PauliChannel(1, ProbabilityVector.point_mass(sup, index=1))
        out = apply_channel_exact(spec, pauli_matrix(P("Z")) / 2)
        assert np.allclose(out, -pauli_matrix(P("Z")) / 2)

    def test_bench_channel_ptm_equals_composition(self):
        target = bench_target()
        u, p, v = target.parts()
        expected = ptm_of_unitary(target.unitary_out) @ np.diag(
            [1, 0.3, 0.8, 0.3]
        ) @ ptm_of_unitary(target.unitary_in)
        assert np.allclose(ptm_of(target), expected, atol=1e-12)

    def test_density_operator_preserved(self):
        rng = np.random.default_rng(1)
        target = bench_target()
        rho = random_density(1, rng)
        out = apply_channel_exact(target, rho)
        assert np.trace(out) == pytest.approx(1.0, abs=1e-12)
        assert np.max(np.abs(out - out.conj().T)) < 1e-10
        assert np.linalg.eigvalsh(out).min() > -1e-10


class TestApplySampled:
    def test_point_mass_exact_for_any_sample_count(self):
        rng = np.random.default_rng(2)
        u = haar_unitary(1, rng)
        spec = GeneralRUC(((1.0, u),))
        rho = random_density(1, rng)
        out = apply_channel_sampled(spec, rho, 3, rng)
        assert np.allclose(out, u @ rho @ u.conj().T)

    def test_error_decays_like_inverse_sqrt(self):
        rng = np.random.default_rng(3)
        target = bench_target()
        rho = random_density(1, np.random.default_rng(10))
        exact = apply_channel_exact(target, rho)

        def mean_err(samples, reps=12):
            errs = []
            for _ in range(reps):
                approx = apply_channel_sampled(target, rho, samples, rng)
                errs.append(np.linalg.norm(approx - exact))
            return np.mean(errs)

        ratio = mean_err(100) / mean_err(10_000)
        assert 5 < ratio < 20  # expect ~10 for 100x more samples

    def test_seed_reproducibility(self):
        target = bench_target()
        rho = random_density(1, np.random.default_rng(4))
        a = apply_channel_sampled(target, rho, 50, np.random.default_rng(77))
        b = apply_channel_sampled(target, rho, 50, np.random.default_rng(77))
        assert np.array_equal(a, b)

    def test_sample_count_validated(self):
        with pytest.raises(ValueError):
            apply_channel_sampled(bench_target(), np.eye(2) / 2, 0, np.random.default_rng(0))


class TestWeyl:
    def test_w00_is_identity(self):
        assert np.allclose(weyl_matrix(WeylIndex(4, 0, 0)), np.eye(4))

    def test_d2_reduces_to_paulis(self):
        assert np.allclose(weyl_matrix(WeylIndex(2, 1, 0)), np.diag([1, -1]))
        assert np.allclose(weyl_matrix(WeylIndex(2, 0, 1)), pauli_matrix(P("X")))

    def test_d4_orthogonality(self):
        mats = {
            (k, j): weyl_matrix(WeylIndex(4, k, j)) for k in range(4) for j in range(4)
        }
        for (k1, j1), w1 in mats.items():
            for (k2, j2), w2 in mats.items():
                ip = np.trace(w1.conj().T @ w2)
                expected = 4.0 if (k1, j1) == (k2, j2) else 0.0
                assert abs(ip - expected) < 1e-12

    def test_unitarity(self):
        w = weyl_matrix(WeylIndex(4, 3, 2))
        assert np.max(np.abs(w.conj().T @ w - np.eye(4))) < 1e-12

    def test_non_power_of_two_rejected(self):
        probs = ProbabilityVector(((0, 0),), np.array([1.0]))
        with pytest.raises(ValueError):
            WeylChannel(3, probs)


class TestFidelityTransforms:
    def test_point_mass_gives_unit_fidelities(self):
        sup = tuple(enumerate_paulis(1))
        f = fidelities_from_probs(ProbabilityVector.point_mass(sup))
        assert np.allclose(f, np.ones(4))

    def test_y_dominant_fidelity_anchor(self):
        sup = tuple(enumerate_paulis(1))
        f = fidelities_from_probs(ProbabilityVector(sup, BENCH_P))
        assert np.allclose(f, [1, 0.3, 0.8, 0.3], atol=1e-14)

    def test_round_trip_on_random_points(self):
        rng = np.random.default_rng(5)
        sup = tuple(enumerate_paulis(2))
        for _ in range(10):
            p = rng.dirichlet(np.ones(16))
            pv = ProbabilityVector(sup, p)
            back = probs_from_fidelities(2, fidelities_from_probs(pv))
            assert np.max(np.abs(back.probs - p)) < 1e-12

    def test_incomplete_support_rejected(self):
        pv = ProbabilityVector((P("I"), P("X")), np.array([0.5, 0.5]))
        with pytest.raises(ValueError):
            fidelities_from_probs(pv)


class TestCliffordConjugation:
    def test_identity_leaves_probs(self):
        sup = tuple(enumerate_paulis(1))
        pv = ProbabilityVector(sup, BENCH_P)
        out = clifford_conjugated_pauli_probs(pv, "I")
        assert np.allclose(out.probs, BENCH_P)

    def test_hadamard_swaps_x_and_z(self):
        sup = tuple(enumerate_paulis(1))
        pv = ProbabilityVector(sup, np.array([0.6, 0.2, 0.15, 0.05]))
        out = clifford_conjugated_pauli_probs(pv, "H")
        assert np.allclose(out.probs, [0.6, 0.05, 0.15, 0.2])

    def test_s_gate_matches_ptm_oracle(self):
        sup = tuple(enumerate_paulis(1))
        pv = ProbabilityVector(sup, BENCH_P)
        out = clifford_conjugated_pauli_probs(pv, "S")
        w = UnitaryChannel(np.array([[1, 0], [0, 1j]], dtype=complex))
        conjugated = Composition((w, PauliChannel(1, pv), w.adjoint()))
        assert np.max(np.abs(ptm_of(conjugated) - ptm_of(PauliChannel(1, out)))) < 1e-10

    def test_non_clifford_rejected(self):
        sup = tuple(enumerate_paulis(1))
        with pytest.raises(ValueError):
            clifford_conjugated_pauli_probs(ProbabilityVector(sup, BENCH_P), "Q")


class TestPtmStructure:
    def test_composition_ptm_is_matrix_product(self):
        rng = np.random.default_rng(6)
        for n in (1, 2, 3):
            sup = tuple(enumerate_paulis(n))
            pv = ProbabilityVector(sup, rng.dirichlet(np.ones(4**n)))
            parts = (
                UnitaryChannel(haar_unitary(n, rng)),
                PauliChannel(n, pv),
                UnitaryChannel(haar_unitary(n, rng)),
            )
            comp = Composition(parts)
            product = parts[0].ptm() @ parts[1].ptm() @ parts[2].ptm()
            direct = ptm_from_apply(n, comp.apply)
            assert np.max(np.abs(direct - product)) < 1e-9

    def test_pauli_channel_ptm_diagonal_with_unit_first_entry(self):
        rng = np.random.default_rng(7)
        sup = tuple(enumerate_paulis(2))
        t = ptm_of(PauliChannel(2, ProbabilityVector(sup, rng.dirichlet(np.ones(16)))))
        assert np.allclose(t, np.diag(np.diag(t)))
        assert t[0, 0] == pytest.approx(1.0)

    def test_oruc_ptm_composition_law(self):
        rng = np.random.default_rng(8)
        for n in (1, 2):
            sup = tuple(enumerate_paulis(n))
            pv = ProbabilityVector(sup, rng.dirichlet(np.ones(4**n)))
            u, v = haar_unitary(n, rng), haar_unitary(n, rng)
            spec = OrucChannel(u, pv, v)
            expected = ptm_of_unitary(u) @ PauliChannel(n, pv).ptm() @ ptm_of_unitary(v)
            assert np.max(np.abs(ptm_of(spec) - expected)) < 1e-12
            direct = ptm_from_apply(n, spec.apply)
            assert np.max(np.abs(direct - expected)) < 1e-9


class TestAdjoint:
    def test_identity_self_adjoint(self):
        c = UnitaryChannel.identity(2)
        assert np.allclose(ptm_of(adjoint_channel(c)), np.eye(16))

    def test_pauli_channel_self_adjoint(self):
        sup = tuple(enumerate_paulis(1))
        c = PauliChannel(1, ProbabilityVector(sup, BENCH_P))
        assert np.allclose(ptm_of(adjoint_channel(c)), ptm_of(c))

    def test_unitary_adjoint_is_ptm_transpose(self):
        rng = np.random.default_rng(9)
        c = UnitaryChannel(haar_unitary(2, rng))
        assert np.max(np.abs(ptm_of(adjoint_channel(c)) - ptm_of(c).T)) < 1e-12

    def test_composition_adjoint(self):
        rng = np.random.default_rng(10)
        c = Composition((UnitaryChannel(haar_unitary(1, rng)), bench_target()))
        assert np.max(np.abs(ptm_of(adjoint_channel(c)) - ptm_of(c).T)) < 1e-10


class TestSparseMultiplicative:
    def test_equals_left_to_right_composition(self):
        rng = np.random.default_rng(11)
        for n in (2, 3):
            gens = [p for p in enumerate_paulis(n, max_weight=1) if not p.is_identity()]
            factors = tuple((float(q), g) for q, g in zip(rng.uniform(0, 0.3, len(gens)), gens))
            spec = SparseMultiplicative(n, factors)
            comp = spec.as_composition()
            assert np.max(np.abs(ptm_from_apply(n, spec.apply) - ptm_from_apply(n, comp.apply))) < 1e-12

    def test_full_dephasing_factor(self):
        spec = SparseMultiplicative(1, ((0.5, P("Z")),))
        assert spec.fidelity(P("X")) == 0.0
        assert spec.fidelity(P("Z")) == 1.0

    def test_closed_form_matches_dense_diagonal(self):
        rng = np.random.default_rng(12)
        n = 2
        gens = [p for p in enumerate_paulis(n, max_weight=1) if not p.is_identity()]
        spec = SparseMultiplicative(
            n, tuple((float(q), g) for q, g in zip(rng.uniform(0, 0.4, len(gens)), gens))
        )
        t = ptm_from_apply(n, spec.apply)
        for i, a in enumerate(enumerate_paulis(n)):
            assert t[i, i] == pytest.approx(spec.fidelity(a), abs=1e-12)

    def test_probability_range_validated(self):
        with pytest.raises(ValueError):
            SparseMultiplicative(1, ((1.5, P("X")),))


class TestWeylOutsideOrucClass:
    def test_weyl_pair_ptm_is_not_oruc_factorable_exactly(self):
        # a d=4 Weyl with an odd index is not unitarily similar to any Pauli,
        # so {identity, W} cannot be written as U {sigma_i} V with two terms
        w = weyl_matrix(WeylIndex(4, 1, 1))
        eigs = np.sort(np.angle(np.linalg.eigvals(w)))
        diffs = np.diff(np.concatenate([eigs, [eigs[0] + 2 * np.pi]]))
        # Pauli spectra have at most 2 distinct phases; this W has 4
        assert np.sum(diffs > 1e-9) == 4


class TestDenseLimit:
    def test_ptm_above_limit_rejected(self):
        from orucsim.dense import DenseLimitError

        big = UnitaryChannel(np.eye(2**7, dtype=complex))
        with pytest.raises(DenseLimitError):
            ptm_of(big)

    def test_weyl_index_validated(self):
        with pytest.raises(ValueError):
            WeylIndex(4, 4, 0)

    def test_empty_composition_rejected(self):
        with pytest.raises(ValueError):
            Composition(())
