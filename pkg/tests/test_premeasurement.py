import numpy as np
import pytest

from pointerlab import (
    BclSpec,
    DimensionMismatch,
    MeasurementConditionViolated,
    ProductSpace,
    SpecInvalid,
    StateVector,
    apparatus_marginal,
    build_premeasurement_unitary,
    outer,
    partial_trace,
    premeasure,
    trace_distance,
    validate_spec,
    von_neumann_entropy,
)
from helpers import random_bcl_spec, random_state

INV_SQRT2 = 1.0 / np.sqrt(2.0)


def qubit_spec():
    return BclSpec.canonical([1.0, -1.0], [1, 1])


class TestBclSpecInvariants:
    def test_canonical_shape(self):
        spec = qubit_spec()
        assert spec.system_dim == 2 and spec.apparatus_dim == 2
        assert spec.degeneracies == (1, 1)

    def test_rejects_duplicate_eigenvalues(self):
        with pytest.raises(SpecInvalid):
            BclSpec.canonical([1.0, 1.0], [1, 1])

    def test_rejects_incomplete_eigenbasis(self):
        e0, e1 = StateVector([1, 0, 0]), StateVector([0, 1, 0])
        with pytest.raises(SpecInvalid):
            BclSpec(
                eigenvalues=(1.0, -1.0),
                system_eigenbasis=((e0,), (e1,)),
                pointer_basis=(StateVector([1, 0]), StateVector([0, 1])),
                ready_state=StateVector([1, 0]),
                transfer_family=((e0,), (e1,)),
            )

    def test_rejects_non_orthonormal_eigenbasis(self):
        e0 = StateVector([1, 0])
        with pytest.raises(SpecInvalid):
            BclSpec(
                eigenvalues=(1.0, -1.0),
                system_eigenbasis=((e0,), (e0,)),
                pointer_basis=(StateVector([1, 0]), StateVector([0, 1])),
                ready_state=StateVector([1, 0]),
                transfer_family=((e0,), (e0,)),
            )

    def test_rejects_wrong_pointer_count(self):
        e0, e1 = StateVector([1, 0]), StateVector([0, 1])
        with pytest.raises(SpecInvalid):
            BclSpec(
                eigenvalues=(1.0, -1.0),
                system_eigenbasis=((e0,), (e1,)),
                pointer_basis=(StateVector([1, 0]),),
                ready_state=StateVector([1, 0]),
                transfer_family=((e0,), (e1,)),
            )

    def test_rejects_non_orthonormal_transfer_row(self):
        basis = [StateVector.basis_state(3, i) for i in range(3)]
        bad_row = (basis[0], basis[0])
        with pytest.raises(SpecInvalid):
            BclSpec(
                eigenvalues=(1.0, -1.0),
                system_eigenbasis=((basis[0], basis[1]), (basis[2],)),
                pointer_basis=(StateVector([1, 0]), StateVector([0, 1])),
                ready_state=StateVector([1, 0]),
                transfer_family=(bad_row, (basis[2],)),
            )

    def test_system_observable_reconstruction(self):
        rng = np.random.default_rng(21)
        spec = random_bcl_spec(rng, (2, 1))
        observable = spec.system_observable()
        for o, sector in zip(spec.eigenvalues, spec.system_eigenbasis):
            for vec in sector:
                assert np.max(np.abs(observable.entries @ vec.amplitudes - o * vec.amplitudes)) < 1e-10


class TestValidateSpec:
    def test_default_transfer_satisfies_condition(self):
        report = validate_spec(qubit_spec())
        assert report.measurement_condition
        assert report.measurement_condition_residual < 1e-12
        assert all(r < 1e-12 for r in report.residuals.values())

    def test_cross_sector_duplicate_fails_condition(self):
        e0, e1 = StateVector([1, 0]), StateVector([0, 1])
        shared = StateVector([1, 0])
        spec = BclSpec(
            eigenvalues=(1.0, -1.0),
            system_eigenbasis=((e0,), (e1,)),
            pointer_basis=(StateVector([1, 0]), StateVector([0, 1])),
            ready_state=StateVector([1, 0]),
            transfer_family=((shared,), (shared,)),
        )
        report = validate_spec(spec)
        assert report.residuals["transfer_row_orthonormality"] < 1e-12
        assert not report.measurement_condition
        assert report.measurement_condition_residual == pytest.approx(1.0)

    def test_sector_unitaries_preserve_condition(self):
        rng = np.random.default_rng(22)
        for _ in range(5):
            spec = random_bcl_spec(rng, (2, 2, 1), transfer="sector_unitary")
            assert validate_spec(spec).measurement_condition


class TestBuildUnitary:
    def test_qubit_columns(self):
        spec = qubit_spec()
        unitary = build_premeasurement_unitary(spec).entries
        ready = spec.ready_state.amplitudes
        for k in range(2):
            eigvec = spec.system_eigenbasis[k][0].amplitudes
            pointer = spec.pointer_basis[k].amplitudes
            image = unitary @ np.kron(eigvec, ready)
            assert np.max(np.abs(image - np.kron(eigvec, pointer))) < 1e-10

    def test_random_spec_unitarity_and_extension(self):
        rng = np.random.default_rng(23)
        spec = random_bcl_spec(rng, (2, 1, 1))
        unitary = build_premeasurement_unitary(spec).entries
        dim = spec.system_dim * spec.apparatus_dim
        assert np.max(np.abs(unitary.conj().T @ unitary - np.eye(dim))) < 1e-10
        assert np.max(np.abs(unitary @ unitary.conj().T - np.eye(dim))) < 1e-10
        for k, sector in enumerate(spec.system_eigenbasis):
            for l, eigvec in enumerate(sector):
                image = unitary @ np.kron(eigvec.amplitudes, spec.ready_state.amplitudes)
                expected = np.kron(
                    spec.transfer_family[k][l].amplitudes, spec.pointer_basis[k].amplitudes
                )
                assert np.max(np.abs(image - expected)) < 1e-10

    def test_condition_violation_refused(self):
        e0, e1 = StateVector([1, 0]), StateVector([0, 1])
        shared = StateVector([1, 0])
        spec = BclSpec(
            eigenvalues=(1.0, -1.0),
            system_eigenbasis=((e0,), (e1,)),
            pointer_basis=(e0, e1),
            ready_state=e0,
            transfer_family=((shared,), (shared,)),
        )
        with pytest.raises(MeasurementConditionViolated):
            build_premeasurement_unitary(spec)


class TestPremeasure:
    def test_eigenstate_input(self):
        spec = qubit_spec()
        result = premeasure(spec, spec.system_eigenbasis[0][0])
        assert np.allclose(result.probabilities, [1.0, 0.0], atol=1e-12)
        assert result.conditional_states[1] is None
        expected = np.kron(
            spec.transfer_family[0][0].amplitudes, spec.pointer_basis[0].amplitudes
        )
        assert np.max(np.abs(result.final_state.amplitudes - expected)) < 1e-10

    def test_uniform_superposition_gives_bell_pair(self):
        spec = qubit_spec()
        phi = StateVector(np.array([1, 1]) / np.sqrt(2))
        result = premeasure(spec, phi)
        assert np.allclose(result.probabilities, [0.5, 0.5], atol=1e-12)
        bell = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
        assert np.max(np.abs(result.final_state.amplitudes - bell)) < 1e-12

    def test_degenerate_sector(self):
        rng = np.random.default_rng(24)
        spec = random_bcl_spec(rng, (2, 1))
        sector = spec.system_eigenbasis[0]
        phi = StateVector.normalized(sector[0].amplitudes + sector[1].amplitudes)
        result = premeasure(spec, phi)
        assert abs(result.probabilities[0] - 1.0) < 1e-12
        expected = StateVector.normalized(
            spec.transfer_family[0][0].amplitudes + spec.transfer_family[0][1].amplitudes
        )
        overlap = abs(np.vdot(result.conditional_states[0].amplitudes, expected.amplitudes))
        assert abs(overlap - 1.0) < 1e-12

    def test_probability_law(self):
        rng = np.random.default_rng(25)
        spec = random_bcl_spec(rng, (1, 2, 1))
        for _ in range(50):
            phi = random_state(rng, spec.system_dim)
            result = premeasure(spec, phi)
            assert abs(float(np.sum(result.probabilities)) - 1.0) < 1e-10
            for k, sector in enumerate(spec.system_eigenbasis):
                mass = sum(
                    abs(np.vdot(v.amplitudes, phi.amplitudes)) ** 2 for v in sector
                )
                assert abs(result.probabilities[k] - mass) < 1e-12

    def test_conditional_states_orthonormal_and_entropy(self):
        rng = np.random.default_rng(26)
        spec = random_bcl_spec(rng, (2, 1, 1))
        phi = random_state(rng, spec.system_dim)
        result = premeasure(spec, phi)
        kept = [s for s in result.conditional_states if s is not None]
        for i, a in enumerate(kept):
            for j, b in enumerate(kept):
                expected = 1.0 if i == j else 0.0
                assert abs(a.inner(b) - expected) < 1e-10
        space = ProductSpace((spec.system_dim, spec.apparatus_dim))
        system_marginal = partial_trace(outer(result.final_state), space, keep=0)
        p = result.probabilities[result.probabilities > 1e-15]
        expected_entropy = float(-np.sum(p * np.log(p)))
        assert abs(von_neumann_entropy(system_marginal) - expected_entropy) < 1e-8

    def test_deterministic(self):
        rng = np.random.default_rng(27)
        spec = random_bcl_spec(rng, (2, 2))
        phi = random_state(rng, spec.system_dim)
        first = premeasure(spec, phi)
        second = premeasure(spec, phi)
        assert np.array_equal(first.probabilities, second.probabilities)
        assert np.array_equal(first.final_state.amplitudes, second.final_state.amplitudes)
        assert np.array_equal(first.unitary.entries, second.unitary.entries)

    def test_completion_seed_independence(self):
        rng = np.random.default_rng(28)
        spec = random_bcl_spec(rng, (2, 1))
        phi = random_state(rng, spec.system_dim)
        base = premeasure(spec, phi, completion_seed=0)
        other = premeasure(spec, phi, completion_seed=5)
        assert np.max(np.abs(base.probabilities - other.probabilities)) < 1e-10
        assert np.max(np.abs(base.final_state.amplitudes - other.final_state.amplitudes)) < 1e-10
        for a, b in zip(base.conditional_states, other.conditional_states):
            if a is None:
                assert b is None
            else:
                assert np.max(np.abs(a.amplitudes - b.amplitudes)) < 1e-10

    def test_wrong_dimension_rejected(self):
        with pytest.raises(DimensionMismatch):
            premeasure(qubit_spec(), StateVector([1, 0, 0]))

    def test_final_state_reconstruction(self):
        rng = np.random.default_rng(31)
        spec = random_bcl_spec(rng, (2, 1, 1))
        result = premeasure(spec, random_state(rng, spec.system_dim))
        rebuilt = np.zeros(spec.system_dim * spec.apparatus_dim, dtype=complex)
        for k, conditional in enumerate(result.conditional_states):
            if conditional is None:
                continue
            rebuilt += np.sqrt(result.probabilities[k]) * np.kron(
                conditional.amplitudes, spec.pointer_basis[k].amplitudes
            )
        assert np.linalg.norm(result.final_state.amplitudes - rebuilt) < 1e-10

    def test_tiny_negative_probability_clipped(self):
        spec = qubit_spec()
        template = premeasure(spec, spec.system_eigenbasis[0][0])
        from pointerlab import PremeasurementResult

        clipped = PremeasurementResult(
            unitary=template.unitary,
            final_state=template.final_state,
            probabilities=np.array([1.0, -1e-13]),
            conditional_states=template.conditional_states,
        )
        assert clipped.probabilities[1] == 0.0


class TestApparatusMarginal:
    def test_bell_case(self):
        spec = qubit_spec()
        result = premeasure(spec, StateVector(np.array([1, 1]) / np.sqrt(2)))
        marginal = apparatus_marginal(result, spec)
        assert np.max(np.abs(marginal.entries - np.eye(2) / 2)) < 1e-12

    def test_eigenstate_case(self):
        spec = qubit_spec()
        result = premeasure(spec, spec.system_eigenbasis[0][0])
        expected = outer(spec.pointer_basis[0])
        assert np.max(np.abs(apparatus_marginal(result, spec).entries - expected.entries)) < 1e-12

    def test_spectrum_matches_probabilities(self):
        rng = np.random.default_rng(29)
        spec = random_bcl_spec(rng, (1, 1, 1))
        phi = random_state(rng, spec.system_dim)
        result = premeasure(spec, phi)
        marginal = apparatus_marginal(result, spec)
        eigenvalues = np.sort(marginal.eigenvalues())
        expected = np.sort(result.probabilities)
        assert np.max(np.abs(eigenvalues - expected)) < 1e-10

    def test_matches_pointer_mixture(self):
        rng = np.random.default_rng(30)
        spec = random_bcl_spec(rng, (2, 1), apparatus_dim=3)
        phi = random_state(rng, spec.system_dim)
        result = premeasure(spec, phi)
        mixture = np.zeros((3, 3), dtype=complex)
        for k, pointer in enumerate(spec.pointer_basis):
            mixture += result.probabilities[k] * np.outer(
                pointer.amplitudes, pointer.amplitudes.conj()
            )
        from pointerlab import DensityMatrix

        assert trace_distance(apparatus_marginal(result, spec), DensityMatrix(mixture)) < 1e-10
