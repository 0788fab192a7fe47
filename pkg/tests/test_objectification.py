import numpy as np
import pytest

from pointerlab import (
    BclSpec,
    DensityMatrix,
    GemengeComponent,
    GemengeDecomposition,
    MatrixOperator,
    ProductSpace,
    StateVector,
    apply_rule2,
    compare_states,
    gemenge_density_matrix,
    observable_witness,
    outer,
    partial_trace,
    pointer_block_coherence,
    pointer_block_projection,
    premeasure,
    shift_witness,
    tensor,
    trace_distance,
    von_neumann_entropy,
)
from helpers import random_bcl_spec, random_state

LN2 = 0.6931471805599453
INV_SQRT2 = 1.0 / np.sqrt(2.0)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)


def qubit_spec():
    return BclSpec.canonical([1.0, -1.0], [1, 1])


def bell_case():
    spec = qubit_spec()
    result = premeasure(spec, StateVector(np.array([1, 1]) / np.sqrt(2)))
    return spec, result, apply_rule2(result, spec)


class TestApplyRule2:
    def test_eigenstate_single_component(self):
        spec = qubit_spec()
        result = premeasure(spec, spec.system_eigenbasis[0][0])
        gemenge = apply_rule2(result, spec)
        assert len(gemenge.components) == 1
        component = gemenge.components[0]
        assert component.probability == pytest.approx(1.0, abs=1e-12)
        # with nothing to erase, the objectified state is the unitary projector
        space = ProductSpace((2, 2))
        rho = gemenge_density_matrix(gemenge, space)
        assert np.max(np.abs(rho.entries - outer(result.final_state).entries)) < 1e-12

    def test_bell_two_components(self):
        spec, result, gemenge = bell_case()
        assert len(gemenge.components) == 2
        for k, component in enumerate(gemenge.components):
            assert component.probability == pytest.approx(0.5, abs=1e-12)
            assert np.array_equal(
                component.pointer_state.amplitudes, spec.pointer_basis[k].amplitudes
            )

    def test_probabilities_pass_through_bitwise(self):
        rng = np.random.default_rng(41)
        spec = random_bcl_spec(rng, (1, 1, 1))
        result = premeasure(spec, random_state(rng, spec.system_dim))
        gemenge = apply_rule2(result, spec)
        assert np.array_equal(gemenge.probabilities, result.probabilities)

    def test_invariants_rejected(self):
        e0, e1 = StateVector([1, 0]), StateVector([0, 1])
        with pytest.raises(ValueError):
            GemengeDecomposition(
                (GemengeComponent(0.4, e0, e0), GemengeComponent(0.4, e1, e1))
            )
        from pointerlab import BasisNotOrthonormal

        with pytest.raises(BasisNotOrthonormal):
            GemengeDecomposition(
                (GemengeComponent(0.5, e0, e0), GemengeComponent(0.5, e0, e1))
            )


class TestGemengeDensityMatrix:
    def test_single_component_is_product_projector(self):
        u, v = StateVector([0, 1]), StateVector([1, 0])
        gemenge = GemengeDecomposition((GemengeComponent(1.0, u, v),))
        rho = gemenge_density_matrix(gemenge, ProductSpace((2, 2)))
        assert np.array_equal(rho.entries, outer(tensor(u, v)).entries)

    def test_bell_mixture_rank_and_entropy(self):
        _, _, gemenge = bell_case()
        rho = gemenge_density_matrix(gemenge, ProductSpace((2, 2)))
        eigenvalues = np.sort(rho.eigenvalues())
        assert np.allclose(eigenvalues, [0, 0, 0.5, 0.5], atol=1e-12)
        assert abs(von_neumann_entropy(rho) - LN2) < 1e-8

    def test_trace_one_for_random_cases(self):
        rng = np.random.default_rng(42)
        for _ in range(5):
            spec = random_bcl_spec(rng, (2, 1))
            result = premeasure(spec, random_state(rng, spec.system_dim))
            gemenge = apply_rule2(result, spec)
            rho = gemenge_density_matrix(
                gemenge, ProductSpace((spec.system_dim, spec.apparatus_dim))
            )
            assert abs(np.trace(rho.entries) - 1.0) < 1e-12


class TestPointerBlockCoherence:
    def test_gemenge_output_is_block_diagonal(self):
        spec, _, gemenge = bell_case()
        space = ProductSpace((2, 2))
        rho = gemenge_density_matrix(gemenge, space)
        assert pointer_block_coherence(rho, spec.pointer_basis, space) == 0.0

    def test_bell_projector_coherence(self):
        spec, result, _ = bell_case()
        space = ProductSpace((2, 2))
        value = pointer_block_coherence(outer(result.final_state), spec.pointer_basis, space)
        assert abs(value - INV_SQRT2) < 1e-10

    def test_product_state_single_block(self):
        spec = qubit_spec()
        space = ProductSpace((2, 2))
        rng = np.random.default_rng(43)
        rho = DensityMatrix(
            np.kron(outer(random_state(rng, 2)).entries, outer(spec.pointer_basis[0]).entries)
        )
        assert pointer_block_coherence(rho, spec.pointer_basis, space) == 0.0

    def test_projection_is_identity_on_objectified_states(self):
        spec, _, gemenge = bell_case()
        space = ProductSpace((2, 2))
        rho = gemenge_density_matrix(gemenge, space)
        projected = pointer_block_projection(rho, spec.pointer_basis, space)
        assert np.max(np.abs(projected.entries - rho.entries)) < 1e-12

    def test_projection_removes_bell_coherence(self):
        spec, result, gemenge = bell_case()
        space = ProductSpace((2, 2))
        projected = pointer_block_projection(
            outer(result.final_state), spec.pointer_basis, space
        )
        expected = gemenge_density_matrix(gemenge, space)
        assert np.max(np.abs(projected.entries - expected.entries)) < 1e-12


class TestCompareStates:
    def test_bell_witness_erasure(self):
        spec, result, gemenge = bell_case()
        witness = shift_witness(spec)
        assert np.array_equal(witness.entries, np.kron(SIGMA_X, SIGMA_X))
        report = compare_states(result, gemenge, spec, witness)
        assert abs(report.witness_expectation_unitary - 1.0) < 1e-10
        assert abs(report.witness_expectation_rule2) < 1e-10
        assert abs(report.pointer_block_coherence_norm - INV_SQRT2) < 1e-10
        assert report.marginal_agreement_system < 1e-10
        assert report.marginal_agreement_apparatus < 1e-10
        assert report.entropy_unitary_state < 1e-9
        assert abs(report.entropy_rule2_state - LN2) < 1e-8

    def test_observable_witness_survives(self):
        spec, result, gemenge = bell_case()
        report = compare_states(result, gemenge, spec, observable_witness(spec))
        assert abs(report.witness_expectation_unitary - report.witness_expectation_rule2) < 1e-10

    def test_eigenstate_reports_zero_everything(self):
        spec = qubit_spec()
        result = premeasure(spec, spec.system_eigenbasis[0][0])
        gemenge = apply_rule2(result, spec)
        report = compare_states(result, gemenge, spec, shift_witness(spec))
        assert report.pointer_block_coherence_norm < 1e-10
        assert report.marginal_agreement_system < 1e-10
        assert report.marginal_agreement_apparatus < 1e-10
        assert report.entropy_unitary_state < 1e-9
        assert report.entropy_rule2_state < 1e-9

    def test_rejects_non_hermitian_witness(self):
        spec, result, gemenge = bell_case()
        bad = MatrixOperator(np.triu(np.ones((4, 4))))
        with pytest.raises(ValueError):
            compare_states(result, gemenge, spec, bad)


class TestInvariantProperties:
    def test_marginal_preservation_random_cases(self):
        rng = np.random.default_rng(44)
        for _ in range(5):
            spec = random_bcl_spec(rng, (2, 1, 1))
            result = premeasure(spec, random_state(rng, spec.system_dim))
            gemenge = apply_rule2(result, spec)
            space = ProductSpace((spec.system_dim, spec.apparatus_dim))
            rho_unitary = outer(result.final_state)
            rho_rule2 = gemenge_density_matrix(gemenge, space)
            for keep in (0, 1):
                distance = trace_distance(
                    partial_trace(rho_unitary, space, keep),
                    partial_trace(rho_rule2, space, keep),
                )
                assert distance < 1e-10

    def test_apparatus_marginal_is_pointer_mixture(self):
        rng = np.random.default_rng(45)
        spec = random_bcl_spec(rng, (1, 2))
        result = premeasure(spec, random_state(rng, spec.system_dim))
        gemenge = apply_rule2(result, spec)
        space = ProductSpace((spec.system_dim, spec.apparatus_dim))
        rho_rule2 = gemenge_density_matrix(gemenge, space)
        mixture = np.zeros((spec.apparatus_dim, spec.apparatus_dim), dtype=complex)
        for k, pointer in enumerate(spec.pointer_basis):
            mixture += result.probabilities[k] * np.outer(
                pointer.amplitudes, pointer.amplitudes.conj()
            )
        distance = trace_distance(
            partial_trace(rho_rule2, space, keep=1), DensityMatrix(mixture)
        )
        assert distance < 1e-12

    def test_pointer_diagonal_witness_agreement(self):
        rng = np.random.default_rng(46)
        spec = random_bcl_spec(rng, (1, 1, 1))
        result = premeasure(spec, random_state(rng, spec.system_dim))
        gemenge = apply_rule2(result, spec)
        witness_matrix = np.zeros(
            (spec.system_dim * spec.apparatus_dim,) * 2, dtype=complex
        )
        for pointer in spec.pointer_basis:
            block = rng.normal(size=(spec.system_dim, spec.system_dim))
            block = block + block.T
            witness_matrix += np.kron(
                block, np.outer(pointer.amplitudes, pointer.amplitudes.conj())
            )
        report = compare_states(
            result, gemenge, spec, MatrixOperator(witness_matrix, hermitian=True)
        )
        assert abs(report.witness_expectation_unitary - report.witness_expectation_rule2) < 1e-10

    def test_entropy_gap(self):
        rng = np.random.default_rng(47)
        spec = random_bcl_spec(rng, (2, 2))
        result = premeasure(spec, random_state(rng, spec.system_dim))
        gemenge = apply_rule2(result, spec)
        space = ProductSpace((spec.system_dim, spec.apparatus_dim))
        report = compare_states(result, gemenge, spec, shift_witness(spec))
        p = result.probabilities[result.probabilities > 1e-15]
        assert report.entropy_unitary_state < 1e-9
        assert abs(report.entropy_rule2_state - float(-np.sum(p * np.log(p)))) < 1e-8

    def test_purity_boundary(self):
        spec = qubit_spec()
        pure_result = premeasure(spec, spec.system_eigenbasis[1][0])
        pure_gemenge = apply_rule2(pure_result, spec)
        assert len(pure_gemenge.components) == 1
        space = ProductSpace((2, 2))
        rho = gemenge_density_matrix(pure_gemenge, space)
        assert abs(np.max(rho.eigenvalues()) - 1.0) < 1e-12

        _, _, mixed_gemenge = bell_case()
        mixed_rho = gemenge_density_matrix(mixed_gemenge, space)
        assert np.max(mixed_rho.eigenvalues()) < 0.5 + 1e-12
