"""Deterministic objectification of a premeasurement outcome.

The entangled post-coupling state carries correlations between every system
observable and the apparatus.  Objectification keeps only the classical
correlations between conditional system states and pointer states, producing
a proper mixture (gemenge) whose decomposition is physically meaningful and
therefore stored explicitly rather than only as a density matrix.  The
diagnostics in this module quantify exactly what the non-unitary step
preserves (both marginals, every pointer-diagonal observable) and what it
erases (pointer-off-diagonal coherence, witnessed by observables that do not
commute with the measured one).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BasisNotOrthonormal, DimensionMismatch
from .hilbert import (
    DensityMatrix,
    MatrixOperator,
    ProductSpace,
    StateVector,
    outer,
    partial_trace,
    trace_distance,
    von_neumann_entropy,
)
from .premeasurement import BclSpec, PremeasurementResult
from .tolerances import INVARIANT_TOL, PROBABILITY_FLOOR

__all__ = [
    "GemengeComponent",
    "GemengeDecomposition",
    "CorrelationReport",
    "apply_rule2",
    "gemenge_density_matrix",
    "pointer_block_coherence",
    "pointer_block_projection",
    "compare_states",
    "shift_witness",
    "observable_witness",
]


@dataclass(frozen=True, eq=False)
class GemengeComponent:
    """One branch of a proper mixture: weight, system state, pointer state."""

    probability: float
    system_state: StateVector
    pointer_state: StateVector


@dataclass(frozen=True, eq=False)
class GemengeDecomposition:
    """Proper mixture over orthonormal system and pointer families."""

    components: tuple[GemengeComponent, ...]

    def __post_init__(self) -> None:
        components = tuple(self.components)
        if not components:
            raise ValueError("a gemenge needs at least one component")
        if any(c.probability < 0.0 for c in components):
            raise ValueError("component probabilities must be nonnegative")
        total_dev = abs(sum(c.probability for c in components) - 1.0)
        if total_dev > INVARIANT_TOL:
            raise ValueError(f"component probabilities sum off by {total_dev:.3e}")
        for label, family in (
            ("pointer", [c.pointer_state for c in components]),
            ("system", [c.system_state for c in components]),
        ):
            columns = np.column_stack([s.amplitudes for s in family])
            gram = columns.conj().T @ columns
            dev = float(np.max(np.abs(gram - np.eye(len(family)))))
            if dev > INVARIANT_TOL:
                raise BasisNotOrthonormal(
                    f"{label} states of the gemenge are not orthonormal; deviation {dev:.3e}"
                )
        object.__setattr__(self, "components", components)

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([c.probability for c in self.components])


def apply_rule2(result: PremeasurementResult, spec: BclSpec) -> GemengeDecomposition:
    """Objectify a premeasurement outcome.

    Drops every correlation except the pairing of conditional system states
    with pointer states; probabilities pass through unchanged.  The map is
    non-unitary but deterministic.  Sectors below the probability floor are
    omitted.
    """
    components = []
    for k, conditional in enumerate(result.conditional_states):
        p = float(result.probabilities[k])
        if conditional is None or p < PROBABILITY_FLOOR:
            continue
        components.append(
            GemengeComponent(
                probability=p,
                system_state=conditional,
                pointer_state=spec.pointer_basis[k],
            )
        )
    return GemengeDecomposition(tuple(components))


def gemenge_density_matrix(g: GemengeDecomposition, space: ProductSpace) -> DensityMatrix:
    """Mixed-state matrix ``sum_k p_k |Phi_k><Phi_k| (x) |psi_k><psi_k|``."""
    if len(space.factor_dims) != 2:
        raise ValueError("gemenge states live on bipartite spaces")
    d_system, d_pointer = space.factor_dims
    matrix = np.zeros((space.dim, space.dim), dtype=complex)
    for component in g.components:
        if component.system_state.dim != d_system or component.pointer_state.dim != d_pointer:
            raise DimensionMismatch("component dimensions do not match the product space")
        sys_proj = np.outer(
            component.system_state.amplitudes, component.system_state.amplitudes.conj()
        )
        ptr_proj = np.outer(
            component.pointer_state.amplitudes, component.pointer_state.amplitudes.conj()
        )
        matrix += component.probability * np.kron(sys_proj, ptr_proj)
    return DensityMatrix(matrix)


def _pointer_projectors(
    pointer_basis: tuple[StateVector, ...] | list[StateVector], space: ProductSpace
) -> list[np.ndarray]:
    d_system, d_pointer = space.factor_dims
    columns = np.column_stack([p.amplitudes for p in pointer_basis])
    gram = columns.conj().T @ columns
    dev = float(np.max(np.abs(gram - np.eye(len(pointer_basis)))))
    if dev > INVARIANT_TOL:
        raise BasisNotOrthonormal(f"pointer basis deviates from orthonormal by {dev:.3e}")
    identity = np.eye(d_system, dtype=complex)
    projectors = []
    for pointer in pointer_basis:
        if pointer.dim != d_pointer:
            raise DimensionMismatch("pointer states do not match the apparatus factor")
        projectors.append(
            np.kron(identity, np.outer(pointer.amplitudes, pointer.amplitudes.conj()))
        )
    return projectors


def pointer_block_coherence(
    rho: DensityMatrix,
    pointer_basis: tuple[StateVector, ...] | list[StateVector],
    space: ProductSpace,
) -> float:
    """Frobenius norm of the pointer-off-diagonal blocks of a bipartite state.

    Zero exactly when the state is block-diagonal across pointer sectors,
    which is what objectification enforces.
    """
    if rho.dim != space.dim:
        raise DimensionMismatch(f"state dim {rho.dim} does not match space dim {space.dim}")
    projectors = _pointer_projectors(pointer_basis, space)
    off_diagonal = np.zeros_like(rho.entries)
    for k, left in enumerate(projectors):
        for j, right in enumerate(projectors):
            if k != j:
                off_diagonal = off_diagonal + left @ rho.entries @ right
    return float(np.linalg.norm(off_diagonal))


def pointer_block_projection(
    rho: DensityMatrix,
    pointer_basis: tuple[StateVector, ...] | list[StateVector],
    space: ProductSpace,
) -> DensityMatrix:
    """Keep only the pointer-diagonal blocks ``sum_k Pi_k rho Pi_k``.

    Acts as the identity on already objectified states.  The input must be
    supported on the pointer sectors, otherwise the projected matrix loses
    trace and is rejected.
    """
    if rho.dim != space.dim:
        raise DimensionMismatch(f"state dim {rho.dim} does not match space dim {space.dim}")
    projectors = _pointer_projectors(pointer_basis, space)
    diagonal = np.zeros_like(rho.entries)
    for projector in projectors:
        diagonal = diagonal + projector @ rho.entries @ projector
    return DensityMatrix(diagonal)


@dataclass(frozen=True, eq=False)
class CorrelationReport:
    """Preserved-versus-erased correlation diagnostics (dimensionless, nats)."""

    pointer_block_coherence_norm: float
    marginal_agreement_system: float
    marginal_agreement_apparatus: float
    witness_expectation_unitary: float
    witness_expectation_rule2: float
    entropy_unitary_state: float
    entropy_rule2_state: float

    def __post_init__(self) -> None:
        for name in (
            "pointer_block_coherence_norm",
            "marginal_agreement_system",
            "marginal_agreement_apparatus",
            "entropy_unitary_state",
            "entropy_rule2_state",
        ):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be nonnegative")


def compare_states(
    result: PremeasurementResult,
    g: GemengeDecomposition,
    spec: BclSpec,
    witness: MatrixOperator,
) -> CorrelationReport:
    """Diagnostics contrasting the unitary outcome with its objectified mixture.

    Both marginals agree between the two states; the coherence norm and the
    witness expectations expose the correlations that only the entangled
    state carries.  The witness must be Hermitian on the product space.
    """
    space = ProductSpace((spec.system_dim, spec.apparatus_dim))
    if witness.dim != space.dim:
        raise DimensionMismatch(
            f"witness dim {witness.dim} does not match product dim {space.dim}"
        )
    witness_dev = float(np.max(np.abs(witness.entries - witness.entries.conj().T)))
    if witness_dev > INVARIANT_TOL:
        raise ValueError(f"witness is not Hermitian; deviation {witness_dev:.3e}")

    rho_unitary = outer(result.final_state)
    rho_rule2 = gemenge_density_matrix(g, space)
    return CorrelationReport(
        pointer_block_coherence_norm=pointer_block_coherence(
            rho_unitary, spec.pointer_basis, space
        ),
        marginal_agreement_system=trace_distance(
            partial_trace(rho_unitary, space, keep=0),
            partial_trace(rho_rule2, space, keep=0),
        ),
        marginal_agreement_apparatus=trace_distance(
            partial_trace(rho_unitary, space, keep=1),
            partial_trace(rho_rule2, space, keep=1),
        ),
        witness_expectation_unitary=float(
            np.real(np.trace(rho_unitary.entries @ witness.entries))
        ),
        witness_expectation_rule2=float(
            np.real(np.trace(rho_rule2.entries @ witness.entries))
        ),
        entropy_unitary_state=von_neumann_entropy(rho_unitary),
        entropy_rule2_state=von_neumann_entropy(rho_rule2),
    )


def _adjacent_coupling(vectors: list[np.ndarray], dim: int) -> np.ndarray:
    matrix = np.zeros((dim, dim), dtype=complex)
    for first, second in zip(vectors, vectors[1:]):
        matrix += np.outer(first, second.conj()) + np.outer(second, first.conj())
    return matrix


def shift_witness(spec: BclSpec) -> MatrixOperator:
    """Default erased-correlation witness.

    Couples adjacent eigenbasis vectors on the system and adjacent pointer
    states on the apparatus; for a qubit measured against a qubit pointer
    this is exactly ``sigma_x (x) sigma_x``, which commutes with neither the
    measured observable nor the pointer projectors.
    """
    flat_basis = [v.amplitudes for sector in spec.system_eigenbasis for v in sector]
    system_part = _adjacent_coupling(flat_basis, spec.system_dim)
    pointer_part = _adjacent_coupling(
        [p.amplitudes for p in spec.pointer_basis], spec.apparatus_dim
    )
    return MatrixOperator(np.kron(system_part, pointer_part), hermitian=True)


def observable_witness(spec: BclSpec) -> MatrixOperator:
    """Witness ``O (x) I``: diagnostics that survive objectification untouched."""
    identity = np.eye(spec.apparatus_dim, dtype=complex)
    return MatrixOperator(
        np.kron(spec.system_observable().entries, identity), hermitian=True
    )
