"""Measurement-chain simulator: exchange symmetrization of identical
particles, domain-local observables, unitary pointer premeasurement, and the
deterministic objectification map, with diagnostics for the correlations the
non-unitary step erases."""

from .errors import (
    BasisNotOrthonormal,
    CapacityExceeded,
    CompletionFailure,
    DimensionMismatch,
    GridMismatch,
    MeasurementConditionViolated,
    NullState,
    ParseError,
    PointerlabError,
    RunStageError,
    ScenarioError,
    SpecInvalid,
    SupportViolation,
    UnresolvableWidth,
    ValidationError,
)
from .hilbert import (
    DensityMatrix,
    MatrixOperator,
    ProductSpace,
    StateVector,
    coefficients_of,
    outer,
    partial_trace,
    tensor,
    tensor_op,
    trace_distance,
    von_neumann_entropy,
)
from .lattice import (
    Domain,
    ExchangeSymmetry,
    KernelOperator,
    LatticeGrid,
    LatticeWavefunction,
    TwoParticleKernel,
    TwoParticleWavefunction,
    collective_observable,
    delta_kernel,
    dlocal_agreement_check,
    dlocal_residual,
    exchange_swap,
    expectation_single,
    expectation_two_particle,
    gaussian_packet,
    is_d_local,
    localize,
    position_kernel,
    support,
    symmetrization_factor,
    symmetrize,
    symmetrized_observable,
)
from .objectification import (
    CorrelationReport,
    GemengeComponent,
    GemengeDecomposition,
    apply_rule2,
    compare_states,
    gemenge_density_matrix,
    observable_witness,
    pointer_block_coherence,
    pointer_block_projection,
    shift_witness,
)
from .premeasurement import (
    BclSpec,
    PremeasurementResult,
    ValidationReport,
    apparatus_marginal,
    build_premeasurement_unitary,
    premeasure,
    validate_spec,
)
from .runner import RunReport, Verdict, emit_report, render_report, run_scenario
from .scenario import ScenarioConfig, load_scenario

__version__ = "0.1.0"
