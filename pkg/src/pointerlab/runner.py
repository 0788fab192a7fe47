"""Scenario execution and structured reports.

A report separates computed values from verdicts so downstream tooling can
re-judge the same numbers under different tolerances.  Every verdict carries
its residual and the tolerance that judged it.  The JSON payload section is
deterministic: identical configs produce byte-identical payloads, with the
wall-clock duration kept in a separate ``meta`` section.  Floats are written
with 17 significant digits so every value round-trips exactly.
"""

from __future__ import annotations

import csv
import io
import json
import time
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import PointerlabError, RunStageError
from .hilbert import (
    DensityMatrix,
    ProductSpace,
    StateVector,
    partial_trace,
    trace_distance,
)
from .lattice import (
    Domain,
    ExchangeSymmetry,
    dlocal_agreement_check,
    dlocal_residual,
    expectation_single,
    expectation_two_particle,
    gaussian_packet,
    localize,
    position_kernel,
    symmetrization_factor,
    symmetrize,
    symmetrized_observable,
)
from .objectification import (
    apply_rule2,
    compare_states,
    gemenge_density_matrix,
    observable_witness,
    pointer_block_coherence,
    shift_witness,
)
from .premeasurement import BclSpec, apparatus_marginal, premeasure
from .scenario import ScenarioConfig

__all__ = [
    "Verdict",
    "RunReport",
    "run_scenario",
    "render_report",
    "emit_report",
]

INV_SQRT2 = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class Verdict:
    """One judged invariant: residual compared against a tolerance."""

    name: str
    residual: float
    tolerance: float
    passed: bool


@dataclass(frozen=True, eq=False)
class RunReport:
    """Scenario echo, computed scalars, verdicts and timing."""

    scenario: dict
    values: dict[str, float]
    verdicts: tuple[Verdict, ...]
    duration_seconds: float

    @property
    def all_passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def payload_dict(self) -> dict:
        """Deterministic report section (everything except timing)."""
        return {
            "scenario": self.scenario,
            "values": dict(self.values),
            "verdicts": [
                {
                    "name": v.name,
                    "residual": v.residual,
                    "tolerance": v.tolerance,
                    "passed": v.passed,
                }
                for v in self.verdicts
            ],
        }

    def payload_text(self) -> str:
        return _json_text(self.payload_dict())

    def to_json_text(self) -> str:
        document = {"payload": self.payload_dict(), "meta": {"duration_seconds": self.duration_seconds}}
        return _json_text(document) + "\n"

    def to_csv_text(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["metric", "value", "tolerance", "verdict"])
        for key, value in self.values.items():
            writer.writerow([key, _float_repr(value), "", ""])
        for verdict in self.verdicts:
            writer.writerow(
                [
                    verdict.name,
                    _float_repr(verdict.residual),
                    _float_repr(verdict.tolerance),
                    "pass" if verdict.passed else "fail",
                ]
            )
        return buffer.getvalue()


def _float_repr(value: float) -> str:
    number = float(value)
    if not np.isfinite(number):
        raise ValueError(f"cannot serialize non-finite value {number!r}")
    text = format(number, ".17g")
    if not any(ch in text for ch in ".eE"):
        text += ".0"
    return text


def _json_text(value, indent: int = 0) -> str:
    # Hand-rolled writer: the stdlib encoder cannot be told to format floats
    # with a fixed significant-digit count.
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(value, dict):
        if not value:
            return "{}"
        parts = [
            f"{inner}{json.dumps(str(key))}: {_json_text(entry, indent + 1)}"
            for key, entry in value.items()
        ]
        return "{\n" + ",\n".join(parts) + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        parts = [f"{inner}{_json_text(entry, indent + 1)}" for entry in value]
        return "[\n" + ",\n".join(parts) + "\n" + pad + "]"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _float_repr(float(value))
    if isinstance(value, str):
        return json.dumps(value)
    if value is None:
        return "null"
    raise TypeError(f"cannot serialize {type(value)!r}")


@contextmanager
def _stage(name: str):
    try:
        yield
    except PointerlabError as exc:
        raise RunStageError(f"{name}: {exc}") from exc


def _verdict(name: str, residual: float, tolerance: float) -> Verdict:
    return Verdict(
        name=name, residual=float(residual), tolerance=float(tolerance),
        passed=float(residual) <= float(tolerance),
    )


def _bool_verdict(name: str, passed: bool, residual: float, tolerance: float) -> Verdict:
    return Verdict(
        name=name, residual=float(residual), tolerance=float(tolerance), passed=bool(passed)
    )


def _run_symmetrization(config: ScenarioConfig) -> tuple[dict, list[Verdict]]:
    tol = config.tolerances
    with _stage("lattice setup"):
        grid = config.grid.build()
        psi = gaussian_packet(grid, config.packets[0].center, config.packets[0].width)
        phi = gaussian_packet(grid, config.packets[1].center, config.packets[1].width)
        kernel = position_kernel(grid)
        pair_kernel = symmetrized_observable(kernel)
    with _stage("symmetrization"):
        single_first = expectation_single(kernel, psi).real
        single_second = expectation_single(kernel, phi).real
        overlap = abs(psi.inner(phi))
        nu = {}
        two_particle = {}
        for sym in (ExchangeSymmetry.BOSON, ExchangeSymmetry.FERMION):
            nu[sym] = symmetrization_factor(psi, phi, sym)
            two_particle[sym] = expectation_two_particle(
                pair_kernel, symmetrize(psi, phi, sym)
            ).real

    values = {
        "single_particle_position_first": single_first,
        "single_particle_position_second": single_second,
        "two_particle_position_boson": two_particle[ExchangeSymmetry.BOSON],
        "two_particle_position_fermion": two_particle[ExchangeSymmetry.FERMION],
        "normalization_factor_boson": nu[ExchangeSymmetry.BOSON],
        "normalization_factor_fermion": nu[ExchangeSymmetry.FERMION],
        "packet_overlap_abs": overlap,
    }
    expected_sum = single_first + single_second
    verdicts = [
        _verdict(
            "discrepancy_boson",
            abs(two_particle[ExchangeSymmetry.BOSON] - expected_sum),
            tol["discrepancy"],
        ),
        _verdict(
            "discrepancy_fermion",
            abs(two_particle[ExchangeSymmetry.FERMION] - expected_sum),
            tol["discrepancy"],
        ),
        _verdict(
            "exchange_sign_agreement",
            abs(two_particle[ExchangeSymmetry.BOSON] - two_particle[ExchangeSymmetry.FERMION]),
            tol["exchange_sign_agreement"],
        ),
    ]
    if overlap <= 1e-4:  # nu -> 1/sqrt(2) only holds for near-orthogonal packets
        verdicts.append(
            _verdict(
                "normalization_factor_orthogonal",
                abs(nu[ExchangeSymmetry.BOSON] - INV_SQRT2),
                tol["normalization_factor"],
            )
        )
    return values, verdicts


def _run_dlocal(config: ScenarioConfig) -> tuple[dict, list[Verdict]]:
    tol = config.tolerances
    with _stage("lattice setup"):
        grid = config.grid.build()
        psi = gaussian_packet(grid, config.packets[0].center, config.packets[0].width)
        phi = gaussian_packet(grid, config.packets[1].center, config.packets[1].width)
        kernel = position_kernel(grid)
        domain = Domain.from_interval(grid, config.domain.lower, config.domain.upper)
    with _stage("domain-local check"):
        two_local, single, difference = dlocal_agreement_check(
            kernel, domain, psi, phi, mass_epsilon=tol["support_mass"]
        )
        two_raw = expectation_two_particle(
            symmetrized_observable(kernel), symmetrize(psi, phi, ExchangeSymmetry.BOSON)
        ).real
        raw_difference = abs(two_raw - single.real)
        residual_raw = dlocal_residual(kernel, domain)
        residual_localized = dlocal_residual(localize(kernel, domain), domain)

    values = {
        "dlocal_two_particle_expectation": two_local.real,
        "single_particle_expectation": single.real,
        "dlocal_difference": difference,
        "unlocalized_two_particle_expectation": two_raw,
        "unlocalized_difference": raw_difference,
        "dlocal_residual_raw_kernel": residual_raw,
        "dlocal_residual_localized_kernel": residual_localized,
    }
    verdicts = [
        _verdict("agreement", difference, tol["agreement"]),
        _verdict(
            "unlocalized_discrepancy",
            abs(raw_difference - config.packets[1].center),
            tol["unlocalized_discrepancy"],
        ),
        _bool_verdict(
            "raw_kernel_not_dlocal",
            residual_raw > tol["dlocal"],
            residual_raw,
            tol["dlocal"],
        ),
        _bool_verdict(
            "localized_kernel_dlocal",
            residual_localized <= tol["dlocal"],
            residual_localized,
            tol["dlocal"],
        ),
    ]
    return values, verdicts


def _bcl_diagnostics(
    spec: BclSpec, phi: StateVector, tol: dict[str, float]
) -> tuple[dict, list[Verdict], object]:
    with _stage("premeasure"):
        result = premeasure(spec, phi)
        unitary = result.unitary.entries
        unitarity_residual = float(
            np.max(np.abs(unitary.conj().T @ unitary - np.eye(unitary.shape[0])))
        )
        extension_residual = 0.0
        for k, (eigsector, row) in enumerate(
            zip(spec.system_eigenbasis, spec.transfer_family)
        ):
            pointer = spec.pointer_basis[k].amplitudes
            for eigvec, transfer_vec in zip(eigsector, row):
                image = unitary @ np.kron(eigvec.amplitudes, spec.ready_state.amplitudes)
                expected = np.kron(transfer_vec.amplitudes, pointer)
                extension_residual = max(
                    extension_residual, float(np.linalg.norm(image - expected))
                )
        reconstruction = np.zeros(spec.system_dim * spec.apparatus_dim, dtype=complex)
        for k, conditional in enumerate(result.conditional_states):
            if conditional is None:
                continue
            reconstruction += np.sqrt(result.probabilities[k]) * np.kron(
                conditional.amplitudes, spec.pointer_basis[k].amplitudes
            )
        reconstruction_residual = float(
            np.linalg.norm(result.final_state.amplitudes - reconstruction)
        )
        formula_residual = 0.0
        for k, eigsector in enumerate(spec.system_eigenbasis):
            coefficient_mass = sum(
                abs(np.vdot(eigvec.amplitudes, phi.amplitudes)) ** 2 for eigvec in eigsector
            )
            formula_residual = max(
                formula_residual, abs(float(result.probabilities[k]) - coefficient_mass)
            )
        pointer_mixture = np.zeros((spec.apparatus_dim, spec.apparatus_dim), dtype=complex)
        for k, pointer in enumerate(spec.pointer_basis):
            pointer_mixture += result.probabilities[k] * np.outer(
                pointer.amplitudes, pointer.amplitudes.conj()
            )
        marginal_residual = trace_distance(
            apparatus_marginal(result, spec), DensityMatrix(pointer_mixture)
        )

    values = {
        f"probability_{k}": float(p) for k, p in enumerate(result.probabilities)
    }
    verdicts = [
        _verdict(
            "probability_sum",
            abs(float(np.sum(result.probabilities)) - 1.0),
            tol["probability_sum"],
        ),
        _verdict("probability_formula", formula_residual, tol["probability_formula"]),
        _verdict("unitarity", unitarity_residual, tol["unitarity"]),
        _verdict("extension_map", extension_residual, tol["extension_map"]),
        _verdict("reconstruction", reconstruction_residual, tol["reconstruction"]),
        _verdict("apparatus_marginal", marginal_residual, tol["apparatus_marginal"]),
    ]
    return values, verdicts, result


def _run_bcl(config: ScenarioConfig) -> tuple[dict, list[Verdict]]:
    with _stage("build spec"):
        spec = config.bcl.build()
        phi = StateVector.normalized(np.array(config.initial_state))
    values, verdicts, _ = _bcl_diagnostics(spec, phi, config.tolerances)
    return values, verdicts


def _run_full_measurement(config: ScenarioConfig) -> tuple[dict, list[Verdict]]:
    tol = config.tolerances
    with _stage("build spec"):
        spec = config.bcl.build()
        phi = StateVector.normalized(np.array(config.initial_state))
    values, verdicts, result = _bcl_diagnostics(spec, phi, tol)
    with _stage("objectify"):
        gemenge = apply_rule2(result, spec)
        space = ProductSpace((spec.system_dim, spec.apparatus_dim))
        rho_rule2 = gemenge_density_matrix(gemenge, space)
        coherence_rule2 = pointer_block_coherence(rho_rule2, spec.pointer_basis, space)
    with _stage("compare"):
        witness = (
            observable_witness(spec)
            if config.witness == "system_observable"
            else shift_witness(spec)
        )
        report = compare_states(result, gemenge, spec, witness)
        pointer_mixture = np.zeros((spec.apparatus_dim, spec.apparatus_dim), dtype=complex)
        for k, pointer in enumerate(spec.pointer_basis):
            pointer_mixture += result.probabilities[k] * np.outer(
                pointer.amplitudes, pointer.amplitudes.conj()
            )
        gemenge_apparatus_residual = trace_distance(
            partial_trace(rho_rule2, space, keep=1), DensityMatrix(pointer_mixture)
        )
        probabilities = result.probabilities[result.probabilities > 0.0]
        expected_entropy = float(-np.sum(probabilities * np.log(probabilities)))

    values.update(
        {
            "pointer_coherence_unitary": report.pointer_block_coherence_norm,
            "pointer_coherence_rule2": coherence_rule2,
            "witness_expectation_unitary": report.witness_expectation_unitary,
            "witness_expectation_rule2": report.witness_expectation_rule2,
            "entropy_unitary": report.entropy_unitary_state,
            "entropy_rule2": report.entropy_rule2_state,
            "entropy_expected": expected_entropy,
            "trace_distance_system_marginal": report.marginal_agreement_system,
            "trace_distance_apparatus_marginal": report.marginal_agreement_apparatus,
        }
    )
    verdicts.extend(
        [
            _verdict("marginal_system", report.marginal_agreement_system, tol["marginal_system"]),
            _verdict(
                "marginal_apparatus",
                report.marginal_agreement_apparatus,
                tol["marginal_apparatus"],
            ),
            _verdict("apparatus_gemenge", gemenge_apparatus_residual, tol["apparatus_gemenge"]),
            _verdict(
                "entropy_gap",
                abs(report.entropy_rule2_state - expected_entropy),
                tol["entropy_gap"],
            ),
            _verdict("rule2_coherence", coherence_rule2, tol["rule2_coherence"]),
        ]
    )
    return values, verdicts


_RUNNERS = {
    "symmetrization": _run_symmetrization,
    "dlocal": _run_dlocal,
    "bcl": _run_bcl,
    "full_measurement": _run_full_measurement,
}


def run_scenario(config: ScenarioConfig) -> RunReport:
    """Execute a validated scenario; deterministic for identical configs."""
    start = time.perf_counter()
    values, verdicts = _RUNNERS[config.scenario_kind](config)
    duration = time.perf_counter() - start
    return RunReport(
        scenario=config.to_dict(),
        values={key: float(v) for key, v in values.items()},
        verdicts=tuple(verdicts),
        duration_seconds=duration,
    )


def render_report(report: RunReport, format: str = "json") -> str:
    """Serialize a report to text in the requested format."""
    if format == "json":
        return report.to_json_text()
    if format == "csv":
        return report.to_csv_text()
    raise ValueError(f"unknown report format {format!r}")


def emit_report(report: RunReport, format: str = "json", path=None) -> None:
    """Write a report to a file (writability errors propagate as OSError)."""
    if path is None:
        raise ValueError("emit_report needs an output path")
    Path(path).write_text(render_report(report, format), encoding="utf-8")
