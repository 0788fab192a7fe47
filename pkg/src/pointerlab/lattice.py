"""One-dimensional lattice realization of identical-particle kinematics.

Wavefunctions are quadrature-normalized samples on a uniform grid
(``dx * sum |psi|^2 = 1``).  Integral kernels carry a factor ``1/dx`` so that
the discrete contraction ``dx * sum`` reproduces the continuum composition
rule; in particular the Dirac delta is ``identity / dx``.

Two-particle operators are stored as sums of Kronecker factor pairs, so a
512-point grid never materializes the ``(n^2, n^2)`` matrix; expectation
values contract the factors directly at O(n^3) cost.  Exchange symmetry of
pair states is exact by construction: boson (symmetric) and fermion
(antisymmetric) combinations satisfy ``values[i, j] == sign * values[j, i]``
bitwise.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import (
    CapacityExceeded,
    GridMismatch,
    NullState,
    SupportViolation,
    UnresolvableWidth,
)
from .hilbert import MatrixOperator
from .tolerances import (
    COMPARISON_TOL,
    DENSE_DIM_CAP,
    INVARIANT_TOL,
    QUADRATURE_NORM_TOL,
)

__all__ = [
    "LatticeGrid",
    "LatticeWavefunction",
    "TwoParticleWavefunction",
    "KernelOperator",
    "TwoParticleKernel",
    "Domain",
    "ExchangeSymmetry",
    "gaussian_packet",
    "symmetrize",
    "symmetrization_factor",
    "symmetrized_observable",
    "expectation_single",
    "expectation_two_particle",
    "localize",
    "is_d_local",
    "dlocal_residual",
    "dlocal_agreement_check",
    "support",
    "collective_observable",
    "exchange_swap",
    "position_kernel",
    "delta_kernel",
]


class ExchangeSymmetry(enum.Enum):
    """Exchange sign of a pair of identical particles."""

    BOSON = 1
    FERMION = -1

    @property
    def sign(self) -> int:
        return self.value


@dataclass(frozen=True)
class LatticeGrid:
    """Uniform grid: point ``i`` sits at ``x_min + i * dx`` for ``0 <= i < n_points``."""

    x_min: float
    dx: float
    n_points: int

    def __post_init__(self) -> None:
        if self.dx <= 0:
            raise ValueError("dx must be positive")
        if self.n_points < 2:
            raise ValueError("a grid needs at least two points")

    @classmethod
    def from_extent(cls, x_min: float, x_max: float, n_points: int) -> "LatticeGrid":
        """Half-open cover of ``[x_min, x_max)`` with ``dx = (x_max - x_min) / n_points``."""
        if x_max <= x_min:
            raise ValueError("x_max must exceed x_min")
        return cls(x_min=x_min, dx=(x_max - x_min) / n_points, n_points=n_points)

    @property
    def coordinates(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points)


def _require_same_grid(a: LatticeGrid, b: LatticeGrid) -> None:
    if a != b:
        raise GridMismatch(f"grids {a} and {b} differ")


@dataclass(frozen=True, eq=False)
class LatticeWavefunction:
    """Single-particle wavefunction samples, quadrature-normalized."""

    grid: LatticeGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=complex).reshape(-1)
        if vals.size != self.grid.n_points:
            raise ValueError("value count must match the grid")
        norm = float(self.grid.dx * np.sum(np.abs(vals) ** 2))
        if abs(norm - 1.0) > QUADRATURE_NORM_TOL:
            raise ValueError(f"quadrature norm {norm:.17g} is not 1 within {QUADRATURE_NORM_TOL}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def inner(self, other: "LatticeWavefunction") -> complex:
        """Quadrature inner product ``dx * sum(conj(self) * other)``."""
        _require_same_grid(self.grid, other.grid)
        return complex(self.grid.dx * np.vdot(self.values, other.values))


@dataclass(frozen=True, eq=False)
class TwoParticleWavefunction:
    """Pair wavefunction with exact exchange symmetry.

    ``values[i, j]`` samples the amplitude at ``(x_i, x_j)``; the quadrature
    norm ``dx^2 * sum |values|^2`` is 1 and ``values == sign * values.T``
    holds bitwise for the declared exchange sign.
    """

    grid: LatticeGrid
    values: np.ndarray
    exchange: ExchangeSymmetry

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=complex)
        n = self.grid.n_points
        if vals.shape != (n, n):
            raise ValueError(f"values must have shape ({n}, {n})")
        norm = float(self.grid.dx**2 * np.sum(np.abs(vals) ** 2))
        if abs(norm - 1.0) > QUADRATURE_NORM_TOL:
            raise ValueError(f"quadrature norm {norm:.17g} is not 1 within {QUADRATURE_NORM_TOL}")
        if not np.array_equal(vals, self.exchange.sign * vals.T):
            raise ValueError("values do not respect the declared exchange symmetry")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True, eq=False)
class KernelOperator:
    """One-particle integral kernel ``a(x_i; x_j)`` in units of ``1/dx``."""

    grid: LatticeGrid
    kernel: np.ndarray
    hermitian: bool = False

    def __post_init__(self) -> None:
        mat = np.array(self.kernel, dtype=complex)
        n = self.grid.n_points
        if mat.shape != (n, n):
            raise ValueError(f"kernel must have shape ({n}, {n})")
        if self.hermitian:
            dev = float(np.max(np.abs(mat - mat.conj().T)))
            if dev > INVARIANT_TOL:
                raise ValueError(f"hermitian flag violated; deviation {dev:.3e}")
        mat.setflags(write=False)
        object.__setattr__(self, "kernel", mat)


@dataclass(frozen=True, eq=False)
class TwoParticleKernel:
    """Pair kernel stored as a sum of Kronecker factor pairs.

    The represented operator is ``sum_t left_t (x) right_t`` in the shared
    row-major tensor convention.  An exchange-symmetry spot check runs at
    construction on seeded product probes; :meth:`to_dense` materializes the
    full ``(n^2, n^2)`` matrix only while ``n^2`` stays within the dense cap.
    """

    grid: LatticeGrid
    terms: tuple[tuple[np.ndarray, np.ndarray], ...]

    def __post_init__(self) -> None:
        n = self.grid.n_points
        frozen: list[tuple[np.ndarray, np.ndarray]] = []
        for left, right in self.terms:
            lmat = np.array(left, dtype=complex)
            rmat = np.array(right, dtype=complex)
            if lmat.shape != (n, n) or rmat.shape != (n, n):
                raise ValueError(f"factor matrices must have shape ({n}, {n})")
            lmat.setflags(write=False)
            rmat.setflags(write=False)
            frozen.append((lmat, rmat))
        object.__setattr__(self, "terms", tuple(frozen))
        self._check_exchange_symmetry()

    def _check_exchange_symmetry(self) -> None:
        # <u(x)v|A|w(x)z> must equal <v(x)u|A|z(x)w> for all product probes.
        rng = np.random.default_rng(7)
        n = self.grid.n_points
        scale = max(
            1.0,
            sum(float(np.linalg.norm(l) * np.linalg.norm(r)) for l, r in self.terms),
        )
        for _ in range(4):
            u, v, w, z = (
                rng.normal(size=n) + 1j * rng.normal(size=n) for _ in range(4)
            )
            u, v, w, z = (c / np.linalg.norm(c) for c in (u, v, w, z))
            direct = sum(
                np.vdot(u, l @ w) * np.vdot(v, r @ z) for l, r in self.terms
            )
            swapped = sum(
                np.vdot(v, l @ z) * np.vdot(u, r @ w) for l, r in self.terms
            )
            if abs(direct - swapped) > INVARIANT_TOL * scale:
                raise ValueError("kernel is not exchange-symmetric")

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Quadrature action on raw pair samples; returns unnormalized samples."""
        vals = np.asarray(values, dtype=complex)
        out = np.zeros_like(vals)
        for left, right in self.terms:
            out += left @ vals @ right.T
        return self.grid.dx**2 * out

    def to_dense(self) -> np.ndarray:
        """Materialize the full pair matrix (small grids only)."""
        n = self.grid.n_points
        if n * n > DENSE_DIM_CAP:
            raise CapacityExceeded(
                f"dense pair kernel would be {n * n} x {n * n}; cap is {DENSE_DIM_CAP}"
            )
        total = np.zeros((n * n, n * n), dtype=complex)
        for left, right in self.terms:
            total += np.kron(left, right)
        return total


@dataclass(frozen=True)
class Domain:
    """Sorted, disjoint, half-open index intervals selecting grid points."""

    index_ranges: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        ranges = tuple((int(lo), int(hi)) for lo, hi in self.index_ranges)
        previous_end = -1
        for lo, hi in ranges:
            if lo < 0 or hi <= lo:
                raise ValueError(f"bad index interval [{lo}, {hi})")
            if lo < previous_end:
                raise ValueError("index intervals must be sorted and disjoint")
            previous_end = hi
        object.__setattr__(self, "index_ranges", ranges)

    @classmethod
    def from_interval(cls, grid: LatticeGrid, lower: float, upper: float) -> "Domain":
        """Grid points with coordinate in the closed interval ``[lower, upper]``."""
        if upper < lower:
            raise ValueError("upper must not be below lower")
        coords = grid.coordinates
        return cls.from_mask((coords >= lower) & (coords <= upper))

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> "Domain":
        flags = np.asarray(mask, dtype=bool)
        padded = np.concatenate(([False], flags, [False]))
        edges = np.flatnonzero(padded[1:] != padded[:-1])
        ranges = tuple((int(edges[i]), int(edges[i + 1])) for i in range(0, len(edges), 2))
        return cls(ranges)

    @classmethod
    def full(cls, grid: LatticeGrid) -> "Domain":
        return cls(((0, grid.n_points),))

    def mask(self, n_points: int) -> np.ndarray:
        flags = np.zeros(n_points, dtype=bool)
        for lo, hi in self.index_ranges:
            if hi > n_points:
                raise ValueError(f"interval [{lo}, {hi}) exceeds grid size {n_points}")
            flags[lo:hi] = True
        return flags


def gaussian_packet(grid: LatticeGrid, center: float, width: float) -> LatticeWavefunction:
    """Normalized Gaussian ``exp(-(x - center)^2 / (4 width^2))`` on the grid.

    ``width`` is the standard deviation of the position density; packets
    narrower than ``2 dx`` are rejected as unresolvable.
    """
    if width <= 2 * grid.dx:
        raise UnresolvableWidth(f"width {width} must exceed 2*dx = {2 * grid.dx}")
    coords = grid.coordinates
    if not (coords[0] <= center <= coords[-1]):
        raise ValueError(f"center {center} lies outside the grid extent")
    raw = np.exp(-((coords - center) ** 2) / (4.0 * width**2)).astype(complex)
    raw /= np.sqrt(grid.dx * np.sum(np.abs(raw) ** 2))
    return LatticeWavefunction(grid, raw)


def _symmetrized_raw(
    psi: LatticeWavefunction, phi: LatticeWavefunction, sym: ExchangeSymmetry
) -> np.ndarray:
    _require_same_grid(psi.grid, phi.grid)
    product = np.outer(psi.values, phi.values)
    return product + sym.sign * product.T


def symmetrization_factor(
    psi: LatticeWavefunction, phi: LatticeWavefunction, sym: ExchangeSymmetry
) -> float:
    """Positive normalization ``nu`` with ``Psi = nu * (psi phi +/- phi psi)``.

    Evaluates to ``1/sqrt(2)`` for orthogonal inputs and ``1/2`` for the
    bosonic identical case.
    """
    raw = _symmetrized_raw(psi, phi, sym)
    norm = float(np.sqrt(psi.grid.dx**2 * np.sum(np.abs(raw) ** 2)))
    if norm < COMPARISON_TOL:
        raise NullState("symmetrized state is numerically null")
    return 1.0 / norm


def symmetrize(
    psi: LatticeWavefunction, phi: LatticeWavefunction, sym: ExchangeSymmetry
) -> TwoParticleWavefunction:
    """Exchange-(anti)symmetric pair state built from two one-particle states."""
    raw = _symmetrized_raw(psi, phi, sym)
    norm = float(np.sqrt(psi.grid.dx**2 * np.sum(np.abs(raw) ** 2)))
    if norm < COMPARISON_TOL:
        raise NullState("symmetrized state is numerically null")
    return TwoParticleWavefunction(psi.grid, raw * (1.0 / norm), sym)


def delta_kernel(grid: LatticeGrid) -> KernelOperator:
    """Discretized Dirac delta: ``identity / dx``."""
    return KernelOperator(grid, np.eye(grid.n_points, dtype=complex) / grid.dx, hermitian=True)


def position_kernel(grid: LatticeGrid) -> KernelOperator:
    """Position observable ``x * delta(x - x')`` as a diagonal kernel."""
    return KernelOperator(
        grid, np.diag(grid.coordinates.astype(complex)) / grid.dx, hermitian=True
    )


def symmetrized_observable(a: KernelOperator) -> TwoParticleKernel:
    """Registration kernel acting on either particle: ``a (x) delta + delta (x) a``."""
    ident = np.eye(a.grid.n_points, dtype=complex) / a.grid.dx
    return TwoParticleKernel(a.grid, ((a.kernel, ident), (ident, a.kernel)))


def expectation_single(a: KernelOperator, psi: LatticeWavefunction) -> complex:
    """Quadrature expectation ``dx^2 * sum conj(psi_i) a_ij psi_j``."""
    _require_same_grid(a.grid, psi.grid)
    return complex(a.grid.dx**2 * np.vdot(psi.values, a.kernel @ psi.values))


def expectation_two_particle(A: TwoParticleKernel, Psi: TwoParticleWavefunction) -> complex:
    """Quadrature expectation of a pair kernel, ``dx^4``-weighted quadratic form."""
    _require_same_grid(A.grid, Psi.grid)
    conj_vals = Psi.values.conj()
    total = 0.0 + 0.0j
    for left, right in A.terms:
        total += np.einsum(
            "ij,ik,jl,kl->", conj_vals, left, right, Psi.values, optimize=True
        )
    return complex(A.grid.dx**4 * total)


def localize(a: KernelOperator, D: Domain) -> KernelOperator:
    """Restrict a kernel to the domain: ``chi_D(i) a_ij chi_D(j)`` with exact zeros."""
    mask = D.mask(a.grid.n_points)
    kernel = np.where(np.outer(mask, mask), a.kernel, 0.0 + 0.0j)
    return KernelOperator(a.grid, kernel, hermitian=a.hermitian)


def dlocal_residual(a: KernelOperator, D: Domain) -> float:
    """Largest quadrature response of the kernel to delta spikes outside the domain.

    Delta spikes at every exterior point are exhaustive test functions on the
    lattice by linearity, so the residual is the maximum over exterior ``j`` of
    the ``dx``-weighted absolute row and column sums.
    """
    exterior = ~D.mask(a.grid.n_points)
    if not np.any(exterior):
        return 0.0
    magnitude = np.abs(a.kernel)
    column_norms = a.grid.dx * magnitude.sum(axis=0)
    row_norms = a.grid.dx * magnitude.sum(axis=1)
    return float(max(column_norms[exterior].max(), row_norms[exterior].max()))


def is_d_local(a: KernelOperator, D: Domain, tol: float) -> bool:
    """Whether the kernel annihilates every test function supported outside ``D``."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    return dlocal_residual(a, D) <= tol


def _domain_mass(psi: LatticeWavefunction, mask: np.ndarray) -> float:
    return float(psi.grid.dx * np.sum(np.abs(psi.values[mask]) ** 2))


def dlocal_agreement_check(
    a: KernelOperator,
    D: Domain,
    psi: LatticeWavefunction,
    phi: LatticeWavefunction,
    mass_epsilon: float = 1e-6,
) -> tuple[complex, complex, float]:
    """Compare the localized pair expectation against the lone-particle value.

    Requires ``psi`` to live inside ``D`` and ``phi`` outside it, up to
    ``mass_epsilon`` of stray quadrature probability on the wrong side.
    Returns the pair expectation of the symmetrized localized kernel, the
    single-particle expectation of the raw kernel in ``psi``, and their
    absolute difference.
    """
    _require_same_grid(a.grid, psi.grid)
    _require_same_grid(a.grid, phi.grid)
    inside = D.mask(a.grid.n_points)
    stray_psi = _domain_mass(psi, ~inside)
    if stray_psi > mass_epsilon:
        raise SupportViolation(
            f"first packet leaves {stray_psi:.3e} probability outside the domain"
        )
    stray_phi = _domain_mass(phi, inside)
    if stray_phi > mass_epsilon:
        raise SupportViolation(
            f"second packet leaves {stray_phi:.3e} probability inside the domain"
        )
    localized_pair = symmetrized_observable(localize(a, D))
    pair_state = symmetrize(psi, phi, ExchangeSymmetry.BOSON)
    two_particle = expectation_two_particle(localized_pair, pair_state)
    single = expectation_single(a, psi)
    return two_particle, single, abs(two_particle - single)


def support(psi: LatticeWavefunction, mass_epsilon: float) -> Domain:
    """Smallest contiguous index interval holding at least ``1 - mass_epsilon`` mass."""
    if not 0.0 < mass_epsilon < 1.0:
        raise ValueError("mass_epsilon must lie strictly between 0 and 1")
    masses = psi.grid.dx * np.abs(psi.values) ** 2
    prefix = np.concatenate(([0.0], np.cumsum(masses)))
    total = prefix[-1]
    target = 1.0 - mass_epsilon
    if total < target:
        return Domain.full(psi.grid)
    n = psi.grid.n_points
    best_lo, best_hi = 0, n
    lo = 0
    for hi in range(1, n + 1):
        while prefix[hi] - prefix[lo + 1] >= target:
            lo += 1
        if prefix[hi] - prefix[lo] >= target and hi - lo < best_hi - best_lo:
            best_lo, best_hi = lo, hi
    return Domain(((best_lo, best_hi),))


def collective_observable(a: MatrixOperator, n_particles: int) -> MatrixOperator:
    """One-particle operator summed over every slot: ``sum_k I (x) ... a ... (x) I``."""
    if n_particles < 1:
        raise ValueError("n_particles must be at least 1")
    dim = a.dim
    if dim**n_particles > DENSE_DIM_CAP:
        raise CapacityExceeded(
            f"collective operator dim {dim}^{n_particles} exceeds cap {DENSE_DIM_CAP}"
        )
    total_dim = dim**n_particles
    total = np.zeros((total_dim, total_dim), dtype=complex)
    for slot in range(n_particles):
        before = np.eye(dim**slot, dtype=complex)
        after = np.eye(dim ** (n_particles - slot - 1), dtype=complex)
        total += np.kron(np.kron(before, a.entries), after)
    return MatrixOperator(total, hermitian=a.hermitian)


def exchange_swap(dim: int) -> MatrixOperator:
    """Permutation exchanging the two factors of a ``dim (x) dim`` space."""
    swap = (
        np.eye(dim * dim, dtype=complex)
        .reshape(dim, dim, dim, dim)
        .transpose(1, 0, 2, 3)
        .reshape(dim * dim, dim * dim)
    )
    return MatrixOperator(swap, hermitian=True, unitary=True)
