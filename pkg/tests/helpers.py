"""Shared generators for randomized spec tests."""

import numpy as np

from pointerlab import BclSpec, StateVector


def random_unitary(rng, n):
    """Haar-ish random unitary from a QR-decomposed complex Gaussian."""
    z = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_state(rng, n):
    z = rng.normal(size=n) + 1j * rng.normal(size=n)
    return StateVector(z / np.linalg.norm(z))


def random_bcl_spec(rng, degeneracies, apparatus_dim=None, transfer="sector_unitary"):
    """Random valid spec; the transfer family keeps cross-sector orthonormality.

    transfer="identity" copies the eigenbasis; "sector_unitary" mixes each
    sector by its own random unitary (a block-diagonal rotation, which
    preserves the measurement condition).
    """
    degeneracies = tuple(int(d) for d in degeneracies)
    sectors = len(degeneracies)
    system_dim = sum(degeneracies)
    if apparatus_dim is None:
        apparatus_dim = sectors

    eigen_columns = random_unitary(rng, system_dim)
    eigenbasis = []
    index = 0
    for deg in degeneracies:
        eigenbasis.append(
            tuple(StateVector(eigen_columns[:, index + l]) for l in range(deg))
        )
        index += deg

    pointer_columns = random_unitary(rng, apparatus_dim)
    pointers = tuple(StateVector(pointer_columns[:, k]) for k in range(sectors))

    if transfer == "identity":
        transfer_family = tuple(eigenbasis)
    elif transfer == "sector_unitary":
        transfer_family = []
        index = 0
        for deg in degeneracies:
            block = eigen_columns[:, index : index + deg] @ random_unitary(rng, deg)
            transfer_family.append(tuple(StateVector(block[:, l]) for l in range(deg)))
            index += deg
        transfer_family = tuple(transfer_family)
    else:
        raise ValueError(f"unknown transfer mode {transfer!r}")

    eigenvalues = tuple(float(k) + rng.uniform(0.0, 0.25) for k in range(sectors))
    return BclSpec(
        eigenvalues=eigenvalues,
        system_eigenbasis=tuple(eigenbasis),
        pointer_basis=pointers,
        ready_state=random_state(rng, apparatus_dim),
        transfer_family=transfer_family,
    )


def random_degeneracies(rng, system_dim):
    """Random partition of system_dim into at least two sectors when possible."""
    if system_dim == 1:
        return (1,)
    parts = []
    remaining = system_dim
    while remaining > 0:
        if len(parts) == 0 and remaining > 1:
            take = int(rng.integers(1, remaining))  # leave room for a second sector
        else:
            take = int(rng.integers(1, remaining + 1))
        parts.append(take)
        remaining -= take
    return tuple(parts)
