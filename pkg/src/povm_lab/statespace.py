"""Finite-grid realization of the constrained state set and eigenvalue clustering.

The states compatible with the known parameters form a continuum; we place a
symmetric grid on the unknown coordinates, keep the positive semidefinite
points, and group them by which cell of a B-way partition of [0, 1] each
(descending) eigenvalue falls into.  One cluster stands in for a unitary
orbit of states with fixed spectrum, and the averaged covariance is a raw
(unnormalized) sum over its members.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import linalg
from .basis import OrthonormalBasis, ParameterPattern, assemble_full_vector, bloch_to_state
from .errors import ConfigurationError, ContractViolation, EmptyClusterSelection

GRID_PSD_TOL = 1e-10
POINT_BUDGET = 10**7
DEFAULT_CELLS = 10
DEFAULT_POINTS_PER_AXIS = 7


@dataclass(frozen=True)
class GridSpec:
    """Symmetric grid: g points per unknown axis over [-bound, +bound]."""

    points_per_axis: int
    bound: float
    pattern: ParameterPattern

    def __post_init__(self):
        if self.points_per_axis < 2:
            raise ConfigurationError("points_per_axis must be >= 2")
        if not (self.bound > 0 and np.isfinite(self.bound)):
            raise ConfigurationError("bound must be positive and finite")
        if self.points_per_axis ** self.pattern.unknown_count > POINT_BUDGET:
            raise ConfigurationError(
                f"grid budget exceeded: {self.points_per_axis}^{self.pattern.unknown_count} "
                f"> {POINT_BUDGET}"
            )


@dataclass(frozen=True)
class Cluster:
    """Grid states sharing an eigenvalue cell signature."""

    key: tuple
    members: np.ndarray  # (k, n^2 - 1) full Bloch vectors
    cell_count: int

    @property
    def size(self) -> int:
        return self.members.shape[0]


def generate_grid(spec: GridSpec, basis: OrthonormalBasis) -> np.ndarray:
    """All PSD grid states as rows of full Bloch vectors, in axis-lexicographic order."""
    pattern = spec.pattern
    axis = np.linspace(-spec.bound, spec.bound, spec.points_per_axis)
    unknown_pos = [i - 1 for i in pattern.unknown_indices]
    known_pos = [i - 1 for i in pattern.known_indices]
    full = np.empty(basis.dim**2 - 1)
    if known_pos:
        full[known_pos] = pattern.known_values
    eye = np.eye(basis.dim) / basis.dim
    stack = basis.stack
    kept = []
    for combo in itertools.product(axis, repeat=pattern.unknown_count):
        full[unknown_pos] = combo
        rho = np.tensordot(full, stack, axes=1)
        rho += eye
        if linalg.min_eigenvalue(rho) >= -GRID_PSD_TOL:
            kept.append(full.copy())
    if kept:
        return np.array(kept)
    return np.zeros((0, basis.dim**2 - 1))


def eigenvalue_cell_key(rho, cells: int) -> tuple:
    """Cell indices floor(lambda * B) of the descending eigenvalues, clamped to [0, B-1]."""
    evals = linalg.hermitian_eigenvalues(rho)
    return tuple(min(max(int(np.floor(ev * cells)), 0), cells - 1) for ev in evals)


def cluster_states(states, cells: int, basis: OrthonormalBasis) -> dict:
    """Partition Bloch vectors into clusters keyed by their eigenvalue cells."""
    if cells < 1:
        raise ContractViolation("cells must be >= 1")
    groups: dict = {}
    for theta in np.asarray(states, dtype=float):
        key = eigenvalue_cell_key(bloch_to_state(theta, basis), cells)
        groups.setdefault(key, []).append(theta)
    return {
        key: Cluster(key, np.array(members), cells) for key, members in groups.items()
    }


def select_cluster(
    clusters: dict,
    policy: str = "largest",
    theta_ref=None,
    basis: OrthonormalBasis | None = None,
    pattern: ParameterPattern | None = None,
) -> Cluster:
    """Pick the cluster to average over.

    `reference` maps theta_ref (unknown coordinates; knowns filled from the
    pattern) to its eigenvalue cell key and selects that cluster.  `largest`
    takes the biggest cluster, ties broken by lexicographically smallest key.
    """
    if not clusters:
        raise EmptyClusterSelection("no clusters to select from")
    if policy == "largest":
        return min(clusters.values(), key=lambda c: (-c.size, c.key))
    if policy == "reference":
        if theta_ref is None or basis is None or pattern is None:
            raise ConfigurationError("reference policy needs theta_ref, basis and pattern")
        cells = next(iter(clusters.values())).cell_count
        full = assemble_full_vector(pattern, theta_ref)
        key = eigenvalue_cell_key(bloch_to_state(full, basis), cells)
        if key not in clusters:
            raise EmptyClusterSelection(f"no cluster with key {key}")
        return clusters[key]
    raise ConfigurationError(f"unknown cluster policy {policy!r}")
