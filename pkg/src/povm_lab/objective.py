"""Estimator pipeline and the determinant objective.

Outcome probabilities p_j = Tr(E_j rho) are affine in the Bloch coordinates,
p_j = a0_j (1 + <a_j, theta>), which the cluster sum exploits: the covariance
of the first N outcome frequencies is the multinomial W (repetition count set
to 1; it only rescales the objective), W0 sums W over the cluster members and
the objective is DACM = det(W0) / det(T)^2 for the design matrix T.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .basis import OrthonormalBasis, ParameterPattern
from .errors import ConfigurationError, ContractViolation, NonPositiveObjective, SingularDesign
from .povm import Povm, element_coords
from .statespace import Cluster

PROB_RANGE_TOL = 1e-10
PROB_SUM_TOL = 1e-9


@dataclass(frozen=True)
class DesignMatrix:
    """Rows a0^(j) * a^(j) restricted to the unknown indices, plus the a0 offsets."""

    T: np.ndarray
    a0s: np.ndarray


@dataclass(frozen=True)
class AveragedCovariance:
    W0: np.ndarray
    member_count: int


def outcome_probabilities(P: Povm, rho) -> np.ndarray:
    """p_j = Tr(E_j rho); validates the probability simplex invariants."""
    rho = linalg.symmetrize(rho)
    p = np.array([linalg.hs_inner(e, rho) for e in P.elements])
    _check_simplex(p, "state")
    return p


def _check_simplex(p: np.ndarray, label: str) -> None:
    if p.min() < -PROB_RANGE_TOL or p.max() > 1 + PROB_RANGE_TOL:
        raise ContractViolation(
            f"probability out of range for {label}: min {p.min():.3e}, max {p.max():.3e}"
        )
    s = p.sum()
    if abs(s - 1.0) > PROB_SUM_TOL:
        raise ContractViolation(f"probabilities sum to {s:.12g} for {label}")


def design_matrix(coords, pattern: ParameterPattern) -> DesignMatrix:
    """T[j][k] = a0^(j) a^(j)_{unknown_k} from the first N elements' coordinates."""
    n_unknown = pattern.unknown_count
    if coords is None:
        raise ConfigurationError("coordinate form required to build the design matrix")
    if len(coords) < n_unknown:
        raise ConfigurationError(
            f"need {n_unknown} coordinate rows, got {len(coords)}"
        )
    unknown_pos = [i - 1 for i in pattern.unknown_indices]
    T = np.empty((n_unknown, n_unknown))
    a0s = np.empty(n_unknown)
    for j in range(n_unknown):
        c = coords[j]
        T[j, :] = c.a0 * c.a[unknown_pos]
        a0s[j] = c.a0
    return DesignMatrix(T, a0s)


def design_matrix_for(P: Povm, pattern: ParameterPattern, basis: OrthonormalBasis) -> DesignMatrix:
    """Design matrix of a Povm, recovering coordinates from matrices if needed."""
    n_unknown = pattern.unknown_count
    if P.coords is not None and len(P.coords) >= n_unknown:
        return design_matrix(P.coords, pattern)
    coords = [element_coords(P.elements[j], basis) for j in range(n_unknown)]
    return design_matrix(coords, pattern)


def multinomial_covariance(p, n_unknown: int) -> np.ndarray:
    """Covariance of the first N outcome frequencies (single repetition)."""
    p = np.asarray(p, dtype=float)
    if n_unknown > p.shape[0] - 1:
        raise ContractViolation(f"N = {n_unknown} exceeds m - 1 = {p.shape[0] - 1}")
    head = p[:n_unknown]
    return np.diag(head) - np.outer(head, head)


def _coordinate_table(P: Povm, basis: OrthonormalBasis):
    """(a0s, A) for all m elements.

    Uses the stored coordinates for the first N elements; the closing element
    follows from sum E_j = I, i.e. sum a0 = 1 and sum a0 a = 0.  Elements with
    a0 = 0 get a zero coordinate row (their probabilities vanish identically).
    """
    dim_coords = basis.dim**2 - 1
    a0s = np.zeros(P.m)
    A = np.zeros((P.m, dim_coords))
    if P.coords is not None and len(P.coords) == P.m - 1:
        for j, c in enumerate(P.coords):
            a0s[j] = c.a0
            A[j] = c.a
        a0_last = 1.0 - a0s[:-1].sum()
        if a0_last > 1e-14:
            a0s[-1] = a0_last
            A[-1] = -(a0s[:-1, None] * A[:-1]).sum(axis=0) / a0_last
        # else: zero closing element; its row stays zero
    else:
        for j, e in enumerate(P.elements):
            tr = e.trace().real
            if tr / basis.dim > 1e-14:
                c = element_coords(e, basis)
                a0s[j] = c.a0
                A[j] = c.a
    return a0s, A


def averaged_covariance(
    P: Povm,
    cluster: Cluster,
    basis: OrthonormalBasis,
    pattern: ParameterPattern,
    workers: int = 1,
) -> AveragedCovariance:
    """W0 = sum over cluster members of the multinomial covariance at that state.

    The sum runs in a fixed member order; `workers > 1` only changes the
    reduction into that many contiguous chunks (results agree to ~1e-12
    relative with the single-chunk sum).
    """
    members = cluster.members
    if members.shape[0] == 0:
        raise ContractViolation("cluster has no members")
    a0s, A = _coordinate_table(P, basis)
    probs = (1.0 + members @ A.T) * a0s  # (k, m)
    bad = np.where(
        (probs.min(axis=1) < -PROB_RANGE_TOL)
        | (probs.max(axis=1) > 1 + PROB_RANGE_TOL)
        | (np.abs(probs.sum(axis=1) - 1.0) > PROB_SUM_TOL)
    )[0]
    if bad.size:
        i = int(bad[0])
        raise ContractViolation(
            f"probability invariant violated at cluster member {i}: p = {probs[i]}"
        )
    n_unknown = pattern.unknown_count
    head = probs[:, :n_unknown]
    k = members.shape[0]
    chunks = max(1, min(int(workers), k))
    bounds = np.linspace(0, k, chunks + 1).astype(int)
    W0 = np.zeros((n_unknown, n_unknown))
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        block = head[lo:hi]
        W0 += np.diag(block.sum(axis=0)) - block.T @ block
    W0 = (W0 + W0.T) / 2.0
    return AveragedCovariance(W0, k)


def dacm(design: DesignMatrix, averaged: AveragedCovariance) -> float:
    """det(W0) / det(T)^2; the scalar minimized over measurements."""
    T = design.T
    det_t = linalg.determinant(T)
    n = T.shape[0]
    # relative floor: a well-conditioned T has |det| ~ (entry scale)^N, so the
    # singularity test must not punish small but healthy coordinate scales
    floor = 1e-12 * float(np.abs(T).max()) ** n
    if abs(det_t) <= floor:
        raise SingularDesign(f"|det T| = {abs(det_t):.3e} below floor {floor:.3e}")
    det_w = linalg.determinant(averaged.W0)
    if det_w <= 0.0:
        raise NonPositiveObjective(
            f"det W0 = {det_w:.3e} <= 0: cluster does not determine all parameters"
        )
    return det_w / det_t**2


def estimate_state(nu, design: DesignMatrix) -> np.ndarray:
    """theta_hat = T^{-1} (nu - a0s) from observed outcome frequencies."""
    nu = np.asarray(nu, dtype=float)
    if nu.shape != design.a0s.shape:
        raise ContractViolation(f"frequencies shape {nu.shape} != {design.a0s.shape}")
    return linalg.solve_linear(design.T, nu - design.a0s)
