"""Dense complex linear algebra for small matrices (n = 2..4).

Eigenvalues come from a cyclic Jacobi iteration on the Hermitian matrix and
real systems are solved by partially pivoted elimination.  Everything here is
deterministic and dependency-free beyond numpy array handling, which keeps the
annealing loops bit-reproducible for a fixed seed.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ContractViolation, NumericalError, SingularDesign

HERMITIAN_TOL = 1e-12
JACOBI_OFF_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100
PIVOT_FLOOR = 1e-12


def symmetrize(H, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Check Hermiticity within `tol` elementwise and return (H + H†)/2.

    Downstream code never sees asymmetry noise: every operation that requires
    a Hermitian input routes through this.
    """
    A = np.asarray(H, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ContractViolation(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A.view(float))):
        raise ContractViolation("matrix has non-finite entries")
    dev = np.abs(A - A.conj().T).max()
    scale = max(1.0, float(np.abs(A).max()))
    if dev > tol * scale:
        raise ContractViolation(f"matrix is not Hermitian: max |A - A†| = {dev:g}")
    return (A + A.conj().T) / 2.0


def _jacobi_eigenvalues(a, n: int) -> list:
    """Cyclic Jacobi on a Hermitian matrix given as nested lists; returns the
    unsorted diagonal after convergence of the off-diagonal Frobenius mass."""
    fro2 = 0.0
    for i in range(n):
        for j in range(n):
            x = a[i][j]
            fro2 += x.real * x.real + x.imag * x.imag
    thresh = JACOBI_OFF_TOL * max(1.0, math.sqrt(fro2))
    thresh2 = 0.5 * thresh * thresh
    for _ in range(JACOBI_MAX_SWEEPS):
        off2 = 0.0
        for p in range(n - 1):
            row = a[p]
            for q in range(p + 1, n):
                x = row[q]
                off2 += x.real * x.real + x.imag * x.imag
        if off2 <= thresh2:
            return [a[i][i].real for i in range(n)]
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                r = abs(apq)
                if r == 0.0:
                    continue
                u = apq / r
                theta = 0.5 * math.atan2(2.0 * r, a[p][p].real - a[q][q].real)
                c = math.cos(theta)
                su = math.sin(theta) * u
                su_bar = su.conjugate()
                for k in range(n):
                    akp = a[k][p]
                    akq = a[k][q]
                    a[k][p] = c * akp + su_bar * akq
                    a[k][q] = c * akq - su * akp
                for k in range(n):
                    apk = a[p][k]
                    aqk = a[q][k]
                    a[p][k] = c * apk + su * aqk
                    a[q][k] = c * aqk - su_bar * apk
    raise NumericalError(
        f"Jacobi eigenvalue iteration did not converge in {JACOBI_MAX_SWEEPS} sweeps"
    )


def hermitian_eigenvalues(H) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix, sorted descending.

    Cyclic Jacobi rotations; converged when the off-diagonal Frobenius mass
    drops below JACOBI_OFF_TOL relative to the matrix scale.
    """
    A = symmetrize(H)
    n = A.shape[0]
    if n == 1:
        return np.array([A[0, 0].real])
    a = [[complex(A[i, j]) for j in range(n)] for i in range(n)]
    return np.array(sorted(_jacobi_eigenvalues(a, n), reverse=True))


def min_eigenvalue(H) -> float:
    return float(hermitian_eigenvalues(H)[-1])


def min_eigenvalue_trusted(A: np.ndarray) -> float:
    """Min eigenvalue of a matrix already known to be exactly Hermitian.

    Hot-path variant for the annealer: skips the Hermiticity check and the
    array round trips of the public operation; same Jacobi core.
    """
    n = A.shape[0]
    if n == 1:
        return float(A[0, 0].real)
    a = [[complex(A[i, j]) for j in range(n)] for i in range(n)]
    return min(_jacobi_eigenvalues(a, n))


def is_psd(H, tol: float = 1e-10) -> bool:
    """True iff the minimum eigenvalue of H is >= -tol."""
    if tol < 0:
        raise ContractViolation("tol must be nonnegative")
    return min_eigenvalue(H) >= -tol


def hs_inner(A, B) -> float:
    """Hilbert-Schmidt pairing Tr(A B) of two Hermitian matrices."""
    A = symmetrize(A)
    B = symmetrize(B)
    if A.shape != B.shape:
        raise ContractViolation(f"dimension mismatch: {A.shape} vs {B.shape}")
    # Tr(A B) = sum_ij A_ij conj(B_ij) for Hermitian B
    z = complex(np.vdot(B, A))
    scale = max(1.0, float(np.abs(A).max()) * float(np.abs(B).max()) * A.shape[0] ** 2)
    if abs(z.imag) > 1e-12 * scale:
        raise ContractViolation(f"trace pairing has imaginary residue {z.imag:g}")
    return z.real


def determinant(M) -> float:
    """Determinant of a real square matrix via pivoted elimination."""
    A = np.asarray(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ContractViolation(f"determinant needs a square matrix, got {A.shape}")
    n = A.shape[0]
    a = [list(map(float, row)) for row in A]
    det = 1.0
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(a[r][col]))
        if a[piv][col] == 0.0:
            return 0.0
        if piv != col:
            a[piv], a[col] = a[col], a[piv]
            det = -det
        det *= a[col][col]
        inv = 1.0 / a[col][col]
        for r in range(col + 1, n):
            f = a[r][col] * inv
            if f != 0.0:
                for c in range(col + 1, n):
                    a[r][c] -= f * a[col][c]
    return det


def solve_linear(M, b) -> np.ndarray:
    """Solve M x = b for real square M; raises SingularDesign on tiny pivots."""
    A = np.asarray(M, dtype=float)
    rhs = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ContractViolation(f"solve_linear needs a square matrix, got {A.shape}")
    n = A.shape[0]
    if rhs.shape != (n,):
        raise ContractViolation(f"rhs has shape {rhs.shape}, expected ({n},)")
    scale = max(1.0, float(np.abs(A).max()))
    a = [list(map(float, row)) + [float(rhs[i])] for i, row in enumerate(A)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(a[r][col]))
        if abs(a[piv][col]) <= PIVOT_FLOOR * scale:
            raise SingularDesign(f"pivot {a[piv][col]:g} below floor at column {col}")
        if piv != col:
            a[piv], a[col] = a[col], a[piv]
        inv = 1.0 / a[col][col]
        for r in range(col + 1, n):
            f = a[r][col] * inv
            if f != 0.0:
                for c in range(col + 1, n + 1):
                    a[r][c] -= f * a[col][c]
    x = [0.0] * n
    for row in range(n - 1, -1, -1):
        s = a[row][n] - sum(a[row][c] * x[c] for c in range(row + 1, n))
        x[row] = s / a[row][row]
    return np.array(x)
