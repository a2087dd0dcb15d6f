"""Rank-one fast path: optimize phases of equi-modular measurement vectors.

Each element is E_i = (n/m) |h_i><h_i| with every entry of h_i of modulus
1/sqrt(n), so the elements automatically have constant diagonal 1/m and are
quasi-orthogonal to the diagonal subalgebra.  Only the entry phases remain
free; the first vector and every first component are pinned to phase zero.
The search minimizes the cross-overlap variance Delta plus a completeness
penalty, by Glauber annealing over the phases followed by cyclic coordinate
descent with a golden-section line search per phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .annealer import AnnealConfig, logistic_accept
from .errors import ContractViolation
from .povm import Povm, validate

TWO_PI = 2.0 * math.pi
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
POLISH_IMPROVEMENT_TOL = 1e-14
POLISH_FLOOR = 1e-26
POLISH_MAX_SWEEPS = 600
LINE_SCAN_POINTS = 12
LINE_XTOL = 1e-12


@dataclass(frozen=True)
class PhaseConfiguration:
    """m x n phase matrix in [0, 2pi); row 1 and column 1 are gauge-fixed to 0."""

    dim: int
    element_count: int
    phases: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.phases, dtype=float)
        object.__setattr__(self, "phases", p)
        if p.shape != (self.element_count, self.dim):
            raise ContractViolation(
                f"phases shape {p.shape} != ({self.element_count}, {self.dim})"
            )
        if not np.all(np.isfinite(p)):
            raise ContractViolation("phases must be finite")
        if np.any(p[0, :] != 0.0) or np.any(p[:, 0] != 0.0):
            raise ContractViolation("gauge entries (row 1, column 1) must be exactly zero")
        if p.min() < 0.0 or p.max() >= TWO_PI:
            raise ContractViolation("phases must lie in [0, 2pi)")


def gauge_fix(raw) -> np.ndarray:
    """Remove per-vector global phases: subtract each row's first entry, wrap."""
    raw = np.asarray(raw, dtype=float)
    out = np.mod(raw - raw[:, :1], TWO_PI)
    out[:, 0] = 0.0
    return out


def from_raw(dim: int, raw) -> PhaseConfiguration:
    """Gauge-fix a raw phase matrix; row 1 must come out all zero."""
    fixed = gauge_fix(raw)
    if np.abs(fixed[0]).max() > 0.0:
        raise ContractViolation("first vector must have uniform phases (row 1 gauge)")
    return PhaseConfiguration(raw.shape[1], raw.shape[0], fixed)


def random_phases(dim: int, element_count: int, rng) -> PhaseConfiguration:
    p = np.zeros((element_count, dim))
    p[1:, 1:] = rng.uniform(0.0, TWO_PI, (element_count - 1, dim - 1))
    return PhaseConfiguration(dim, element_count, p)


def _vectors(phases: np.ndarray, dim: int) -> np.ndarray:
    return np.exp(1j * phases) / math.sqrt(dim)


def phases_to_povm(phi: PhaseConfiguration):
    """Build the measurement and report its validity (completeness may fail).

    Returns (povm, violations); arbitrary phases give perfectly valid rank-one
    PSD elements but need not sum to the identity.
    """
    n, m = phi.dim, phi.element_count
    H = _vectors(phi.phases, n)
    c = n / m
    elements = [c * np.outer(H[i], H[i].conj()) for i in range(m)]
    pov = Povm(n, elements)
    return pov, validate(pov)


def _objective(phases: np.ndarray, dim: int, m: int, weight: float, off_mask) -> float:
    H = _vectors(phases, dim)
    G = H.conj() @ H.T
    c = dim / m
    overlaps = (c * c) * (G.real**2 + G.imag**2)
    off = overlaps[off_mask]
    delta = off - off.mean()
    val = float(delta @ delta)
    if weight != 0.0:
        S = c * (H.T @ H.conj()) - np.eye(dim)
        val += weight * float(np.sum(S.real**2 + S.imag**2))
    return val


def refine_objective(phi: PhaseConfiguration, weight: float = 1.0) -> float:
    """Cross-overlap variance plus `weight` times the squared completeness residual."""
    if weight < 0:
        raise ContractViolation("weight must be nonnegative")
    m = phi.element_count
    return _objective(phi.phases, phi.dim, m, weight, ~np.eye(m, dtype=bool))


@dataclass
class RefineResult:
    phases: PhaseConfiguration
    objective_trace: list
    objective: float


def _golden_section(f, lo: float, hi: float, xtol: float):
    a, b = lo, hi
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > xtol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = f(x2)
    return (x1, f1) if f1 <= f2 else (x2, f2)


def refine(initial: PhaseConfiguration, config: AnnealConfig, weight: float = 1.0) -> RefineResult:
    """Anneal the free phases, then polish with per-phase golden-section descent."""
    n, m = initial.dim, initial.element_count
    off_mask = ~np.eye(m, dtype=bool)

    def fval(p):
        return _objective(p, n, m, weight, off_mask)

    rng = np.random.default_rng(config.rng_seed)
    cur = initial.phases.copy()
    f_cur = fval(cur)
    best, f_best = cur.copy(), f_cur
    trace = [f_cur]
    for t in range(config.total_steps):
        s = config.s0 * config.s_decay**t
        temp = config.T0 * config.T_decay**t
        if t > 0 and t % config.reheat_every == 0:
            temp *= config.reheat_factor
        cand = cur.copy()
        cand[1:, 1:] = np.mod(cand[1:, 1:] + rng.normal(0.0, s, (m - 1, n - 1)), TWO_PI)
        f_new = fval(cand)
        if f_new < f_best:
            best, f_best = cand.copy(), f_new
        if logistic_accept(f_new - f_cur, temp, rng):
            cur, f_cur = cand, f_new
        if t % config.trace_every == 0:
            trace.append(f_cur)

    # cyclic coordinate descent polish on the best configuration; the
    # improvement threshold is relative to the sweep's starting value so the
    # descent runs to the floating-point floor instead of parking at ~1e-13
    phases = best
    f = f_best
    free = [(i, k) for i in range(1, m) for k in range(1, n)]
    span = TWO_PI / LINE_SCAN_POINTS
    for _ in range(POLISH_MAX_SWEEPS):
        f_sweep_start = f
        for i, k in free:
            x0 = phases[i, k]

            def slice_f(x):
                phases[i, k] = x
                return fval(phases)

            xs = x0 + span * np.arange(LINE_SCAN_POINTS)
            fs = [slice_f(x) for x in xs]
            j = int(np.argmin(fs))
            x_star, f_star = _golden_section(slice_f, xs[j] - span, xs[j] + span, LINE_XTOL)
            if f_star < f:
                phases[i, k] = math.fmod(x_star, TWO_PI) + (TWO_PI if x_star < 0 else 0.0)
                if phases[i, k] >= TWO_PI:
                    phases[i, k] -= TWO_PI
                f = slice_f(phases[i, k])
            else:
                phases[i, k] = x0
                f = fval(phases)
        trace.append(f)
        if f <= POLISH_FLOOR:
            break
        if f_sweep_start - f < POLISH_IMPROVEMENT_TOL * max(f_sweep_start, 1e-300):
            break
    return RefineResult(PhaseConfiguration(n, m, gauge_fix(phases)), trace, f)


def write_phases(phi: PhaseConfiguration, path) -> None:
    """CSV, one row per vector, entries in radians."""
    with open(path, "w") as fh:
        for row in phi.phases:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def read_phases(path) -> PhaseConfiguration:
    rows = []
    with open(path) as fh:
        for ln in fh:
            ln = ln.strip()
            if ln:
                rows.append([float(x) for x in ln.split(",")])
    arr = np.array(rows)
    return PhaseConfiguration(arr.shape[1], arr.shape[0], arr)
