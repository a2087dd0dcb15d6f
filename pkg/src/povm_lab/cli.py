"""Command-line front end: anneal / refine / verify / gridinfo.

Config files are flat `key = value` text with dotted section prefixes; blank
lines and `#` comments are ignored, unknown or duplicate keys are errors.  All
keys default to the qutrit diagonal-known experiment, so a minimal anneal
config is just `mode = anneal`.  See README for the full key table.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import catalog, linalg, rankone
from .annealer import AnnealConfig, anneal, random_initial_povm, write_trace
from .basis import ParameterPattern, bloch_radius_bound, bloch_to_state, gell_mann_basis
from .errors import (
    ConfigurationError,
    EmptyClusterSelection,
    PovmLabError,
)
from .povm import metrics, validate, write_povm
from .statespace import GridSpec, cluster_states, generate_grid, select_cluster

log = logging.getLogger("povm_lab")

MODES = ("anneal", "refine", "verify", "gridinfo")

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

DEFAULT_KNOWN = {
    2: {3: 0.0},
    3: {7: 0.0, 8: 0.0},
    4: {i: 0.0 for i in range(1, 16) if i not in (3, 12, 15)},
}


@dataclass
class RefineSettings:
    weight: float = 1.0
    restarts: int = 5
    element_count: Optional[int] = None
    schedule: AnnealConfig = field(
        default_factory=lambda: AnnealConfig(
            total_steps=3000,
            s0=0.7,
            s_decay=0.999,
            T0=0.02,
            T_decay=0.998,
            reheat_every=600,
            reheat_factor=8.0,
            rng_seed=0,
            trace_every=100,
        )
    )


@dataclass
class ExperimentConfig:
    mode: str
    dim: int = 3
    pattern: ParameterPattern = None
    grid_points: int = 7
    grid_bound: Optional[float] = None
    grid_cells: int = 10
    cluster_policy: str = "largest"
    theta_ref: Optional[np.ndarray] = None
    anneal: AnnealConfig = field(default_factory=lambda: AnnealConfig(total_steps=20000))
    init_scale: float = 0.05
    refine: RefineSettings = field(default_factory=RefineSettings)
    output_dir: str = "."


def _parse_int(s):
    return int(s, 10)


def _parse_float(s):
    return float(s)


def _parse_bool(s):
    low = s.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_int_list(s):
    return [int(x) for x in s.split(",") if x.strip() != ""]


def _parse_float_list(s):
    return [float(x) for x in s.split(",") if x.strip() != ""]


_KEY_PARSERS = {
    "mode": str,
    "dim": _parse_int,
    "pattern.known_indices": _parse_int_list,
    "pattern.known_values": _parse_float_list,
    "grid.points_per_axis": _parse_int,
    "grid.bound": _parse_float,
    "grid.cells": _parse_int,
    "grid.cluster_policy": str,
    "grid.theta_ref": _parse_float_list,
    "anneal.total_steps": _parse_int,
    "anneal.s0": _parse_float,
    "anneal.s_decay": _parse_float,
    "anneal.T0": _parse_float,
    "anneal.T_decay": _parse_float,
    "anneal.reheat_every": _parse_int,
    "anneal.reheat_factor": _parse_float,
    "anneal.max_resample": _parse_int,
    "anneal.seed": _parse_int,
    "anneal.trace_every": _parse_int,
    "anneal.perturb_a0": _parse_bool,
    "anneal.init_scale": _parse_float,
    "refine.weight": _parse_float,
    "refine.restarts": _parse_int,
    "refine.element_count": _parse_int,
    "refine.total_steps": _parse_int,
    "refine.s0": _parse_float,
    "refine.s_decay": _parse_float,
    "refine.T0": _parse_float,
    "refine.T_decay": _parse_float,
    "refine.reheat_every": _parse_int,
    "refine.reheat_factor": _parse_float,
    "refine.trace_every": _parse_int,
    "refine.seed": _parse_int,
    "output.dir": str,
}


def parse_config(text: str, mode: Optional[str] = None) -> ExperimentConfig:
    """Parse the flat key = value format; descriptive errors carry line numbers."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected `key = value`, got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _KEY_PARSERS:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigurationError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _KEY_PARSERS[key](val)
        except (ValueError, TypeError) as exc:
            raise ConfigurationError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    return build_config(values, mode)


def build_config(values: dict, mode: Optional[str] = None) -> ExperimentConfig:
    mode = mode or values.get("mode")
    if not mode:
        raise ConfigurationError("missing required key `mode`")
    if mode not in MODES:
        raise ConfigurationError(f"unknown mode {mode!r}; expected one of {MODES}")
    dim = values.get("dim", 3)
    if dim not in (2, 3, 4):
        raise ConfigurationError(f"dim must be 2, 3 or 4, got {dim}")

    known_idx = values.get("pattern.known_indices")
    known_val = values.get("pattern.known_values")
    if (known_idx is None) != (known_val is None):
        raise ConfigurationError(
            "pattern.known_indices and pattern.known_values must be given together"
        )
    if known_idx is None:
        known = DEFAULT_KNOWN[dim]
    else:
        if len(known_idx) != len(known_val):
            raise ConfigurationError("pattern index and value lists differ in length")
        bad = [i for i in known_idx if not 1 <= i <= dim**2 - 1]
        if bad:
            raise ConfigurationError(f"pattern indices out of range for dim {dim}: {bad}")
        if len(set(known_idx)) != len(known_idx):
            raise ConfigurationError("pattern.known_indices has duplicates")
        known = dict(zip(known_idx, known_val))
    try:
        pattern = ParameterPattern.from_known(dim, known)
    except PovmLabError as exc:
        raise ConfigurationError(str(exc)) from exc

    grid_points = values.get("grid.points_per_axis", 7)
    if grid_points < 2:
        raise ConfigurationError(f"grid.points_per_axis must be >= 2, got {grid_points}")
    grid_cells = values.get("grid.cells", 10)
    if grid_cells < 1:
        raise ConfigurationError(f"grid.cells must be >= 1, got {grid_cells}")
    policy = values.get("grid.cluster_policy", "largest")
    if policy not in ("largest", "reference"):
        raise ConfigurationError(f"grid.cluster_policy must be largest|reference, got {policy!r}")
    theta_ref = values.get("grid.theta_ref")
    if theta_ref is not None:
        theta_ref = np.asarray(theta_ref, dtype=float)
        if theta_ref.shape != (pattern.unknown_count,):
            raise ConfigurationError(
                f"grid.theta_ref needs {pattern.unknown_count} entries, got {theta_ref.shape[0]}"
            )
    if policy == "reference" and theta_ref is None:
        raise ConfigurationError("grid.cluster_policy = reference requires grid.theta_ref")

    try:
        anneal_cfg = AnnealConfig(
            total_steps=values.get("anneal.total_steps", 20000),
            s0=values.get("anneal.s0", 0.2),
            s_decay=values.get("anneal.s_decay", 0.9995),
            T0=values.get("anneal.T0", 1.0),
            T_decay=values.get("anneal.T_decay", 0.999),
            reheat_every=values.get("anneal.reheat_every", 1000),
            reheat_factor=values.get("anneal.reheat_factor", 5.0),
            max_resample=values.get("anneal.max_resample", 100),
            rng_seed=values.get("anneal.seed", 0),
            trace_every=values.get("anneal.trace_every", 50),
            perturb_a0=values.get("anneal.perturb_a0", True),
        )
        refine_schedule = AnnealConfig(
            total_steps=values.get("refine.total_steps", 3000),
            s0=values.get("refine.s0", 0.7),
            s_decay=values.get("refine.s_decay", 0.999),
            T0=values.get("refine.T0", 0.02),
            T_decay=values.get("refine.T_decay", 0.998),
            reheat_every=values.get("refine.reheat_every", 600),
            reheat_factor=values.get("refine.reheat_factor", 8.0),
            rng_seed=values.get("refine.seed", 0),
            trace_every=values.get("refine.trace_every", 100),
        )
    except PovmLabError as exc:
        raise ConfigurationError(str(exc)) from exc

    m = values.get("refine.element_count")
    if m is not None and m < 2:
        raise ConfigurationError(f"refine.element_count must be >= 2, got {m}")
    init_scale = values.get("anneal.init_scale", 0.05)
    if init_scale <= 0:
        raise ConfigurationError("anneal.init_scale must be positive")
    restarts = values.get("refine.restarts", 5)
    if restarts < 1:
        raise ConfigurationError("refine.restarts must be >= 1")
    weight = values.get("refine.weight", 1.0)
    if weight < 0:
        raise ConfigurationError("refine.weight must be nonnegative")

    return ExperimentConfig(
        mode=mode,
        dim=dim,
        pattern=pattern,
        grid_points=grid_points,
        grid_bound=values.get("grid.bound"),
        grid_cells=grid_cells,
        cluster_policy=policy,
        theta_ref=theta_ref,
        anneal=anneal_cfg,
        init_scale=init_scale,
        refine=RefineSettings(weight, restarts, m, refine_schedule),
        output_dir=values.get("output.dir", "."),
    )


def _build_cluster(cfg: ExperimentConfig, b):
    bound = cfg.grid_bound if cfg.grid_bound is not None else bloch_radius_bound(cfg.dim)
    spec = GridSpec(cfg.grid_points, bound, cfg.pattern)
    states = generate_grid(spec, b)
    log.info("grid: %d PSD states", states.shape[0])
    clusters = cluster_states(states, cfg.grid_cells, b)
    cl = select_cluster(
        clusters, cfg.cluster_policy, theta_ref=cfg.theta_ref, basis=b, pattern=cfg.pattern
    )
    log.info("cluster %s with %d members", cl.key, cl.size)
    return clusters, cl


def _report_text(P, cfg, extra=()):
    rep = catalog.conditional_sic_report(P, cfg.pattern)
    mk = metrics(P)
    lines = [catalog.report_to_text(rep), ""]
    lines += [
        f"sigma  {mk.sigma!r}",
        f"delta  {mk.delta!r}",
        f"Delta  {mk.Delta!r}",
    ]
    lines += list(extra)
    return "\n".join(lines) + "\n"


def _run_anneal(cfg: ExperimentConfig, workers: int) -> int:
    b = gell_mann_basis(cfg.dim)
    _, cl = _build_cluster(cfg, b)
    init_rng = np.random.default_rng([cfg.anneal.rng_seed, 1])
    initial = random_initial_povm(cfg.pattern, b, init_rng, cfg.init_scale)
    result = anneal(cfg.anneal, initial, cl, b, cfg.pattern, workers=workers)
    out = cfg.output_dir
    os.makedirs(out, exist_ok=True)
    write_trace(result.trace, os.path.join(out, "trace.csv"))
    write_povm(result.best, os.path.join(out, "best_povm.txt"))
    extra = (
        f"dacm_best  {result.best_dacm!r}",
        f"log_dacm_best  {math.log(result.best_dacm)!r}",
        f"steps  {cfg.anneal.total_steps}",
        f"seed  {cfg.anneal.rng_seed}",
        f"skipped_variants  {result.skipped_variants}",
    )
    with open(os.path.join(out, "report.txt"), "w") as fh:
        fh.write(_report_text(result.best, cfg, extra))
    log.info("best DACM %.6g after %d steps", result.best_dacm, cfg.anneal.total_steps)
    return EXIT_OK


def _run_refine(cfg: ExperimentConfig, workers: int) -> int:
    n = cfg.dim
    m = cfg.refine.element_count or cfg.pattern.unknown_count + 1
    base_seed = cfg.refine.schedule.rng_seed
    best = None
    for r in range(cfg.refine.restarts):
        rng = np.random.default_rng([base_seed, r])
        initial = rankone.random_phases(n, m, rng)
        schedule = replace(cfg.refine.schedule, rng_seed=base_seed + r)
        res = rankone.refine(initial, schedule, cfg.refine.weight)
        log.info("restart %d: objective %.3e", r, res.objective)
        if best is None or res.objective < best.objective:
            best = res
    pov, violations = rankone.phases_to_povm(best.phases)
    out = cfg.output_dir
    os.makedirs(out, exist_ok=True)
    rankone.write_phases(best.phases, os.path.join(out, "phases.csv"))
    write_povm(pov, os.path.join(out, "povm.txt"))
    extra = [
        f"objective  {best.objective!r}",
        f"restarts  {cfg.refine.restarts}",
        f"seed  {base_seed}",
    ]
    if violations:
        extra += [f"violation  {v.name} {v.magnitude!r}" for v in violations]
    with open(os.path.join(out, "report.txt"), "w") as fh:
        fh.write(_report_text(pov, cfg, extra))
    log.info("best refine objective %.3e", best.objective)
    return EXIT_OK


def _run_gridinfo(cfg: ExperimentConfig) -> int:
    b = gell_mann_basis(cfg.dim)
    print(f"# basis index map (dim = {cfg.dim})")
    for i, label in enumerate(b.labels, 1):
        tag = ""
        if i in cfg.pattern.known_indices:
            v = float(cfg.pattern.known_values[cfg.pattern.known_indices.index(i)])
            tag = f"\tknown = {v!r}"
        print(f"{i}\t{label}{tag}")
    clusters, selected = _build_cluster(cfg, b)
    print(f"# clusters (cells = {cfg.grid_cells})")
    print("key\tsize\trepresentative_eigenvalues\tselected")
    for key in sorted(clusters):
        cl = clusters[key]
        evals = linalg.hermitian_eigenvalues(bloch_to_state(cl.members[0], b))
        mark = "*" if key == selected.key else ""
        print(
            ",".join(str(k) for k in key)
            + f"\t{cl.size}\t"
            + " ".join(f"{v:.6f}" for v in evals)
            + f"\t{mark}"
        )
    return EXIT_OK


def _verify_checks():
    """The catalog oracle suite: (name, callable) pairs returning residuals."""
    qutrit = catalog.qutrit_csic()
    trine = catalog.qubit_trine()
    units = catalog.diag_units_dim4()
    tensor = catalog.sic_tensor_identity_dim4()
    pat3 = ParameterPattern.from_known(3, DEFAULT_KNOWN[3])
    pat2 = ParameterPattern.from_known(2, DEFAULT_KNOWN[2])
    pat4 = ParameterPattern.from_known(4, DEFAULT_KNOWN[4])
    pat4_tensor = ParameterPattern.from_known(
        4, {i: 0.0 for i in range(1, 16) if i not in (4, 8, 12)}
    )

    def closeness(value, target):
        return abs(value - target)

    checks = []

    def add(name, fn, tol=1e-12):
        checks.append((name, fn, tol))

    add(
        "qutrit sum = I",
        lambda: float(np.abs(sum(qutrit.elements) - np.eye(3)).max()),
    )
    add(
        "qutrit eigenvalues (3/7, 0, 0)",
        lambda: max(
            float(np.abs(linalg.hermitian_eigenvalues(e) - np.array([3 / 7, 0, 0])).max())
            for e in qutrit.elements
        ),
    )
    add(
        "qutrit diagonals 1/7",
        lambda: max(float(np.abs(np.diag(e) - 1 / 7).max()) for e in qutrit.elements),
    )
    add(
        "qutrit cross-overlaps 2/49",
        lambda: max(
            closeness(linalg.hs_inner(qutrit.elements[i], qutrit.elements[j]), 2 / 49)
            for i in range(7)
            for j in range(7)
            if i != j
        ),
    )
    add(
        "qutrit quasi-orthogonal to diagonal directions",
        lambda: catalog.conditional_sic_report(qutrit, pat3).max_quasi_orthogonality_violation,
    )
    add(
        "qutrit report verdict (c = 3/7, d = 2/49)",
        lambda: 0.0
        if (
            (rep := catalog.conditional_sic_report(qutrit, pat3)).verdict
            and abs(rep.c - 3 / 7) < 1e-12
            and abs(rep.d - 2 / 49) < 1e-12
        )
        else 1.0,
    )
    add(
        "trine sum P = (3/2) I",
        lambda: float(np.abs(sum(1.5 * e for e in trine.elements) - 1.5 * np.eye(2)).max()),
    )
    add(
        "trine Tr P_i P_j = 1/4",
        lambda: max(
            closeness(linalg.hs_inner(1.5 * trine.elements[i], 1.5 * trine.elements[j]), 0.25)
            for i in range(3)
            for j in range(3)
            if i != j
        ),
    )
    add(
        "trine complementary to z",
        lambda: catalog.conditional_sic_report(trine, pat2).max_quasi_orthogonality_violation,
    )
    add(
        "trine report verdict (c = 2/3, d = 1/9)",
        lambda: 0.0
        if (
            (rep := catalog.conditional_sic_report(trine, pat2)).verdict
            and abs(rep.c - 2 / 3) < 1e-12
            and abs(rep.d - 1 / 9) < 1e-12
        )
        else 1.0,
    )
    add(
        "qubit SIC constants (mu = 1/3 tetrahedron)",
        lambda: max(
            closeness(4.0 * linalg.hs_inner(f, g), 1 / 3)
            for i, f in enumerate(catalog.qubit_sic())
            for j, g in enumerate(catalog.qubit_sic())
            if i != j
        ),
    )
    add("diag units sum = I", lambda: float(np.abs(sum(units.elements) - np.eye(4)).max()))
    add(
        "diag units pairwise overlaps 0",
        lambda: max(
            abs(linalg.hs_inner(units.elements[i], units.elements[j]))
            for i in range(4)
            for j in range(4)
            if i != j
        ),
    )
    add(
        "diag units report verdict",
        lambda: 0.0 if catalog.conditional_sic_report(units, pat4).verdict else 1.0,
    )
    add(
        "tensor SIC eigenvalues (1/2, 1/2, 0, 0)",
        lambda: max(
            float(
                np.abs(linalg.hermitian_eigenvalues(e) - np.array([0.5, 0.5, 0, 0])).max()
            )
            for e in tensor.elements
        ),
    )
    add(
        "tensor SIC cross-overlaps 1/6",
        lambda: max(
            closeness(linalg.hs_inner(tensor.elements[i], tensor.elements[j]), 1 / 6)
            for i in range(4)
            for j in range(4)
            if i != j
        ),
    )
    add("tensor SIC sum = I", lambda: float(np.abs(sum(tensor.elements) - np.eye(4)).max()))
    add(
        "tensor SIC report verdict",
        lambda: 0.0 if catalog.conditional_sic_report(tensor, pat4_tensor).verdict else 1.0,
    )
    for name, pov, tol in (
        ("qutrit", qutrit, 1e-12),
        ("trine", trine, 1e-12),
        ("diag units", units, 1e-12),
        ("tensor SIC", tensor, 1e-12),
    ):
        add(
            f"{name} povm valid at 1e-12",
            lambda pov=pov, tol=tol: 0.0 if not validate(pov, tol) else 1.0,
        )
    return checks


def _run_verify() -> int:
    failures = 0
    for name, fn, tol in _verify_checks():
        try:
            residual = fn()
            ok = residual <= tol
        except PovmLabError as exc:
            residual, ok = float("nan"), False
            log.error("%s raised %s", name, exc)
        status = "ok" if ok else "FAIL"
        print(f"{status}\t{name}\t{residual:.3e}")
        if not ok:
            failures += 1
    print(f"{'ok' if failures == 0 else 'FAIL'}\t{len(_verify_checks()) - failures} passed, {failures} failed")
    return EXIT_OK if failures == 0 else EXIT_VERIFY_FAILED


def run(cfg: ExperimentConfig, workers: int = 1) -> int:
    """Dispatch one experiment; returns the process exit code."""
    try:
        if cfg.mode == "anneal":
            return _run_anneal(cfg, workers)
        if cfg.mode == "refine":
            return _run_refine(cfg, workers)
        if cfg.mode == "gridinfo":
            return _run_gridinfo(cfg)
        if cfg.mode == "verify":
            return _run_verify()
        raise ConfigurationError(f"unknown mode {cfg.mode!r}")
    except (ConfigurationError, EmptyClusterSelection) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except PovmLabError as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL


def _setup_logging():
    level = {"quiet": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(
        os.environ.get("POVM_LAB_LOG", "info"), logging.INFO
    )
    logging.basicConfig(level=level, format="%(levelname)s %(message)s", stream=sys.stderr)


def main(argv=None) -> int:
    _setup_logging()
    parser = argparse.ArgumentParser(
        prog="povm-lab",
        description="Search and certify optimal POVMs for tomography with known parameters.",
    )
    parser.add_argument("mode", choices=MODES)
    parser.add_argument("--config", help="experiment config file (optional for verify)")
    parser.add_argument("--seed", type=int, help="override the anneal/refine seed")
    parser.add_argument("--workers", type=int, default=1, help="cluster-sum chunk count")
    parser.add_argument("--out", help="override output.dir")
    args = parser.parse_args(argv)

    try:
        if args.config is not None:
            try:
                with open(args.config) as fh:
                    text = fh.read()
            except OSError as exc:
                raise ConfigurationError(f"cannot read config: {exc}") from exc
            cfg = parse_config(text, mode=args.mode)
        elif args.mode == "verify":
            cfg = build_config({}, mode="verify")
        else:
            raise ConfigurationError(f"mode {args.mode!r} requires --config")
        if args.seed is not None:
            cfg.anneal = replace(cfg.anneal, rng_seed=args.seed)
            cfg.refine.schedule = replace(cfg.refine.schedule, rng_seed=args.seed)
        if args.out is not None:
            cfg.output_dir = args.out
        if args.workers < 1:
            raise ConfigurationError("--workers must be >= 1")
    except ConfigurationError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    return run(cfg, workers=args.workers)


if __name__ == "__main__":
    sys.exit(main())
