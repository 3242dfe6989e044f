"""Desk-scale experiments: convergence against the number of domains, and
switching-cost sweeps.

Every cell (domain count or theta, seed) owns its solver state, so cells may run
concurrently; results are sorted before they are written. CSV bodies contain no
timestamps, which makes reruns with the same seeds byte-identical. The manifest
carries the config hash, seeds, library version and creation time.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path as FsPath
from typing import Sequence

import numpy as np
from scipy import stats

from . import admm, oracle
from .fairness import alpha_utility
from .instance import Instance, read_instance
from .penalty import lambda_star
from .topology import generate_fat_tree, generate_instance, partition_domains, random_ba_instance

DEFAULT_THETAS = (0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0)


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment; ``instance`` is either ``{"file": path}`` or generator parameters
    ``{"kind": "ba", "nodes", "min_degree", "requests", "paths", "capacity", "link_mode"}``
    or ``{"kind": "fat_tree", "pods", "requests", "paths", "capacity"}``."""

    instance: dict
    alpha: float = 1.0
    domains: tuple[int, ...] = (1,)
    seeds: tuple[int, ...] = (0,)
    mode: str = "convergence"
    lam: float | None = None
    residual_threshold: float = 1e-2
    max_iters: int = 10_000
    reference_tol: float = 1e-6
    thetas: tuple[float, ...] = DEFAULT_THETAS
    weight_range: tuple[float, float] = (1.0, 10.0)
    epsilon: float = 1e-2
    workers: int = 1

    def __post_init__(self):
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if self.mode not in ("convergence", "reconfig"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if any(t < 0 for t in self.thetas):
            raise ValueError("theta values must be nonnegative")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.domains or any(m < 1 for m in self.domains):
            raise ValueError("domain counts must be >= 1")
        lo, hi = self.weight_range
        if not 0 < lo <= hi:
            raise ValueError("weight range must satisfy 0 < lo <= hi")

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        doc = dict(doc)
        for key in ("domains", "seeds", "thetas", "weight_range"):
            if key in doc:
                doc[key] = tuple(doc[key])
        return cls(**doc)

    @classmethod
    def load(cls, file) -> "ExperimentConfig":
        with open(file) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("domains", "seeds", "thetas", "weight_range"):
            d[key] = list(d[key])
        return d

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def build_instance(params: dict, seed: int, alpha: float) -> Instance:
    if "file" in params:
        return read_instance(params["file"]).with_alpha(alpha)
    kind = params.get("kind", "ba")
    paths = tuple(params.get("paths", (1, 4)))
    capacity = float(params.get("capacity", 100.0))
    if kind == "ba":
        return random_ba_instance(params.get("nodes", 30), params.get("requests", 40), paths, seed, alpha,
                                  capacity, params.get("min_degree", 4),
                                  link_mode=params.get("link_mode", "undirected"))
    if kind == "fat_tree":
        return generate_instance(generate_fat_tree(params.get("pods", 4)), params.get("requests"), paths,
                                 seed, alpha, capacity, params.get("link_mode", "undirected"))
    raise ValueError(f"unknown instance kind {kind!r}")


def mean_ci(samples: np.ndarray, level: float = 0.95) -> tuple[np.ndarray, np.ndarray]:
    """Column means and t-distribution half-widths (NaN with a single sample)."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    n = samples.shape[0]
    mean = samples.mean(axis=0)
    if n < 2:
        return mean, np.full_like(mean, np.nan)
    half = stats.t.ppf(0.5 + level / 2, n - 1) * samples.std(axis=0, ddof=1) / math.sqrt(n)
    return mean, half


def _check_feasible(state: admm.SolverState, x: np.ndarray, tol: float = 1e-9) -> None:
    lay = state.layout
    if np.any(x < 0) or np.any(lay.link_load(x) > lay.caps + tol):
        raise AssertionError("feasible point broke a capacity or sign constraint")


# ---------------------------------------------------------------------------
# convergence against the number of domains


@dataclass
class ConvergenceCell:
    domains: int
    seed: int
    gaps: np.ndarray          # index k = gap after k rounds; k = 0 is the zero start
    iterations: int
    converged: bool
    pair_floats: np.ndarray
    trace: admm.IterationTrace


@dataclass
class ConvergenceResult:
    config: ExperimentConfig
    cells: list[ConvergenceCell]

    def curve(self, domains: int) -> tuple[np.ndarray, np.ndarray, int]:
        """Mean gap and CI half-width per round; finished runs hold their last gap."""
        rows = [c.gaps for c in self.cells if c.domains == domains]
        length = max(len(g) for g in rows)
        padded = np.array([np.concatenate([g, np.full(length - len(g), g[-1])]) for g in rows])
        mean, half = mean_ci(padded)
        return mean, half, len(rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("domains", "iteration", "mean_gap", "ci95_half_width", "samples"))
        for m in sorted({c.domains for c in self.cells}):
            mean, half, n = self.curve(m)
            for k in range(len(mean)):
                w.writerow((m, k, repr(float(mean[k])), repr(float(half[k])), n))
        return buf.getvalue()

    def cells_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("domains", "seed", "iterations", "converged", "final_gap", "floats_per_round"))
        for c in sorted(self.cells, key=lambda c: (c.domains, c.seed)):
            w.writerow((c.domains, c.seed, c.iterations, int(c.converged), repr(float(c.gaps[-1])),
                        int(c.pair_floats.sum())))
        return buf.getvalue()


def _reference_value(instance: Instance, config: ExperimentConfig) -> float:
    """Phi* from the certified reference when the instance is small, else from a long
    self-run on one domain."""
    if len(instance.paths) <= 200:
        ref = oracle.solve_reference(instance, config.reference_tol)
        return alpha_utility(list(ref.y.values()), [r.weight for r in instance.requests], instance.alpha)
    state = admm.init_state(instance, lam=config.lam)
    trace = admm.solve(state, admm.StopRule(config.reference_tol, 20 * config.max_iters,
                                            step_threshold=config.reference_tol * 1e-4))
    return admm.fairness_value(instance, state.layout, trace.feasible)


def _convergence_cell(config: ExperimentConfig, seed: int, m: int, instance: Instance,
                      phi_star: float, lam: float) -> ConvergenceCell:
    partition = partition_domains(instance, m, seed)
    state = admm.init_state(instance, partition, lam)
    stop = admm.StopRule(config.residual_threshold, config.max_iters)
    trace = admm.solve(state, stop, phi_star=phi_star,
                       callback=lambda s, _: _check_feasible(s, admm.feasible_point(s)))
    gaps = np.concatenate([[1.0], trace.column("optimality_gap")])
    return ConvergenceCell(m, seed, gaps, trace.iterations, trace.converged, trace.pair_floats, trace)


def run_convergence(config: ExperimentConfig) -> ConvergenceResult:
    jobs = []
    for seed in config.seeds:
        instance = build_instance(config.instance, seed, config.alpha)
        phi_star = _reference_value(instance, config)
        lam = config.lam if config.lam is not None else lambda_star(instance)
        jobs += [(seed, m, instance, phi_star, lam) for m in config.domains]
    cells = _run_cells(config.workers, lambda job: _convergence_cell(config, *job), jobs)
    cells.sort(key=lambda c: (c.domains, c.seed))
    return ConvergenceResult(config, cells)


def _run_cells(workers: int, fn, jobs: Sequence) -> list:
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, jobs))
    return [fn(job) for job in jobs]


# ---------------------------------------------------------------------------
# switching-cost sweep


@dataclass(frozen=True)
class ReconfigResult:
    seed: int
    theta: float
    n: int
    phi: float
    psi: float
    iterations: int
    converged: bool


def reconfiguration_metrics(x: np.ndarray, x0: np.ndarray, epsilon: float) -> tuple[int, float]:
    """N_eps(x - x0) and the moved volume Psi over the paths that count as moved."""
    delta = np.abs(np.asarray(x) - np.asarray(x0))
    moved = delta > epsilon
    return int(moved.sum()), float(delta[moved].sum())


def _reconfig_seed(config: ExperimentConfig, seed: int) -> tuple[list[ReconfigResult], int]:
    instance = build_instance(config.instance, seed, config.alpha)
    base = instance.with_weights({r.id: 1.0 for r in instance.requests})
    # the incumbent must be optimal, so it is solved to reference precision
    state = admm.init_state(base, lam=config.lam if config.lam is not None else lambda_star(base))
    admm.solve(state, admm.StopRule(config.reference_tol, 20 * config.max_iters,
                                    step_threshold=config.reference_tol * 1e-4))
    x0 = admm.feasible_point(state)

    rng = np.random.default_rng([seed, 1])
    lo, hi = config.weight_range
    w1 = rng.uniform(lo, hi, size=len(instance.requests))
    target = instance.with_weights({r.id: float(w) for r, w in zip(instance.requests, w1)})
    for r, w in zip(instance.requests, w1):
        state = admm.apply_event(state, admm.WeightChange(r.id, float(w)))
    state.lam = config.lam if config.lam is not None else lambda_star(target)
    stop = admm.StopRule(config.residual_threshold, config.max_iters)

    free = state.copy()
    free_n, _ = reconfiguration_metrics(admm.solve(free, stop).feasible, x0, config.epsilon)
    out = []
    for theta in sorted(config.thetas):
        cell = state.copy()
        admm.set_switching(cell, theta, x0)
        trace = admm.solve(cell, stop)
        x = trace.feasible
        _check_feasible(cell, x)
        n, psi = reconfiguration_metrics(x, x0, config.epsilon)
        phi = admm.fairness_value(target, cell.layout, x)
        out.append(ReconfigResult(seed, float(theta), n, phi, psi, trace.iterations, trace.converged))
    return out, free_n


@dataclass
class ReconfigSweep:
    config: ExperimentConfig
    results: list[ReconfigResult]
    num_paths: dict[int, int] = field(default_factory=dict)
    unconstrained_n: dict[int, int] = field(default_factory=dict)

    def summary(self) -> list[dict]:
        rows = []
        for theta in sorted({r.theta for r in self.results}):
            cell = [r for r in self.results if r.theta == theta]
            stats_ = {}
            for key in ("n", "phi", "psi"):
                mean, half = mean_ci(np.array([[getattr(r, key)] for r in cell]))
                stats_[key] = (float(mean[0]), float(half[0]))
            rows.append({"theta": theta, "samples": len(cell), **{
                f"{k}_{s}": v[i] for k, v in stats_.items() for i, s in enumerate(("mean", "ci95"))}})
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("seed", "theta", "n", "phi", "psi", "iterations", "converged"))
        for r in sorted(self.results, key=lambda r: (r.seed, r.theta)):
            w.writerow((r.seed, repr(r.theta), r.n, repr(r.phi), repr(r.psi), r.iterations, int(r.converged)))
        return buf.getvalue()

    def summary_csv(self) -> str:
        rows = self.summary()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        keys = ("theta", "samples", "n_mean", "n_ci95", "phi_mean", "phi_ci95", "psi_mean", "psi_ci95")
        w.writerow(keys)
        for row in rows:
            w.writerow([row[k] if k == "samples" else repr(float(row[k])) for k in keys])
        return buf.getvalue()


def run_reconfig(config: ExperimentConfig) -> ReconfigSweep:
    per_seed = _run_cells(config.workers, lambda s: _reconfig_seed(config, s), list(config.seeds))
    results = sorted((r for rs, _ in per_seed for r in rs), key=lambda r: (r.seed, r.theta))
    sizes = {s: len(build_instance(config.instance, s, config.alpha).paths) for s in config.seeds}
    free = {s: n for s, (_, n) in zip(config.seeds, per_seed)}
    return ReconfigSweep(config, results, sizes, free)


# ---------------------------------------------------------------------------
# message overhead


@dataclass(frozen=True)
class OverheadRow:
    domains: int
    seed: int
    domain: int
    floats_per_round: int
    closed_form: int


def closed_form_floats(instance: Instance, partition) -> np.ndarray:
    """|P_m & P_n| for every ordered pair of distinct domains."""
    M = partition.num_domains
    out = np.zeros((M, M), dtype=np.int64)
    for a in range(M):
        for b in range(M):
            if a != b:
                out[a, b] = len(partition.domain_paths[a] & partition.domain_paths[b])
    return out


def overhead_report(result: ConvergenceResult) -> list[OverheadRow]:
    """Floats each domain sends its peers per round, next to the incidence-derived count."""
    rows = []
    cfg = result.config
    for cell in result.cells:
        instance = build_instance(cfg.instance, cell.seed, cfg.alpha)
        partition = partition_domains(instance, cell.domains, cell.seed)
        closed = closed_form_floats(instance, partition)
        for m in range(cell.domains):
            rows.append(OverheadRow(cell.domains, cell.seed, m, int(cell.pair_floats[m].sum()),
                                    int(closed[m].sum())))
    return rows


def overhead_csv(rows: Sequence[OverheadRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("domains", "seed", "domain", "floats_per_round", "closed_form"))
    for r in sorted(rows, key=lambda r: (r.domains, r.seed, r.domain)):
        w.writerow((r.domains, r.seed, r.domain, r.floats_per_round, r.closed_form))
    return buf.getvalue()


# ---------------------------------------------------------------------------
# output


def write_outputs(out_dir, config: ExperimentConfig, files: dict[str, str]) -> FsPath:
    """Write each CSV body plus ``manifest.json``; returns the manifest path."""
    from . import __version__

    out = FsPath(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, body in sorted(files.items()):
        (out / name).write_text(body)
    manifest = {
        "config": config.to_dict(),
        "config_hash": config.digest(),
        "seeds": list(config.seeds),
        "version": __version__,
        "backend": admm.kernels.BACKEND,
        "files": {name: hashlib.sha256(body.encode()).hexdigest() for name, body in sorted(files.items())},
        "created": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path
