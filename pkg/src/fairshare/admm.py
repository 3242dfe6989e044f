"""FD-ADMM: consensus ADMM over link domains with anytime-feasible extraction.

Every domain owns private copies of the path allocation: one vector ``z^j`` per
link it controls (entries for the paths crossing that link) and one vector
``x^m`` over the paths of the requests it hosts. A round runs, per domain,

1. consensus: average the contributions received from every domain sharing a path,
2. dual update of ``u`` (link copies) and ``v`` (request copies),
3. primal update: per-link simplex projection and per-request proximal step,
4. exchange: send the summed local copies of shared paths to the peers.

The consensus value of a path does not depend on how links are grouped into
domains, so the iterates are the same for every partition.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .fairness import alpha_utility
from .instance import (
    Instance,
    InstanceError,
    Partition,
    Path,
    Request,
    ensure_valid,
    make_partition,
    single_domain,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Layout:
    """Global integer numbering of links, requests, paths and link copies.

    Paths are numbered request by request so each request's paths are contiguous;
    link copies ``(j, p)`` are sorted by link, then path.
    """

    link_ids: tuple[str, ...]
    request_ids: tuple[str, ...]
    path_ids: tuple[str, ...]
    caps: np.ndarray
    weights: np.ndarray
    req_offsets: np.ndarray
    path_request: np.ndarray
    copy_link: np.ndarray
    copy_path: np.ndarray
    link_offsets: np.ndarray
    multiplicity: np.ndarray
    by_path: np.ndarray          # copy indices ordered by path
    path_copy_offsets: np.ndarray

    @property
    def num_copies(self) -> int:
        return len(self.copy_link) + len(self.path_ids)

    @classmethod
    def build(cls, instance: Instance) -> "Layout":
        ensure_valid(instance)
        link_pos = {l.id: i for i, l in enumerate(instance.links)}
        paths = instance.path_map()
        path_ids: list[str] = []
        req_offsets = [0]
        path_request: list[int] = []
        for r, req in enumerate(instance.requests):
            path_ids.extend(req.paths)
            path_request.extend([r] * len(req.paths))
            req_offsets.append(len(path_ids))
        pairs = sorted((link_pos[j], p) for p, pid in enumerate(path_ids) for j in paths[pid].links)
        copy_link = np.array([j for j, _ in pairs], dtype=np.int64)
        copy_path = np.array([p for _, p in pairs], dtype=np.int64)
        nlinks = len(instance.links)
        link_offsets = np.zeros(nlinks + 1, dtype=np.int64)
        np.cumsum(np.bincount(copy_link, minlength=nlinks), out=link_offsets[1:])
        per_path = np.bincount(copy_path, minlength=len(path_ids))
        by_path = np.lexsort((copy_link, copy_path))
        path_copy_offsets = np.zeros(len(path_ids) + 1, dtype=np.int64)
        np.cumsum(per_path, out=path_copy_offsets[1:])
        return cls(
            link_ids=tuple(l.id for l in instance.links),
            request_ids=tuple(r.id for r in instance.requests),
            path_ids=tuple(path_ids),
            caps=np.array([l.capacity for l in instance.links], dtype=float),
            weights=np.array([r.weight for r in instance.requests], dtype=float),
            req_offsets=np.array(req_offsets, dtype=np.int64),
            path_request=np.array(path_request, dtype=np.int64),
            copy_link=copy_link,
            copy_path=copy_path,
            link_offsets=link_offsets,
            multiplicity=(per_path + 1).astype(float),
            by_path=by_path.astype(np.int64),
            path_copy_offsets=path_copy_offsets,
        )

    def aggregate(self, x: np.ndarray) -> np.ndarray:
        """B x."""
        return np.bincount(self.path_request, weights=x, minlength=len(self.request_ids))

    def link_load(self, x: np.ndarray) -> np.ndarray:
        """A x."""
        return np.bincount(self.copy_link, weights=x[self.copy_path], minlength=len(self.link_ids))


@dataclass
class DomainState:
    """Private variables of one domain controller (all index arrays are global ids)."""

    index: int
    links: np.ndarray
    copies: np.ndarray            # global copy indices held, grouped by link
    link_offsets: np.ndarray      # local CSR offsets over ``copies``
    caps: np.ndarray
    requests: np.ndarray
    x_paths: np.ndarray           # global path index of each x entry
    req_offsets: np.ndarray
    weights: np.ndarray
    known: np.ndarray             # sorted global paths this domain holds copies of
    copy_slot: np.ndarray         # position in ``known`` of each link copy
    x_slot: np.ndarray            # position in ``known`` of each x entry
    multiplicity: np.ndarray      # |J_p| + 1 over ``known``
    z: np.ndarray
    u: np.ndarray
    x: np.ndarray
    v: np.ndarray
    z_tilde: np.ndarray
    contribution: np.ndarray
    baseline: np.ndarray | None = None

    def contribution_now(self) -> np.ndarray:
        c = np.bincount(self.copy_slot, weights=self.z, minlength=len(self.known)).astype(float)
        c[self.x_slot] += self.x
        return c


@dataclass
class SolverState:
    instance: Instance
    partition: Partition
    layout: Layout
    domains: list[DomainState]
    lam: float
    iteration: int = 0
    theta: float | None = None
    # routing: (sender, receiver) -> (slots in sender.known, slots in receiver.known)
    routes: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)
    floats_sent: np.ndarray | None = None
    z_tilde_prev: np.ndarray | None = None
    workers: int = 1

    @property
    def alpha(self) -> float:
        return self.instance.alpha

    @property
    def num_domains(self) -> int:
        return len(self.domains)

    @property
    def switching(self) -> bool:
        return self.theta is not None

    def copy(self) -> "SolverState":
        doms = [replace(d, z=d.z.copy(), u=d.u.copy(), x=d.x.copy(), v=d.v.copy(),
                        z_tilde=d.z_tilde.copy(), contribution=d.contribution.copy(),
                        baseline=None if d.baseline is None else d.baseline.copy())
                for d in self.domains]
        return replace(self, domains=doms,
                       floats_sent=None if self.floats_sent is None else self.floats_sent.copy(),
                       z_tilde_prev=None if self.z_tilde_prev is None else self.z_tilde_prev.copy())

    # -- global views, for observers only (no domain ever needs them) --

    def gather_z(self) -> np.ndarray:
        z = np.empty(len(self.layout.copy_link))
        for d in self.domains:
            z[d.copies] = d.z
        return z

    def gather_u(self) -> np.ndarray:
        u = np.empty(len(self.layout.copy_link))
        for d in self.domains:
            u[d.copies] = d.u
        return u

    def gather_x(self) -> np.ndarray:
        x = np.empty(len(self.layout.path_ids))
        for d in self.domains:
            x[d.x_paths] = d.x
        return x

    def gather_v(self) -> np.ndarray:
        v = np.empty(len(self.layout.path_ids))
        for d in self.domains:
            v[d.x_paths] = d.v
        return v

    def gather_z_tilde(self) -> np.ndarray:
        """Consensus point used in the latest round (identical in every domain holding it)."""
        zt = np.full(len(self.layout.path_ids), np.nan)
        for d in self.domains:
            zt[d.known] = d.z_tilde
        return zt

    def gather_baseline(self) -> np.ndarray | None:
        if not self.switching:
            return None
        x0 = np.empty(len(self.layout.path_ids))
        for d in self.domains:
            x0[d.x_paths] = d.baseline
        return x0


@dataclass(frozen=True)
class Residuals:
    primal: float
    dual: float


# ---------------------------------------------------------------------------
# construction


def _domain_state(m: int, layout: Layout, partition: Partition, init_x: np.ndarray) -> DomainState:
    link_pos = {j: i for i, j in enumerate(layout.link_ids)}
    req_pos = {r: i for i, r in enumerate(layout.request_ids)}
    links = np.array(sorted(link_pos[j] for j in partition.domain_links[m]), dtype=np.int64)
    copies = (np.concatenate([np.arange(layout.link_offsets[j], layout.link_offsets[j + 1])
                              for j in links]) if len(links) else np.zeros(0, dtype=np.int64))
    counts = layout.link_offsets[links + 1] - layout.link_offsets[links]
    link_offsets = np.zeros(len(links) + 1, dtype=np.int64)
    np.cumsum(counts, out=link_offsets[1:])
    requests = np.array(sorted(req_pos[r] for r in partition.domain_requests[m]), dtype=np.int64)
    x_paths = (np.concatenate([np.arange(layout.req_offsets[r], layout.req_offsets[r + 1])
                               for r in requests]) if len(requests) else np.zeros(0, dtype=np.int64))
    per_req = layout.req_offsets[requests + 1] - layout.req_offsets[requests]
    req_offsets = np.zeros(len(requests) + 1, dtype=np.int64)
    np.cumsum(per_req, out=req_offsets[1:])
    copy_paths = layout.copy_path[copies]
    known = np.union1d(copy_paths, x_paths).astype(np.int64)
    d = DomainState(
        index=m,
        links=links,
        copies=copies.astype(np.int64),
        link_offsets=link_offsets,
        caps=layout.caps[links],
        requests=requests,
        x_paths=x_paths.astype(np.int64),
        req_offsets=req_offsets,
        weights=layout.weights[requests],
        known=known,
        copy_slot=np.searchsorted(known, copy_paths).astype(np.int64),
        x_slot=np.searchsorted(known, x_paths).astype(np.int64),
        multiplicity=layout.multiplicity[known],
        z=init_x[copy_paths].astype(float),
        u=np.zeros(len(copies)),
        x=init_x[x_paths].astype(float),
        v=np.zeros(len(x_paths)),
        z_tilde=init_x[known].astype(float),
        contribution=np.zeros(len(known)),
    )
    d.contribution = d.contribution_now()
    return d


def _routes(domains: Sequence[DomainState]) -> dict[tuple[int, int], tuple[np.ndarray, np.ndarray]]:
    routes = {}
    for a in domains:
        for b in domains:
            if a.index == b.index:
                continue
            shared, ia, ib = np.intersect1d(a.known, b.known, assume_unique=True, return_indices=True)
            if len(shared):
                routes[(a.index, b.index)] = (ia.astype(np.int64), ib.astype(np.int64))
    return routes


def init_state(instance: Instance, partition: Partition | None = None, lam: float | None = None,
               init_point=None, theta: float | None = None, baseline=None,
               workers: int = 1) -> SolverState:
    """Fresh solver state: primal copies at ``init_point`` (zeros by default), duals zero.

    ``lam`` defaults to lambda* from the penalty bound. ``init_point`` and
    ``baseline`` are per-path arrays in :class:`Layout` path order or dicts keyed by path id.
    """
    layout = Layout.build(instance)
    partition = partition or single_domain(instance)
    _check_partition(instance, partition)
    if lam is None:
        lam = default_lambda(instance)
    if not (lam > 0 and math.isfinite(lam)):
        raise ValueError(f"penalty lambda must be positive, got {lam!r}")
    x_init = _per_path(layout, init_point, 0.0, "init_point")
    domains = [_domain_state(m, layout, partition, x_init) for m in range(partition.num_domains)]
    state = SolverState(instance, partition, layout, domains, float(lam), workers=workers)
    state.routes = _routes(domains)
    state.floats_sent = np.zeros((partition.num_domains, partition.num_domains), dtype=np.int64)
    if theta is not None:
        set_switching(state, theta, baseline)
    return state


def default_lambda(instance: Instance) -> float:
    from .penalty import lambda_star

    if not instance.requests:
        return 1.0
    return lambda_star(instance)


def _check_partition(instance: Instance, partition: Partition) -> None:
    ids = {l.id for l in instance.links}
    if set(partition.link_domain) != ids:
        raise InstanceError("partition does not cover exactly the instance links")
    if set(partition.request_domain) != {r.id for r in instance.requests}:
        raise InstanceError("partition requests do not match the instance")


def _per_path(layout: Layout, values, default: float, what: str) -> np.ndarray:
    n = len(layout.path_ids)
    if values is None:
        return np.full(n, default)
    if isinstance(values, dict):
        return np.array([float(values.get(p, default)) for p in layout.path_ids])
    arr = np.asarray(values, dtype=float)
    if arr.shape != (n,):
        raise ValueError(f"{what} must have one entry per path ({n}), got shape {arr.shape}")
    return arr.copy()


def set_switching(state: SolverState, theta: float | None, baseline=None) -> None:
    """Enable (theta >= 0) or disable (None) the l1 switching cost around ``baseline``."""
    if theta is None:
        state.theta = None
        for d in state.domains:
            d.baseline = None
        return
    if theta < 0:
        raise ValueError("theta must be nonnegative")
    x0 = _per_path(state.layout, baseline, 0.0, "baseline") if baseline is not None else (
        state.gather_baseline() if state.switching else feasible_point(state))
    state.theta = float(theta)
    for d in state.domains:
        d.baseline = x0[d.x_paths].copy()


# ---------------------------------------------------------------------------
# the three stages


def consensus(state: SolverState) -> None:
    """Stage 2: every domain sums the contributions of the domains sharing each path
    (ascending domain order) and divides by |J_p| + 1."""
    for d in state.domains:
        acc = np.zeros(len(d.known))
        for m in range(state.num_domains):
            if m == d.index:
                acc += d.contribution
            else:
                route = state.routes.get((m, d.index))
                if route is not None:
                    src, dst = route
                    acc[dst] += state.domains[m].contribution[src]
        d.z_tilde = acc / d.multiplicity


def dual_update(state: SolverState) -> None:
    """Stage 3: u += (z - z~)/lam, v += (x - z~)/lam."""
    inv = 1.0 / state.lam
    for d in state.domains:
        d.u += inv * (d.z - d.z_tilde[d.copy_slot])
        d.v += inv * (d.x - d.z_tilde[d.x_slot])


def _primal_domain(state: SolverState, d: DomainState) -> None:
    lam = state.lam
    if len(d.copies):
        d.z = kernels.project_segments(d.z_tilde[d.copy_slot] - lam * d.u, d.link_offsets, d.caps)
    if len(d.x_paths):
        anchor = d.z_tilde[d.x_slot] - lam * d.v
        if state.switching:
            d.x = kernels.prox_l1_segments(anchor, d.req_offsets, lam, d.weights, state.alpha,
                                           state.theta, d.baseline)
        else:
            d.x = kernels.prox_segments(anchor, d.req_offsets, lam * d.weights, state.alpha)


def primal_update(state: SolverState) -> None:
    """Stage 1: independent per-link projections and per-request proximal steps."""
    if state.workers > 1 and state.num_domains > 1:
        with ThreadPoolExecutor(max_workers=state.workers) as pool:
            list(pool.map(lambda d: _primal_domain(state, d), state.domains))
    else:
        for d in state.domains:
            _primal_domain(state, d)


def exchange(state: SolverState) -> None:
    """Build each domain's contribution and account the floats sent to every peer."""
    for d in state.domains:
        d.contribution = d.contribution_now()
    for (a, b), (src, _) in state.routes.items():
        state.floats_sent[a, b] += len(src)


def pair_float_counts(state: SolverState) -> np.ndarray:
    """Floats domain m sends domain n per round, from incidence: |K_m & K_n| where K_m
    are the paths m holds copies of."""
    M = state.num_domains
    out = np.zeros((M, M), dtype=np.int64)
    for a in state.domains:
        for b in state.domains:
            if a.index != b.index:
                out[a.index, b.index] = len(np.intersect1d(a.known, b.known))
    return out


def iterate(state: SolverState) -> SolverState:
    """One synchronous round: consensus, duals, primal, exchange."""
    state.z_tilde_prev = state.gather_z_tilde()
    consensus(state)
    dual_update(state)
    primal_update(state)
    exchange(state)
    state.iteration += 1
    return state


# ---------------------------------------------------------------------------
# observers


def feasible_point(state: SolverState) -> np.ndarray:
    """Per-path minimum over the link copies; capacity feasible at every round."""
    lay = state.layout
    if len(lay.path_ids) == 0:
        return np.zeros(0)
    z = state.gather_z()[lay.by_path]
    return np.minimum.reduceat(z, lay.path_copy_offsets[:-1])


def residuals(state: SolverState) -> Residuals:
    """Consensus residuals of the latest round, root-N normalised.

    Primal: every copy against the consensus point it was computed from. Dual: the
    multiplicity-weighted change of the consensus point over the round, scaled by
    1/lambda. Before the first round both are zero.
    """
    lay = state.layout
    n = lay.num_copies
    if n == 0 or state.z_tilde_prev is None:
        return Residuals(0.0, 0.0)
    zc = state.gather_z_tilde()
    z = state.gather_z()
    x = state.gather_x()
    primal = math.sqrt(float(np.sum((z - zc[lay.copy_path]) ** 2) + np.sum((x - zc) ** 2)) / n)
    dual = math.sqrt(float(np.sum(lay.multiplicity * (zc - state.z_tilde_prev) ** 2)) / n) / state.lam
    return Residuals(primal, dual)


def fairness_value(instance: Instance, layout: Layout, x: np.ndarray) -> float:
    y = layout.aggregate(x)
    if len(y) == 0:
        return 0.0
    if np.any(y <= 0):
        return float("nan")
    return alpha_utility(y, layout.weights, instance.alpha)


def optimality_gap(phi: float, phi_star: float) -> float:
    if not math.isfinite(phi):
        return 1.0
    if phi_star == 0:
        return abs(phi)
    return abs(phi_star - phi) / abs(phi_star)


# ---------------------------------------------------------------------------
# driver

TRACE_COLUMNS = ("iteration", "primal_residual", "dual_residual", "fairness_value",
                 "optimality_gap", "feasible_min_slack", "floats_sent_total")


@dataclass
class IterationTrace:
    rows: list[tuple] = field(default_factory=list)
    converged: bool = False
    lam: float = float("nan")
    pair_floats: np.ndarray | None = None
    feasible: np.ndarray | None = None
    z_tilde: list[np.ndarray] | None = None
    stop_reason: str = ""

    @property
    def iterations(self) -> int:
        """Rounds run by this solve (the iteration column keeps the state's global count)."""
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        i = TRACE_COLUMNS.index(name)
        return np.array([r[i] for r in self.rows], dtype=float)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for row in self.rows:
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()

    def pairs_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("source_domain", "target_domain", "floats_per_round"))
        if self.pair_floats is not None:
            M = self.pair_floats.shape[0]
            for a in range(M):
                for b in range(M):
                    if a != b:
                        w.writerow((a, b, int(self.pair_floats[a, b])))
        return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return ""
    return repr(float(v))


@dataclass(frozen=True)
class StopRule:
    residual_threshold: float = 1e-2
    max_iters: int = 10_000
    deadline_seconds: float | None = None   # wall clock, qualitative runs only
    step_threshold: float | None = None     # also require max |z~ change| below this


def solve(state: SolverState, stop: StopRule | None = None, phi_star: float | None = None,
          record_z_tilde: bool = False, callback=None) -> IterationTrace:
    """Run rounds until both residuals fall below the threshold or the budget ends.
    At least one round is always run."""
    stop = stop or StopRule()
    trace = IterationTrace(lam=state.lam, pair_floats=pair_float_counts(state))
    if record_z_tilde:
        trace.z_tilde = []
    lay = state.layout
    per_round = int(trace.pair_floats.sum())
    started = time.perf_counter()
    while True:
        iterate(state)
        res = residuals(state)
        zf = feasible_point(state)
        phi = fairness_value(state.instance, lay, zf)
        gap = optimality_gap(phi, phi_star) if phi_star is not None else None
        slack = float(np.min(lay.caps - lay.link_load(zf))) if len(lay.caps) else 0.0
        trace.rows.append((state.iteration, res.primal, res.dual, phi, gap, slack, per_round))
        if record_z_tilde:
            trace.z_tilde.append(state.gather_z_tilde())
        if callback is not None:
            callback(state, res)
        settled = stop.step_threshold is None or len(lay.path_ids) == 0 or (
            float(np.max(np.abs(state.gather_z_tilde() - state.z_tilde_prev))) < stop.step_threshold)
        if res.primal < stop.residual_threshold and res.dual < stop.residual_threshold and settled:
            trace.converged = True
            trace.stop_reason = "residuals"
            break
        if len(trace.rows) >= stop.max_iters:
            trace.stop_reason = "max_iters"
            break
        if stop.deadline_seconds is not None and time.perf_counter() - started > stop.deadline_seconds:
            trace.stop_reason = "deadline"
            break
    trace.feasible = feasible_point(state)
    log.info("solve stopped after %d rounds (%s)", trace.iterations, trace.stop_reason)
    return trace


# ---------------------------------------------------------------------------
# on-the-fly events


@dataclass(frozen=True)
class WeightChange:
    request: str
    weight: float


@dataclass(frozen=True)
class RequestAdd:
    request: Request
    paths: tuple[Path, ...]


@dataclass(frozen=True)
class RequestRemove:
    request: str


@dataclass(frozen=True)
class BaselineReset:
    theta: float | None = None


Event = WeightChange | RequestAdd | RequestRemove | BaselineReset


def apply_event(state: SolverState, event: Event) -> SolverState:
    """Apply a traffic change and warm-start from the current primal/dual values."""
    inst = state.instance
    reqs = inst.request_map()
    if isinstance(event, WeightChange):
        if event.request not in reqs:
            raise InstanceError(f"unknown request {event.request!r}")
        if not event.weight > 0:
            raise InstanceError("weight must be positive")
        state.instance = inst.with_weights({event.request: event.weight})
        r = state.layout.request_ids.index(event.request)
        state.layout = replace(state.layout, weights=state.layout.weights.copy())
        state.layout.weights[r] = event.weight
        for d in state.domains:
            hit = np.flatnonzero(d.requests == r)
            if len(hit):
                d.weights = d.weights.copy()
                d.weights[hit] = event.weight
        return state
    if isinstance(event, BaselineReset):
        set_switching(state, event.theta if event.theta is not None else (state.theta or 0.0),
                      feasible_point(state))
        return state
    if isinstance(event, RequestAdd):
        if event.request.id in reqs:
            raise InstanceError(f"request {event.request.id!r} already exists")
        new = Instance(inst.links, inst.paths + tuple(event.paths), inst.requests + (event.request,),
                       inst.alpha, inst.nodes, inst.edges)
    elif isinstance(event, RequestRemove):
        if event.request not in reqs:
            raise InstanceError(f"unknown request {event.request!r}")
        gone = set(reqs[event.request].paths)
        new = Instance(inst.links, tuple(p for p in inst.paths if p.id not in gone),
                       tuple(r for r in inst.requests if r.id != event.request),
                       inst.alpha, inst.nodes, inst.edges)
    else:
        raise TypeError(f"unknown event {event!r}")
    ensure_valid(new)
    return _rebuild(state, new)


def _rebuild(state: SolverState, instance: Instance) -> SolverState:
    """Carry every surviving copy and dual over to a re-laid-out state."""
    old = state.layout
    z, u, x, v = state.gather_z(), state.gather_u(), state.gather_x(), state.gather_v()
    zt = state.gather_z_tilde()
    x0 = state.gather_baseline()
    copy_key = {(old.link_ids[j], old.path_ids[p]): k
                for k, (j, p) in enumerate(zip(old.copy_link, old.copy_path))}
    path_key = {p: i for i, p in enumerate(old.path_ids)}

    partition = make_partition(instance, state.partition.link_domain, state.partition.num_domains)
    fresh = init_state(instance, partition, state.lam, workers=state.workers)
    lay = fresh.layout
    new_copy = np.array([copy_key.get((lay.link_ids[j], lay.path_ids[p]), -1)
                         for j, p in zip(lay.copy_link, lay.copy_path)], dtype=np.int64)
    new_path = np.array([path_key.get(p, -1) for p in lay.path_ids], dtype=np.int64)

    def carry(src, idx):
        out = np.zeros(len(idx))
        ok = idx >= 0
        out[ok] = src[idx[ok]]
        return out

    gz, gu = carry(z, new_copy), carry(u, new_copy)
    gx, gv, gzt = carry(x, new_path), carry(v, new_path), carry(zt, new_path)
    for d in fresh.domains:
        d.z, d.u = gz[d.copies], gu[d.copies]
        d.x, d.v = gx[d.x_paths], gv[d.x_paths]
        d.z_tilde = gzt[d.known]
        d.contribution = d.contribution_now()
    fresh.iteration = state.iteration
    fresh.floats_sent = np.zeros_like(fresh.floats_sent)
    if state.switching:
        set_switching(fresh, state.theta, carry(x0, new_path))
    return fresh


def solve_instance(instance: Instance, partition: Partition | None = None, lam: float | None = None,
                   stop: StopRule | None = None, **kw) -> tuple[SolverState, IterationTrace]:
    state = init_state(instance, partition, lam)
    return state, solve(state, stop, **kw)


def aggregate_by_id(state: SolverState, x: np.ndarray) -> dict[str, float]:
    y = state.layout.aggregate(x)
    return dict(zip(state.layout.request_ids, map(float, y)))


def path_values(state: SolverState, x: np.ndarray) -> dict[str, float]:
    return dict(zip(state.layout.path_ids, map(float, x)))


def iter_rounds(state: SolverState, n: int) -> Iterable[np.ndarray]:
    """Yield the consensus point of each of the next ``n`` rounds."""
    for _ in range(n):
        iterate(state)
        yield state.gather_z_tilde()
