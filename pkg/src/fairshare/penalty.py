"""Utopic allocations, the aggregate lower bound and the derived penalty lambda*."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instance import Instance, build_incidence, contending_requests
from .lp import LPError, maximize, maximize_by_vertices


class BoundError(ValueError):
    pass


@dataclass(frozen=True)
class PenaltyBound:
    a: dict[str, float]
    rho: dict[str, float]
    d: dict[str, float]
    lambda_star: float

    def table(self) -> list[tuple[str, float, float, float]]:
        return [(r, self.a[r], self.rho[r], self.d[r]) for r in self.a]


def utopic_allocation(instance: Instance, request, use_vertices: bool = False,
                      incidence=None, caps=None) -> float:
    """Largest aggregate the request reaches when every contender gets nothing.

    Dense simplex; vertex enumeration when asked, or when the simplex fails on a
    request with at most three paths.
    """
    inc = incidence or build_incidence(instance)
    req = instance.request_map()[request] if isinstance(request, str) else request
    caps = caps or instance.link_map()
    links = sorted(set().union(*(inc.path_to_links[p] for p in req.paths)))
    A = np.array([[1.0 if j in inc.path_to_links[p] else 0.0 for p in req.paths] for j in links])
    b = np.array([caps[j].capacity for j in links])
    c = np.ones(len(req.paths))
    if use_vertices:
        return maximize_by_vertices(c, A, b).value
    try:
        return maximize(c, A, b).value
    except LPError:
        if len(c) > 3:
            raise
        return maximize_by_vertices(c, A, b).value


def penalty_bound(instance: Instance) -> PenaltyBound:
    if not instance.requests:
        raise BoundError("no requests")
    alpha = instance.alpha
    w = {r.id: r.weight for r in instance.requests}
    inc = build_incidence(instance)
    caps = instance.link_map()
    contenders = contending_requests(instance, inc)
    a = {}
    for r in instance.requests:
        a[r.id] = utopic_allocation(instance, r, False, inc, caps)
        if not a[r.id] > 0:
            raise BoundError(f"request {r.id!r} has zero utopic allocation")
    rho = {r: w[r] / sum(w[s] for s in contenders[r]) * a[r] for r in a}
    if alpha >= 1:
        rho_min = min(rho.values())
        d = {r: rho_min ** (1.0 - 1.0 / alpha) * rho[r] ** (1.0 / alpha) for r in a}
    else:
        d = {
            r: (w[r] * a[r] / sum(w[s] * a[s] ** (1.0 - alpha) for s in contenders[r])) ** (1.0 / alpha)
            for r in a
        }
    low = min(w[r] / a[r] ** (alpha + 1) for r in a)
    high = max(w[r] / d[r] ** (alpha + 1) for r in a)
    return PenaltyBound(a, rho, d, alpha * (low * high) ** -0.5)


def lambda_star(instance: Instance) -> float:
    return penalty_bound(instance).lambda_star
