"""Fairness certificates and certified reference optima for small instances.

A feasible ``y* = Bx*`` with positive entries is the (w, alpha)-fair optimum exactly
when no feasible ``y`` improves the linear form ``sum_r w_r (y_r - y*_r) / y*_r^alpha``.
The certificate evaluates that maximum with the dense simplex from :mod:`fairshare.lp`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import admm
from .instance import Instance, single_domain
from .lp import maximize
from .penalty import penalty_bound

log = logging.getLogger(__name__)


class CertificateError(ValueError):
    pass


class ReferenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class Certificate:
    candidate_y: dict[str, float]
    violation: float
    tolerance: float

    @property
    def certified(self) -> bool:
        return self.violation <= self.tolerance


def _matrices(instance: Instance):
    lay = admm.Layout.build(instance)
    A = np.zeros((len(lay.link_ids), len(lay.path_ids)))
    A[lay.copy_link, lay.copy_path] = 1.0
    return lay, A


def fairness_certificate(instance: Instance, candidate_x, tolerance: float = 1e-9,
                         feasibility_tol: float = 1e-9) -> Certificate:
    """Largest first-order improvement any feasible allocation offers over ``candidate_x``.

    Parameters
    ----------
    candidate_x : array or dict
        Per-path allocation, in request-major path order or keyed by path id.
    tolerance : float
        The candidate is certified when the violation does not exceed it.

    Raises
    ------
    CertificateError
        If the candidate breaks a capacity or sign constraint, or leaves a request
        with a zero aggregate.
    """
    lay, A = _matrices(instance)
    x = admm._per_path(lay, candidate_x, 0.0, "candidate_x")
    if np.any(x < -feasibility_tol):
        raise CertificateError("candidate has negative path allocations")
    over = A @ x - lay.caps
    if over.size and over.max() > feasibility_tol * max(1.0, lay.caps.max()):
        j = int(np.argmax(over))
        raise CertificateError(f"candidate exceeds the capacity of link {lay.link_ids[j]!r} by {over[j]:.3g}")
    y = lay.aggregate(np.maximum(x, 0.0))
    if np.any(y <= 0):
        r = lay.request_ids[int(np.argmin(y))]
        raise CertificateError(f"request {r!r} has a zero aggregate")
    alpha = instance.alpha
    price = lay.weights / y ** alpha
    res = maximize(price[lay.path_request], A, lay.caps)
    violation = res.value - float(np.sum(lay.weights * y ** (1.0 - alpha)))
    return Certificate(dict(zip(lay.request_ids, map(float, y))), float(violation), tolerance)


@dataclass(frozen=True)
class Reference:
    y: dict[str, float]
    x: dict[str, float]
    certificate: Certificate
    iterations: int


def solve_reference(instance: Instance, tol: float = 1e-6, max_iters: int = 200_000,
                    certify_tol: float | None = None) -> Reference:
    """Single-domain FD-ADMM to residual ``tol``, returned only once certified.

    The residuals are scaled by 1/lambda, which lets a large lambda stop early, so the
    run also waits until the consensus point moves by less than ``tol * 1e-4`` per
    round. The certificate tolerance defaults to ``1e-4 * sum(w)``.
    """
    lam = admm.default_lambda(instance)
    state = admm.init_state(instance, single_domain(instance), lam)
    stop = admm.StopRule(residual_threshold=tol, max_iters=max_iters, step_threshold=tol * 1e-4)
    trace = admm.solve(state, stop)
    if not trace.converged:
        raise ReferenceError(f"reference solve did not reach residual {tol} in {max_iters} rounds")
    x = trace.feasible
    if certify_tol is None:
        certify_tol = 1e-4 * float(state.layout.weights.sum())
    cert = fairness_certificate(instance, x, tolerance=certify_tol)
    if not cert.certified:
        raise ReferenceError(f"reference failed certification: violation {cert.violation:.3g}")
    log.debug("reference certified after %d rounds", trace.iterations)
    return Reference(cert.candidate_y, admm.path_values(state, x), cert, trace.iterations)


@dataclass(frozen=True)
class BoundReport:
    d: dict[str, float]
    y_star: dict[str, float]
    slack: float
    tolerance: float

    @property
    def holds(self) -> bool:
        return all(self.d[r] <= self.y_star[r] + self.tolerance for r in self.d)

    def violations(self) -> list[str]:
        return [r for r in self.d if self.d[r] > self.y_star[r] + self.tolerance]


def lower_bound_check(instance: Instance, reference: Reference | None = None,
                      tolerance: float = 1e-6) -> BoundReport:
    """Compare the per-request lower bounds d_r with the reference optimum."""
    bound = penalty_bound(instance)
    ref = reference or solve_reference(instance)
    slack = min(ref.y[r] - bound.d[r] for r in bound.d)
    return BoundReport(bound.d, ref.y, slack, tolerance)
