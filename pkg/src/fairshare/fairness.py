"""alpha-fair utilities and the per-request / per-link proximal kernels."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import kernels


@dataclass(frozen=True)
class FairnessParams:
    alpha: float
    weights: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if any(not w > 0 for w in self.weights.values()):
            raise ValueError("weights must be positive")


@dataclass(frozen=True)
class ProxInput:
    """One request's proximal subproblem: ``anchor`` holds x'_p - lam*v_p per path."""

    anchor: Sequence[float]
    lam: float
    weight: float
    alpha: float
    theta: float | None = None
    baseline: Sequence[float] | None = None

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if not np.all(np.isfinite(self.anchor)):
            raise ValueError("anchor must be finite")
        if self.theta is not None:
            if self.theta < 0:
                raise ValueError("theta must be nonnegative")
            if self.baseline is None or len(self.baseline) != len(self.anchor):
                raise ValueError("switching mode needs one baseline value per path")

    @property
    def switching(self) -> bool:
        return self.theta is not None


def alpha_utility(y, weights, alpha: float) -> float:
    """Sum of w_r log y_r (alpha = 1) or w_r y_r^(1-alpha) / (1-alpha)."""
    y = np.asarray(y, dtype=float)
    w = np.broadcast_to(np.asarray(weights, dtype=float), y.shape)
    if np.any(y <= 0):
        raise ValueError("utility needs strictly positive aggregates")
    if alpha == 1:
        return float(np.sum(w * np.log(y)))
    return float(np.sum(w * y ** (1.0 - alpha)) / (1.0 - alpha))


def request_cost(y: float, weight: float, alpha: float) -> float:
    """g_r = -f_r, +inf outside y > 0."""
    if y <= 0:
        return float("inf")
    if alpha == 1:
        return -weight * np.log(y)
    return -weight * y ** (1.0 - alpha) / (1.0 - alpha)


def project_simplex(point, radius: float) -> np.ndarray:
    """Euclidean projection onto {z >= 0, sum z <= radius}; O(n log n)."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    return kernels.project_simplex(np.asarray(point, dtype=float), float(radius))


def positive_root(S: float, lw: float, alpha: float) -> float:
    """The unique y > 0 with y^(alpha+1) - S y^alpha - lw = 0."""
    if not lw > 0:
        raise ValueError("lw must be positive")
    return float(kernels.positive_root(float(S), float(lw), float(alpha)))


def prox_request(inp: ProxInput) -> np.ndarray:
    """argmin_x g_r(sum x) + ||x - anchor||^2 / (2 lam).

    Stationarity makes every x_p - anchor_p equal to lam*w/y^alpha, so summing over
    the n paths gives y^(alpha+1) - S y^alpha - n*lam*w = 0 with S = sum(anchor).
    """
    if inp.switching:
        return prox_request_l1(inp)
    a = np.asarray(inp.anchor, dtype=float)
    y = positive_root(a.sum(), len(a) * inp.lam * inp.weight, inp.alpha)
    return inp.lam * inp.weight / y ** inp.alpha + a


def prox_request_l1(inp: ProxInput) -> np.ndarray:
    """Switching-cost variant: adds theta * ||x - x0||_1 to the objective."""
    if not inp.switching:
        return prox_request(inp)
    return kernels.prox_l1(np.asarray(inp.anchor, dtype=float), float(inp.lam), float(inp.weight),
                           float(inp.alpha), float(inp.theta), np.asarray(inp.baseline, dtype=float))


def prox_objective(x, inp: ProxInput) -> float:
    x = np.asarray(x, dtype=float)
    a = np.asarray(inp.anchor, dtype=float)
    val = request_cost(x.sum(), inp.weight, inp.alpha) + np.sum((x - a) ** 2) / (2 * inp.lam)
    if inp.switching:
        val += inp.theta * np.sum(np.abs(x - np.asarray(inp.baseline, dtype=float)))
    return float(val)
