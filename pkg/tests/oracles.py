"""Independent reference computations used by the tests.

None of these share code with the package kernels: projections come from grid
search, proxes from golden-section search on the aggregate, LPs from scipy and
vertex enumeration, and the l1 prox from cvxpy.
"""

import math

import numpy as np
from scipy.optimize import linprog, minimize_scalar


def grid_projection_2d(point, radius, steps=401):
    """Nearest point of a dense grid over {z >= 0, z1 + z2 <= radius}, refined once
    around the best cell."""
    p = np.asarray(point, dtype=float)

    def best_on(lo0, hi0, lo1, hi1):
        a = np.linspace(lo0, hi0, steps)
        b = np.linspace(lo1, hi1, steps)
        A, B = np.meshgrid(a, b, indexing="ij")
        ok = (A >= 0) & (B >= 0) & (A + B <= radius + 1e-12)
        d = np.where(ok, (A - p[0]) ** 2 + (B - p[1]) ** 2, np.inf)
        i = np.unravel_index(np.argmin(d), d.shape)
        return np.array([A[i], B[i]]), (hi0 - lo0) / (steps - 1)

    z, h = best_on(0.0, radius, 0.0, radius)
    for _ in range(3):
        z, h = best_on(max(0.0, z[0] - 2 * h), min(radius, z[0] + 2 * h),
                       max(0.0, z[1] - 2 * h), min(radius, z[1] + 2 * h))
    # the grid may miss the hypotenuse; snap by comparing with the segment projection
    t = np.clip((p[0] - p[1] + radius) / 2.0, 0.0, radius)
    edge = np.array([t, radius - t])
    if np.sum((edge - p) ** 2) < np.sum((z - p) ** 2):
        z = edge
    return z


def golden_prox(anchor, lam, w, alpha):
    """argmin_x g(sum x) + |x - anchor|^2 / (2 lam) via a 1-D search on y = sum x.

    For fixed y the inner minimum is reached at x = anchor + (y - S)/n, leaving
    phi(y) = g(y) + (y - S)^2 / (2 lam n).
    """
    a = np.asarray(anchor, dtype=float)
    n, S = len(a), a.sum()

    def g(y):
        return -w * math.log(y) if alpha == 1 else -w * y ** (1 - alpha) / (1 - alpha)

    def phi(y):
        return g(y) + (y - S) ** 2 / (2 * lam * n)

    hi = max(S, 0.0) + (n * lam * w) ** (1 / (alpha + 1)) + 10.0
    res = minimize_scalar(phi, bounds=(1e-12, hi), method="bounded",
                          options={"xatol": 1e-13 * max(1.0, hi), "maxiter": 2000})
    y = res.x
    return a + (y - S) / n


def lp_max(c, A, b):
    res = linprog(-np.asarray(c), A_ub=A, b_ub=b, bounds=[(0, None)] * len(c), method="highs")
    assert res.status == 0
    return -res.fun, res.x


def cvxpy_prox_l1(anchor, lam, w, alpha, theta, x0):
    import cvxpy as cp

    a = np.asarray(anchor, dtype=float)
    x = cp.Variable(len(a))
    y = cp.sum(x)
    if alpha == 1:
        g = -w * cp.log(y)
    elif alpha == 2:
        g = w * cp.inv_pos(y)
    else:
        raise ValueError("oracle covers alpha in {1, 2}")
    obj = g + theta * cp.norm1(x - x0) + cp.sum_squares(x - a) / (2 * lam)
    cp.Problem(cp.Minimize(obj)).solve(solver="CLARABEL")
    return np.asarray(x.value)


def cvxpy_fair_optimum(instance):
    """Aggregates of the alpha-fair optimum, for alpha in {1, 2}."""
    import cvxpy as cp

    links = {l.id: i for i, l in enumerate(instance.links)}
    paths = [p for r in instance.requests for p in r.paths]
    pmap = instance.path_map()
    A = np.zeros((len(links), len(paths)))
    for k, p in enumerate(paths):
        for j in pmap[p].links:
            A[links[j], k] = 1
    B = np.zeros((len(instance.requests), len(paths)))
    k = 0
    for r_i, r in enumerate(instance.requests):
        for _ in r.paths:
            B[r_i, k] = 1
            k += 1
    w = np.array([r.weight for r in instance.requests])
    x = cp.Variable(len(paths), nonneg=True)
    y = B @ x
    if instance.alpha == 1:
        obj = cp.Maximize(w @ cp.log(y))
    elif instance.alpha == 2:
        obj = cp.Maximize(-(w @ cp.inv_pos(y)))
    else:
        raise ValueError("oracle covers alpha in {1, 2}")
    cp.Problem(obj, [A @ x <= np.array([l.capacity for l in instance.links])]).solve(solver="CLARABEL")
    return B @ x.value
