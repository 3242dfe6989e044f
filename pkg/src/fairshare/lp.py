"""Small dense LPs of the form max c.x s.t. A x <= b, x >= 0 with b >= 0.

Tableau simplex with Bland's rule; the origin is feasible so no phase one is needed.
Problems here have at most a few hundred columns.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np


class LPError(RuntimeError):
    pass


@dataclass(frozen=True)
class LPResult:
    x: np.ndarray
    value: float
    iterations: int


def maximize(c, A, b, tol: float = 1e-11, max_iter: int = 50_000) -> LPResult:
    c = np.asarray(c, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    m, n = A.shape if A.size else (0, len(c))
    if m == 0:
        if np.any(c > tol):
            raise LPError("unbounded")
        return LPResult(np.zeros(n), 0.0, 0)
    if np.any(b < 0):
        raise LPError("right-hand side must be nonnegative")

    # rows: constraints; last row: reduced costs (negated objective)
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -c
    basis = list(range(n, n + m))
    scale = max(1.0, np.abs(c).max(initial=0.0))

    for it in range(max_iter):
        reduced = T[m, :-1]
        entering = next((j for j in range(n + m) if reduced[j] < -tol * scale), None)
        if entering is None:
            x = np.zeros(n + m)
            x[basis] = T[:m, -1]
            return LPResult(x[:n].clip(min=0.0), float(T[m, -1]), it)
        col = T[:m, entering]
        rows = np.flatnonzero(col > tol)
        if rows.size == 0:
            raise LPError("unbounded")
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + tol * max(1.0, abs(best))]
        leave = min(ties, key=lambda r: basis[r])
        T[leave] /= T[leave, entering]
        for r in range(m + 1):
            if r != leave and T[r, entering] != 0.0:
                T[r] -= T[r, entering] * T[leave]
        basis[leave] = entering
    raise LPError("iteration limit reached")


def maximize_by_vertices(c, A, b, tol: float = 1e-9) -> LPResult:
    """Exhaustive vertex enumeration; only for a handful of variables."""
    c = np.asarray(c, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    n = len(c)
    if n > 6:
        raise ValueError("vertex enumeration is for tiny problems")
    G = np.vstack([A, -np.eye(n)])
    h = np.concatenate([b, np.zeros(n)])
    best = None
    for rows in itertools.combinations(range(len(G)), n):
        sub = G[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        x = np.linalg.solve(sub, h[list(rows)])
        if np.all(G @ x <= h + tol):
            val = float(c @ x)
            if best is None or val > best.value:
                best = LPResult(x.clip(min=0.0), val, 0)
    if best is None:
        raise LPError("no vertex found")
    return best
