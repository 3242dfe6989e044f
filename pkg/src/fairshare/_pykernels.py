"""Pure numpy kernels. Used when the compiled extension is unavailable or disabled.

Segments are described CSR-style: ``offsets[s]:offsets[s + 1]`` indexes the entries
of segment ``s`` (one segment per link for projections, one per request for proxes).
"""

import math

import numpy as np

from .errors import ProxConvergenceError

ROOT_RTOL = 1e-14
MAX_NEWTON = 200


def positive_root(S, lw, alpha):
    """Unique y > 0 with y**(alpha+1) - S*y**alpha - lw = 0 (lw > 0)."""
    S = float(S)
    lw = float(lw)
    if alpha == 1.0:
        disc = math.sqrt(S * S + 4.0 * lw)
        return 0.5 * (S + disc) if S >= 0 else 2.0 * lw / (disc - S)
    # h(y) = y - S - lw*y^-alpha is increasing and concave on y > 0
    hi = max(S, 0.0) + lw ** (1.0 / (alpha + 1.0)) + 1.0
    if S < 0:
        hi = min(hi, (lw / -S) ** (1.0 / alpha))
    lo = (lw / (hi - S)) ** (1.0 / alpha)
    if S > lo:
        lo = S
    y = hi
    for _ in range(MAX_NEWTON):
        ya = y ** -alpha
        h = y - S - lw * ya
        if h > 0:
            hi = y
        elif h < 0:
            lo = y
        else:
            return y
        yn = y - h / (1.0 + alpha * lw * ya / y)
        if abs(yn - y) <= ROOT_RTOL * yn:
            return yn
        if not (lo < yn < hi):
            yn = 0.5 * (lo + hi)
            if yn == lo or yn == hi:
                return yn
        y = yn
    return y


def positive_roots(S, lw, alpha):
    """Vectorised :func:`positive_root`."""
    S = np.asarray(S, dtype=float)
    lw = np.asarray(lw, dtype=float)
    if alpha == 1.0:
        disc = np.sqrt(S * S + 4.0 * lw)
        with np.errstate(divide="ignore", invalid="ignore"):
            neg = 2.0 * lw / (disc - S)
        return np.where(S >= 0, 0.5 * (S + disc), neg)
    hi = np.maximum(S, 0.0) + lw ** (1.0 / (alpha + 1.0)) + 1.0
    neg = S < 0
    with np.errstate(divide="ignore"):
        cap = np.where(neg, (lw / np.where(neg, -S, 1.0)) ** (1.0 / alpha), np.inf)
    hi = np.minimum(hi, cap)
    lo = np.maximum((lw / (hi - S)) ** (1.0 / alpha), S)
    y = hi.copy()
    active = np.ones(y.shape, dtype=bool)
    for _ in range(MAX_NEWTON):
        ya = y ** -alpha
        h = y - S - lw * ya
        hi = np.where(h > 0, y, hi)
        lo = np.where(h < 0, y, lo)
        yn = y - h / (1.0 + alpha * lw * ya / y)
        done = (np.abs(yn - y) <= ROOT_RTOL * yn) | (h == 0)
        outside = ~((lo < yn) & (yn < hi))
        yn = np.where(done, np.where(h == 0, y, yn), np.where(outside, 0.5 * (lo + hi), yn))
        y = np.where(active, yn, y)
        active &= ~done
        if not active.any():
            break
    return y


def project_simplex(v, radius):
    """Euclidean projection onto {z >= 0, sum(z) <= radius} by sorting."""
    v = np.asarray(v, dtype=float)
    pos = np.maximum(v, 0.0)
    if pos.sum() <= radius:
        return pos
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - radius
    k = np.arange(1, len(u) + 1)
    rho = np.count_nonzero(u - css / k > 0)
    tau = css[rho - 1] / rho
    return np.maximum(v - tau, 0.0)


def _segment_ids(offsets):
    counts = np.diff(offsets)
    return np.repeat(np.arange(len(counts)), counts), counts


def project_segments(values, offsets, caps):
    values = np.asarray(values, dtype=float)
    offsets = np.asarray(offsets)
    caps = np.asarray(caps, dtype=float)
    if values.size == 0:
        return values.copy()
    seg, counts = _segment_ids(offsets)
    nseg = len(counts)
    out = np.maximum(values, 0.0)
    over = np.bincount(seg, weights=out, minlength=nseg) > caps
    if not over.any():
        return out
    sel = over[seg]
    v = values[sel]
    s = seg[sel]
    order = np.lexsort((-v, s))
    v_sorted = v[order]
    s_sorted = s[order]
    start_of = np.flatnonzero(np.r_[True, s_sorted[1:] != s_sorted[:-1]])
    seg_len = np.diff(np.r_[start_of, len(s_sorted)])
    first = np.repeat(start_of, seg_len)
    csum = np.cumsum(v_sorted)
    base = np.r_[0.0, csum][first]
    css = csum - base - caps[s_sorted]
    k = np.arange(len(v_sorted)) - first + 1
    cond = v_sorted - css / k > 0
    rho = np.bincount(s_sorted, weights=cond, minlength=nseg).astype(np.int64)
    idx = start_of + rho[s_sorted[start_of]] - 1
    tau = np.zeros(nseg)
    segs = s_sorted[start_of]
    tau[segs] = css[idx] / rho[segs]
    out[sel] = np.maximum(v - tau[s], 0.0)
    return out


def prox_segments(anchor, offsets, lamw, alpha):
    """Closed-form minimiser of g(sum x) + ||x - anchor||^2 / (2 lam) per segment,
    ``lamw[s] = lam * w_s``."""
    anchor = np.asarray(anchor, dtype=float)
    if anchor.size == 0:
        return anchor.copy()
    seg, counts = _segment_ids(np.asarray(offsets))
    lamw = np.asarray(lamw, dtype=float)
    S = np.bincount(seg, weights=anchor, minlength=len(counts))
    y = positive_roots(S, counts * lamw, alpha)
    return lamw[seg] / y[seg] ** alpha + anchor


def prox_l1(anchor, lam, w, alpha, theta, x0, rtol=1e-13, max_iter=MAX_NEWTON):
    """Minimiser of g(sum x) + theta*||x - x0||_1 + ||x - anchor||^2 / (2 lam).

    With mu = w / y**alpha the optimality conditions give
    x = x0 + soft(anchor + lam*mu - x0, lam*theta), so the aggregate y solves the
    decreasing scalar equation F(y) = sum(x(y)) - y = 0, found by safeguarded Newton.
    """
    a = np.asarray(anchor, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    lw = lam * w
    t = lam * theta

    def xs(y):
        arg = a + lw * y ** -alpha - x0
        return x0 + np.sign(arg) * np.maximum(np.abs(arg) - t, 0.0), np.abs(arg) > t

    def F(y):
        x, act = xs(y)
        return x.sum() - y, act

    y = positive_root(a.sum(), len(a) * lw, alpha)
    fy, _ = F(y)
    if fy == 0:
        return xs(y)[0]
    lo = hi = y
    for _ in range(4 * max_iter):
        if fy > 0:
            lo, hi = hi, hi * 2.0
            fy, _ = F(hi)
            if fy <= 0:
                break
        else:
            hi, lo = lo, lo * 0.5
            fy, _ = F(lo)
            if fy >= 0:
                break
    else:
        raise ProxConvergenceError(f"could not bracket l1 prox root (last y={y!r})")
    y = 0.5 * (lo + hi)
    for _ in range(max_iter):
        fy, act = F(y)
        if fy > 0:
            lo = y
        elif fy < 0:
            hi = y
        else:
            break
        d = -alpha * lw * y ** (-alpha - 1.0) * act.sum() - 1.0
        yn = y - fy / d
        if not (lo < yn < hi):
            yn = 0.5 * (lo + hi)
        if abs(yn - y) <= rtol * yn or hi - lo <= rtol * y:
            y = yn
            break
        y = yn
    else:
        raise ProxConvergenceError(
            f"l1 prox did not converge: y={y!r}, bracket=({lo!r}, {hi!r}), residual={fy!r}")
    return xs(y)[0]


def prox_l1_segments(anchor, offsets, lam, w, alpha, theta, x0):
    anchor = np.asarray(anchor, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    w = np.asarray(w, dtype=float)
    out = np.empty_like(anchor)
    for s in range(len(offsets) - 1):
        a, b = offsets[s], offsets[s + 1]
        if b > a:
            out[a:b] = prox_l1(anchor[a:b], lam, w[s], alpha, theta, x0[a:b])
    return out
