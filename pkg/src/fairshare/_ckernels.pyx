# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of the segment kernels in ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, pow, fabs
from libc.stdlib cimport malloc, free, qsort

cnp.import_array()

from fairshare.errors import ProxConvergenceError

cdef int MAX_NEWTON = 200
cdef double ROOT_RTOL = 1e-14


cdef int _cmp_desc(const void *a, const void *b) noexcept nogil:
    cdef double x = (<double *>a)[0]
    cdef double y = (<double *>b)[0]
    if x < y:
        return 1
    if x > y:
        return -1
    return 0


cdef double _root(double S, double lw, double alpha) noexcept nogil:
    cdef double disc, hi, lo, y, yn, ya, h
    cdef int it
    if alpha == 1.0:
        disc = sqrt(S * S + 4.0 * lw)
        if S >= 0:
            return 0.5 * (S + disc)
        return 2.0 * lw / (disc - S)
    hi = (S if S > 0 else 0.0) + pow(lw, 1.0 / (alpha + 1.0)) + 1.0
    if S < 0:
        y = pow(lw / -S, 1.0 / alpha)
        if y < hi:
            hi = y
    lo = pow(lw / (hi - S), 1.0 / alpha)
    if S > lo:
        lo = S
    y = hi
    for it in range(MAX_NEWTON):
        ya = pow(y, -alpha)
        h = y - S - lw * ya
        if h > 0:
            hi = y
        elif h < 0:
            lo = y
        else:
            return y
        yn = y - h / (1.0 + alpha * lw * ya / y)
        if fabs(yn - y) <= ROOT_RTOL * yn:
            return yn
        if not (lo < yn < hi):
            yn = 0.5 * (lo + hi)
            if yn == lo or yn == hi:
                return yn
        y = yn
    return y


def positive_root(double S, double lw, double alpha):
    return _root(S, lw, alpha)


def positive_roots(S, lw, double alpha):
    cdef const double[::1] s = np.ascontiguousarray(S, dtype=np.float64).ravel()
    cdef const double[::1] l = np.ascontiguousarray(np.broadcast_to(lw, np.shape(S)), dtype=np.float64).ravel()
    out = np.empty(s.shape[0])
    cdef double[::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(s.shape[0]):
            o[i] = _root(s[i], l[i], alpha)
    return out.reshape(np.shape(S))


cdef void _project(const double *v, Py_ssize_t n, double cap, double *buf, double *out) noexcept nogil:
    cdef Py_ssize_t i
    cdef double s = 0.0, css = 0.0, tau = 0.0, t
    for i in range(n):
        if v[i] > 0:
            s += v[i]
    if s <= cap:
        for i in range(n):
            out[i] = v[i] if v[i] > 0 else 0.0
        return
    for i in range(n):
        buf[i] = v[i]
    qsort(buf, n, sizeof(double), _cmp_desc)
    for i in range(n):
        css += buf[i]
        t = (css - cap) / (i + 1)
        if buf[i] - t > 0:
            tau = t
        else:
            break
    for i in range(n):
        t = v[i] - tau
        out[i] = t if t > 0 else 0.0


def project_simplex(v, double radius):
    cdef const double[::1] vv = np.ascontiguousarray(v, dtype=np.float64).ravel()
    cdef Py_ssize_t n = vv.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    if n == 0:
        return out
    cdef double *buf = <double *>malloc(n * sizeof(double))
    with nogil:
        _project(&vv[0], n, radius, buf, &o[0])
    free(buf)
    return out


def project_segments(values, offsets, caps):
    cdef const double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef const long long[::1] off = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef const double[::1] c = np.ascontiguousarray(caps, dtype=np.float64)
    out = np.empty(v.shape[0])
    cdef double[::1] o = out
    cdef Py_ssize_t s, nseg = off.shape[0] - 1, widest = 1, n
    for s in range(nseg):
        n = off[s + 1] - off[s]
        if n > widest:
            widest = n
    if v.shape[0] == 0:
        return out
    cdef double *buf = <double *>malloc(widest * sizeof(double))
    with nogil:
        for s in range(nseg):
            n = off[s + 1] - off[s]
            if n > 0:
                _project(&v[off[s]], n, c[s], buf, &o[off[s]])
    free(buf)
    return out


def prox_segments(anchor, offsets, lamw, double alpha):
    cdef const double[::1] a = np.ascontiguousarray(anchor, dtype=np.float64)
    cdef const long long[::1] off = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef const double[::1] lw = np.ascontiguousarray(lamw, dtype=np.float64)
    out = np.empty(a.shape[0])
    cdef double[::1] o = out
    cdef Py_ssize_t s, i, nseg = off.shape[0] - 1
    cdef double S, y, shift
    with nogil:
        for s in range(nseg):
            S = 0.0
            for i in range(off[s], off[s + 1]):
                S += a[i]
            y = _root(S, (off[s + 1] - off[s]) * lw[s], alpha)
            shift = lw[s] / pow(y, alpha)
            for i in range(off[s], off[s + 1]):
                o[i] = shift + a[i]
    return out


cdef double _l1_eval(const double *a, const double *x0, Py_ssize_t n, double lw, double t,
                     double alpha, double y, double *out, int *nact) noexcept nogil:
    cdef Py_ssize_t i
    cdef double mu = lw * pow(y, -alpha), arg, tot = 0.0
    nact[0] = 0
    for i in range(n):
        arg = a[i] + mu - x0[i]
        if arg > t:
            out[i] = x0[i] + arg - t
            nact[0] += 1
        elif arg < -t:
            out[i] = x0[i] + arg + t
            nact[0] += 1
        else:
            out[i] = x0[i]
        tot += out[i]
    return tot - y


cdef int _prox_l1(const double *a, const double *x0, Py_ssize_t n, double lam, double w,
                  double alpha, double theta, double rtol, double *out) noexcept nogil:
    cdef double lw = lam * w, t = lam * theta, S = 0.0, y, fy, lo, hi, yn, d
    cdef int nact, it
    cdef Py_ssize_t i
    for i in range(n):
        S += a[i]
    y = _root(S, n * lw, alpha)
    fy = _l1_eval(a, x0, n, lw, t, alpha, y, out, &nact)
    if fy == 0:
        return 0
    lo = y
    hi = y
    for it in range(4 * MAX_NEWTON):
        if fy > 0:
            lo = hi
            hi = hi * 2.0
            fy = _l1_eval(a, x0, n, lw, t, alpha, hi, out, &nact)
            if fy <= 0:
                break
        else:
            hi = lo
            lo = lo * 0.5
            fy = _l1_eval(a, x0, n, lw, t, alpha, lo, out, &nact)
            if fy >= 0:
                break
    else:
        return -1
    y = 0.5 * (lo + hi)
    for it in range(MAX_NEWTON):
        fy = _l1_eval(a, x0, n, lw, t, alpha, y, out, &nact)
        if fy > 0:
            lo = y
        elif fy < 0:
            hi = y
        else:
            return 0
        d = -alpha * lw * pow(y, -alpha - 1.0) * nact - 1.0
        yn = y - fy / d
        if not (lo < yn < hi):
            yn = 0.5 * (lo + hi)
        if fabs(yn - y) <= rtol * yn or hi - lo <= rtol * y:
            _l1_eval(a, x0, n, lw, t, alpha, yn, out, &nact)
            return 0
        y = yn
    return -2


def prox_l1(anchor, double lam, double w, double alpha, double theta, x0, double rtol=1e-13):
    cdef const double[::1] a = np.ascontiguousarray(anchor, dtype=np.float64).ravel()
    cdef const double[::1] b = np.ascontiguousarray(x0, dtype=np.float64).ravel()
    out = np.empty(a.shape[0])
    cdef double[::1] o = out
    cdef int status
    with nogil:
        status = _prox_l1(&a[0], &b[0], a.shape[0], lam, w, alpha, theta, rtol, &o[0])
    if status:
        raise ProxConvergenceError(f"l1 prox did not converge (status {status})")
    return out


def prox_l1_segments(anchor, offsets, double lam, w, double alpha, double theta, x0):
    cdef const double[::1] a = np.ascontiguousarray(anchor, dtype=np.float64)
    cdef const double[::1] b = np.ascontiguousarray(x0, dtype=np.float64)
    cdef const long long[::1] off = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef const double[::1] ww = np.ascontiguousarray(w, dtype=np.float64)
    out = np.empty(a.shape[0])
    cdef double[::1] o = out
    cdef Py_ssize_t s, nseg = off.shape[0] - 1
    cdef int status = 0
    with nogil:
        for s in range(nseg):
            if off[s + 1] > off[s]:
                status = _prox_l1(&a[off[s]], &b[off[s]], off[s + 1] - off[s], lam, ww[s],
                                  alpha, theta, 1e-13, &o[off[s]])
                if status:
                    break
    if status:
        raise ProxConvergenceError(f"l1 prox did not converge in segment {s} (status {status})")
    return out
