# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled implementations of the small dense-matrix kernels.

Mirrors `lieadj._kernels.py`: scaling-and-squaring exponential, inverse
scaling-and-squaring logarithm, and the scaled tangent series of expm.
Matrices here are tiny (n <= 12), so plain loops beat BLAS dispatch.
"""

import numpy as np

from libc.math cimport ceil, fabs, log2, sqrt

BACKEND = "cython"

cdef double _THETA = 0.25


cdef void _mat_mul(double[:, ::1] a, double[:, ::1] b, double[:, ::1] out, int n) noexcept nogil:
    cdef int i, j, k
    cdef double acc
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for k in range(n):
                acc += a[i, k] * b[k, j]
            out[i, j] = acc


cdef double _fro_norm(double[:, ::1] a, int n) noexcept nogil:
    cdef int i, j
    cdef double acc = 0.0
    for i in range(n):
        for j in range(n):
            acc += a[i, j] * a[i, j]
    return sqrt(acc)


cdef int _inv(double[:, ::1] a, double[:, ::1] out, double[:, ::1] work, int n) noexcept nogil:
    """Gauss-Jordan inverse with partial pivoting; returns 0 on success."""
    cdef int i, j, k, piv
    cdef double best, factor, tmp
    for i in range(n):
        for j in range(n):
            work[i, j] = a[i, j]
            out[i, j] = 1.0 if i == j else 0.0
    for k in range(n):
        piv = k
        best = fabs(work[k, k])
        for i in range(k + 1, n):
            if fabs(work[i, k]) > best:
                best = fabs(work[i, k])
                piv = i
        if best == 0.0:
            return 1
        if piv != k:
            for j in range(n):
                tmp = work[k, j]
                work[k, j] = work[piv, j]
                work[piv, j] = tmp
                tmp = out[k, j]
                out[k, j] = out[piv, j]
                out[piv, j] = tmp
        factor = work[k, k]
        for j in range(n):
            work[k, j] /= factor
            out[k, j] /= factor
        for i in range(n):
            if i == k:
                continue
            factor = work[i, k]
            if factor != 0.0:
                for j in range(n):
                    work[i, j] -= factor * work[k, j]
                    out[i, j] -= factor * out[k, j]
    return 0


cdef void _expm_impl(double[:, ::1] a, double[:, ::1] out, double[:, ::1] t0,
                     double[:, ::1] t1, int n, int order) noexcept nogil:
    cdef int i, j, k, step, s = 0
    cdef double norm = _fro_norm(a, n)
    cdef double inv_k, scale = 1.0
    if norm > _THETA:
        s = <int>ceil(log2(norm / _THETA))
    for step in range(s):
        scale *= 0.5
    for i in range(n):
        for j in range(n):
            t0[i, j] = a[i, j] * scale
            out[i, j] = 1.0 if i == j else 0.0
    # Horner: out <- I + (t0/k) @ out
    for k in range(order, 0, -1):
        inv_k = 1.0 / k
        _mat_mul(t0, out, t1, n)
        for i in range(n):
            for j in range(n):
                out[i, j] = t1[i, j] * inv_k + (1.0 if i == j else 0.0)
    for step in range(s):
        _mat_mul(out, out, t1, n)
        for i in range(n):
            for j in range(n):
                out[i, j] = t1[i, j]


def expm(a, int order=12):
    a = np.ascontiguousarray(a, dtype=np.float64)
    cdef int n = a.shape[0]
    out = np.empty((n, n), dtype=np.float64)
    t0 = np.empty((n, n), dtype=np.float64)
    t1 = np.empty((n, n), dtype=np.float64)
    _expm_impl(a, out, t0, t1, n, order)
    return out


def logm(a, int max_sqrts=40):
    a = np.ascontiguousarray(a, dtype=np.float64)
    cdef int n = a.shape[0]
    cdef int i, j, k, it, s = 0
    cdef int converged
    cdef double delta, norm_off, sign, pow2
    x = np.array(a, dtype=np.float64)
    y = np.empty((n, n), dtype=np.float64)
    z = np.empty((n, n), dtype=np.float64)
    w0 = np.empty((n, n), dtype=np.float64)
    w1 = np.empty((n, n), dtype=np.float64)
    w2 = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] xv = x, yv = y, zv = z, w0v = w0, w1v = w1, w2v = w2

    while True:
        norm_off = 0.0
        for i in range(n):
            for j in range(n):
                delta = xv[i, j] - (1.0 if i == j else 0.0)
                norm_off += delta * delta
        if sqrt(norm_off) < _THETA:
            break
        if s >= max_sqrts:
            raise ArithmeticError("logarithm argument outside the series domain")
        # Denman-Beavers square root of x
        for i in range(n):
            for j in range(n):
                yv[i, j] = xv[i, j]
                zv[i, j] = 1.0 if i == j else 0.0
        converged = 0
        for it in range(60):
            if _inv(zv, w0v, w2v, n) or _inv(yv, w1v, w2v, n):
                raise ArithmeticError("singular iterate in matrix square root")
            delta = 0.0
            for i in range(n):
                for j in range(n):
                    w2v[i, j] = 0.5 * (yv[i, j] + w0v[i, j])
                    zv[i, j] = 0.5 * (zv[i, j] + w1v[i, j])
                    delta += (w2v[i, j] - yv[i, j]) * (w2v[i, j] - yv[i, j])
            for i in range(n):
                for j in range(n):
                    yv[i, j] = w2v[i, j]
            if sqrt(delta) <= 1e-15 * max(1.0, _fro_norm(yv, n)):
                converged = 1
                break
        if not converged:
            raise ArithmeticError("matrix square-root iteration stalled")
        for i in range(n):
            for j in range(n):
                xv[i, j] = yv[i, j]
        s += 1

    # Mercator series on e = x - I (reusing y as e and z as the running power)
    for i in range(n):
        for j in range(n):
            yv[i, j] = xv[i, j] - (1.0 if i == j else 0.0)
            zv[i, j] = 1.0 if i == j else 0.0
    out = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] ov = out
    for k in range(1, 41):
        _mat_mul(zv, yv, w0v, n)
        for i in range(n):
            for j in range(n):
                zv[i, j] = w0v[i, j]
        sign = 1.0 if k % 2 == 1 else -1.0
        for i in range(n):
            for j in range(n):
                ov[i, j] += sign * zv[i, j] / k
        if _fro_norm(zv, n) <= 1e-18 * k:
            break
    pow2 = 1.0
    for i in range(s):
        pow2 *= 2.0
    for i in range(n):
        for j in range(n):
            ov[i, j] *= pow2
    return out


cdef void _dexp_impl(double[:, ::1] ad, double[:, ::1] out, double[:, ::1] b,
                     double[:, ::1] ea, double[:, ::1] t0, double[:, ::1] t1,
                     int n, int order) noexcept nogil:
    cdef int i, j, k, step, s = 0
    cdef double inv_k, scale = 1.0
    cdef double norm = _fro_norm(ad, n)
    if norm > _THETA:
        s = <int>ceil(log2(norm / _THETA))
    for step in range(s):
        scale *= 0.5
    for i in range(n):
        for j in range(n):
            b[i, j] = ad[i, j] * scale
            out[i, j] = 1.0 if i == j else 0.0
    # Horner: out <- I + (b/(k+1)) @ out
    for k in range(order, 0, -1):
        inv_k = 1.0 / (k + 1.0)
        _mat_mul(b, out, t0, n)
        for i in range(n):
            for j in range(n):
                out[i, j] = t0[i, j] * inv_k + (1.0 if i == j else 0.0)
    if s:
        _expm_impl(b, ea, t0, t1, n, order + 1)
        for step in range(s):
            # out <- out @ (ea + I)/2 ; ea <- ea @ ea
            for i in range(n):
                for j in range(n):
                    t1[i, j] = 0.5 * (ea[i, j] + (1.0 if i == j else 0.0))
            _mat_mul(out, t1, t0, n)
            for i in range(n):
                for j in range(n):
                    out[i, j] = t0[i, j]
            _mat_mul(ea, ea, t0, n)
            for i in range(n):
                for j in range(n):
                    ea[i, j] = t0[i, j]


def expm_stack(a, int order=12):
    a = np.ascontiguousarray(a, dtype=np.float64)
    cdef int k = a.shape[0]
    cdef int n = a.shape[1]
    cdef int i
    out = np.empty((k, n, n), dtype=np.float64)
    t0 = np.empty((n, n), dtype=np.float64)
    t1 = np.empty((n, n), dtype=np.float64)
    cdef double[:, :, ::1] av = a, ov = out
    cdef double[:, ::1] t0v = t0, t1v = t1
    with nogil:
        for i in range(k):
            _expm_impl(av[i], ov[i], t0v, t1v, n, order)
    return out


def dexp_series_stack(ad, int order=12):
    ad = np.ascontiguousarray(ad, dtype=np.float64)
    cdef int k = ad.shape[0]
    cdef int n = ad.shape[1]
    cdef int i
    out = np.empty((k, n, n), dtype=np.float64)
    b = np.empty((n, n), dtype=np.float64)
    ea = np.empty((n, n), dtype=np.float64)
    t0 = np.empty((n, n), dtype=np.float64)
    t1 = np.empty((n, n), dtype=np.float64)
    cdef double[:, :, ::1] adv = ad, ov = out
    cdef double[:, ::1] bv = b, eav = ea, t0v = t0, t1v = t1
    with nogil:
        for i in range(k):
            _dexp_impl(adv[i], ov[i], bv, eav, t0v, t1v, n, order)
    return out


def dexp_series(ad, int order=12):
    ad = np.ascontiguousarray(ad, dtype=np.float64)
    cdef int n = ad.shape[0]
    out = np.empty((n, n), dtype=np.float64)
    b = np.empty((n, n), dtype=np.float64)
    ea = np.empty((n, n), dtype=np.float64)
    t0 = np.empty((n, n), dtype=np.float64)
    t1 = np.empty((n, n), dtype=np.float64)
    _dexp_impl(ad, out, b, ea, t0, t1, n, order)
    return out
