# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels; API identical to ``_kernels_py``."""
from libc.math cimport sqrt, sin, cos, tanh, cosh, fabs, pow

import numpy as np
cimport numpy as cnp

from .errors import StepUnderflowError

cnp.import_array()

BACKEND = "cython"

cdef double _AGM_TOL = 1.5e-8

cdef double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9
cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247
cdef double A64 = 49.0 / 176, A65 = -5103.0 / 18656
cdef double A71 = 35.0 / 384, A73 = 500.0 / 1113, A74 = 125.0 / 192
cdef double A75 = -2187.0 / 6784, A76 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920
cdef double E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40
cdef double D1 = -12715105075.0 / 11282082432, D3 = 87487479700.0 / 32700410799
cdef double D4 = -10690763975.0 / 1880347072, D5 = 701980252875.0 / 199316789632
cdef double D6 = -1453857185.0 / 822651844, D7 = 69997945.0 / 29380423


def sncndn(u, double m):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] uf
    cdef double em[32]
    cdef double en[32]
    cdef double mc = 1.0 - m, a = 1.0, c = 1.0, b, q, r, d, s, w, uu
    cdef int l = 0, ii
    cdef Py_ssize_t i, n
    arr = np.asarray(u, dtype=float)
    shape = arr.shape
    uf = np.ascontiguousarray(arr.ravel())
    n = uf.shape[0]
    sn = np.empty(n)
    cn = np.empty(n)
    dn = np.empty(n)
    cdef double[::1] snv = sn, cnv = cn, dnv = dn
    if mc <= 0.0:
        for i in range(n):
            snv[i] = tanh(uf[i])
            cnv[i] = 1.0 / cosh(uf[i])
            dnv[i] = cnv[i]
        return sn.reshape(shape), cn.reshape(shape), dn.reshape(shape)
    while l < 32:
        em[l] = a
        mc = sqrt(mc)
        en[l] = mc
        c = 0.5 * (a + mc)
        l += 1
        if fabs(a - mc) <= _AGM_TOL * a:
            break
        mc *= a
        a = c
    for i in range(n):
        uu = uf[i] * c
        s = sin(uu)
        q = cos(uu)
        d = 1.0
        if s != 0.0:
            q = q / s
            r = c * q
            for ii in range(l - 1, -1, -1):
                b = em[ii]
                q = q * r
                r = r * d
                d = (en[ii] + q) / (b + q)
                q = r / b
            w = 1.0 / sqrt(r * r + 1.0)
            s = w if s >= 0.0 else -w
            q = r * s
        snv[i] = s
        cnv[i] = q
        dnv[i] = d
    return sn.reshape(shape), cn.reshape(shape), dn.reshape(shape)


cdef int _sturm(double[::1] d, double[::1] e2, double lam) nogil:
    cdef Py_ssize_t k, n = d.shape[0]
    cdef int count = 0
    cdef double q = d[0] - lam
    for k in range(n):
        if k:
            q = (d[k] - lam) - e2[k - 1] / q
        if fabs(q) < 1e-300:
            q = -1e-300
        if q < 0:
            count += 1
    return count


def sturm_count(diag, off_sq, double lam):
    cdef double[::1] d = np.ascontiguousarray(diag, dtype=float)
    cdef double[::1] e2 = np.ascontiguousarray(np.append(np.asarray(off_sq, dtype=float), 0.0))
    return _sturm(d, e2, lam)


def bisect_eigenvalues(diag, off_sq, double lo, double hi):
    cdef double[::1] d = np.ascontiguousarray(diag, dtype=float)
    cdef double[::1] e2 = np.ascontiguousarray(np.append(np.asarray(off_sq, dtype=float), 0.0))
    cdef Py_ssize_t n = d.shape[0], j
    cdef int it
    cdef double a, b, mid, eps = 2.220446049250313e-16
    out = np.empty(n)
    cdef double[::1] ov = out
    with nogil:
        for j in range(n):
            a = lo
            b = hi
            for it in range(200):
                mid = 0.5 * (a + b)
                if b - a <= 2.0 * eps * (fabs(a) if fabs(a) > fabs(b) else fabs(b)) + 1e-300 \
                        or mid == a or mid == b:
                    break
                if _sturm(d, e2, mid) > j:
                    b = mid
                else:
                    a = mid
            ov[j] = 0.5 * (a + b)
    return out


cdef inline void _rhs(double w0, double w1, double w2, double g0,
                      double* s, double* f) nogil:
    cdef double x0 = s[0], y0 = s[1], x1 = s[2], y1 = s[3], x2 = s[4], y2 = s[5]
    f[0] = -w0 * y0 - g0 * (x1 * y2 + y1 * x2)
    f[1] = w0 * x0 + g0 * (x1 * x2 - y1 * y2)
    f[2] = -w1 * y1 - g0 * (y0 * x2 - x0 * y2)
    f[3] = w1 * x1 + g0 * (x0 * x2 + y0 * y2)
    f[4] = -w2 * y2 - g0 * (y0 * x1 - x0 * y1)
    f[5] = w2 * x2 + g0 * (x0 * x1 + y0 * y1)


cdef inline double _rms6(double* v, double* sc) nogil:
    cdef double acc = 0.0, q
    cdef int i
    for i in range(6):
        q = v[i] / sc[i]
        acc += q * q
    return sqrt(acc / 6.0)


def threewave_dopri5(double w0, double w1, double w2, double g0, y0,
                     double t0, double t1, t_out, double rtol, double atol):
    cdef double y[6]
    cdef double yn[6]
    cdef double tmp[6]
    cdef double sc[6]
    cdef double errv[6]
    cdef double k1[6]
    cdef double k2[6]
    cdef double k3[6]
    cdef double k4[6]
    cdef double k5[6]
    cdef double k6[6]
    cdef double k7[6]
    cdef double ydiff, bspl, r4, r5, th, th1
    cdef double t = t0, h, hmin, err, fac, tnew, d0, d1, d2, dm, h1, span = fabs(t1 - t0)
    cdef double max_err = 0.0, ae
    cdef int i, last_rej = 0
    cdef long n_acc = 0, n_rej = 0, n_eval = 0, step
    cdef Py_ssize_t j = 0, nout
    cdef bint dense = t_out is not None
    yin = np.asarray(y0, dtype=float)
    for i in range(6):
        y[i] = yin[i]
    if dense:
        tarr = np.ascontiguousarray(t_out, dtype=float)
        nout = tarr.shape[0]
        out = np.empty((nout, 6))
    else:
        tarr = np.empty(1)
        nout = 0
        out = np.empty((1, 6))
        ts = [t]
        ys = [yin.copy()]
    cdef double[::1] tv = tarr
    cdef double[:, ::1] ov = out
    while j < nout and tv[j] <= t:
        for i in range(6):
            ov[j, i] = y[i]
        j += 1
    _rhs(w0, w1, w2, g0, y, k1)
    n_eval = 1
    for i in range(6):
        sc[i] = atol + rtol * fabs(y[i])
    d0 = _rms6(y, sc)
    d1 = _rms6(k1, sc)
    h = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    if h > span:
        h = span
    for i in range(6):
        tmp[i] = y[i] + h * k1[i]
    _rhs(w0, w1, w2, g0, tmp, k2)
    n_eval += 1
    for i in range(6):
        errv[i] = k2[i] - k1[i]
    d2 = _rms6(errv, sc) / h
    dm = d1 if d1 > d2 else d2
    h1 = (h * 1e-3 if h * 1e-3 > 1e-6 else 1e-6) if dm <= 1e-15 else pow(0.01 / dm, 0.2)
    h = min(100.0 * h, h1, span)
    hmin = 1e-14 * span
    for step in range(10000000):
        if t >= t1:
            break
        if t + h > t1:
            h = t1 - t
        for i in range(6):
            tmp[i] = y[i] + h * A21 * k1[i]
        _rhs(w0, w1, w2, g0, tmp, k2)
        for i in range(6):
            tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
        _rhs(w0, w1, w2, g0, tmp, k3)
        for i in range(6):
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
        _rhs(w0, w1, w2, g0, tmp, k4)
        for i in range(6):
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
        _rhs(w0, w1, w2, g0, tmp, k5)
        for i in range(6):
            tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i]
                                 + A65 * k5[i])
        _rhs(w0, w1, w2, g0, tmp, k6)
        for i in range(6):
            yn[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i]
                                + A76 * k6[i])
        _rhs(w0, w1, w2, g0, yn, k7)
        n_eval += 6
        for i in range(6):
            errv[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i]
                           + E6 * k6[i] + E7 * k7[i])
            sc[i] = atol + rtol * (fabs(y[i]) if fabs(y[i]) > fabs(yn[i]) else fabs(yn[i]))
        err = _rms6(errv, sc)
        if err <= 1.0:
            tnew = t + h
            while j < nout and tv[j] <= tnew:
                th = (tv[j] - t) / h
                th1 = 1.0 - th
                for i in range(6):
                    ydiff = yn[i] - y[i]
                    bspl = h * k1[i] - ydiff
                    r4 = ydiff - h * k7[i] - bspl
                    r5 = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i]
                              + D6 * k6[i] + D7 * k7[i])
                    ov[j, i] = y[i] + th * (ydiff + th1 * (bspl + th * (r4 + th1 * r5)))
                j += 1
            for i in range(6):
                ae = fabs(errv[i])
                if ae > max_err:
                    max_err = ae
                y[i] = yn[i]
                k1[i] = k7[i]
            t = tnew
            if not dense:
                ts.append(t)
                ys.append(np.array([y[0], y[1], y[2], y[3], y[4], y[5]]))
            n_acc += 1
            fac = 0.9 * pow(err, -0.2) if err > 0 else 5.0
            fac = min(1.0 if last_rej else 5.0, max(0.2, fac))
            last_rej = 0
        else:
            n_rej += 1
            fac = max(0.2, 0.9 * pow(err, -0.2))
            last_rej = 1
        h *= fac
        if h < hmin and t < t1:
            raise StepUnderflowError(f"step size {h:.3e} fell below {hmin:.3e} at t={t}")
    if dense:
        while j < nout:
            for i in range(6):
                ov[j, i] = y[i]
            j += 1
        return tarr.copy(), out, max_err, n_acc, n_rej, n_eval
    return np.array(ts), np.array(ys), max_err, n_acc, n_rej, n_eval
