"""Pure Python/numpy implementations of the hot kernels.

These are the reference versions; ``_kernels.pyx`` mirrors each function with
typed loops.  :mod:`threewave.kernels` picks one at import time.
"""
import math

import numpy as np

from .errors import StepUnderflowError

# sqrt(machine epsilon): once the AGM terms agree to this, one more step is exact
_AGM_TOL = 1.5e-8

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = (9017 / 3168, -355 / 33, 46732 / 5247,
                                49 / 176, -5103 / 18656)
_A71, _A73, _A74, _A75, _A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (71 / 57600, -71 / 16695, 71 / 1920,
                                -17253 / 339200, 22 / 525, -1 / 40)
# dense-output coefficients (Hairer & Wanner, dopri5 contd5)
_D1, _D3, _D4, _D5, _D6, _D7 = (-12715105075 / 11282082432, 87487479700 / 32700410799,
                                -10690763975 / 1880347072, 701980252875 / 199316789632,
                                -1453857185 / 822651844, 69997945 / 29380423)

BACKEND = "python"


def sncndn(u, m):
    """Jacobi elliptic sn, cn, dn of real ``u`` for parameter ``0 <= m <= 1``.

    Descending Landen/AGM scheme; ``u`` may be a scalar or array, the result
    always has the broadcast shape of ``u`` as float arrays.
    """
    u = np.asarray(u, dtype=float)
    mc = 1.0 - m
    if mc <= 0.0:
        cn = 1.0 / np.cosh(u)
        return np.tanh(u), cn, cn.copy()
    em, en = [], []
    a = 1.0
    c = 1.0
    for _ in range(32):
        em.append(a)
        mc = math.sqrt(mc)
        en.append(mc)
        c = 0.5 * (a + mc)
        if abs(a - mc) <= _AGM_TOL * a:
            break
        mc *= a
        a = c
    uu = u * c
    sn = np.sin(uu)
    cn = np.cos(uu)
    dn = np.ones_like(uu)
    nz = sn != 0.0
    if np.any(nz):
        s = sn[nz]
        q = cn[nz] / s
        r = c * q
        d = np.ones_like(s)
        for ii in range(len(em) - 1, -1, -1):
            b = em[ii]
            q = q * r
            r = r * d
            d = (en[ii] + q) / (b + q)
            q = r / b
        w = 1.0 / np.sqrt(r * r + 1.0)
        s = np.where(s >= 0.0, w, -w)
        sn[nz] = s
        cn[nz] = r * s
        dn[nz] = d
    return sn, cn, dn


def sturm_count(diag, off_sq, lam):
    """Number of eigenvalues strictly below ``lam``.

    The ratio recurrence q_k = (d_k - lam) - e_{k-1}^2 / q_{k-1} is the minor
    recurrence Delta_k / Delta_{k-1}; its negative terms count sign changes.
    """
    n = len(diag)
    pivmin = 1e-300
    count = 0
    q = diag[0] - lam
    for k in range(n):
        if k:
            q = (diag[k] - lam) - off_sq[k - 1] / q
        # perturb an exact zero pivot before counting it
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0:
            count += 1
    return count


def bisect_eigenvalues(diag, off_sq, lo, hi):
    """All eigenvalues of the symmetric tridiagonal matrix, ascending, by bisection."""
    n = len(diag)
    diag = [float(x) for x in diag]
    off_sq = [float(x) for x in off_sq]
    out = np.empty(n)
    eps = 2.220446049250313e-16
    for j in range(n):
        a, b = lo, hi
        for _ in range(200):
            mid = 0.5 * (a + b)
            if b - a <= 2.0 * eps * max(abs(a), abs(b)) + 1e-300 or mid == a or mid == b:
                break
            if sturm_count(diag, off_sq, mid) > j:
                b = mid
            else:
                a = mid
        out[j] = 0.5 * (a + b)
    return out


def _rms(v):
    return math.sqrt(float(np.dot(v, v)) / v.size)


def dopri5(fun, t0, y0, t1, t_out, rtol, atol, h0=0.0, max_steps=10_000_000):
    """Adaptive Dormand-Prince 5(4) with dense output.

    Returns ``(times, states, max_local_error, n_accepted, n_rejected, n_eval)``.
    If ``t_out`` is None every accepted step is recorded.
    """
    y = np.array(y0, dtype=float)
    t = float(t0)
    t1 = float(t1)
    span = abs(t1 - t)
    dense = t_out is not None
    if dense:
        t_out = np.asarray(t_out, dtype=float)
        out = np.empty((t_out.size, y.size))
        j = 0
        while j < t_out.size and t_out[j] <= t:
            out[j] = y
            j += 1
    else:
        ts, ys = [t], [y.copy()]
    k1 = fun(t, y)
    n_eval = 1
    if h0 <= 0.0:
        sc = atol + rtol * np.abs(y)
        d0 = _rms(y / sc)
        d1 = _rms(k1 / sc)
        h = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        h = min(h, span)
        k2 = fun(t + h, y + h * k1)
        n_eval += 1
        d2 = _rms((k2 - k1) / sc) / h
        dm = max(d1, d2)
        h1 = max(1e-6, h * 1e-3) if dm <= 1e-15 else (0.01 / dm) ** 0.2
        h = min(100.0 * h, h1, span)
    else:
        h = min(h0, span)
    hmin = 1e-14 * span
    n_acc = n_rej = 0
    max_err = 0.0
    last_rejected = False
    for _ in range(max_steps):
        if t >= t1:
            break
        if t + h > t1:
            h = t1 - t
        k2 = fun(t + _C2 * h, y + h * (_A21 * k1))
        k3 = fun(t + _C3 * h, y + h * (_A31 * k1 + _A32 * k2))
        k4 = fun(t + _C4 * h, y + h * (_A41 * k1 + _A42 * k2 + _A43 * k3))
        k5 = fun(t + _C5 * h, y + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4))
        k6 = fun(t + h, y + h * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5))
        ynew = y + h * (_A71 * k1 + _A73 * k3 + _A74 * k4 + _A75 * k5 + _A76 * k6)
        k7 = fun(t + h, ynew)
        n_eval += 6
        errv = h * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7)
        sc = atol + rtol * np.maximum(np.abs(y), np.abs(ynew))
        err = _rms(errv / sc)
        if err <= 1.0:
            tnew = t + h
            if dense and j < t_out.size and t_out[j] <= tnew:
                ydiff = ynew - y
                bspl = h * k1 - ydiff
                r4 = ydiff - h * k7 - bspl
                r5 = h * (_D1 * k1 + _D3 * k3 + _D4 * k4 + _D5 * k5 + _D6 * k6 + _D7 * k7)
                while j < t_out.size and t_out[j] <= tnew:
                    th = (t_out[j] - t) / h
                    th1 = 1.0 - th
                    out[j] = y + th * (ydiff + th1 * (bspl + th * (r4 + th1 * r5)))
                    j += 1
            max_err = max(max_err, float(np.max(np.abs(errv))))
            t, y, k1 = tnew, ynew, k7
            if not dense:
                ts.append(t)
                ys.append(y.copy())
            n_acc += 1
            fac = 0.9 * err ** -0.2 if err > 0 else 5.0
            fac = min(1.0 if last_rejected else 5.0, max(0.2, fac))
            last_rejected = False
        else:
            n_rej += 1
            fac = max(0.2, 0.9 * err ** -0.2)
            last_rejected = True
        h *= fac
        if h < hmin and t < t1:
            raise StepUnderflowError(f"step size {h:.3e} fell below {hmin:.3e} at t={t}")
    if dense:
        while j < t_out.size:
            out[j] = y
            j += 1
        return t_out.copy(), out, max_err, n_acc, n_rej, n_eval
    return np.array(ts), np.array(ys), max_err, n_acc, n_rej, n_eval


def threewave_rhs_real(w0, w1, w2, g0):
    """Right-hand side of the three-wave equations on the interleaved real state."""
    def rhs(t, s):
        x0, y0, x1, y1, x2, y2 = s
        return np.array([
            -w0 * y0 - g0 * (x1 * y2 + y1 * x2),
            w0 * x0 + g0 * (x1 * x2 - y1 * y2),
            -w1 * y1 - g0 * (y0 * x2 - x0 * y2),
            w1 * x1 + g0 * (x0 * x2 + y0 * y2),
            -w2 * y2 - g0 * (y0 * x1 - x0 * y1),
            w2 * x2 + g0 * (x0 * x1 + y0 * y1),
        ])
    return rhs


def threewave_dopri5(w0, w1, w2, g0, y0, t0, t1, t_out, rtol, atol):
    """Three-wave flow on a dense output grid; see :func:`dopri5`."""
    return dopri5(threewave_rhs_real(w0, w1, w2, g0), t0, y0, t1, t_out, rtol, atol)
