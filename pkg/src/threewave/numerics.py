"""Generic numerical engines: ODE integration, quadrature, polynomial roots, eigensolver."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import kernels
from .errors import DomainError, NonConvergenceError

__all__ = [
    "OdeSolution",
    "rk_integrate",
    "adaptive_quad",
    "adaptive_quad_vec",
    "closed_form_roots",
    "tridiag_eigen",
    "tridiag_eigenvalues",
    "DEFAULT_ODE_RTOL",
    "DEFAULT_QUAD_RTOL",
]

DEFAULT_ODE_RTOL = 1e-10
DEFAULT_QUAD_RTOL = 1e-12
_EPS = np.finfo(float).eps


# ---------------------------------------------------------------- ODEs

@dataclass(frozen=True)
class OdeSolution:
    """Samples of an adaptive integration.

    Attributes
    ----------
    t : ndarray, shape (n,)
        Strictly increasing sample times.
    y : ndarray, shape (n, d)
        State at each sample time.
    error_estimate : float
        Largest unweighted local-error estimate over the accepted steps.
    n_accepted, n_rejected, n_eval : int
        Step-controller statistics.
    """

    t: np.ndarray
    y: np.ndarray
    error_estimate: float
    n_accepted: int
    n_rejected: int
    n_eval: int


def _check_ode_args(t_span, rel_tol, abs_tol, output_grid):
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not (rel_tol > 0 and abs_tol > 0):
        raise DomainError("rel_tol and abs_tol must be positive")
    if not t1 > t0:
        raise DomainError(f"t_span must be increasing, got {t_span}")
    grid = None
    if output_grid is not None:
        grid = np.asarray(output_grid, dtype=float).ravel()
        if grid.size and (np.any(np.diff(grid) <= 0) or grid[0] < t0 or grid[-1] > t1):
            raise DomainError("output_grid must be strictly increasing inside t_span")
    return t0, t1, grid


def rk_integrate(rhs: Callable[[float, np.ndarray], np.ndarray], y0, t_span,
                 rel_tol: float = DEFAULT_ODE_RTOL, abs_tol: float = 1e-12,
                 output_grid: Optional[Sequence[float]] = None) -> OdeSolution:
    """Integrate ``y' = rhs(t, y)`` with the Dormand-Prince 5(4) pair.

    With ``output_grid`` the solution is sampled there through the pair's
    continuous extension; otherwise every accepted step is returned.

    Raises
    ------
    StepUnderflowError
        If the controller needs steps below ``1e-14 * |t1 - t0|``.
    """
    t0, t1, grid = _check_ode_args(t_span, rel_tol, abs_tol, output_grid)

    def f(t, y):
        return np.asarray(rhs(t, y), dtype=float)

    ts, ys, err, na, nr, ne = kernels.dopri5(f, t0, np.asarray(y0, dtype=float), t1,
                                             grid, rel_tol, abs_tol)
    return OdeSolution(ts, ys, err, na, nr, ne)


def rk_integrate_threewave(omegas, g0, y0_real, t_span, rel_tol=DEFAULT_ODE_RTOL,
                           abs_tol=1e-12, output_grid=None) -> OdeSolution:
    """Fast path of :func:`rk_integrate` for the three-wave field (compiled when available)."""
    t0, t1, grid = _check_ode_args(t_span, rel_tol, abs_tol, output_grid)
    w0, w1, w2 = (float(w) for w in omegas)
    ts, ys, err, na, nr, ne = kernels.threewave_dopri5(
        w0, w1, w2, float(g0), np.asarray(y0_real, dtype=float), t0, t1, grid,
        float(rel_tol), float(abs_tol))
    return OdeSolution(ts, ys, err, int(na), int(nr), int(ne))


# ---------------------------------------------------------------- quadrature

def _de_nodes(kind: str, h: float, offset: float, smax: float):
    """Abscissa parameters s = offset + k h on (-smax, smax)."""
    n = int(math.floor((smax - offset) / h))
    k = np.arange(-n - 1, n + 1)
    s = offset + k * h
    return s[np.abs(s) <= smax]


def _tanh_sinh(a, b, s):
    q = 0.5 * math.pi * np.sinh(s)
    half = 0.5 * (b - a)
    # distance to the nearer endpoint, computed without cancellation
    dist = (b - a) / (1.0 + np.exp(2.0 * np.abs(q)))
    x = np.where(q < 0, a + dist, b - dist)
    w = half * 0.5 * math.pi * np.cosh(s) / np.cosh(q) ** 2
    keep = (x > a) & (x < b) & (w > 0)
    return x[keep], w[keep]


def _exp_sinh(a, s):
    q = 0.5 * math.pi * np.sinh(s)
    keep = (q > -700.0) & (q < 230.0)
    q, s = q[keep], s[keep]
    e = np.exp(q)
    x = a + e
    w = 0.5 * math.pi * np.cosh(s) * e
    keep = x > a
    return x[keep], w[keep]


def _nodes(a, b, s):
    if math.isinf(b):
        return _exp_sinh(a, s)
    return _tanh_sinh(a, b, s)


def adaptive_quad_vec(f: Callable[[np.ndarray], np.ndarray], a: float, b: float,
                      rel_tol: float = DEFAULT_QUAD_RTOL, abs_tol: float = 0.0,
                      max_level: int = 11) -> np.ndarray:
    """Batched double-exponential quadrature.

    ``f`` maps a 1-D array of nodes to an array of shape ``(..., len(nodes))``;
    every leading component is integrated and must meet the tolerance.
    """
    a = float(a)
    b = float(b)
    if math.isinf(a):
        raise DomainError("lower limit must be finite")
    if b == a:
        return np.zeros(np.shape(f(np.array([a])))[:-1])
    if b < a:
        return -adaptive_quad_vec(f, b, a, rel_tol, abs_tol, max_level)
    smax = 6.5 if math.isinf(b) else 4.5

    def partial(h, offset):
        x, w = _nodes(a, b, _de_nodes("", h, offset, smax))
        vals = np.asarray(f(x), dtype=float)
        with np.errstate(invalid="ignore", over="ignore"):
            terms = np.where(vals == 0.0, 0.0, vals * w)
        if not np.all(np.isfinite(terms)):
            raise NonConvergenceError("integrand not finite at a quadrature node")
        return terms.sum(axis=-1)

    h = 1.0
    total = partial(h, 0.0)
    est = total * h
    for _ in range(1, max_level + 1):
        # only the new midpoints are evaluated on each refinement
        total = total + partial(h, 0.5 * h)
        h *= 0.5
        new = total * h
        diff = np.abs(new - est)
        tol = np.maximum(rel_tol * np.abs(new), abs_tol)
        est = new
        if np.all(diff <= tol):
            return est
    raise NonConvergenceError(
        f"quadrature on [{a}, {b}] did not reach rel_tol={rel_tol} after {max_level} levels")


def adaptive_quad(f: Callable[[float], float], a: float, b: float,
                  rel_tol: float = DEFAULT_QUAD_RTOL, abs_tol: float = 0.0,
                  vectorized: bool = False, max_level: int = 11) -> float:
    """Integrate ``f`` over ``[a, b]`` (``b`` may be ``inf``).

    Tanh-sinh on finite intervals and exp-sinh on ``[a, inf)``; the step is
    halved until two successive levels agree to ``rel_tol``.  Integrable
    endpoint singularities are fine since no node sits on an endpoint.
    Set ``vectorized`` when ``f`` accepts arrays.

    Raises
    ------
    NonConvergenceError
        On an exhausted level budget or a non-finite integrand value.
    """
    if vectorized:
        g = f
    else:
        def g(x):
            return np.array([f(float(xi)) for xi in x])
    return float(adaptive_quad_vec(g, a, b, rel_tol, abs_tol, max_level))


# ---------------------------------------------------------------- polynomial roots

def _horner(coef, x):
    acc = 0.0
    dacc = 0.0
    for c in coef:
        dacc = dacc * x + acc
        acc = acc * x + c
    return acc, dacc


def _polish(coef, r, max_iter=4):
    """Newton steps while the residual keeps shrinking (at least one attempt)."""
    best = r
    fb = abs(_horner(coef, r)[0])
    for _ in range(max_iter):
        p, dp = _horner(coef, best)
        if dp == 0 or fb == 0:
            break
        cand = best - p / dp
        fc = abs(_horner(coef, cand)[0])
        if fc < fb:
            best, fb = cand, fc
        else:
            break
    return best


def _quadratic(a, b, c):
    disc = cmath.sqrt(b * b - 4 * a * c)
    # choose the sign that avoids cancellation
    if (b.conjugate() * disc).real >= 0:
        q = -0.5 * (b + disc)
    else:
        q = -0.5 * (b - disc)
    if q == 0:
        return [0j, 0j]
    return [q / a, c / q]


def _cubic(a, b, c, d):
    d0 = b * b - 3 * a * c
    d1 = 2 * b ** 3 - 9 * a * b * c + 27 * a * a * d
    s = cmath.sqrt(d1 * d1 - 4 * d0 ** 3)
    big = d1 + s if abs(d1 + s) >= abs(d1 - s) else d1 - s
    C = (big / 2) ** (1.0 / 3.0) if big != 0 else 0j
    if C == 0:
        return [-b / (3 * a)] * 3
    xi = complex(-0.5, math.sqrt(3) / 2)
    roots = []
    for k in range(3):
        Ck = C * xi ** k
        roots.append(-(b + Ck + d0 / Ck) / (3 * a))
    return roots


def _quartic(a, b, c, d, e):
    b, c, d, e = b / a, c / a, d / a, e / a
    # depressed quartic y^4 + p y^2 + q y + r with x = y - b/4
    p = c - 3 * b * b / 8
    q = d - b * c / 2 + b ** 3 / 8
    r = e - b * d / 4 + b * b * c / 16 - 3 * b ** 4 / 256
    shift = -b / 4
    if abs(q) <= 1e-14 * (1 + abs(p) ** 1.5 + abs(r) ** 0.75):
        ys = []
        for mu in _quadratic(1 + 0j, p, r):
            sq = cmath.sqrt(mu)
            ys += [sq, -sq]
        return [y + shift for y in ys]
    # resolvent 8m^3 + 8p m^2 + (2p^2 - 8r) m - q^2 = 0; any nonzero root works
    ms = _cubic(8 + 0j, 8 * p, 2 * p * p - 8 * r, -q * q)
    m = max(ms, key=abs)
    rt = cmath.sqrt(2 * m)
    ys = []
    for sgn in (1, -1):
        ys += _quadratic(1 + 0j, -sgn * rt, p / 2 + m + sgn * q / (2 * rt))
    return [y + shift for y in ys]


def closed_form_roots(degree: int, coefficients: Sequence[float]) -> np.ndarray:
    """Roots of a degree 2, 3 or 4 polynomial by the classical radical formulas.

    Parameters
    ----------
    degree : {2, 3, 4}
    coefficients : sequence of ``degree + 1`` reals, highest power first.

    Returns
    -------
    ndarray of complex, sorted by (real, imag); each root Newton-polished.
    """
    coef = [complex(c) for c in coefficients]
    if degree not in (2, 3, 4) or len(coef) != degree + 1:
        raise DomainError("closed_form_roots supports degree 2, 3 or 4 with degree+1 coefficients")
    if coef[0] == 0:
        raise DomainError("leading coefficient vanishes")
    roots = {2: _quadratic, 3: _cubic, 4: _quartic}[degree](*coef)
    roots = [_polish(coef, complex(r)) for r in roots]
    return np.array(sorted(roots, key=lambda z: (round(z.real, 12), z.imag)), dtype=complex)


# ---------------------------------------------------------------- tridiagonal eigensolver

def _split_points(diag, off):
    """Indices where the matrix decouples into unreduced blocks."""
    cuts = [0]
    for i, e in enumerate(off):
        if abs(e) <= _EPS * (abs(diag[i]) + abs(diag[i + 1])):
            cuts.append(i + 1)
    cuts.append(len(diag))
    return cuts


def _gershgorin(diag, off):
    n = len(diag)
    lo, hi = math.inf, -math.inf
    for i in range(n):
        r = (abs(off[i - 1]) if i > 0 else 0.0) + (abs(off[i]) if i < n - 1 else 0.0)
        lo = min(lo, diag[i] - r)
        hi = max(hi, diag[i] + r)
    pad = 2 * _EPS * max(abs(lo), abs(hi)) + 1e-300
    return lo - pad, hi + pad


def tridiag_eigenvalues(diag, offdiag) -> np.ndarray:
    """Ascending eigenvalues by Sturm-count bisection."""
    d = np.asarray(diag, dtype=float)
    e = np.asarray(offdiag, dtype=float)
    if d.size == 0:
        raise DomainError("empty matrix")
    if e.size != d.size - 1:
        raise DomainError("offdiag must have length len(diag) - 1")
    lo, hi = _gershgorin(d, e)
    return kernels.bisect_eigenvalues(d, e * e, lo, hi)


def _solve_shifted(d, e, sigma, rhs, tiny):
    """Solve (T - sigma I) x = rhs with partial pivoting (dgtsv ordering)."""
    n = len(d)
    dd = [float(x) - sigma for x in d]
    if n == 1:
        piv = dd[0] if abs(dd[0]) > tiny else tiny
        return np.array([rhs[0] / piv])
    dl = [float(x) for x in e]
    du = [float(x) for x in e]
    du2 = [0.0] * n
    b = [float(x) for x in rhs]
    for i in range(n - 1):
        if abs(dd[i]) >= abs(dl[i]):
            if abs(dd[i]) < tiny:
                dd[i] = tiny
            fact = dl[i] / dd[i]
            dd[i + 1] -= fact * du[i]
            b[i + 1] -= fact * b[i]
            du2[i] = 0.0
        else:
            fact = dd[i] / dl[i]
            dd[i] = dl[i]
            tmp = dd[i + 1]
            dd[i + 1] = du[i] - fact * tmp
            if i < n - 2:
                du2[i] = du[i + 1]
                du[i + 1] = -fact * du2[i]
            du[i] = tmp
            tmp = b[i]
            b[i] = b[i + 1]
            b[i + 1] = tmp - fact * b[i + 1]
    if abs(dd[n - 1]) < tiny:
        dd[n - 1] = tiny
    x = [0.0] * n
    x[n - 1] = b[n - 1] / dd[n - 1]
    x[n - 2] = (b[n - 2] - du[n - 2] * x[n - 1]) / dd[n - 2]
    for i in range(n - 3, -1, -1):
        x[i] = (b[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / dd[i]
    return np.array(x)


def _block_vectors(d, e, lams, norm):
    n = len(d)
    vecs = np.zeros((n, len(lams)))
    tiny = _EPS * max(norm, 1e-300)
    cluster_gap = 1e-3 * max(norm, 1e-300)
    # fixed, deterministic, generic start vector
    start = 1.0 + 0.3 * np.sin(np.arange(1, n + 1) * 1.618)
    for j, lam in enumerate(lams):
        members = [i for i in range(j) if abs(lams[i] - lam) <= cluster_gap]
        x = start / np.linalg.norm(start)
        for _ in range(4):
            x = _solve_shifted(d, e, lam, x, tiny)
            for i in members:
                x -= np.dot(vecs[:, i], x) * vecs[:, i]
            nx = np.linalg.norm(x)
            if nx == 0:
                x = np.roll(start, j)
                nx = np.linalg.norm(x)
            x /= nx
        for i in members:
            x -= np.dot(vecs[:, i], x) * vecs[:, i]
        x /= np.linalg.norm(x)
        # sign convention: largest-magnitude entry positive
        k = int(np.argmax(np.abs(x)))
        vecs[:, j] = x if x[k] > 0 else -x
    return vecs


def tridiag_eigen(diag, offdiag) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a real symmetric tridiagonal matrix.

    Eigenvalues come from bisection on the Sturm count of the leading-minor
    recurrence; eigenvectors from inverse iteration with a pivoted
    tridiagonal solve, re-orthogonalized inside clusters.

    Returns
    -------
    w : ndarray, shape (m,)
        Ascending eigenvalues.
    V : ndarray, shape (m, m)
        Orthonormal eigenvectors as columns, ``T @ V = V @ diag(w)``.
    """
    d = np.asarray(diag, dtype=float)
    e = np.asarray(offdiag, dtype=float)
    if d.size == 0:
        raise DomainError("empty matrix")
    if e.size != d.size - 1:
        raise DomainError("offdiag must have length len(diag) - 1")
    m = d.size
    norm = float(np.max(np.abs(d)) + (2 * np.max(np.abs(e)) if e.size else 0.0))
    cuts = _split_points(d, e)
    vals, cols = [], []
    for lo_i, hi_i in zip(cuts[:-1], cuts[1:]):
        bd, be = d[lo_i:hi_i], e[lo_i:hi_i - 1]
        if bd.size == 1:
            w = np.array([bd[0]])
            v = np.ones((1, 1))
        else:
            lo, hi = _gershgorin(bd, be)
            w = kernels.bisect_eigenvalues(bd, be * be, lo, hi)
            v = _block_vectors(bd, be, w, norm)
        for j in range(w.size):
            full = np.zeros(m)
            full[lo_i:hi_i] = v[:, j]
            vals.append(w[j])
            cols.append(full)
    order = np.argsort(np.array(vals), kind="stable")
    w = np.array(vals)[order]
    V = np.column_stack([cols[i] for i in order])
    # decoupled blocks sharing an eigenvalue still need mutual orthogonality
    if len(cuts) > 2:
        for j in range(m):
            for i in range(j):
                if abs(w[i] - w[j]) <= 1e-3 * max(norm, 1e-300):
                    V[:, j] -= np.dot(V[:, i], V[:, j]) * V[:, i]
            V[:, j] /= np.linalg.norm(V[:, j])
    return w, V
