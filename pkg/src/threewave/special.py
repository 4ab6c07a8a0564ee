"""Special functions on the real line: elliptic integrals, Weierstrass p, Whittaker W, 2F0.

Weierstrass p with real invariants is reduced to Jacobi functions, so no
lattice sums are needed.  Let e1 >= e2 >= e3 be the real roots of
4 s^3 - g2 s - g3 when the discriminant is positive.  Two real branches exist.

* ``branch="real"``: u on the real axis, p in [e1, inf) with poles at 2 n w_r.
* ``branch="oscillatory"``: the line u + w' through the imaginary half-period,
  where p oscillates in [e3, e2].

With negative discriminant only the real-axis branch exists.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .errors import DegenerateLatticeError, DomainError, PoleError
from .numerics import adaptive_quad_vec

__all__ = [
    "ellipk",
    "ellipf",
    "carlson_rf",
    "jacobi_sncndn",
    "CubicRoots",
    "real_cubic_roots",
    "WeierstrassInvariants",
    "weierstrass_p",
    "weierstrass_p_prime",
    "weierstrass_laurent",
    "real_half_period",
    "whittaker_w",
    "log_whittaker_w",
    "hyp2f0_terminating",
]


# ---------------------------------------------------------------- elliptic integrals

def ellipk(m: float) -> float:
    """Complete elliptic integral K(m) = pi / (2 AGM(1, sqrt(1 - m)))."""
    if not m < 1.0:
        raise DomainError(f"K(m) diverges for m >= 1 (m={m})")
    a, b = 1.0, math.sqrt(1.0 - m)
    for _ in range(64):
        if abs(a - b) <= 1e-16 * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (a + b)


def carlson_rf(x: float, y: float, z: float) -> float:
    """Carlson's symmetric integral R_F by the duplication theorem."""
    if min(x, y, z) < 0 or (x == 0) + (y == 0) + (z == 0) > 1:
        raise DomainError("R_F needs nonnegative arguments, at most one zero")
    for _ in range(200):
        mu = (x + y + z) / 3.0
        dx, dy, dz = 1 - x / mu, 1 - y / mu, 1 - z / mu
        if max(abs(dx), abs(dy), abs(dz)) < 1e-4:
            e2 = dx * dy - dz * dz
            e3 = dx * dy * dz
            return (1 - e2 / 10 + e3 / 14 + e2 * e2 / 24 - 3 * e2 * e3 / 44) / math.sqrt(mu)
        sx, sy, sz = math.sqrt(x), math.sqrt(y), math.sqrt(z)
        lam = sx * (sy + sz) + sy * sz
        x, y, z = 0.25 * (x + lam), 0.25 * (y + lam), 0.25 * (z + lam)
    raise DomainError("R_F duplication did not converge")


def ellipf(phi: float, m: float) -> float:
    """Incomplete elliptic integral F(phi | m) for |phi| <= pi/2, 0 <= m <= 1."""
    s = math.sin(phi)
    c = math.cos(phi)
    if m == 1.0 and abs(s) == 1.0:
        raise DomainError("F(pi/2 | 1) diverges")
    return s * carlson_rf(c * c, 1.0 - m * s * s, 1.0)


def jacobi_sncndn(u, m: float):
    """Jacobi sn, cn, dn for real ``u`` and ``0 <= m <= 1`` (compiled when available)."""
    if not 0.0 <= m <= 1.0:
        raise DomainError(f"parameter m={m} outside [0, 1]")
    scalar = np.ndim(u) == 0
    sn, cn, dn = kernels.sncndn(np.atleast_1d(np.asarray(u, dtype=float)), float(m))
    if scalar:
        return float(sn[0]), float(cn[0]), float(dn[0])
    return sn, cn, dn


# ---------------------------------------------------------------- real cubics

@dataclass(frozen=True)
class CubicRoots:
    """Real roots in ascending order with their multiplicities."""

    roots: tuple
    multiplicity: tuple

    def __len__(self):
        return len(self.roots)


def _cubic_eval(p, x):
    v = p[0]
    dv = 0.0
    for c in p[1:]:
        dv = dv * x + v
        v = v * x + c
    return v, dv


def _newton_polish(p, r):
    v, dv = _cubic_eval(p, r)
    if dv != 0.0:
        cand = r - v / dv
        if abs(_cubic_eval(p, cand)[0]) <= abs(v):
            return cand
    return r


def real_cubic_roots(p3: float, p2: float, p1: float, p0: float,
                     rel_merge: float = 1e-7) -> CubicRoots:
    """Real roots of ``p3 s^3 + p2 s^2 + p1 s + p0``.

    Trigonometric formula for three real roots, Cardano otherwise; each root
    gets a Newton polish.  Roots closer than ``rel_merge`` times the root
    scale are merged and reported with multiplicity 2 or 3.
    """
    if p3 == 0:
        raise DomainError("degenerate cubic: leading coefficient is zero")
    p = (float(p3), float(p2), float(p1), float(p0))
    a, b, c = p2 / p3, p1 / p3, p0 / p3
    # depressed t^3 + P t + Q with s = t - a/3
    P = b - a * a / 3.0
    Q = 2.0 * a ** 3 / 27.0 - a * b / 3.0 + c
    shift = -a / 3.0
    disc = -(4.0 * P ** 3 + 27.0 * Q * Q)
    scale = max(abs(a), math.sqrt(abs(b)), abs(c) ** (1.0 / 3.0), 1e-300)
    if P == 0.0 and Q == 0.0:
        return CubicRoots((shift,), (3,))
    if disc > 0 or (P < 0 and disc > -1e-12 * scale ** 6):
        r = 2.0 * math.sqrt(-P / 3.0)
        arg = 3.0 * Q / (P * r) if P != 0 else 0.0
        theta = math.acos(max(-1.0, min(1.0, arg))) / 3.0
        ts = [r * math.cos(theta - 2.0 * math.pi * k / 3.0) for k in range(3)]
        roots = sorted(_newton_polish(p, t + shift) for t in ts)
    else:
        sq = math.sqrt(max(0.0, Q * Q / 4.0 + P ** 3 / 27.0))
        u = -Q / 2.0 + sq if Q < 0 else -Q / 2.0 - sq
        u = math.copysign(abs(u) ** (1.0 / 3.0), u)
        t = u - P / (3.0 * u) if u != 0 else 0.0
        roots = [_newton_polish(p, t + shift)]
    merged, mult = [], []
    for rt in roots:
        if merged and abs(rt - merged[-1]) <= rel_merge * scale:
            k = mult[-1]
            merged[-1] = (merged[-1] * k + rt) / (k + 1)
            mult[-1] = k + 1
        else:
            merged.append(rt)
            mult.append(1)
    return CubicRoots(tuple(merged), tuple(mult))


# ---------------------------------------------------------------- Weierstrass p

@dataclass(frozen=True)
class WeierstrassInvariants:
    """Real invariants of the cubic ``4 s^3 - g2 s - g3``."""

    g2: float
    g3: float

    @property
    def discriminant(self) -> float:
        return self.g2 ** 3 - 27.0 * self.g3 ** 2

    @cached_property
    def roots(self) -> tuple:
        """Real roots, descending (e1 >= e2 >= e3; one entry if the discriminant is negative)."""
        cr = real_cubic_roots(4.0, 0.0, -self.g2, -self.g3)
        out = []
        for r, k in zip(cr.roots, cr.multiplicity):
            out += [r] * k
        return tuple(sorted(out, reverse=True))

    @property
    def scale(self) -> float:
        return max(abs(self.g2) ** 0.5, abs(self.g3) ** (1.0 / 3.0), 1e-300)


def weierstrass_laurent(n_terms: int, inv: WeierstrassInvariants) -> list:
    """Coefficients c_2.. of p(u) = u^-2 + sum_k c_k u^(2k-2)."""
    c = {2: inv.g2 / 20.0, 3: inv.g3 / 28.0}
    for k in range(4, n_terms + 2):
        acc = sum(c[m] * c[k - m] for m in range(2, k - 1))
        c[k] = 3.0 * acc / ((2 * k + 1) * (k - 3))
    return [c[k] for k in range(2, n_terms + 2)]


_LAURENT = 8


def _laurent(u, inv, deriv):
    coef = weierstrass_laurent(_LAURENT, inv)
    u2 = u * u
    if deriv:
        acc = np.zeros_like(u)
        for k in range(_LAURENT + 1, 1, -1):
            acc = acc * u2 + (2 * k - 2) * coef[k - 2]
        return -2.0 / (u2 * u) + acc * u
    acc = np.zeros_like(u)
    for k in range(_LAURENT + 1, 1, -1):
        acc = acc * u2 + coef[k - 2]
    return 1.0 / u2 + acc * u2


def _real_parameters(inv: WeierstrassInvariants):
    """Jacobi reduction data for the real-axis branch: (kind, e_ref, amplitude, rate, m)."""
    roots = inv.roots
    if len(roots) == 3:
        e1, e2, e3 = roots
        w = math.sqrt(max(e1 - e3, 0.0))
        m = (e2 - e3) / (e1 - e3) if e1 > e3 else 0.0
        return "three", e3, e1 - e3, w, m
    er = roots[0]
    h2 = math.sqrt(3.0 * er * er - inv.g2 / 4.0)
    m = 0.5 - 3.0 * er / (4.0 * h2)
    return "one", er, h2, 2.0 * math.sqrt(h2), min(max(m, 0.0), 1.0)


def real_half_period(inv: WeierstrassInvariants) -> float:
    """Real half-period w_r, the distance from a pole to the nearest real minimum of p.

    Equals the integral of ds / sqrt(4 s^3 - g2 s - g3) from the largest real
    root to infinity.  Negative discriminants are accepted: the real period
    line still exists when two roots are complex.
    """
    if inv.discriminant == 0.0:
        raise DegenerateLatticeError("zero discriminant: the real period is infinite")
    kind, _, amp, rate, m = _real_parameters(inv)
    if kind == "three":
        return ellipk(m) / rate
    return ellipk(m) / math.sqrt(amp)


def _check_pole(u, inv, branch):
    if branch != "real" or inv.discriminant == 0.0:
        if branch == "real" and inv.g2 == 0.0 and inv.g3 == 0.0:
            if np.any(np.abs(u) <= 1e-12):
                raise PoleError("p(u) has a pole at u = 0")
        return
    wr = real_half_period(inv)
    r = np.remainder(u, 2.0 * wr)
    dist = np.minimum(r, 2.0 * wr - r)
    if np.any(dist <= 1e-12 * max(1.0, wr)):
        raise PoleError("argument within 1e-12 of a lattice point")


def _p_eval(u, inv, branch, deriv):
    u = np.asarray(u, dtype=float)
    if branch not in ("real", "oscillatory"):
        raise DomainError(f"unknown branch {branch!r}")
    if branch == "oscillatory":
        roots = inv.roots
        if inv.discriminant <= 0.0 or len(roots) != 3:
            raise DegenerateLatticeError(
                "the oscillatory branch needs three distinct real roots (discriminant > 0)")
        e1, e2, e3 = roots
        w = math.sqrt(e1 - e3)
        m = (e2 - e3) / (e1 - e3)
        sn, cn, dn = kernels.sncndn(np.atleast_1d(w * u), m)
        sn, cn, dn = (x.reshape(u.shape) for x in (sn, cn, dn))
        if deriv:
            return 2.0 * (e2 - e3) * w * sn * cn * dn
        return e3 + (e2 - e3) * sn * sn

    _check_pole(u, inv, branch)
    if inv.g2 == 0.0 and inv.g3 == 0.0:
        return -2.0 / u ** 3 if deriv else 1.0 / u ** 2
    kind, eref, amp, rate, m = _real_parameters(inv)
    au = np.abs(u)
    small = au * au * inv.scale < 1e-3
    out = np.empty_like(u)
    sn, cn, dn = kernels.sncndn(np.atleast_1d(rate * u), m)
    sn, cn, dn = (x.reshape(u.shape) for x in (sn, cn, dn))
    with np.errstate(divide="ignore", invalid="ignore"):
        if kind == "three":
            if deriv:
                big = -2.0 * amp * rate * cn * dn / sn ** 3
            else:
                big = eref + amp / (sn * sn)
        else:
            omc = 1.0 - cn
            if deriv:
                big = -4.0 * amp ** 1.5 * sn * dn / (omc * omc)
            else:
                big = eref + amp * (1.0 + cn) / omc
    out[...] = big
    if np.any(small):
        out[small] = _laurent(u[small], inv, deriv)
    return out


def weierstrass_p(u, inv: WeierstrassInvariants, branch: str = "real"):
    """Weierstrass p for real ``u`` (scalar or array).

    Parameters
    ----------
    u : float or array_like
    inv : WeierstrassInvariants
    branch : {"real", "oscillatory"}
        ``"real"`` evaluates p(u); ``"oscillatory"`` evaluates p(u + w') on the
        horizontal line through the imaginary half-period.

    Raises
    ------
    PoleError
        Real branch within 1e-12 of a lattice point.
    DegenerateLatticeError
        Oscillatory branch with nonpositive discriminant.
    """
    out = _p_eval(u, inv, branch, deriv=False)
    return float(out) if np.ndim(u) == 0 else out


def weierstrass_p_prime(u, inv: WeierstrassInvariants, branch: str = "real"):
    """Derivative of :func:`weierstrass_p` with respect to ``u`` on the same branch."""
    out = _p_eval(u, inv, branch, deriv=True)
    return float(out) if np.ndim(u) == 0 else out


# ---------------------------------------------------------------- Whittaker W

def _whittaker_integral_log(kappa, mu, x, rel_tol):
    """log of J = int_0^inf t^(mu-kappa-1/2) (1+t/x)^(kappa-1/2+mu) e^-t dt."""
    a = mu - kappa - 0.5
    b = kappa - 0.5 + mu
    x = np.atleast_1d(np.asarray(x, dtype=float))
    # shift each row by the log-integrand at the peak of t^a e^-t so that
    # J stays representable for extreme x
    tpk = a if a > 0 else 1.0
    shift = (a * math.log(tpk) - tpk if a > 0 else 0.0) + b * np.log1p(tpk / x)

    def integrand(t):
        lt = np.log(t)
        return np.exp(a * lt[None, :] + b * np.log1p(t[None, :] / x[:, None])
                      - t[None, :] - shift[:, None])

    J = adaptive_quad_vec(integrand, 0.0, math.inf, rel_tol=rel_tol)
    return np.log(J) + shift


def log_whittaker_w(kappa: float, mu: float, x, rel_tol: float = 1e-13, scaled: bool = False):
    """Natural log of W_{kappa,mu}(x) for x > 0 and 1/2 - kappa + mu > 0.

    With ``scaled`` the log of ``W e^{x/2} x^{-kappa}`` is returned.
    """
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= 0):
        raise DomainError("whittaker_w needs x > 0")
    if not 0.5 - kappa + mu > 0:
        raise DomainError("integral representation needs 1/2 - kappa + mu > 0")
    out = _whittaker_integral_log(kappa, mu, xa, rel_tol) - math.lgamma(0.5 - kappa + mu)
    if not scaled:
        xf = np.atleast_1d(xa)
        out = out + kappa * np.log(xf) - 0.5 * xf
    return float(out[0]) if np.ndim(x) == 0 else out.reshape(xa.shape)


def whittaker_w(kappa: float, mu: float, x, scaled: bool = False, rel_tol: float = 1e-13):
    """Whittaker function W_{kappa,mu}(x) via its Laplace-type integral.

    With ``scaled=True`` returns ``W e^{x/2} x^{-kappa}``, which tends to 1 as
    x grows and avoids overflow for strongly negative ``kappa``.
    """
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= 0):
        raise DomainError("whittaker_w needs x > 0")
    if not 0.5 - kappa + mu > 0:
        raise DomainError("integral representation needs 1/2 - kappa + mu > 0")
    lj = _whittaker_integral_log(kappa, mu, xa, rel_tol) - math.lgamma(0.5 - kappa + mu)
    if scaled:
        out = np.exp(lj)
    else:
        xf = np.atleast_1d(xa)
        out = np.exp(kappa * np.log(xf) - 0.5 * xf + lj)
    return float(out[0]) if np.ndim(x) == 0 else out.reshape(xa.shape)


# ---------------------------------------------------------------- 2F0

def hyp2f0_terminating(v1: int, v2: int, x: complex) -> complex:
    """Terminating 2F0(-v1, -v2; ; x) by direct summation."""
    if v1 < 0 or v2 < 0 or int(v1) != v1 or int(v2) != v2:
        raise DomainError("v1, v2 must be nonnegative integers")
    term = 1.0 + 0j
    total = term
    for n in range(min(v1, v2)):
        term = term * (n - v1) * (n - v2) * x / (n + 1)
        total += term
    return total
