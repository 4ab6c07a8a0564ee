"""Classical three-wave dynamics: raw flow, reduced motion, elliptic solution, Kummer shape.

Throughout, ``K = omega1 c1 + omega2 c2`` and ``delta = omega0 - omega1 - omega2``.
On a level set (c1, c2) the energy reads ``E = delta I0 + K + 2 x``.  The
reduced action obeys ``(dI0/dt)^2 = P(I0)``, where ``P`` is the energy cubic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (DegenerateMotionError, DomainError, NoPhysicalBracketError,
                     SingularityError)
from .model import (ActionAngle, KummerPoint, ModeAmplitudes, ModelParams,
                    ReducedInvariants, hamiltonian_classical, reduced_invariants,
                    wrap_angle)
from .numerics import OdeSolution, rk_integrate, rk_integrate_threewave
from .special import (WeierstrassInvariants, ellipf, real_cubic_roots,
                      real_half_period, weierstrass_p, weierstrass_p_prime)

__all__ = [
    "threewave_rhs",
    "invariant_rates",
    "integrate_threewave",
    "reduced_rhs",
    "EnergyCubic",
    "energy_cubic",
    "ExactSolution",
    "exact_solution",
    "phase_recovery",
    "nambu_bracket",
    "kummer_rhs",
    "kummer_hamiltonian",
    "integrate_kummer",
    "i0_second_order_residual",
]


def _K(inv: ReducedInvariants, p: ModelParams) -> float:
    return p.omega1 * inv.c1 + p.omega2 * inv.c2


# ---------------------------------------------------------------- raw system

def threewave_rhs(z: ModeAmplitudes, p: ModelParams) -> np.ndarray:
    """Time derivative of (z0, z1, z2) under the three-wave equations."""
    z0, z1, z2 = z.z0, z.z1, z.z2
    g = p.g0
    return np.array([
        1j * p.omega0 * z0 + 1j * g * z1 * z2,
        1j * p.omega1 * z1 + 1j * g * z0 * z2.conjugate(),
        1j * p.omega2 * z2 + 1j * g * z0 * z1.conjugate(),
    ])


def invariant_rates(z: ModeAmplitudes, p: ModelParams) -> tuple[float, float, float]:
    """Exact (dH/dt, dI1/dt, dI2/dt) by the chain rule contracted with the flow."""
    zd = threewave_rhs(z, p)
    z0, z1, z2 = z.z0, z.z1, z.z2
    g = p.g0
    dH = [p.omega0 * z0.conjugate() + g * (z1 * z2).conjugate(),
          p.omega1 * z1.conjugate() + g * z0.conjugate() * z2,
          p.omega2 * z2.conjugate() + g * z0.conjugate() * z1]
    rate_H = 2.0 * sum(dH[k] * zd[k] for k in range(3)).real
    n = [2.0 * (z.conjugate() * d).real for z, d in zip((z0, z1, z2), zd)]
    return rate_H, n[0] + n[1], n[0] + n[2]


def integrate_threewave(z0: ModeAmplitudes, p: ModelParams, t_grid,
                        rel_tol: float = 1e-10, abs_tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Dormand-Prince trajectory sampled on ``t_grid`` (which must start at 0).

    Returns the grid and a complex array of shape ``(len(t_grid), 3)``.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.size < 2 or t[0] != 0.0:
        raise DomainError("t_grid must start at 0 and have at least two points")
    sol = rk_integrate_threewave((p.omega0, p.omega1, p.omega2), p.g0, z0.as_real(),
                                 (0.0, float(t[-1])), rel_tol, abs_tol, output_grid=t)
    Z = sol.y[:, 0::2] + 1j * sol.y[:, 1::2]
    return t, Z


# ---------------------------------------------------------------- reduced system

def reduced_rhs(I0: float, psi0: float, inv: ReducedInvariants, p: ModelParams) -> tuple[float, float]:
    """(dI0/dt, dpsi0/dt) of the one-degree-of-freedom reduced motion."""
    for s in (0.0, inv.c1, inv.c2):
        if abs(I0 - s) <= 1e-12:
            raise SingularityError(f"I0={I0} within 1e-12 of the singular value {s}")
    rad = inv.radicand(I0)
    if rad < 0:
        raise DomainError(f"I0={I0} outside the physical range (0, {inv.c})")
    r = math.sqrt(rad)
    dI0 = 2.0 * p.g0 * r * math.sin(psi0)
    dpsi0 = p.delta + p.g0 * inv.radicand_prime(I0) / r * math.cos(psi0)
    return dI0, dpsi0


@dataclass(frozen=True)
class EnergyCubic:
    """The cubic ``P(I0) = (dI0/dt)^2`` on an energy level, with its physical bracket.

    Attributes
    ----------
    p3, p2, p1, p0 : float
        Coefficients, highest power first.
    turning_points : (float, float)
        The bracket ``[r_minus, r_plus]`` where the motion lives.
    roots : tuple
        All real roots, ascending.
    """

    p3: float
    p2: float
    p1: float
    p0: float
    turning_points: tuple
    roots: tuple
    E: float
    inv: ReducedInvariants

    def __call__(self, I0):
        return ((self.p3 * I0 + self.p2) * I0 + self.p1) * I0 + self.p0

    @property
    def coefficients(self) -> tuple:
        return (self.p3, self.p2, self.p1, self.p0)


def _cubic_coefficients(E, inv, p):
    g2 = p.g0 * p.g0
    d = p.delta
    w = E - _K(inv, p)
    p3 = 4.0 * g2
    p2 = -4.0 * g2 * (inv.c1 + inv.c2) - d * d
    p1 = 4.0 * g2 * inv.c1 * inv.c2 + 2.0 * d * w
    p0 = -w * w
    return p3, p2, p1, p0


def energy_cubic(E: float, inv: ReducedInvariants, p: ModelParams,
                 I0_init: Optional[float] = None) -> EnergyCubic:
    """Coefficients of ``4 g0^2 I0 (c1-I0)(c2-I0) - (E - delta I0 - K)^2`` and the bracket.

    Parameters
    ----------
    I0_init : float, optional
        Initial action; selects the bracket and must not sit where the cubic is negative.

    Raises
    ------
    NoPhysicalBracketError
        If the cubic is negative at ``I0_init``.
    """
    p3, p2, p1, p0 = _cubic_coefficients(E, inv, p)

    def P(x):
        return ((p3 * x + p2) * x + p1) * x + p0

    scale = max(abs(p3) * inv.c ** 3, abs(p2) * inv.c ** 2, abs(p1) * inv.c, abs(p0), 1e-300)
    if I0_init is not None and P(I0_init) < -1e-12 * scale:
        raise NoPhysicalBracketError(
            f"energy cubic is {P(I0_init):.3e} < 0 at I0={I0_init}: no motion on this level")
    if p3 == 0.0:
        # decoupled case: the cubic degenerates to -(E - delta I0 - K)^2
        if p.delta != 0.0:
            r = (E - _K(inv, p)) / p.delta
            roots = (r,)
        else:
            roots = ()
        i0 = I0_init if I0_init is not None else (roots[0] if roots else 0.0)
        return EnergyCubic(p3, p2, p1, p0, (i0, i0), roots, E, inv)
    cr = real_cubic_roots(p3, p2, p1, p0)
    roots = []
    for r, k in zip(cr.roots, cr.multiplicity):
        roots += [r] * k
    roots = tuple(sorted(roots))
    if len(roots) == 3:
        bracket = (roots[0], roots[1])
        if I0_init is not None and not roots[0] - 1e-9 * max(1, abs(roots[0])) <= I0_init \
                <= roots[1] + 1e-9 * max(1, abs(roots[1])):
            bracket = (roots[2], math.inf)
    else:
        bracket = (roots[0], math.inf)
    return EnergyCubic(p3, p2, p1, p0, bracket, roots, E, inv)


# ---------------------------------------------------------------- exact solution

@dataclass(frozen=True)
class ExactSolution:
    """Closed-form reduced motion ``I0(t) = alpha p(k (t - t0) + w') + beta`` with ``k = |g0|^(2/3)``.

    ``p`` is evaluated on its oscillatory branch, whose range maps onto the
    physical bracket.  With ``g0 = 0`` the action is frozen and ``winv`` is None.
    """

    alpha: float
    beta: float
    winv: Optional[WeierstrassInvariants]
    t0: float
    branch_sign: int
    inv: ReducedInvariants
    params: ModelParams
    E: float
    I0_initial: float
    cubic: EnergyCubic = field(repr=False)

    @property
    def rate(self) -> float:
        return abs(self.params.g0) ** (2.0 / 3.0)

    @property
    def frozen(self) -> bool:
        return self.winv is None

    def _u(self, t):
        return self.rate * (np.asarray(t, dtype=float) - self.t0)

    def i0(self, t):
        """Reduced action at time(s) ``t``."""
        if self.frozen:
            return np.full(np.shape(t), self.I0_initial) if np.ndim(t) else self.I0_initial
        return self.alpha * weierstrass_p(self._u(t), self.winv, "oscillatory") + self.beta

    def di0dt(self, t):
        if self.frozen:
            return np.zeros(np.shape(t)) if np.ndim(t) else 0.0
        return self.alpha * self.rate * weierstrass_p_prime(self._u(t), self.winv, "oscillatory")

    def d2i0dt2(self, t):
        """Second derivative through p'' = 6 p^2 - g2 / 2."""
        if self.frozen:
            return np.zeros(np.shape(t)) if np.ndim(t) else 0.0
        s = weierstrass_p(self._u(t), self.winv, "oscillatory")
        return self.alpha * self.rate ** 2 * (6.0 * s * s - 0.5 * self.winv.g2)

    def period(self) -> float:
        if self.frozen:
            return math.inf
        return 2.0 * real_half_period(self.winv) / self.rate

    def kummer(self, t) -> np.ndarray:
        """(x, y, I0) along the solution, array of shape ``t.shape + (3,)``."""
        I0 = np.asarray(self.i0(t), dtype=float)
        x = 0.5 * (self.E - self.params.delta * I0 - _K(self.inv, self.params))
        y = 0.5 * np.asarray(self.di0dt(t), dtype=float)
        return np.stack([x * np.ones_like(I0), y, I0], axis=-1)


def exact_solution(z0: ModeAmplitudes, p: ModelParams) -> ExactSolution:
    """Build the elliptic closed form through the initial amplitudes.

    Raises
    ------
    DegenerateMotionError
        Nonpositive discriminant of the Weierstrass invariants (equilibrium or separatrix).
    """
    inv = reduced_invariants(z0, p)
    E = inv.E
    I0 = abs(z0.z0) ** 2
    y0 = (p.g0 * z0.z0 * z0.z1.conjugate() * z0.z2.conjugate()).imag
    cubic = energy_cubic(E, inv, p, I0_init=I0)
    if p.g0 == 0.0:
        return ExactSolution(1.0, 0.0, None, 0.0, 1, inv, p, E, I0, cubic)
    ag = abs(p.g0)
    alpha = ag ** (-2.0 / 3.0)
    p3, p2, p1, p0 = cubic.coefficients
    beta = -p2 / (3.0 * p3)
    g2 = alpha * (p2 * p2 / (3.0 * p3) - p1)
    g3 = -(((p3 * beta + p2) * beta + p1) * beta + p0)
    winv = WeierstrassInvariants(g2, g3)
    if not winv.discriminant > 1e-12 * winv.scale ** 6 or len(winv.roots) != 3 \
            or winv.roots[0] - winv.roots[1] <= 1e-9 * winv.scale \
            or winv.roots[1] - winv.roots[2] <= 1e-9 * winv.scale:
        raise DegenerateMotionError(
            f"Weierstrass discriminant {winv.discriminant:.3e}: no generic oscillation")
    e1, e2, e3 = winv.roots
    w = math.sqrt(e1 - e3)
    m = (e2 - e3) / (e1 - e3)
    s0 = (I0 - beta) / alpha
    q = min(1.0, max(0.0, (s0 - e3) / (e2 - e3)))
    u0 = ellipf(math.asin(math.sqrt(q)), m) / w
    sign = 1 if 2.0 * y0 >= 0.0 else -1
    u0 *= sign
    t0 = -u0 / ag ** (2.0 / 3.0)
    return ExactSolution(alpha, beta, winv, t0, sign, inv, p, E, I0, cubic)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)


def _cumulative_integral(f: Callable[[np.ndarray], np.ndarray], t: np.ndarray, max_piece: float):
    """int_0^{t_i} f for every grid point by composite Gauss-Legendre."""
    anchors = np.concatenate([[0.0], t])
    out = np.empty(t.size)
    acc = 0.0
    for i in range(t.size):
        a, b = anchors[i], anchors[i + 1]
        if b != a:
            n = max(1, int(math.ceil(abs(b - a) / max_piece)))
            edges = np.linspace(a, b, n + 1)
            mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
            half = 0.5 * (edges[1:] - edges[:-1])[:, None]
            nodes = mid + half * _GL_X[None, :]
            acc += float(np.sum(half * _GL_W[None, :] * f(nodes)))
        out[i] = acc
    return out


def phase_recovery(sol: ExactSolution, aa0: ActionAngle, t_grid, unwrap: bool = False):
    """Angles (psi0, psi1, psi2) along the exact solution.

    psi0 comes from the energy surface and the sign of dI0/dt, with no
    quadrature.  psi1 and psi2 integrate
    ``omega_j + (E - delta I0 - K) / (2 (c_j - I0))`` by Gauss-Legendre
    pieces no longer than a sixteenth of the period.

    Returns
    -------
    psi0, psi1, psi2 : ndarray
        Wrapped to (-pi, pi], or continuous when ``unwrap`` is set.
    """
    p = sol.params
    inv = sol.inv
    t = np.asarray(t_grid, dtype=float).ravel()
    K = _K(inv, p)
    if sol.frozen:
        psi0 = aa0.psi0 + p.delta * t
        psi1 = aa0.psi1 + p.omega1 * t
        psi2 = aa0.psi2 + p.omega2 * t
    else:
        I0 = sol.i0(t)
        xs = sol.E - p.delta * I0 - K
        ys = sol.di0dt(t)
        mag = np.hypot(xs, ys)
        if np.any(mag <= 1e-12 * max(1.0, abs(sol.E))):
            raise SingularityError("trajectory passes through a point where the radical vanishes")
        sgn = 1.0 if p.g0 > 0 else -1.0
        psi0 = np.arctan2(sgn * ys, sgn * xs)
        if unwrap:
            psi0 = np.unwrap(psi0)
        piece = sol.period() / 16.0

        def rate(c, w):
            def f(s):
                i0 = sol.i0(s)
                return w + (sol.E - p.delta * i0 - K) / (2.0 * (c - i0))
            return f

        psi1 = aa0.psi1 + _cumulative_integral(rate(inv.c1, p.omega1), t, piece)
        psi2 = aa0.psi2 + _cumulative_integral(rate(inv.c2, p.omega2), t, piece)
    if unwrap:
        return psi0, psi1, psi2
    return wrap_angle(np.asarray(psi0)), wrap_angle(psi1), wrap_angle(psi2)


# ---------------------------------------------------------------- Kummer shape

def _grad_fd(f, pt: np.ndarray) -> np.ndarray:
    g = np.empty(3)
    for k in range(3):
        h = 1e-6 * max(1.0, abs(pt[k]))
        e = np.zeros(3)
        e[k] = h
        g[k] = (f(*(pt + e)) - f(*(pt - e))) / (2.0 * h)
    return g


def casimir_gradient(pt: KummerPoint, inv: ReducedInvariants, g0: float) -> np.ndarray:
    return np.array([-pt.x, -pt.y, 0.5 * g0 * g0 * inv.radicand_prime(pt.I0)])


def nambu_bracket(f, g, pt: KummerPoint, inv: ReducedInvariants, g0: float,
                  grad_f=None, grad_g=None) -> float:
    """det[grad C, grad f, grad g] at ``pt``.

    ``f`` and ``g`` take ``(x, y, I0)``.  Gradients may be supplied as
    callables of the same signature; otherwise central differences with step
    ``1e-6 * max(1, |coordinate|)`` are used.
    """
    v = pt.as_array()
    gf = np.asarray(grad_f(*v), dtype=float) if grad_f else _grad_fd(f, v)
    gg = np.asarray(grad_g(*v), dtype=float) if grad_g else _grad_fd(g, v)
    gc = casimir_gradient(pt, inv, g0)
    return float(np.linalg.det(np.array([gc, gf, gg])))


def kummer_hamiltonian(pt: KummerPoint, inv: ReducedInvariants, p: ModelParams) -> float:
    """Energy on the reduced space, ``delta I0 + K + 2 x``."""
    return p.delta * pt.I0 + _K(inv, p) + 2.0 * pt.x


def kummer_rhs(pt: KummerPoint, inv: ReducedInvariants, p: ModelParams) -> tuple[float, float, float]:
    """(dx/dt, dy/dt, dI0/dt) in state order (x, y, I0)."""
    return (-p.delta * pt.y,
            p.delta * pt.x + p.g0 * p.g0 * inv.radicand_prime(pt.I0),
            2.0 * pt.y)


def integrate_kummer(pt0: KummerPoint, inv: ReducedInvariants, p: ModelParams, t_grid,
                     rel_tol: float = 1e-10, abs_tol: float = 1e-12) -> OdeSolution:
    t = np.asarray(t_grid, dtype=float)

    def rhs(_t, s):
        return np.array(kummer_rhs(KummerPoint(s[0], s[1], s[2]), inv, p))

    return rk_integrate(rhs, pt0.as_array(), (float(t[0]), float(t[-1])), rel_tol, abs_tol,
                        output_grid=t)


def i0_second_order_residual(I0, d2I0, E: float, inv: ReducedInvariants, p: ModelParams) -> float:
    """Max of |I0'' - delta (E - delta I0 - K) - 2 g0^2 P'(I0)| over the samples."""
    I0 = np.asarray(I0, dtype=float)
    d2 = np.asarray(d2I0, dtype=float)
    rhs = p.delta * (E - p.delta * I0 - _K(inv, p)) + 2.0 * p.g0 ** 2 * inv.radicand_prime(I0)
    return float(np.max(np.abs(d2 - rhs))) if I0.size else 0.0
