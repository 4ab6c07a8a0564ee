"""Reduced coherent states of a block and their reproducing measure.

Within the block ``(v1, v2)`` the coherent vector is the polynomial
``sum_n zhat^n hbar^(n/2) / (g0^n sqrt(n! (v1-n)! (v2-n)!)) |n, v1-n, v2-n>``.
Exact symbol algebra lives in :mod:`threewave.symbols` and is re-exported
here.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .model import ActionAngle, ModeAmplitudes, ModelParams, ReducedInvariants
from .numerics import adaptive_quad_vec
from .quantum import BlockLabel, block_operators
from .special import hyp2f0_terminating, log_whittaker_w
from .symbols import (  # noqa: F401  re-exported
    HBAR,
    PolySymbol,
    classical_limit_check,
    constant,
    from_terms,
    generators,
    monomial,
    normal_order,
    poisson_bracket,
    star_commutator,
    star_product,
    symbol_of_normal_word,
    symbol_of_word,
)

__all__ = [
    "PolySymbol",
    "generators",
    "symbol_of_normal_word",
    "symbol_of_word",
    "normal_order",
    "star_product",
    "star_commutator",
    "poisson_bracket",
    "classical_limit_check",
    "ReducedCoherentVector",
    "reduced_coherent_vector",
    "coherent_eigen_residuals",
    "zhat_from_reduced",
    "zhat_from_amplitudes",
    "projection_prefactor",
    "glauber_sector",
    "reproducing_kernel",
    "reproducing_kernel_sum",
    "weight_rho",
    "log_weight_rho",
    "weight_rho_double_integral",
    "weight_rho_tail",
    "moment_check",
    "hamiltonian_ode_matrix",
]


def _log_fact(n: int) -> float:
    return math.lgamma(n + 1)


def _coefficients(label: BlockLabel, p: ModelParams) -> np.ndarray:
    """Polynomial coefficients c_n with amplitudes_n = c_n zhat^n (log-domain)."""
    if p.g0 == 0:
        raise DomainError("reduced coherent states need g0 != 0")
    n = np.arange(label.dim)
    logc = (0.5 * n * math.log(p.hbar) - n * math.log(abs(p.g0))
            - 0.5 * np.array([_log_fact(k) + _log_fact(label.v1 - k) + _log_fact(label.v2 - k)
                              for k in n]))
    return np.exp(logc) * np.sign(p.g0) ** n


@dataclass(frozen=True)
class ReducedCoherentVector:
    label: BlockLabel
    zhat: complex
    amplitudes: np.ndarray
    coefficients: np.ndarray

    @property
    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def derivative(self) -> np.ndarray:
        """d/dzhat of the amplitude vector, taken on the polynomial coefficients."""
        n = np.arange(self.label.dim)
        out = np.zeros(self.label.dim, dtype=complex)
        out[1:] = n[1:] * self.coefficients[1:] * self.zhat ** (n[1:] - 1)
        return out


def reduced_coherent_vector(zhat: complex, label: BlockLabel, p: ModelParams) -> ReducedCoherentVector:
    coef = _coefficients(label, p)
    zhat = complex(zhat)
    powers = zhat ** np.arange(label.dim)
    amps = coef * powers
    amps.setflags(write=False)
    coef.setflags(write=False)
    return ReducedCoherentVector(label, zhat, amps, coef)


def coherent_eigen_residuals(vec: ReducedCoherentVector, p: ModelParams) -> dict:
    """Entrywise residuals of the three state-picture eigenrelations.

    Each residual is ``|lhs - rhs| / max(1, |rhs|)`` maximized over entries.
    """
    ops = block_operators(vec.label, p)
    h = p.hbar
    c1, c2 = vec.label.c1(h), vec.label.c2(h)
    a = vec.amplitudes
    da = vec.derivative()
    n = np.arange(vec.label.dim)
    zd = vec.zhat * da                  # zhat d/dzhat, i.e. n * a_n
    # (c1 - hbar zhat D)(c2 - hbar zhat D) is diagonal on monomials
    rhs_A = vec.zhat * (c1 - h * n) * (c2 - h * n) * a
    pairs = {
        "A0": (ops.A0.matrix @ a, h * zd),
        "A": (ops.A.matrix @ a, rhs_A),
        "Astar": (ops.Astar.matrix @ a, p.g0 ** 2 * h * da),
    }
    return {k: float(np.max(np.abs(l - r) / np.maximum(1.0, np.abs(r)))) for k, (l, r) in pairs.items()}


# ---------------------------------------------------------------- classical maps

def zhat_from_reduced(I0: float, psi0: float, inv: ReducedInvariants, g0: float) -> complex:
    if not 0 < I0 < inv.c:
        raise DomainError(f"I0={I0} outside (0, {inv.c})")
    return g0 * math.sqrt(I0 / ((inv.c1 - I0) * (inv.c2 - I0))) * cmath.exp(1j * psi0)


def zhat_from_amplitudes(z: ModeAmplitudes, g0: float) -> complex:
    """g0 z0 / (z1 z2), the same point as :func:`zhat_from_reduced`."""
    if z.z1 == 0 or z.z2 == 0:
        raise DomainError("zhat undefined when z1 or z2 vanishes")
    return g0 * z.z0 / (z.z1 * z.z2)


def projection_prefactor(aa: ActionAngle, label: BlockLabel, p: ModelParams) -> complex:
    """(v1 - I0/hbar)^(v1/2) (v2 - I0/hbar)^(v2/2) e^{i(v1 psi1 + v2 psi2)}."""
    h = p.hbar
    r1 = label.v1 - aa.I0 / h
    r2 = label.v2 - aa.I0 / h
    if (r1 < 0 and label.v1) or (r2 < 0 and label.v2):
        raise DomainError("classical point lies outside the block's shape (negative radical)")
    mag = (r1 ** (0.5 * label.v1) if label.v1 else 1.0) * (r2 ** (0.5 * label.v2) if label.v2 else 1.0)
    return mag * cmath.exp(1j * (label.v1 * aa.psi1 + label.v2 * aa.psi2))


def glauber_sector(z: ModeAmplitudes, label: BlockLabel, hbar: float) -> np.ndarray:
    """Components of the unnormalized Glauber state on ``|n, v1-n, v2-n>``.

    Direct evaluation of ``z0^n0 z1^n1 z2^n2 / sqrt(n0! n1! n2! hbar^(n0+n1+n2))``.
    """
    out = np.empty(label.dim, dtype=complex)
    for n in range(label.dim):
        n0, n1, n2 = label.fock_state(n)
        denom = math.sqrt(math.factorial(n0) * math.factorial(n1) * math.factorial(n2)
                          * hbar ** (n0 + n1 + n2))
        out[n] = z.z0 ** n0 * z.z1 ** n1 * z.z2 ** n2 / denom
    return out


# ---------------------------------------------------------------- kernel and measure

def reproducing_kernel(zhat: complex, what: complex, label: BlockLabel, p: ModelParams) -> complex:
    """<zhat | what> through the terminating 2F0."""
    x = np.conj(zhat) * what * p.hbar / p.g0 ** 2
    return hyp2f0_terminating(label.v1, label.v2, x) / (math.factorial(label.v1) * math.factorial(label.v2))


def reproducing_kernel_sum(zhat: complex, what: complex, label: BlockLabel, p: ModelParams) -> complex:
    """<zhat | what> as the explicit finite sum."""
    x = np.conj(zhat) * what * p.hbar / p.g0 ** 2
    return sum(x ** n / (math.factorial(n) * math.factorial(label.v1 - n) * math.factorial(label.v2 - n))
               for n in range(label.dim))


def log_weight_rho(x, label: BlockLabel, p: ModelParams, rel_tol: float = 1e-12):
    """Natural log of :func:`weight_rho`."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= 0):
        raise DomainError("weight_rho needs x > 0")
    v1, v2 = label.v1, label.v2
    kappa = -(v1 + v2 + 3) / 2.0
    # rho is symmetric in (v1, v2); mu >= 0 keeps the integral representation well scaled
    mu = abs(v1 - v2) / 2.0
    s = p.g0 ** 2 / (p.hbar * xa)
    logpref = (math.lgamma(v1 + 2) + math.lgamma(v2 + 2) + math.log(p.hbar)
               - math.log(2.0 * math.pi * p.g0 ** 2))
    return logpref + log_whittaker_w(kappa, mu, s, rel_tol=rel_tol, scaled=True)


def weight_rho(x, label: BlockLabel, p: ModelParams, rel_tol: float = 1e-12):
    """Radial density of the reproducing measure, ``d nu = rho(|zhat|^2) d|zhat|^2 d psi``.

    ``rho(X) = (v1+1)!(v2+1)! hbar / (2 pi g0^2) * s^(-kappa) e^(s/2) W_{kappa,mu}(s)``
    with ``s = g0^2/(hbar X)``, ``kappa = -(v1+v2+3)/2``, ``mu = |v1-v2|/2``.
    The Whittaker factor is evaluated in its scaled form so nothing overflows.
    """
    return np.exp(log_weight_rho(x, label, p, rel_tol))


def weight_rho_double_integral(x: float, label: BlockLabel, p: ModelParams,
                               rel_tol: float = 1e-10) -> float:
    """Reference value of rho from the defining two-dimensional integral.

    Nested double-exponential quadrature, no closed-form inner step.
    """
    if x <= 0:
        raise DomainError("weight_rho needs x > 0")
    h, g2 = p.hbar, p.g0 ** 2
    v1, v2 = label.v1, label.v2

    def inner(x1):
        def f(x2):
            a, b = x1[:, None], x2[None, :]
            e = -(x * a * b / g2 + a + b) / h
            return np.exp((v1 + 1) * np.log(a) + (v2 + 1) * np.log(b) + e)
        return adaptive_quad_vec(f, 0.0, math.inf, rel_tol=rel_tol * 0.1)

    total = adaptive_quad_vec(inner, 0.0, math.inf, rel_tol=rel_tol)
    return float(total) / (2.0 * math.pi * h ** (3 + v1 + v2) * g2)


def weight_rho_tail(label: BlockLabel, p: ModelParams) -> tuple[float, float, bool]:
    """Large-X behaviour of rho.

    Returns ``(exponent, constant, logarithmic)``: ``X^exponent rho(X)``
    tends to ``constant`` (divided by ``log X`` when ``logarithmic``).
    """
    lo, hi = sorted((label.v1, label.v2))
    const = math.factorial(lo + 1) * p.g0 ** (2 * lo + 2) / (2.0 * math.pi * p.hbar ** (lo + 1))
    if hi == lo:
        return float(lo + 2), const, True
    return float(lo + 2), const * math.factorial(hi - lo - 1), False


def moment_check(n: int, label: BlockLabel, p: ModelParams, rel_tol: float = 1e-9) -> float:
    """Relative residual of the n-th radial moment against n!(v1-n)!(v2-n)! g0^(2n)/hbar^n."""
    if not 0 <= n <= label.L:
        raise DomainError(f"moment index {n} outside 0..{label.L}")

    def f(X):
        return np.exp(n * np.log(X) + log_weight_rho(X, label, p, rel_tol=min(1e-12, rel_tol * 1e-2)))

    m = 2.0 * math.pi * float(adaptive_quad_vec(f, 0.0, math.inf, rel_tol=rel_tol))
    target = (p.g0 ** (2 * n) / p.hbar ** n * math.factorial(n)
              * math.factorial(label.v1 - n) * math.factorial(label.v2 - n))
    return abs(m / target - 1.0)


def hamiltonian_ode_matrix(label: BlockLabel, p: ModelParams) -> np.ndarray:
    """The reduced Hamiltonian as a differential operator on polynomials of degree <= L.

    Built from ``A0 psi = hbar zhat psi'``, ``g0^2 hbar psi'`` and
    ``zhat (c1 - hbar zhat D)(c2 - hbar zhat D) psi`` plus the constant
    ``omega1 c1 + omega2 c2``.  Column n is the image of ``zhat^n``.
    """
    h = p.hbar
    c1, c2 = label.c1(h), label.c2(h)
    K = p.omega1 * c1 + p.omega2 * c2
    m = label.dim
    M = np.zeros((m, m))
    for n in range(m):
        M[n, n] = K + p.delta * h * n
        if n >= 1:
            M[n - 1, n] = p.g0 ** 2 * h * n
        if n + 1 < m:
            M[n + 1, n] = (c1 - h * n) * (c2 - h * n)
    return M
