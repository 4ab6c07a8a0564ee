"""Quantum three-mode system restricted to its invariant blocks.

A block (v1, v2) is spanned by ``|n, v1 - n, v2 - n>`` for ``n = 0..L`` with
``L = min(v1, v2)``.  In that basis the Hamiltonian is
``K + delta hbar n`` on the diagonal with real couplings ``b_k`` off it.
The time evolution is ``U(t) = exp(i t H / hbar)`` and observables evolve as
``M(t) = U(t)^dagger M U(t)``, hence ``dM/dt = (i/hbar) [M(t), H]``.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
import sympy as sp

from .errors import CapabilityError, DomainError, TruncationError
from .model import ModelParams
from .numerics import closed_form_roots, tridiag_eigen
from .numerics import _block_vectors  # inverse iteration for explicit eigenvalues

__all__ = [
    "BlockLabel",
    "TridiagonalBlock",
    "BlockOperator",
    "BlockOperators",
    "ParityFactorization",
    "coupling_b",
    "build_block",
    "block_operators",
    "exact_block_operators",
    "char_poly_delta",
    "char_poly_coefficients",
    "parity_factorization",
    "block_spectrum",
    "evolution_operator",
    "closed_form_U_L1",
    "closed_form_U_L2",
    "closed_form_A0_L1",
    "closed_form_A0_L2",
    "transition_probability",
    "transition_probability_numeric",
    "spectrum_symmetry",
    "heisenberg_residual",
    "reduced_operator_relations",
    "FockOracle",
    "full_fock_oracle",
]


@dataclass(frozen=True)
class BlockLabel:
    """Invariant sector labelled by the occupation sums (v1, v2)."""

    v1: int
    v2: int

    def __post_init__(self):
        for v in (self.v1, self.v2):
            if int(v) != v or v < 0:
                raise DomainError(f"block labels must be nonnegative integers, got {v!r}")

    @property
    def L(self) -> int:
        return min(self.v1, self.v2)

    @property
    def dim(self) -> int:
        return self.L + 1

    def c1(self, hbar: float) -> float:
        return hbar * self.v1

    def c2(self, hbar: float) -> float:
        return hbar * self.v2

    def fock_state(self, n: int) -> tuple[int, int, int]:
        """Occupation numbers of the n-th basis vector."""
        if not 0 <= n <= self.L:
            raise IndexError(f"basis index {n} outside 0..{self.L}")
        return n, self.v1 - n, self.v2 - n


def coupling_b(k: int, label: BlockLabel, p: ModelParams) -> float:
    """b_k = g0 sqrt(hbar^3 k (v1 - k + 1)(v2 - k + 1)) for 1 <= k <= L."""
    if not 1 <= k <= label.L:
        raise IndexError(f"coupling index {k} outside 1..{label.L}")
    h = p.hbar
    return p.g0 * math.sqrt(h ** 3 * k * (label.v1 - k + 1) * (label.v2 - k + 1))


@dataclass(frozen=True)
class TridiagonalBlock:
    """Block Hamiltonian ``shift * Id + H_I`` with ``H_I`` tridiagonal.

    The spectral factorization is computed at most once per method and
    cached behind a lock; later reads take no lock.
    """

    shift: float
    diag: np.ndarray
    offdiag: np.ndarray
    label: BlockLabel
    params: ModelParams
    _cache: dict = field(default_factory=dict, compare=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, compare=False, repr=False)

    @property
    def resonant(self) -> bool:
        return bool(np.all(self.diag == 0.0))

    def interaction_matrix(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def matrix(self) -> np.ndarray:
        return self.shift * np.eye(self.label.dim) + self.interaction_matrix()

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix(), 2))

    def _cached(self, key, compute):
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        with self._lock:
            hit = self._cache.get(key)
            if hit is None:
                hit = compute()
                self._cache[key] = hit
        return hit


def build_block(label: BlockLabel, p: ModelParams) -> TridiagonalBlock:
    h = p.hbar
    shift = p.omega1 * label.c1(h) + p.omega2 * label.c2(h)
    diag = p.delta * h * np.arange(label.dim, dtype=float)
    off = np.array([coupling_b(k, label, p) for k in range(1, label.L + 1)], dtype=float)
    return TridiagonalBlock(shift, diag, off, label, p)


# ---------------------------------------------------------------- operators

@dataclass(frozen=True)
class BlockOperator:
    matrix: object
    label: BlockLabel


class BlockOperators(NamedTuple):
    A0: BlockOperator
    A: BlockOperator
    Astar: BlockOperator
    X: BlockOperator
    Y: BlockOperator


def exact_block_operators(label: BlockLabel, hbar, g0) -> BlockOperators:
    """Reduced operators as sympy matrices for exact (rational or symbolic) ``hbar``, ``g0``."""
    n = label.dim
    hbar = sp.sympify(hbar)
    g0 = sp.sympify(g0)
    A0 = sp.diag(*[hbar * k for k in range(n)])
    A = sp.zeros(n, n)
    for k in range(1, n):
        A[k - 1, k] = g0 * sp.sqrt(hbar ** 3 * k * (label.v1 - k + 1) * (label.v2 - k + 1))
    Astar = A.T
    X = (A + Astar) / 2
    Y = (A - Astar) / (2 * sp.I)
    return BlockOperators(*(BlockOperator(M, label) for M in (A0, A, Astar, X, Y)))


def block_operators(label: BlockLabel, p: ModelParams, exact: bool = False) -> BlockOperators:
    """A0, A, A*, X, Y on the block.

    With ``exact`` the matrices are sympy objects built from the rational
    reading of ``hbar`` and ``g0``.
    """
    if exact:
        return exact_block_operators(label, sp.nsimplify(p.hbar, rational=True),
                                     sp.nsimplify(p.g0, rational=True))
    n = label.dim
    A0 = np.diag(p.hbar * np.arange(n, dtype=float)).astype(complex)
    A = np.zeros((n, n), dtype=complex)
    for k in range(1, n):
        A[k - 1, k] = coupling_b(k, label, p)
    Astar = A.conj().T
    X = (A + Astar) / 2
    Y = (A - Astar) / 2j
    return BlockOperators(*(BlockOperator(M, label) for M in (A0, A, Astar, X, Y)))


# ---------------------------------------------------------------- characteristic polynomial

def char_poly_delta(lam: float, block: TridiagonalBlock) -> np.ndarray:
    """Leading minors Delta_0..Delta_{L+1} of ``H_I - lam Id``."""
    m = block.label.dim
    out = np.empty(m + 1)
    out[0] = 1.0
    out[1] = block.diag[0] - lam
    for k in range(2, m + 1):
        out[k] = (block.diag[k - 1] - lam) * out[k - 1] - block.offdiag[k - 2] ** 2 * out[k - 2]
    return out


def char_poly_coefficients(block: TridiagonalBlock) -> np.ndarray:
    """Coefficients (highest power first) of Delta_{L+1}(lam) from the minor recurrence."""
    prev = np.array([1.0])
    cur = np.array([-1.0, block.diag[0]])
    for k in range(2, block.label.dim + 1):
        nxt = np.polysub(np.polymul([-1.0, block.diag[k - 1]], cur),
                         block.offdiag[k - 2] ** 2 * prev)
        prev, cur = cur, nxt
    return cur


@dataclass(frozen=True)
class ParityFactorization:
    """Delta_{L+1}(lam) = lam^z * sign * Q(lam^2).

    ``parity`` is "odd" when L is even (a factor lam splits off, z = 1) and
    "even" when L is odd; ``coefficients`` are those of Q, highest first.
    """

    parity: str
    lam_power: int
    coefficients: np.ndarray

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1


def parity_factorization(block: TridiagonalBlock) -> ParityFactorization:
    if not block.resonant:
        raise DomainError("parity factorization needs a resonant block (zero diagonal)")
    coef = char_poly_coefficients(block)
    n = len(coef) - 1  # = L + 1
    z = n % 2
    # highest power first: powers n, n-1, ...; keep those with the parity of n
    q = coef[0::2]
    return ParityFactorization("odd" if z else "even", z, np.array(q))


def _explicit_capability(block):
    if not block.resonant:
        raise CapabilityError("explicit spectrum needs a resonant block")
    if block.label.L > 8:
        raise CapabilityError("explicit spectrum limited to L <= 8 (quartic in lambda^2)")


def _explicit_eigenvalues(block: TridiagonalBlock) -> np.ndarray:
    _explicit_capability(block)
    pf = parity_factorization(block)
    q = pf.coefficients
    mus: list = []
    deg = pf.degree
    if deg == 1:
        mus = [-q[1] / q[0]]
    elif deg >= 2:
        mus = [r.real for r in closed_form_roots(deg, q)]
    lams = [0.0] * pf.lam_power
    for mu in mus:
        r = math.sqrt(max(mu, 0.0))
        lams += [r, -r]
    return np.sort(np.array(lams, dtype=float))


def block_spectrum(block: TridiagonalBlock, method: str = "sturm") -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending, including the shift) and orthonormal eigenvectors.

    ``method="explicit"`` uses the radical formulas on the parity factor
    (resonant blocks with L <= 8); ``"sturm"`` uses bisection.
    """
    if method not in ("sturm", "explicit"):
        raise DomainError(f"unknown method {method!r}")

    def compute():
        if method == "sturm" or block.label.dim == 1:
            w, V = tridiag_eigen(block.diag, block.offdiag)
        else:
            w = _explicit_eigenvalues(block)
            if np.all(block.offdiag != 0):
                norm = float(np.max(np.abs(block.offdiag))) * 2
                V = _block_vectors(np.asarray(block.diag), np.asarray(block.offdiag), w, norm)
            else:
                V = tridiag_eigen(block.diag, block.offdiag)[1]
        w = w + block.shift
        w.setflags(write=False)
        V.setflags(write=False)
        return w, V

    if method == "explicit":
        _explicit_capability(block)
    return block._cached(("spectrum", method), compute)


def evolution_operator(t: float, block: TridiagonalBlock) -> np.ndarray:
    """U(t) = V diag(exp(i t lam_j / hbar)) V^T."""
    w, V = block_spectrum(block)
    phase = np.exp(1j * t * w / block.params.hbar)
    return (V * phase) @ V.T


# ---------------------------------------------------------------- closed forms

def _require_resonant(p: ModelParams):
    if p.delta != 0:
        raise DomainError("closed forms need resonance omega0 = omega1 + omega2")


def closed_form_U_L1(t: float, v1: int, p: ModelParams) -> np.ndarray:
    """Evolution on the block (v1, 1)."""
    _require_resonant(p)
    if v1 < 1:
        raise DomainError("L = 1 needs v1 >= 1")
    nu = p.g0 * math.sqrt(p.hbar * v1)
    ph = np.exp(1j * t * (p.omega1 * v1 + p.omega2))
    c, s = math.cos(nu * t), math.sin(nu * t)
    return ph * np.array([[c, 1j * s], [1j * s, c]])


def _L2_data(v1: int, p: ModelParams):
    _require_resonant(p)
    if v1 < 2:
        raise DomainError("L = 2 needs v1 >= 2")
    nu = p.g0 * math.sqrt(2.0 * p.hbar * (2 * v1 - 1))
    b1 = math.sqrt(v1 / (2.0 * v1 - 1.0))
    b2 = math.sqrt((v1 - 1.0) / (2.0 * v1 - 1.0))
    return nu, b1, b2


def closed_form_U_L2(t: float, v1: int, p: ModelParams) -> np.ndarray:
    """Evolution on the block (v1, 2), using M^3 = M for the normalized coupling matrix M."""
    nu, b1, b2 = _L2_data(v1, p)
    c, s = math.cos(nu * t), math.sin(nu * t)
    ph = np.exp(1j * t * (p.omega1 * v1 + 2 * p.omega2))
    U = np.array([
        [1 + (c - 1) * b1 * b1, 1j * b1 * s, (c - 1) * b1 * b2],
        [1j * b1 * s, c, 1j * b2 * s],
        [(c - 1) * b1 * b2, 1j * b2 * s, 1 + (c - 1) * b2 * b2],
    ])
    return ph * U


def closed_form_A0_L1(t: float, v1: int, p: ModelParams) -> np.ndarray:
    _require_resonant(p)
    nu = p.g0 * math.sqrt(p.hbar * v1)
    c2, s2 = math.cos(2 * nu * t), math.sin(2 * nu * t)
    return p.hbar * np.array([[(1 - c2) / 2, -0.5j * s2], [0.5j * s2, (1 + c2) / 2]])


def closed_form_A0_L2(t: float, v1: int, p: ModelParams) -> np.ndarray:
    """Heisenberg-picture A0 on the block (v1, 2) as a five-term trigonometric sum."""
    nu, b1, b2 = _L2_data(v1, p)
    s, c = math.sin(nu * t), math.cos(nu * t)
    s2 = math.sin(2 * nu * t)
    q = b1 * b1 * b2 * b2
    sq = np.array([
        [b1 ** 2 - 2 * q, 0, b1 * b2 - 2 * b1 * b2 ** 3],
        [0, 2 * b2 ** 2 - 1, 0],
        [b1 * b2 - 2 * b1 * b2 ** 3, 0, b2 ** 2 - 2 * b2 ** 4],
    ])
    dbl = np.array([
        [0, -b1 / 2 + b1 * b2 ** 2, 0],
        [b1 / 2 - b1 * b2 ** 2, 0, b2 / 2 - b2 ** 3],
        [0, -b2 / 2 + b2 ** 3, 0],
    ])
    single = np.array([
        [0, -b1 * b2 ** 2, 0],
        [b1 * b2 ** 2, 0, -b1 ** 2 * b2],
        [0, b1 ** 2 * b2, 0],
    ])
    anti = 2 * (b1 ** 3 * b2 - b1 * b2 ** 3)
    cosb = np.array([[-4 * q, 0, anti], [0, 0, 0], [anti, 0, 4 * q]])
    const = np.array([
        [4 * q, 0, -anti],
        [0, 1, 0],
        [-anti, 0, 2 * (b1 ** 4 + b2 ** 4)],
    ])
    M = s * s * sq + 1j * s2 * dbl + 2j * s * single + c * cosb + const
    return p.hbar * M


def transition_probability(t: float, v1: int, p: ModelParams) -> float:
    """Closed-form probability between |2, v1-2, 0> and |0, v1, 2> on the L = 2 block."""
    nu, _, _ = _L2_data(v1, p)
    r = p.hbar * p.g0 ** 2 / nu ** 2
    return (0.25 - r * r) * (math.cos(nu * t) - 1.0) ** 2


def transition_probability_numeric(t: float, block: TridiagonalBlock, m: int, n: int) -> float:
    """|<m|U(t)|n>|^2 in the block basis."""
    U = evolution_operator(t, block)
    return float(abs(U[m, n]) ** 2)


# ---------------------------------------------------------------- checks

def spectrum_symmetry(matrix: np.ndarray) -> dict:
    """Pairing diagnostics of the spectrum of a (possibly corrupted) interaction matrix.

    Returns the largest imaginary part (relative to the matrix norm), the
    +/- pairing defect, the zero-eigenvalue count and its expected value.
    """
    M = np.asarray(matrix)
    n = M.shape[0]
    w = np.linalg.eigvals(M)
    scale = max(1.0, float(np.linalg.norm(M, 2)))
    imag = float(np.max(np.abs(w.imag))) / scale
    re = np.sort(w.real)
    pairing = float(np.max(np.abs(re + re[::-1]))) / scale
    zeros = int(np.sum(np.abs(w) <= 1e-9 * scale))
    return {"max_imag": imag, "pairing_defect": pairing, "zero_count": zeros,
            "expected_zero_count": 1 if n % 2 == 1 else 0}


def heisenberg_residual(block: TridiagonalBlock, t_grid) -> dict:
    """Max operator-norm residuals of the reduced Heisenberg equations on ``t_grid``.

    Derivatives are exact: ``dM/dt = (i/hbar)[M(t), H]`` and the second
    derivative is the nested commutator.
    """
    p = block.params
    h = p.hbar
    lab = block.label
    c1, c2 = lab.c1(h), lab.c2(h)
    ops = block_operators(lab, p)
    H = block.matrix()
    I = np.eye(lab.dim)
    res = {"dA0": 0.0, "dX": 0.0, "dY": 0.0, "d2A0": 0.0}

    def comm(a, b):
        return a @ b - b @ a

    for t in np.asarray(t_grid, dtype=float):
        U = evolution_operator(t, block)
        Ud = U.conj().T
        A0, X, Y = (Ud @ o.matrix @ U for o in (ops.A0, ops.X, ops.Y))
        dA0 = 1j / h * comm(A0, H)
        dX = 1j / h * comm(X, H)
        dY = 1j / h * comm(Y, H)
        d2A0 = (1j / h) ** 2 * comm(comm(A0, H), H)
        poly = 3 * A0 @ A0 - 2 * (c1 + c2) * A0 + c1 * c2 * I - h * A0
        K = block.shift
        r = {
            "dA0": dA0 - 2 * Y,
            "dX": dX + p.delta * Y,
            "dY": dY - p.delta * X - p.g0 ** 2 * poly,
            "d2A0": d2A0 - p.delta * (H - p.delta * A0 - K * I) - 2 * p.g0 ** 2 * poly,
        }
        for k, v in r.items():
            res[k] = max(res[k], float(np.linalg.norm(v, 2)))
    return res


def reduced_operator_relations(label: BlockLabel, hbar, g0, exact: bool = True) -> dict:
    """Residuals of the commutation and product relations of the reduced operators.

    With ``exact`` the operators are sympy matrices over the exact values of
    ``hbar`` and ``g0`` (floats are read as rationals) and every residual is
    the sympy maximum absolute entry, zero when the identity holds.  Otherwise
    float residuals are returned.
    """
    if exact:
        h = sp.nsimplify(hbar, rational=True)
        g = sp.nsimplify(g0, rational=True)
        ops = exact_block_operators(label, h, g)
        I = sp.eye(label.dim)
        imag = sp.I
    else:
        h, g = float(hbar), float(g0)
        ops = block_operators(label, ModelParams(0.0, 0.0, 0.0, g, h))
        I = np.eye(label.dim)
        imag = 1j
    A0, A, As, X, Y = (o.matrix for o in ops)
    c1, c2 = h * label.v1, h * label.v2

    def mm(a, b):
        return a * b if exact else a @ b

    def comm(a, b):
        return mm(a, b) - mm(b, a)

    A0sq = mm(A0, A0)
    R = {
        "[A0,A]+hA": comm(A0, A) + h * A,
        "[A0,A*]-hA*": comm(A0, As) - h * As,
        "AA*": mm(A, As) - g ** 2 * mm(mm(A0 + h * I, c1 * I - A0), c2 * I - A0),
        "A*A": mm(As, A) - g ** 2 * mm(mm(A0, (c1 + h) * I - A0), (c2 + h) * I - A0),
        "[A,A*]": comm(A, As) - h * g ** 2 * (3 * A0sq - 2 * (c1 + c2) * A0 + c1 * c2 * I - h * A0),
        "[A0,X]": comm(A0, X) + imag * h * Y,
        "[A0,Y]": comm(A0, Y) - imag * h * X,
        "[X,Y]": comm(X, Y) - imag / 2 * h * g ** 2
        * (3 * A0sq - 2 * (c1 + c2) * A0 + c1 * c2 * I - h * A0),
        "X^2+Y^2": mm(X, X) + mm(Y, Y) - g ** 2 / 2 * (
            2 * mm(A0sq, A0) - (2 * h * (label.v1 + label.v2) + h) * A0sq
            + (2 * h ** 2 * label.v1 * label.v2 + h ** 2) * A0 + h ** 3 * label.v1 * label.v2 * I),
    }
    if exact:
        return {k: max((abs(sp.simplify(e)) for e in M), default=sp.Integer(0)) for k, M in R.items()}
    return {k: float(np.max(np.abs(M))) for k, M in R.items()}


# ---------------------------------------------------------------- full Fock space

@dataclass(frozen=True)
class FockOracle:
    """Truncated three-mode Fock space with ``0 <= n_i <= caps[i]``."""

    caps: tuple
    params: ModelParams
    basis: tuple
    H: np.ndarray
    a: tuple
    A1: np.ndarray
    A2: np.ndarray

    def index(self, n0: int, n1: int, n2: int) -> int:
        N0, N1, N2 = self.caps
        return (n0 * (N1 + 1) + n1) * (N2 + 1) + n2

    def safe(self, label: BlockLabel) -> bool:
        N0, N1, N2 = self.caps
        return label.L <= N0 and label.v1 <= N1 and label.v2 <= N2

    def sector_indices(self, label: BlockLabel) -> list:
        if not self.safe(label):
            raise TruncationError(f"block {label} is not closed within caps {self.caps}")
        return [self.index(*label.fock_state(n)) for n in range(label.dim)]

    def sector(self, label: BlockLabel) -> np.ndarray:
        """Matrix of H on the sector, ordered by the block index n."""
        idx = self.sector_indices(label)
        return self.H[np.ix_(idx, idx)]

    def safe_labels(self) -> list:
        N0, N1, N2 = self.caps
        return [BlockLabel(v1, v2) for v1 in range(N1 + 1) for v2 in range(N2 + 1)
                if self.safe(BlockLabel(v1, v2))]


def full_fock_oracle(caps, p: ModelParams) -> FockOracle:
    """Dense Hamiltonian on the truncated Fock space with ``[a_i, a_j^*] = hbar delta_ij``."""
    caps = tuple(int(c) for c in caps)
    if len(caps) != 3 or min(caps) < 0:
        raise DomainError("caps must be three nonnegative integers")
    h = p.hbar

    def lower(N):
        return np.diag(np.sqrt(h * np.arange(1, N + 1, dtype=float)), 1)

    I = [np.eye(N + 1) for N in caps]
    singles = [lower(N) for N in caps]
    a0 = np.kron(np.kron(singles[0], I[1]), I[2])
    a1 = np.kron(np.kron(I[0], singles[1]), I[2])
    a2 = np.kron(np.kron(I[0], I[1]), singles[2])
    n0, n1, n2 = (x.T @ x for x in (a0, a1, a2))
    H = p.omega0 * n0 + p.omega1 * n1 + p.omega2 * n2 \
        + p.g0 * (a0 @ a1.T @ a2.T + a0.T @ a1 @ a2)
    basis = tuple((i, j, k) for i in range(caps[0] + 1) for j in range(caps[1] + 1)
                  for k in range(caps[2] + 1))
    return FockOracle(caps, p, basis, H, (a0, a1, a2), n0 + n1, n0 + n2)
