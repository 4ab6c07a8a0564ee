"""Parameters, coordinates and the classical Hamiltonians of the three-mode system.

The phase space is C^3 with amplitudes ``(z0, z1, z2)``.  On the open set where
all three amplitudes are nonzero we use the canonical action-angle chart

    I0 = |z0|^2,  I1 = |z0|^2 + |z1|^2,  I2 = |z0|^2 + |z2|^2,
    psi0 = phi0 - phi1 - phi2,  psi1 = phi1,  psi2 = phi2,

and the reduced ``(x, y, I0)`` picture in which ``x + i y = g0 z0 conj(z1) conj(z2)``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError

__all__ = [
    "ModelParams",
    "ModeAmplitudes",
    "ActionAngle",
    "KummerPoint",
    "ReducedInvariants",
    "wrap_angle",
    "to_action_angle",
    "from_action_angle",
    "hamiltonian_classical",
    "hamiltonian_action_angle",
    "momentum_map",
    "reduced_invariants",
    "casimir",
    "kummer_embed",
    "kummer_point",
]


def wrap_angle(x):
    """Map an angle (scalar or array) onto (-pi, pi]."""
    if isinstance(x, np.ndarray):
        return np.pi - np.remainder(np.pi - x, 2.0 * np.pi)
    y = math.pi - math.fmod(math.pi - x, 2.0 * math.pi)
    if y > math.pi:
        y -= 2.0 * math.pi
    elif y <= -math.pi:
        y += 2.0 * math.pi
    return y


@dataclass(frozen=True)
class ModelParams:
    """Frequencies, coupling and quantum scale.

    ``hbar`` is only read by quantum and correspondence code; classical
    operations ignore it.
    """

    omega0: float
    omega1: float
    omega2: float
    g0: float
    hbar: float = 1.0

    def __post_init__(self):
        if not self.hbar > 0:
            raise DomainError(f"hbar must be positive, got {self.hbar!r}")

    @property
    def delta(self) -> float:
        """Detuning omega0 - omega1 - omega2."""
        return self.omega0 - self.omega1 - self.omega2

    @property
    def resonant(self) -> bool:
        return self.delta == 0


@dataclass(frozen=True)
class ModeAmplitudes:
    z0: complex
    z1: complex
    z2: complex

    @classmethod
    def from_array(cls, arr) -> "ModeAmplitudes":
        a = np.asarray(arr, dtype=complex).reshape(3)
        return cls(complex(a[0]), complex(a[1]), complex(a[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.z0, self.z1, self.z2], dtype=complex)

    def as_real(self) -> np.ndarray:
        """Interleaved real state (Re z0, Im z0, Re z1, Im z1, Re z2, Im z2)."""
        return np.array([self.z0.real, self.z0.imag, self.z1.real,
                         self.z1.imag, self.z2.real, self.z2.imag])

    @classmethod
    def from_real(cls, y) -> "ModeAmplitudes":
        return cls(complex(y[0], y[1]), complex(y[2], y[3]), complex(y[4], y[5]))


@dataclass(frozen=True)
class ActionAngle:
    I0: float
    I1: float
    I2: float
    psi0: float
    psi1: float
    psi2: float

    def validate(self) -> None:
        if not (self.I0 > 0 and self.I1 - self.I0 > 0 and self.I2 - self.I0 > 0):
            raise DomainError(
                "action-angle point violates I0 > 0, I1 > I0, I2 > I0: "
                f"I=({self.I0}, {self.I1}, {self.I2})")


@dataclass(frozen=True)
class KummerPoint:
    x: float
    y: float
    I0: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.I0])


@dataclass(frozen=True)
class ReducedInvariants:
    """Level values ``c1, c2`` of the momentum map and optionally the energy."""

    c1: float
    c2: float
    E: Optional[float] = None

    def __post_init__(self):
        if not (self.c1 > 0 and self.c2 > 0):
            raise DomainError(f"c1, c2 must be positive, got ({self.c1}, {self.c2})")

    @property
    def c(self) -> float:
        return min(self.c1, self.c2)

    def radicand(self, I0):
        """The cubic I0 (c1 - I0)(c2 - I0) under the square root."""
        return I0 * (self.c1 - I0) * (self.c2 - I0)

    def radicand_prime(self, I0):
        """Derivative 3 I0^2 - 2 (c1 + c2) I0 + c1 c2 of :meth:`radicand`."""
        return 3.0 * I0 * I0 - 2.0 * (self.c1 + self.c2) * I0 + self.c1 * self.c2


def to_action_angle(z: ModeAmplitudes) -> ActionAngle:
    a0, a1, a2 = abs(z.z0), abs(z.z1), abs(z.z2)
    if a0 == 0 or a1 == 0 or a2 == 0:
        raise DomainError("action-angle coordinates need all |z_i| > 0")
    phi0, phi1, phi2 = cmath.phase(z.z0), cmath.phase(z.z1), cmath.phase(z.z2)
    I0 = a0 * a0
    return ActionAngle(
        I0=I0,
        I1=I0 + a1 * a1,
        I2=I0 + a2 * a2,
        psi0=wrap_angle(phi0 - phi1 - phi2),
        psi1=wrap_angle(phi1),
        psi2=wrap_angle(phi2),
    )


def from_action_angle(aa: ActionAngle) -> ModeAmplitudes:
    aa.validate()
    return ModeAmplitudes(
        z0=math.sqrt(aa.I0) * cmath.exp(1j * (aa.psi0 + aa.psi1 + aa.psi2)),
        z1=math.sqrt(aa.I1 - aa.I0) * cmath.exp(1j * aa.psi1),
        z2=math.sqrt(aa.I2 - aa.I0) * cmath.exp(1j * aa.psi2),
    )


def hamiltonian_classical(z: ModeAmplitudes, p: ModelParams) -> float:
    z0, z1, z2 = z.z0, z.z1, z.z2
    quad = p.omega0 * abs(z0) ** 2 + p.omega1 * abs(z1) ** 2 + p.omega2 * abs(z2) ** 2
    # z0 z1b z2b + c.c. = 2 Re(z0 z1b z2b)
    coupling = 2.0 * (z0 * z1.conjugate() * z2.conjugate()).real
    return quad + p.g0 * coupling


def hamiltonian_action_angle(aa: ActionAngle, p: ModelParams) -> float:
    rad = aa.I0 * (aa.I1 - aa.I0) * (aa.I2 - aa.I0)
    if rad < 0:
        raise DomainError(f"negative radicand {rad} in the action-angle Hamiltonian")
    return (p.delta * aa.I0 + p.omega1 * aa.I1 + p.omega2 * aa.I2
            + 2.0 * p.g0 * math.sqrt(rad) * math.cos(aa.psi0))


def momentum_map(z: ModeAmplitudes) -> tuple[float, float]:
    n0 = abs(z.z0) ** 2
    return n0 + abs(z.z1) ** 2, n0 + abs(z.z2) ** 2


def reduced_invariants(z: ModeAmplitudes, p: Optional[ModelParams] = None) -> ReducedInvariants:
    """Level set (c1, c2) through ``z``; the energy is filled in when ``p`` is given."""
    c1, c2 = momentum_map(z)
    E = hamiltonian_classical(z, p) if p is not None else None
    return ReducedInvariants(c1, c2, E)


def casimir(kp: KummerPoint, inv: ReducedInvariants, g0: float) -> float:
    return -0.5 * (kp.x ** 2 + kp.y ** 2 - g0 * g0 * inv.radicand(kp.I0))


def kummer_embed(I0: float, psi0: float, inv: ReducedInvariants, g0: float) -> KummerPoint:
    if not 0 < I0 < inv.c:
        raise DomainError(f"I0={I0} outside the open interval (0, {inv.c})")
    r = g0 * math.sqrt(inv.radicand(I0))
    return KummerPoint(r * math.cos(psi0), r * math.sin(psi0), I0)


def kummer_point(z: ModeAmplitudes, g0: float) -> KummerPoint:
    """(x, y, I0) straight from amplitudes, valid also on the boundary of the chart."""
    w = g0 * z.z0 * z.z1.conjugate() * z.z2.conjugate()
    return KummerPoint(w.real, w.imag, abs(z.z0) ** 2)
