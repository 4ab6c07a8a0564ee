"""Self-verification suites behind ``threewave verify``.

Every check reports a measured residual next to its tolerance.  Random
sweeps draw from a single seeded generator so reports are reproducible.
"""
from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Callable, Optional

import numpy as np

from . import coherent as co
from . import quantum as qm
from .classical import (
    energy_cubic, exact_solution, integrate_threewave, kummer_hamiltonian,
)
from .errors import DegenerateMotionError
from .model import (
    ActionAngle, KummerPoint, ModeAmplitudes, ModelParams, ReducedInvariants, casimir,
    from_action_angle, hamiltonian_action_angle, hamiltonian_classical, kummer_embed,
    momentum_map, to_action_angle, wrap_angle,
)
from .special import real_half_period, weierstrass_p, weierstrass_p_prime
from .symbols import HBAR

__all__ = ["DEFAULT_SEED", "SUITES", "FAULTS", "CheckResult", "Report", "resolve_seed",
           "run_suite", "random_nondegenerate_case"]

DEFAULT_SEED = 20240917
SUITES = ("classical", "quantum", "coherent")
FAULTS = ("negate-b",)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    residual: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        extra = f"  {self.detail}" if self.detail else ""
        return f"{tag}  {self.name:<44s} residual={self.residual:.3e}  tol={self.tolerance:.1e}{extra}"


@dataclass
class Report:
    suite: str
    seed: int
    fault: Optional[str]
    results: list = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failed(self) -> list:
        return [r for r in self.results if not r.passed]

    def format(self) -> str:
        head = [f"threewave verify suite={self.suite} seed={self.seed}"
                + (f" fault={self.fault}" if self.fault else "")]
        body = [r.line() for r in self.results]
        n_fail = len(self.failed)
        tail = [f"{len(self.results) - n_fail}/{len(self.results)} checks passed"
                + (f"; failed: {', '.join(r.name for r in self.failed)}" if n_fail else "")]
        return "\n".join(head + body + tail)


def resolve_seed(seed: Optional[int] = None) -> int:
    """Explicit seed, else ``THREEWAVE_SEED``, else the built-in default."""
    if seed is not None:
        return int(seed)
    env = os.environ.get("THREEWAVE_SEED")
    return int(env) if env not in (None, "") else DEFAULT_SEED


def _check(name, residual, tol, detail="") -> CheckResult:
    residual = float(residual)
    return CheckResult(name, bool(np.isfinite(residual) and residual <= tol), residual, tol, detail)


# ---------------------------------------------------------------- random cases

def random_nondegenerate_case(rng: np.random.Generator, max_tries: int = 100):
    """Draw (params, amplitudes) whose reduced motion is a generic oscillation."""
    for _ in range(max_tries):
        w1, w2 = rng.uniform(0.3, 2.0, 2)
        w0 = w1 + w2 + rng.uniform(-1.0, 1.0)
        g0 = rng.uniform(0.3, 1.5) * rng.choice([-1.0, 1.0])
        mags = rng.uniform(0.2, 1.0, 3)
        phases = rng.uniform(-math.pi, math.pi, 3)
        z = ModeAmplitudes(*(m * np.exp(1j * ph) for m, ph in zip(mags, phases)))
        p = ModelParams(w0, w1, w2, g0)
        try:
            sol = exact_solution(z, p)
        except DegenerateMotionError:
            continue
        return p, z, sol
    raise RuntimeError("could not draw a nondegenerate case")


# ---------------------------------------------------------------- classical suite

def _classical_checks(rng, fault) -> list:
    out = []
    # model-core round trips
    worst_rt = worst_h = worst_c = 0.0
    for _ in range(50):
        I0 = rng.uniform(0.05, 1.0)
        aa = ActionAngle(I0, I0 + rng.uniform(0.05, 1.0), I0 + rng.uniform(0.05, 1.0),
                         *rng.uniform(-math.pi, math.pi, 3))
        back = to_action_angle(from_action_angle(aa))
        d = [back.I0 - aa.I0, back.I1 - aa.I1, back.I2 - aa.I2,
             wrap_angle(back.psi0 - aa.psi0), wrap_angle(back.psi1 - aa.psi1),
             wrap_angle(back.psi2 - aa.psi2)]
        worst_rt = max(worst_rt, max(abs(x) for x in d))
        p = ModelParams(*rng.uniform(0.2, 2.0, 3), rng.uniform(-1.5, 1.5))
        z = from_action_angle(aa)
        H1, H2 = hamiltonian_classical(z, p), hamiltonian_action_angle(aa, p)
        worst_h = max(worst_h, abs(H1 - H2) / (1.0 + abs(H1)))
        inv = ReducedInvariants(aa.I1, aa.I2)
        worst_c = max(worst_c, abs(casimir(kummer_embed(aa.I0, aa.psi0, inv, p.g0), inv, p.g0)))
    out.append(_check("model.action_angle_round_trip", worst_rt, 1e-12))
    out.append(_check("model.hamiltonian_consistency", worst_h, 1e-12))
    out.append(_check("model.casimir_of_embedding", worst_c, 1e-12))

    # benchmark exact vs RK
    p = ModelParams(2.0, 1.0, 1.0, 1.0)
    z0 = ModeAmplitudes(0.6, 0.8 + 0.1j, 0.5)
    t = np.linspace(0.0, 20.0, 801)
    sol = exact_solution(z0, p)
    _, Z = integrate_threewave(z0, p, t)
    out.append(_check("classical.exact_vs_rk_benchmark", np.max(np.abs(sol.i0(t) - np.abs(Z[:, 0]) ** 2)), 1e-6))

    worst = 0.0
    worst_cas = worst_en = 0.0
    cubic_res = 0.0
    cases = [random_nondegenerate_case(rng) for _ in range(5)]
    for p, z, sol in cases:
        T = sol.period()
        tg = np.linspace(0.0, min(max(20.0, 5 * T), 200.0), 601)
        _, Z = integrate_threewave(z, p, tg)
        worst = max(worst, float(np.max(np.abs(sol.i0(tg) - np.abs(Z[:, 0]) ** 2))))
        k = sol.kummer(tg)
        inv = sol.inv
        C = -0.5 * (k[:, 0] ** 2 + k[:, 1] ** 2 - p.g0 ** 2 * inv.radicand(k[:, 2]))
        worst_cas = max(worst_cas, float(np.max(np.abs(C))))
        Hc = np.array([kummer_hamiltonian(KummerPoint(*row), inv, p) for row in k])
        worst_en = max(worst_en, float(np.max(np.abs(Hc - sol.E))))
        cub = energy_cubic(sol.E, inv, p)
        K = p.omega1 * inv.c1 + p.omega2 * inv.c2
        xs = rng.uniform(0.0, inv.c, 20)
        direct = 4 * p.g0 ** 2 * inv.radicand(xs) - (sol.E - p.delta * xs - K) ** 2
        scale = max(1.0, float(np.max(np.abs(direct))))
        cubic_res = max(cubic_res, float(np.max(np.abs(cub(xs) - direct))) / scale)
    out.append(_check("classical.exact_vs_rk_random", worst, 1e-6, f"{len(cases)} draws"))
    out.append(_check("classical.casimir_containment", worst_cas, 1e-10))
    out.append(_check("classical.energy_containment", worst_en, 1e-9))
    out.append(_check("classical.cubic_identity", cubic_res, 1e-12))

    # conservation along RK over [0, 100]
    p = ModelParams(2.0, 1.0, 1.0, 1.0)
    t = np.linspace(0.0, 100.0, 2001)
    _, Z = integrate_threewave(z0, p, t)
    Hs = np.array([hamiltonian_classical(ModeAmplitudes(*row), p) for row in Z])
    I1s, I2s = np.array([momentum_map(ModeAmplitudes(*row)) for row in Z]).T
    drift = max(np.max(np.abs(Hs - Hs[0])) / abs(Hs[0]), np.max(np.abs(I1s - I1s[0])) / I1s[0],
                np.max(np.abs(I2s - I2s[0])) / I2s[0])
    out.append(_check("classical.conservation_drift", drift, 1e-8))

    # Weierstrass self-consistency on both branches
    ode = per = even = 0.0
    for _, _, sol in cases[:3]:
        inv = sol.winv
        wr = real_half_period(inv)
        u = np.linspace(0.05 * wr, 1.95 * wr, 101)
        for branch in ("real", "oscillatory"):
            P = weierstrass_p(u, inv, branch)
            dP = weierstrass_p_prime(u, inv, branch)
            scale = dP ** 2 + 4 * np.abs(P) ** 3 + abs(inv.g2) * np.abs(P) + abs(inv.g3)
            ode = max(ode, float(np.max(np.abs(dP ** 2 - 4 * P ** 3 + inv.g2 * P + inv.g3) / scale)))
            P2 = weierstrass_p(u + 2 * wr, inv, branch)
            per = max(per, float(np.max(np.abs(P2 - P) / np.maximum(1.0, np.abs(P)))))
            even = max(even, float(np.max(np.abs(weierstrass_p(-u, inv, branch) - P)
                                          / np.maximum(1.0, np.abs(P)))))
    out.append(_check("special.p_differential_equation", ode, 1e-9))
    out.append(_check("special.p_periodicity", per, 1e-10))
    out.append(_check("special.p_evenness", even, 1e-12))
    return out


# ---------------------------------------------------------------- quantum suite

def _interaction_matrix(block, fault) -> np.ndarray:
    M = block.interaction_matrix()
    if fault == "negate-b" and block.label.L >= 1:
        k = np.arange(block.label.L)
        M[k + 1, k] = -M[k + 1, k]
    return M


def _quantum_checks(rng, fault) -> list:
    out = []
    p = ModelParams(2.0, 1.0, 1.0, 1.0, 1.0)
    dev = imag = pair = det_res = 0.0
    zero_ok = True
    for v1 in range(11):
        for v2 in range(11):
            lab = qm.BlockLabel(v1, v2)
            if lab.L > 8:
                continue
            bl = qm.build_block(lab, p)
            ws, _ = qm.block_spectrum(bl)
            we, _ = qm.block_spectrum(bl, "explicit")
            dev = max(dev, float(np.max(np.abs(ws - we))))
            sym = qm.spectrum_symmetry(_interaction_matrix(bl, fault))
            imag = max(imag, sym["max_imag"])
            pair = max(pair, sym["pairing_defect"])
            zero_ok &= sym["zero_count"] == sym["expected_zero_count"]
            for lam in rng.uniform(-20, 20, 3):
                d = qm.char_poly_delta(lam, bl)[-1]
                D = np.linalg.det(bl.interaction_matrix() - lam * np.eye(lab.dim))
                det_res = max(det_res, abs(d - D) / max(1.0, abs(D)))
    out.append(_check("quantum.explicit_vs_sturm", dev, 1e-10))
    out.append(_check("quantum.spectrum_symmetry", max(imag, pair) + (0.0 if zero_ok else math.inf), 1e-12,
                      "pairing, reality and zero count"))
    out.append(_check("quantum.delta_recurrence_vs_det", det_res, 1e-10))

    q = ModelParams(1.3, 0.4, 0.5, 0.8, 0.7)
    F = qm.full_fock_oracle((4, 4, 4), q)
    ent = spec = 0.0
    for lab in F.safe_labels():
        S = F.sector(lab)
        bl = qm.build_block(lab, q)
        ent = max(ent, float(np.max(np.abs(S - bl.matrix()))))
        spec = max(spec, float(np.max(np.abs(np.linalg.eigvalsh(S) - qm.block_spectrum(bl)[0]))))
    comm = max(float(np.max(np.abs(F.H @ F.A1 - F.A1 @ F.H))), float(np.max(np.abs(F.H @ F.A2 - F.A2 @ F.H))))
    out.append(_check("quantum.fock_sector_entries", ent, 1e-12))
    out.append(_check("quantum.fock_spectrum", spec, 1e-10))
    out.append(_check("quantum.fock_integrals_of_motion", comm, 1e-12))

    tg = np.linspace(0.0, 10.0, 100)
    cf = a0 = tp = 0.0
    for v1 in (1, 3, 5):
        bl = qm.build_block(qm.BlockLabel(v1, 1), p)
        A0 = qm.block_operators(bl.label, p).A0.matrix
        for t in tg:
            U = qm.evolution_operator(t, bl)
            cf = max(cf, float(np.max(np.abs(U - qm.closed_form_U_L1(t, v1, p)))))
            a0 = max(a0, float(np.max(np.abs(U.conj().T @ A0 @ U - qm.closed_form_A0_L1(t, v1, p)))))
    for v1 in (2, 3, 7):
        bl = qm.build_block(qm.BlockLabel(v1, 2), p)
        A0 = qm.block_operators(bl.label, p).A0.matrix
        for t in tg:
            U = qm.evolution_operator(t, bl)
            cf = max(cf, float(np.max(np.abs(U - qm.closed_form_U_L2(t, v1, p)))))
            a0 = max(a0, float(np.max(np.abs(U.conj().T @ A0 @ U - qm.closed_form_A0_L2(t, v1, p)))))
            tp = max(tp, abs(qm.transition_probability(t, v1, p) - abs(U[0, 2]) ** 2))
    out.append(_check("quantum.closed_form_U", cf, 1e-10))
    out.append(_check("quantum.closed_form_A0", a0, 1e-10))
    out.append(_check("quantum.transition_closed_form", tp, 1e-12))
    nu = math.sqrt(6.0)
    out.append(_check("quantum.transition_8_9", abs(qm.transition_probability(math.pi / nu, 2, p) - 8 / 9), 1e-10))
    zeros = max(qm.transition_probability(2 * K * math.pi / nu, 2, p) for K in range(1, 6))
    out.append(_check("quantum.transition_zeros", zeros, 1e-12))

    worst = 0
    for v1 in range(4):
        for v2 in range(4):
            r = qm.reduced_operator_relations(qm.BlockLabel(v1, v2), Fraction(3, 7), Fraction(5, 2))
            worst = max([worst] + [abs(float(x)) for x in r.values()])
    out.append(_check("quantum.operator_relations_exact", worst, 0.0))

    hres = 0.0
    for _ in range(3):
        v1, v2 = (int(x) for x in rng.integers(0, 7, 2))
        qq = ModelParams(*rng.uniform(0.3, 2.0, 3), rng.uniform(0.3, 1.5), rng.uniform(0.5, 1.5))
        bl = qm.build_block(qm.BlockLabel(v1, v2), qq)
        r = qm.heisenberg_residual(bl, np.linspace(0.0, 3.0, 7))
        hres = max(hres, max(r.values()) / max(1.0, bl.norm() ** 2))
    out.append(_check("quantum.heisenberg_equations", hres, 1e-10))

    bl = qm.build_block(qm.BlockLabel(5, 6), ModelParams(1.7, 0.6, 0.4, 0.9, 0.8))
    s, t = 0.37, 1.9
    Us, Ut, Ust = (qm.evolution_operator(x, bl) for x in (s, t, s + t))
    unit = float(np.max(np.abs(Ut.conj().T @ Ut - np.eye(bl.label.dim))))
    group = float(np.max(np.abs(Us @ Ut - Ust)))
    out.append(_check("quantum.unitarity", unit, 1e-11))
    out.append(_check("quantum.group_law", group, 1e-10))
    return out


# ---------------------------------------------------------------- coherent suite

def _random_symbol(rng, gens, n_terms=3, max_deg=3):
    keys = ["I0", "I1", "I2", "z", "zbar"]
    acc = co.constant(0)
    for _ in range(n_terms):
        deg = int(rng.integers(1, max_deg + 1))
        mono = reduce(lambda a, b: a * b, [gens[keys[int(i)]] for i in rng.integers(0, 5, deg)])
        c = complex(int(rng.integers(-3, 4)), int(rng.integers(-3, 4)))
        acc = acc + mono * c
    return acc


def _coherent_checks(rng, fault) -> list:
    out = []
    g0 = Fraction(3, 2)
    G = co.generators(g0)
    I0, I1, I2, z, zb, x, y = (G[k] for k in ("I0", "I1", "I2", "z", "zbar", "x", "y"))
    h = HBAR
    sc = co.star_commutator
    kummer = 3 * I0 ** 2 - 2 * (I1 + I2) * I0 + I1 * I2
    star_rel = [
        sc(I0, z) + h * z,
        sc(I0, zb) - h * zb,
        sc(z, zb) - h * (g0 ** 2) * (kummer - h * I0),
    ] + [sc(a, b) for a in (I1, I2) for b in (z, zb)] \
      + [sc(a, b) for a in (I0, I1, I2) for b in (I0, I1, I2)]
    out.append(_check("coherent.star_relations", sum(0 if r.is_zero else 1 for r in star_rel), 0))
    pb = co.poisson_bracket
    pois = [pb(I0, x) + y, pb(I0, y) - x, pb(x, y) - kummer * (Fraction(1, 2) * g0 ** 2)] \
        + [pb(a, b) for a in (I0, I1, I2) for b in (I0, I1, I2)] \
        + [pb(a, b) for a in (I1, I2) for b in (x, y)]
    out.append(_check("coherent.poisson_relations", sum(0 if r.is_zero else 1 for r in pois), 0))
    base = [I0, I1, I2, z, zb]
    bad = sum(0 if co.classical_limit_check(a, b).is_zero else 1 for a in base for b in base)
    prods = [_random_symbol(rng, G, 2, 2) for _ in range(10)]
    bad += sum(0 if co.classical_limit_check(prods[i], prods[(i + 1) % 10]).is_zero else 1 for i in range(10))
    out.append(_check("coherent.classical_limit", bad, 0, "generators and random products"))
    a, b, c = (_random_symbol(rng, G, 2, 2) for _ in range(3))
    assoc = co.star_product(co.star_product(a, b), c) - co.star_product(a, co.star_product(b, c))
    out.append(_check("coherent.star_associativity", 0 if assoc.is_zero else 1, 0))

    eig = kern = herm = 0.0
    q = ModelParams(1.9, 0.7, 0.9, 1.3, 0.8)
    for v1, v2 in ((1, 1), (3, 5), (6, 6), (2, 7)):
        lab = qm.BlockLabel(v1, v2)
        for r in np.linspace(0.0, 10.0, 6):
            zh = r * np.exp(1j * rng.uniform(-math.pi, math.pi))
            vec = co.reduced_coherent_vector(zh, lab, q)
            eig = max([eig] + list(co.coherent_eigen_residuals(vec, q).values()))
            w = complex(*rng.normal(size=2))
            other = co.reduced_coherent_vector(w, lab, q)
            K = co.reproducing_kernel(zh, w, lab, q)
            kern = max(kern, abs(K - np.vdot(vec.amplitudes, other.amplitudes)) / max(1.0, abs(K)),
                       abs(K - co.reproducing_kernel_sum(zh, w, lab, q)) / max(1.0, abs(K)))
            herm = max(herm, abs(K - np.conj(co.reproducing_kernel(w, zh, lab, q))) / max(1.0, abs(K)))
    out.append(_check("coherent.eigenrelations", eig, 1e-12))
    out.append(_check("coherent.kernel_consistency", kern, 1e-14))
    out.append(_check("coherent.kernel_hermitian", herm, 1e-14))

    rho = mom = 0.0
    for lab in (qm.BlockLabel(1, 1), qm.BlockLabel(2, 3), qm.BlockLabel(4, 1)):
        for X in np.exp(rng.uniform(math.log(1e-2), math.log(1e2), 3)):
            rho = max(rho, abs(co.weight_rho(X, lab, q) / co.weight_rho_double_integral(X, lab, q) - 1.0))
    for v1 in range(7):
        for v2 in range(7):
            lab = qm.BlockLabel(v1, v2)
            mom = max([mom] + [co.moment_check(n, lab, q) for n in range(lab.dim)])
    out.append(_check("coherent.rho_vs_double_integral", rho, 1e-6))
    out.append(_check("coherent.moment_conditions", mom, 1e-6, "v1, v2 <= 6"))

    ode = 0.0
    for delta in (0.0, 0.45):
        qq = ModelParams(0.7 + 0.9 + delta, 0.7, 0.9, 1.3, 0.8)
        for v1 in range(7):
            for v2 in range(7):
                lab = qm.BlockLabel(v1, v2)
                M = co.hamiltonian_ode_matrix(lab, qq)
                ev = np.sort(np.linalg.eigvals(M).real)
                ode = max(ode, float(np.max(np.abs(ev - qm.block_spectrum(qm.build_block(lab, qq))[0]))))
    out.append(_check("coherent.ode_matrix_spectrum", ode, 1e-9))
    return out


_SUITE_FUNCS: dict[str, Callable] = {
    "classical": _classical_checks,
    "quantum": _quantum_checks,
    "coherent": _coherent_checks,
}


def run_suite(suite: str = "all", seed: Optional[int] = None, fault: Optional[str] = None) -> Report:
    """Run one suite (or ``"all"``) and return the report.

    ``fault`` injects a known defect: ``"negate-b"`` flips the sign of the
    lower couplings before the spectrum-symmetry check.
    """
    if suite != "all" and suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}")
    if fault is not None and fault not in FAULTS:
        raise ValueError(f"unknown fault {fault!r}")
    seed = resolve_seed(seed)
    names = SUITES if suite == "all" else (suite,)
    rep = Report(suite, seed, fault)
    t0 = time.perf_counter()
    for name in names:
        rng = np.random.default_rng([seed, SUITES.index(name)])
        rep.results.extend(_SUITE_FUNCS[name](rng, fault))
    rep.elapsed = time.perf_counter() - t0
    return rep
