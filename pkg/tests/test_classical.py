import cmath
import math

import numpy as np
import pytest
import scipy.integrate as si

from threewave import (
    DegenerateMotionError, DomainError, KummerPoint, ModeAmplitudes, ModelParams, NoPhysicalBracketError,
    SingularityError, energy_cubic, exact_solution, from_action_angle, hamiltonian_classical,
    i0_second_order_residual, integrate_kummer, integrate_threewave, invariant_rates, kummer_hamiltonian,
    kummer_point, kummer_rhs, momentum_map, nambu_bracket, phase_recovery, reduced_invariants, reduced_rhs,
    threewave_rhs, to_action_angle, wrap_angle,
)
from threewave.verify import random_nondegenerate_case

BENCH = ModelParams(2.0, 1.0, 1.0, 1.0)
Z_BENCH = ModeAmplitudes(0.6, 0.8 + 0.1j, 0.5)


def scipy_trajectory(z, p, t):
    """[DERIVED] independent integration of dz/dt = i dH/dz-bar with scipy's DOP853."""
    def f(_t, y):
        z0, z1, z2 = y[0] + 1j * y[1], y[2] + 1j * y[3], y[4] + 1j * y[5]
        d = [1j * (p.omega0 * z0 + p.g0 * z1 * z2),
             1j * (p.omega1 * z1 + p.g0 * z0 * np.conj(z2)),
             1j * (p.omega2 * z2 + p.g0 * z0 * np.conj(z1))]
        return np.array([d[0].real, d[0].imag, d[1].real, d[1].imag, d[2].real, d[2].imag])
    sol = si.solve_ivp(f, (t[0], t[-1]), z.as_real(), method="DOP853", rtol=1e-12, atol=1e-14, t_eval=t)
    return sol.y[0::2].T + 1j * sol.y[1::2].T


def test_rhs_is_hamiltonian_flow():
    # numerical d/dz-bar of H, independent of the hand-written field
    p = ModelParams(1.7, 0.6, 0.9, -0.8)
    z = ModeAmplitudes(0.3 + 0.2j, -0.5 + 0.1j, 0.7j)
    a = z.as_array()
    grad = np.empty(3, dtype=complex)
    h = 1e-6
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        dx = (hamiltonian_classical(ModeAmplitudes(*(a + e)), p) - hamiltonian_classical(ModeAmplitudes(*(a - e)), p)) / (2 * h)
        dy = (hamiltonian_classical(ModeAmplitudes(*(a + 1j * e)), p) - hamiltonian_classical(ModeAmplitudes(*(a - 1j * e)), p)) / (2 * h)
        grad[k] = 0.5 * (dx + 1j * dy)
    assert np.allclose(threewave_rhs(z, p), 1j * grad, atol=1e-8)


def test_invariant_rates_vanish(rng):
    for _ in range(20):
        z = ModeAmplitudes(*(rng.normal(size=3) + 1j * rng.normal(size=3)))
        p = ModelParams(*rng.uniform(0.2, 2, 3), rng.normal())
        assert np.allclose(invariant_rates(z, p), 0.0, atol=1e-12)


def test_benchmark_exact_vs_independent_integrator():
    t = np.linspace(0, 20, 401)
    sol = exact_solution(Z_BENCH, BENCH)
    Z = scipy_trajectory(Z_BENCH, BENCH, t)
    assert np.max(np.abs(sol.i0(t) - np.abs(Z[:, 0]) ** 2)) < 1e-8


def test_own_integrator_vs_scipy():
    t = np.linspace(0, 20, 201)
    _, Z = integrate_threewave(Z_BENCH, BENCH, t, rel_tol=1e-11)
    assert np.max(np.abs(Z - scipy_trajectory(Z_BENCH, BENCH, t))) < 1e-8


@pytest.mark.parametrize("seed", range(6))
def test_random_draws_exact_vs_independent(seed):
    p, z, sol = random_nondegenerate_case(np.random.default_rng(seed))
    t = np.linspace(0, 15, 301)
    Z = scipy_trajectory(z, p, t)
    assert np.max(np.abs(sol.i0(t) - np.abs(Z[:, 0]) ** 2)) < 1e-7


@pytest.mark.parametrize("seed", range(4))
def test_phase_recovery_rebuilds_amplitudes(seed):
    p, z, sol = random_nondegenerate_case(np.random.default_rng(100 + seed))
    aa0 = to_action_angle(z)
    t = np.linspace(0, 12, 121)
    ps0, ps1, ps2 = phase_recovery(sol, aa0, t)
    Z = scipy_trajectory(z, p, t)
    for k in range(t.size):
        ref = to_action_angle(ModeAmplitudes(*Z[k]))
        assert abs(wrap_angle(ps0[k] - ref.psi0)) < 1e-6
        assert abs(wrap_angle(ps1[k] - ref.psi1)) < 1e-6
        assert abs(wrap_angle(ps2[k] - ref.psi2)) < 1e-6


def test_phase_recovery_unwrap_is_continuous():
    sol = exact_solution(Z_BENCH, BENCH)
    t = np.linspace(0, 30, 601)
    _, ps1, _ = phase_recovery(sol, to_action_angle(Z_BENCH), t, unwrap=True)
    assert np.max(np.abs(np.diff(ps1))) < 1.0
    wrapped = phase_recovery(sol, to_action_angle(Z_BENCH), t)[1]
    assert np.allclose(wrap_angle(ps1), wrapped, atol=1e-12)


def test_period_matches_trajectory():
    sol = exact_solution(Z_BENCH, BENCH)
    T = sol.period()
    t = np.array([0.0, T, 2 * T])
    Z = scipy_trajectory(Z_BENCH, BENCH, t)
    assert np.allclose(np.abs(Z[:, 0]) ** 2, abs(Z_BENCH.z0) ** 2, atol=1e-9)


def test_second_order_equation_and_derivatives():
    sol = exact_solution(Z_BENCH, BENCH)
    t = np.linspace(0, 10, 201)
    assert i0_second_order_residual(sol.i0(t), sol.d2i0dt2(t), sol.E, sol.inv, BENCH) < 1e-9
    h = 1e-5
    assert np.allclose(sol.di0dt(t), (sol.i0(t + h) - sol.i0(t - h)) / (2 * h), atol=1e-8)


def test_energy_cubic_is_squared_velocity():
    sol = exact_solution(Z_BENCH, BENCH)
    cub = energy_cubic(sol.E, sol.inv, BENCH, abs(Z_BENCH.z0) ** 2)
    t = np.linspace(0, 5, 51)
    assert np.allclose(cub(sol.i0(t)), sol.di0dt(t) ** 2, atol=1e-10)
    lo, hi = cub.turning_points
    assert lo - 1e-9 <= sol.i0(t).min() and sol.i0(t).max() <= hi + 1e-9


def test_energy_cubic_rejects_forbidden_start():
    inv = reduced_invariants(Z_BENCH, BENCH)
    with pytest.raises(NoPhysicalBracketError):
        energy_cubic(inv.E + 5.0, inv, BENCH, abs(Z_BENCH.z0) ** 2)


def test_reduced_rhs_chain_rule():
    p = ModelParams(2.3, 1.0, 1.1, 0.7)
    z = ModeAmplitudes(0.4 + 0.3j, 0.9, -0.2 + 0.6j)
    aa = to_action_angle(z)
    inv = reduced_invariants(z)
    d = threewave_rhs(z, p)
    dI0 = 2 * (np.conj(z.z0) * d[0]).real
    dpsi = sum(s * (np.conj(zz) * dd).imag / abs(zz) ** 2 for s, zz, dd in ((1, z.z0, d[0]), (-1, z.z1, d[1]), (-1, z.z2, d[2])))
    assert reduced_rhs(aa.I0, aa.psi0, inv, p) == pytest.approx((dI0, dpsi), rel=1e-12)


def test_reduced_rhs_singular_and_domain():
    inv = reduced_invariants(Z_BENCH)
    with pytest.raises(SingularityError):
        reduced_rhs(0.0, 0.1, inv, BENCH)
    with pytest.raises(DomainError):
        reduced_rhs(0.8, 0.1, inv, BENCH)  # between c2 = 0.61 and c1 = 1.01 the radicand is negative


def test_kummer_field_chain_rule_and_nambu(rng):
    p = ModelParams(2.4, 0.8, 1.2, 0.9)
    signs = set()
    for _ in range(10):
        z = ModeAmplitudes(*(rng.normal(size=3) + 1j * rng.normal(size=3)))
        inv = reduced_invariants(z)
        d = threewave_rhs(z, p)
        w = p.g0 * (d[0] * np.conj(z.z1) * np.conj(z.z2) + z.z0 * np.conj(d[1]) * np.conj(z.z2)
                    + z.z0 * np.conj(z.z1) * np.conj(d[2]))
        ref = (w.real, w.imag, 2 * (np.conj(z.z0) * d[0]).real)
        kp = kummer_point(z, p.g0)
        assert np.allclose(kummer_rhs(kp, inv, p), ref, atol=1e-12)
        # the bracket with the reduced Hamiltonian reproduces the field with one fixed orientation
        H = lambda x, y, I0: kummer_hamiltonian(KummerPoint(x, y, I0), inv, p)
        coords = (lambda x, y, I0: x, lambda x, y, I0: y, lambda x, y, I0: I0)
        nb = np.array([nambu_bracket(c, H, kp, inv, p.g0) for c in coords])
        assert np.allclose(nb, ref, atol=1e-6) or np.allclose(nb, -np.array(ref), atol=1e-6)
        signs.add(bool(np.allclose(nb, ref, atol=1e-6)))
    assert len(signs) == 1


def test_integrate_kummer_stays_on_shape_and_matches():
    sol = exact_solution(Z_BENCH, BENCH)
    t = np.linspace(0, 10, 101)
    k0 = kummer_point(Z_BENCH, BENCH.g0)
    out = integrate_kummer(k0, sol.inv, BENCH, t, rel_tol=1e-11)
    assert np.max(np.abs(out.y[:, 2] - sol.i0(t))) < 1e-8
    assert np.max(np.abs(out.y - sol.kummer(t))) < 1e-8


def test_zero_coupling_freezes_action():
    p = ModelParams(2.0, 1.0, 1.0, 0.0)
    sol = exact_solution(Z_BENCH, p)
    assert sol.frozen and sol.period() == math.inf
    t = np.linspace(0, 5, 11)
    assert np.all(sol.i0(t) == abs(Z_BENCH.z0) ** 2)
    ps0, ps1, ps2 = phase_recovery(sol, to_action_angle(Z_BENCH), t)
    Z = scipy_trajectory(Z_BENCH, p, t)
    assert np.allclose(wrap_angle(ps1 - np.angle(Z[:, 1])), 0, atol=1e-9)


def test_degenerate_motion_raised_at_fixed_point():
    with pytest.raises(DegenerateMotionError):
        exact_solution(ModeAmplitudes(1.0, 0.0, 0.0), BENCH)


def test_momentum_level_is_preserved_by_flow():
    t = np.linspace(0, 50, 11)
    Z = scipy_trajectory(Z_BENCH, BENCH, t)
    lv = np.array([momentum_map(ModeAmplitudes(*row)) for row in Z])
    assert np.allclose(lv, lv[0], rtol=1e-10)
    ref = from_action_angle(to_action_angle(Z_BENCH)).as_array()
    assert np.allclose(ref, Z_BENCH.as_array())
    assert cmath.isclose(Z[0, 0], Z_BENCH.z0)
