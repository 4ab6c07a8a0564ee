import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from threewave import (
    ActionAngle, DomainError, KummerPoint, ModeAmplitudes, ModelParams, ReducedInvariants,
    casimir, from_action_angle, hamiltonian_action_angle, hamiltonian_classical, kummer_embed,
    kummer_point, momentum_map, reduced_invariants, to_action_angle, wrap_angle,
)

finite = st.floats(-3, 3, allow_nan=False)
positive = st.floats(0.05, 3.0)
angle = st.floats(-math.pi, math.pi)
nonzero_complex = st.builds(lambda r, a: r * cmath.exp(1j * a), positive, angle)


@st.composite
def action_angles(draw):
    I0 = draw(positive)
    return ActionAngle(I0, I0 + draw(positive), I0 + draw(positive), draw(angle), draw(angle), draw(angle))


params = st.builds(ModelParams, positive, positive, positive, finite, positive)


def test_params_reject_nonpositive_hbar():
    with pytest.raises(DomainError):
        ModelParams(1, 1, 1, 1, 0.0)


def test_detuning_and_resonance():
    assert ModelParams(2, 1, 1, 0.3).resonant
    assert ModelParams(2.5, 1, 1, 0.3).delta == pytest.approx(0.5)


@given(st.floats(-50, 50))
def test_wrap_angle_range_and_congruence(x):
    y = wrap_angle(x)
    assert -math.pi < y <= math.pi
    k = (x - y) / (2 * math.pi)
    assert abs(k - round(k)) < 1e-9


def test_wrap_angle_array_matches_scalar():
    xs = np.linspace(-20, 20, 101)
    assert np.allclose(wrap_angle(xs), [wrap_angle(float(x)) for x in xs], atol=1e-15)


@given(nonzero_complex, nonzero_complex, nonzero_complex)
def test_chart_round_trip_from_amplitudes(a, b, c):
    z = ModeAmplitudes(a, b, c)
    back = from_action_angle(to_action_angle(z))
    assert np.allclose(back.as_array(), z.as_array(), atol=1e-12)


@given(action_angles())
def test_chart_round_trip_from_actions(aa):
    back = to_action_angle(from_action_angle(aa))
    assert back.I0 == pytest.approx(aa.I0, abs=1e-12)
    assert back.I1 == pytest.approx(aa.I1, abs=1e-12)
    assert back.I2 == pytest.approx(aa.I2, abs=1e-12)
    for u, v in ((back.psi0, aa.psi0), (back.psi1, aa.psi1), (back.psi2, aa.psi2)):
        assert abs(wrap_angle(u - v)) < 1e-12


@given(action_angles(), params)
def test_hamiltonian_both_charts_agree(aa, p):
    z = from_action_angle(aa)
    assert hamiltonian_action_angle(aa, p) == pytest.approx(hamiltonian_classical(z, p), rel=1e-12, abs=1e-12)


def test_hamiltonian_direct_formula(rng):
    for _ in range(20):
        z = rng.normal(size=3) + 1j * rng.normal(size=3)
        w = rng.uniform(0.1, 2, 3)
        g = rng.normal()
        ref = float(np.sum(w * np.abs(z) ** 2)) + 2 * g * float(np.real(z[0] * np.conj(z[1]) * np.conj(z[2])))
        assert hamiltonian_classical(ModeAmplitudes(*z), ModelParams(*w, g)) == pytest.approx(ref, rel=1e-13)


def test_chart_boundary_raises():
    with pytest.raises(DomainError):
        to_action_angle(ModeAmplitudes(0, 1, 1))
    with pytest.raises(DomainError):
        from_action_angle(ActionAngle(1.0, 0.5, 2.0, 0, 0, 0))
    with pytest.raises(DomainError):
        ReducedInvariants(0.0, 1.0)


@given(action_angles(), finite)
def test_embedded_point_lies_on_kummer_shape(aa, g0):
    inv = ReducedInvariants(aa.I1, aa.I2)
    if not aa.I0 < inv.c:
        return
    assert abs(casimir(kummer_embed(aa.I0, aa.psi0, inv, g0), inv, g0)) < 1e-11 * (1 + g0 * g0 * inv.c ** 3)


@given(nonzero_complex, nonzero_complex, nonzero_complex, finite)
def test_kummer_point_from_amplitudes_is_on_shape(a, b, c, g0):
    z = ModeAmplitudes(a, b, c)
    inv = reduced_invariants(z)
    kp = kummer_point(z, g0)
    assert abs(casimir(kp, inv, g0)) < 1e-11 * (1 + g0 * g0 * inv.c1 * inv.c2 * inv.c)
    # the two routes to the reduced point agree
    aa = to_action_angle(z)
    emb = kummer_embed(aa.I0, aa.psi0, inv, g0) if 0 < aa.I0 < inv.c else None
    if emb is not None:
        assert np.allclose(emb.as_array(), kp.as_array(), atol=1e-11)


def test_momentum_map_and_invariants():
    z = ModeAmplitudes(1j, 2.0, -1.0)
    assert momentum_map(z) == (5.0, 2.0)
    inv = reduced_invariants(z, ModelParams(2, 1, 1, 1))
    assert (inv.c1, inv.c2, inv.c) == (5.0, 2.0, 2.0)
    assert inv.E == pytest.approx(2 * 1 + 4 + 1 + 2 * (1j * 2 * -1).real)
    assert inv.radicand(1.0) == pytest.approx(1 * 4 * 1)
    assert inv.radicand_prime(1.0) == pytest.approx(3 - 14 + 10)


def test_kummer_point_fields():
    kp = KummerPoint(1.0, 2.0, 3.0)
    assert kp.as_array().tolist() == [1.0, 2.0, 3.0]
