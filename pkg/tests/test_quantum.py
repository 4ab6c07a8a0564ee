import math
import threading
from fractions import Fraction

import numpy as np
import pytest
import scipy.linalg as sl
import sympy as sp
from hypothesis import given, strategies as st

from threewave import (
    BlockLabel, CapabilityError, DomainError, ModelParams, TruncationError, block_operators, block_spectrum,
    build_block, char_poly_coefficients, char_poly_delta, closed_form_A0_L1, closed_form_A0_L2,
    closed_form_U_L1, closed_form_U_L2, coupling_b, evolution_operator, full_fock_oracle,
    heisenberg_residual, parity_factorization, reduced_operator_relations, spectrum_symmetry,
    transition_probability, transition_probability_numeric,
)

RES = ModelParams(2.0, 1.0, 1.0, 1.0, 1.0)
labels = st.builds(BlockLabel, st.integers(0, 9), st.integers(0, 9))


def test_label_validation_and_basis():
    with pytest.raises(DomainError):
        BlockLabel(-1, 2)
    lab = BlockLabel(3, 5)
    assert (lab.L, lab.dim) == (3, 4)
    assert lab.fock_state(2) == (2, 1, 3)
    with pytest.raises(IndexError):
        lab.fock_state(4)
    with pytest.raises(IndexError):
        coupling_b(0, lab, RES)


def test_documented_example_spectrum():
    w, _ = block_spectrum(build_block(BlockLabel(2, 2), RES))
    assert np.allclose(w, [4 - math.sqrt(6), 4, 4 + math.sqrt(6)], atol=1e-13)


def test_one_dimensional_block_is_shift():
    bl = build_block(BlockLabel(4, 0), ModelParams(2.5, 0.7, 1.1, 0.9, 0.6))
    assert block_spectrum(bl)[0].tolist() == [bl.shift] == [0.7 * 4 * 0.6]


@given(labels, st.floats(0.2, 2), st.floats(0.2, 2), st.floats(-1, 1), st.floats(-2, 2), st.floats(0.3, 2))
def test_spectrum_vs_dense_eigvalsh(lab, w1, w2, d, g, h):
    p = ModelParams(w1 + w2 + d, w1, w2, g, h)
    bl = build_block(lab, p)
    w, V = block_spectrum(bl)
    ref = sl.eigvalsh(bl.matrix())
    scale = max(1.0, bl.norm())
    assert np.max(np.abs(w - ref)) < 1e-12 * scale
    assert np.max(np.abs(bl.matrix() @ V - V * w)) < 1e-11 * scale


@pytest.mark.parametrize("v1,v2", [(2, 2), (3, 5), (8, 8), (9, 4), (10, 7)])
def test_explicit_vs_sturm(v1, v2):
    bl = build_block(BlockLabel(v1, v2), RES)
    assert np.max(np.abs(block_spectrum(bl, "explicit")[0] - block_spectrum(bl)[0])) < 1e-10


def test_explicit_capability_limits():
    with pytest.raises(CapabilityError):
        block_spectrum(build_block(BlockLabel(9, 9), RES), "explicit")
    with pytest.raises(CapabilityError):
        block_spectrum(build_block(BlockLabel(2, 2), ModelParams(2.3, 1, 1, 1)), "explicit")
    with pytest.raises(DomainError):
        block_spectrum(build_block(BlockLabel(2, 2), RES), "qr")


@pytest.mark.parametrize("v1,v2", [(1, 1), (2, 3), (4, 4), (6, 5)])
def test_char_poly_vs_sympy(v1, v2):
    """[DERIVED] exact characteristic polynomial of the symbolic tridiagonal matrix."""
    lab = BlockLabel(v1, v2)
    h, g = sp.Rational(3, 4), sp.Rational(5, 3)
    n = lab.dim
    M = sp.zeros(n, n)
    for k in range(1, n):
        M[k - 1, k] = M[k, k - 1] = g * sp.sqrt(h ** 3 * k * (v1 - k + 1) * (v2 - k + 1))
    lam = sp.Symbol("lam")
    exact = sp.Poly((M - lam * sp.eye(n)).det(), lam).all_coeffs()
    ours = char_poly_coefficients(build_block(lab, ModelParams(2, 1, 1, 5 / 3, 0.75)))
    assert np.allclose(ours, [float(c) for c in exact], rtol=1e-12, atol=1e-12)


def test_delta_recurrence_vs_det(rng):
    p = ModelParams(2.6, 1.0, 1.1, 0.8, 0.9)
    for v1, v2 in ((3, 3), (5, 8), (7, 2)):
        bl = build_block(BlockLabel(v1, v2), p)
        for lam in rng.normal(size=5) * 5:
            D = np.linalg.det(bl.interaction_matrix() - lam * np.eye(bl.label.dim))
            assert char_poly_delta(lam, bl)[-1] == pytest.approx(D, rel=1e-10, abs=1e-10)


@pytest.mark.parametrize("v1,v2", [(2, 2), (3, 4), (5, 5)])
def test_parity_factorization(v1, v2):
    bl = build_block(BlockLabel(v1, v2), RES)
    pf = parity_factorization(bl)
    coef = char_poly_coefficients(bl)
    assert np.all(coef[1::2] == 0)
    assert pf.parity == ("odd" if bl.label.L % 2 == 0 else "even")
    assert pf.degree == bl.label.dim // 2
    with pytest.raises(DomainError):
        parity_factorization(build_block(BlockLabel(v1, v2), ModelParams(2.2, 1, 1, 1)))


def test_spectrum_symmetry_detects_corruption():
    M = build_block(BlockLabel(4, 6), RES).interaction_matrix()
    good = spectrum_symmetry(M)
    assert good["pairing_defect"] < 1e-12 and good["zero_count"] == good["expected_zero_count"] == 1
    bad = M.copy()
    k = np.arange(4)
    bad[k + 1, k] *= -1
    r = spectrum_symmetry(bad)
    assert r["max_imag"] > 1e-3 or r["pairing_defect"] > 1e-3


@given(labels, st.floats(0, 4))
def test_evolution_vs_expm(lab, t):
    p = ModelParams(2.4, 0.9, 1.2, 0.7, 0.8)
    bl = build_block(lab, p)
    ref = sl.expm(1j * t * bl.matrix() / p.hbar)
    assert np.max(np.abs(evolution_operator(t, bl) - ref)) < 1e-10


@pytest.mark.parametrize("v1", [1, 2, 5])
def test_closed_forms_L1(v1):
    bl = build_block(BlockLabel(v1, 1), RES)
    A0 = block_operators(bl.label, RES).A0.matrix
    for t in np.linspace(0, 5, 21):
        U = sl.expm(1j * t * bl.matrix())
        assert np.max(np.abs(closed_form_U_L1(t, v1, RES) - U)) < 1e-10
        assert np.max(np.abs(closed_form_A0_L1(t, v1, RES) - U.conj().T @ A0 @ U)) < 1e-10


@pytest.mark.parametrize("v1", [2, 3, 6])
def test_closed_forms_L2(v1):
    p = ModelParams(1.875, 0.75, 1.125, 0.6, 0.7)  # exactly resonant in binary
    bl = build_block(BlockLabel(v1, 2), p)
    A0 = block_operators(bl.label, p).A0.matrix
    for t in np.linspace(0, 5, 21):
        U = sl.expm(1j * t * bl.matrix() / p.hbar)
        assert np.max(np.abs(closed_form_U_L2(t, v1, p) - U)) < 1e-10
        assert np.max(np.abs(closed_form_A0_L2(t, v1, p) - U.conj().T @ A0 @ U)) < 1e-10


def test_closed_forms_need_resonance():
    with pytest.raises(DomainError):
        closed_form_U_L2(0.3, 3, ModelParams(2.5, 1, 1, 1))


def test_transition_probability_benchmark():
    nu = math.sqrt(6.0)
    assert transition_probability(math.pi / nu, 2, RES) == pytest.approx(8 / 9, abs=1e-12)
    bl = build_block(BlockLabel(2, 2), RES)
    for t in np.linspace(0, 4, 17):
        U = sl.expm(1j * t * bl.matrix())
        assert transition_probability(t, 2, RES) == pytest.approx(abs(U[0, 2]) ** 2, abs=1e-12)
        assert transition_probability_numeric(t, bl, 0, 2) == pytest.approx(abs(U[0, 2]) ** 2, abs=1e-12)


def test_fock_oracle_sectors(rng):
    p = ModelParams(1.3, 0.4, 0.5, 0.8, 0.7)
    F = full_fock_oracle((3, 4, 4), p)
    assert np.allclose(F.H, F.H.T)
    for lab in F.safe_labels():
        assert np.max(np.abs(F.sector(lab) - build_block(lab, p).matrix())) < 1e-12
    with pytest.raises(TruncationError):
        F.sector(BlockLabel(4, 4))
    with pytest.raises(DomainError):
        full_fock_oracle((1, 2), p)


def test_operator_relations_exact_and_float():
    for v1, v2 in ((0, 0), (2, 3), (5, 5)):
        r = reduced_operator_relations(BlockLabel(v1, v2), Fraction(2, 3), Fraction(7, 5))
        assert all(v == 0 for v in r.values())
        rf = reduced_operator_relations(BlockLabel(v1, v2), 0.9, 1.3, exact=False)
        assert max(rf.values()) < 1e-11


def test_exact_operators_are_sympy():
    ops = block_operators(BlockLabel(2, 3), ModelParams(2, 1, 1, 0.5, 0.25), exact=True)
    assert isinstance(ops.A.matrix, sp.MatrixBase)
    assert ops.A.matrix[0, 1] == sp.Rational(1, 2) * sp.sqrt(sp.Rational(1, 64) * 2 * 3)


def test_heisenberg_equations():
    bl = build_block(BlockLabel(4, 6), ModelParams(2.3, 0.9, 1.0, 0.7, 0.8))
    r = heisenberg_residual(bl, np.linspace(0, 3, 7))
    assert max(r.values()) < 1e-10 * bl.norm() ** 2


def test_spectrum_cache_is_thread_safe():
    bl = build_block(BlockLabel(8, 8), RES)
    out = []
    threads = [threading.Thread(target=lambda: out.append(block_spectrum(bl)[0])) for _ in range(8)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    assert all(o is out[0] for o in out)
    assert not out[0].flags.writeable
