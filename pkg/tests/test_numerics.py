import math

import numpy as np
import pytest
import scipy.integrate as si
import scipy.linalg as sl
from hypothesis import given, strategies as st

from threewave.errors import DomainError
from threewave.numerics import (
    adaptive_quad, adaptive_quad_vec, closed_form_roots, rk_integrate, tridiag_eigen,
    tridiag_eigenvalues,
)
from threewave.numerics import rk_integrate_threewave


def test_rk_harmonic_oscillator():
    t = np.linspace(0, 30, 301)
    sol = rk_integrate(lambda _t, y: np.array([y[1], -y[0]]), [1.0, 0.0], (0, 30), rel_tol=1e-11,
                       output_grid=t)
    assert np.allclose(sol.t, t)
    assert np.max(np.abs(sol.y[:, 0] - np.cos(t))) < 1e-8
    assert sol.n_accepted > 0 and sol.n_eval >= 6 * sol.n_accepted


def test_rk_vs_scipy_on_nonlinear_system():
    f = lambda _t, y: np.array([y[1], -math.sin(y[0]) - 0.1 * y[1]])
    t = np.linspace(0, 20, 41)
    ours = rk_integrate(f, [2.0, 0.0], (0, 20), rel_tol=1e-11, abs_tol=1e-13, output_grid=t)
    ref = si.solve_ivp(f, (0, 20), [2.0, 0.0], method="DOP853", rtol=1e-12, atol=1e-14, t_eval=t)
    assert np.max(np.abs(ours.y - ref.y.T)) < 1e-8


def test_rk_without_grid_returns_steps():
    sol = rk_integrate(lambda _t, y: -y, [1.0], (0, 2))
    assert np.all(np.diff(sol.t) > 0) and sol.t[-1] == pytest.approx(2.0)
    assert sol.y[-1, 0] == pytest.approx(math.exp(-2), rel=1e-8)


def test_rk_argument_validation():
    with pytest.raises(DomainError):
        rk_integrate(lambda t, y: y, [1.0], (1, 0))
    with pytest.raises(DomainError):
        rk_integrate(lambda t, y: y, [1.0], (0, 1), rel_tol=-1)


def test_threewave_fast_path_matches_generic():
    w, g = (2.0, 1.0, 1.0), 0.8
    y0 = np.array([0.6, 0.0, 0.8, 0.1, 0.5, 0.0])

    def rhs(_t, y):
        z = y[0::2] + 1j * y[1::2]
        dz = np.array([
            1j * (w[0] * z[0] + g * z[1] * z[2]),
            1j * (w[1] * z[1] + g * z[0] * np.conj(z[2])),
            1j * (w[2] * z[2] + g * z[0] * np.conj(z[1])),
        ])
        out = np.empty(6)
        out[0::2], out[1::2] = dz.real, dz.imag
        return out

    t = np.linspace(0, 10, 51)
    fast = rk_integrate_threewave(w, g, y0, (0, 10), rel_tol=1e-11, output_grid=t)
    ref = si.solve_ivp(rhs, (0, 10), y0, method="DOP853", rtol=1e-12, atol=1e-14, t_eval=t)
    assert np.max(np.abs(fast.y - ref.y.T)) < 1e-8


@pytest.mark.parametrize("f,a,b,ref", [
    (lambda x: np.exp(-x * x), -np.inf if False else 0.0, np.inf, math.sqrt(math.pi) / 2),
    (lambda x: 1 / np.sqrt(x), 0.0, 1.0, 2.0),
    (lambda x: np.log(x), 0.0, 1.0, -1.0),
    (lambda x: x ** 3 * np.exp(-x), 0.0, np.inf, 6.0),
    (lambda x: np.cos(x), 0.0, 3.0, math.sin(3.0)),
])
def test_adaptive_quad_known_values(f, a, b, ref):
    assert adaptive_quad(f, a, b, rel_tol=1e-12, vectorized=True) == pytest.approx(ref, rel=1e-11)


@given(st.floats(0.1, 5), st.floats(0.1, 3))
def test_adaptive_quad_vs_scipy(alpha, beta):
    f = lambda x: math.exp(alpha * math.log(x) - beta * x) if x > 0 else 0.0
    ref, _ = si.quad(f, 0, np.inf, epsabs=0, epsrel=1e-13)
    assert adaptive_quad(f, 0.0, np.inf, rel_tol=1e-11) == pytest.approx(ref, rel=1e-10)


def test_adaptive_quad_vec_batches():
    ks = np.array([1.0, 2.0, 3.0])
    out = adaptive_quad_vec(lambda x: np.exp(-np.outer(ks, x)), 0.0, np.inf, rel_tol=1e-12)
    assert np.allclose(out, 1 / ks, rtol=1e-11)


@given(st.lists(st.floats(-4, 4), min_size=2, max_size=4))
def test_closed_form_roots_small_residual(roots):
    # clustered roots are ill-conditioned; the residual is still tiny
    coef = np.poly(roots)
    for r in closed_form_roots(len(roots), coef):
        scale = np.sum(np.abs(coef)) * max(1.0, abs(r)) ** len(roots)  # normwise backward error
        assert abs(np.polyval(coef, r)) <= 1e-13 * scale


@given(st.lists(st.integers(-40, 40), min_size=2, max_size=4, unique=True))
def test_closed_form_roots_separated_are_accurate(ticks):
    roots = np.array(ticks) / 10.0
    got = closed_form_roots(len(roots), np.poly(roots))
    assert np.max(np.abs(np.sort(got.real) - np.sort(roots))) < 1e-10
    assert np.max(np.abs(got.imag)) < 1e-10


@pytest.mark.parametrize("deg", [2, 3, 4])
def test_closed_form_roots_vs_numpy(deg, rng):
    for _ in range(30):
        coef = rng.normal(size=deg + 1)
        got = closed_form_roots(deg, coef)
        ref = np.roots(coef)
        for r in ref:
            assert np.min(np.abs(got - r)) < 1e-8 * max(1, abs(r))


def test_closed_form_roots_domain():
    with pytest.raises(DomainError):
        closed_form_roots(5, [1] * 6)
    with pytest.raises(DomainError):
        closed_form_roots(2, [0, 1, 1])


@pytest.mark.parametrize("n", [1, 2, 7, 40])
def test_tridiag_vs_scipy(n, rng):
    d = rng.normal(size=n)
    e = rng.normal(size=n - 1)
    w, V = tridiag_eigen(d, e)
    ref = sl.eigh_tridiagonal(d, e, eigvals_only=True)
    assert np.max(np.abs(w - ref)) < 1e-12 * max(1, np.max(np.abs(ref)))
    T = np.diag(d) + np.diag(e, 1) + np.diag(e, -1)
    assert np.max(np.abs(T @ V - V * w)) < 1e-11 * max(1, np.max(np.abs(ref)))
    assert np.max(np.abs(V.T @ V - np.eye(n))) < 1e-11
    assert np.allclose(tridiag_eigenvalues(d, e), w, atol=1e-13)


def test_tridiag_with_zero_couplings_and_clusters():
    d = np.array([1.0, 1.0, 1.0, 2.0])
    e = np.array([0.0, 1e-14, 0.0])
    w, V = tridiag_eigen(d, e)
    assert np.allclose(w, np.linalg.eigvalsh(np.diag(d) + np.diag(e, 1) + np.diag(e, -1)), atol=1e-13)
    assert np.max(np.abs(V.T @ V - np.eye(4))) < 1e-10
