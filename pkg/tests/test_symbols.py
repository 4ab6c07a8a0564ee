import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from threewave.errors import OrderError
from threewave.symbols import (
    HBAR, PolySymbol, classical_limit_check, constant, from_terms, generators, monomial, normal_order,
    poisson_bracket, star_commutator, star_product, symbol_of_normal_word, symbol_of_word,
)

Z = sp.symbols("z0 z1 z2")
ZB = sp.symbols("zb0 zb1 zb2")
H = sp.Symbol("h")


def to_expr(F: PolySymbol):
    acc = 0
    for (m0, m1, m2, n0, n1, n2), coeffs in F.terms().items():
        mono = ZB[0] ** m0 * ZB[1] ** m1 * ZB[2] ** m2 * Z[0] ** n0 * Z[1] ** n1 * Z[2] ** n2
        acc += sum(sp.sympify(c) * H ** k for k, c in coeffs.items()) * mono
    return sp.expand(acc)


def star_oracle(f, g):
    """[DERIVED] sum over multi-indices j of h^|j| / j! d_z^j f d_zb^j g, by sympy differentiation."""
    deg = [max(sp.degree(f, Z[k]), 0) for k in range(3)]
    acc = 0
    for j in itertools.product(*(range(d + 1) for d in deg)):
        df, dg = f, g
        for k in range(3):
            df = sp.diff(df, Z[k], j[k]) if j[k] else df
            dg = sp.diff(dg, ZB[k], j[k]) if j[k] else dg
        acc += H ** sum(j) / math.prod(math.factorial(x) for x in j) * df * dg
    return sp.expand(acc)


@st.composite
def symbols_(draw, max_terms=3, max_deg=2):
    acc = constant(0)
    for _ in range(draw(st.integers(1, max_terms))):
        m = draw(st.tuples(*[st.integers(0, max_deg)] * 3))
        n = draw(st.tuples(*[st.integers(0, max_deg)] * 3))
        c = complex(draw(st.integers(-3, 3)), draw(st.integers(-3, 3)))
        acc = acc + monomial(m, n, c, draw(st.integers(0, 1)))
    return acc


@given(symbols_(), symbols_())
def test_star_product_vs_sympy(F, G):
    assert sp.expand(to_expr(star_product(F, G)) - star_oracle(to_expr(F), to_expr(G))) == 0


@given(symbols_(), symbols_())
def test_poisson_bracket_vs_sympy(F, G):
    f, g = to_expr(F), to_expr(G)
    ref = -sp.I * sum(sp.diff(f, Z[k]) * sp.diff(g, ZB[k]) - sp.diff(g, Z[k]) * sp.diff(f, ZB[k]) for k in range(3))
    assert sp.expand(to_expr(poisson_bracket(F, G)) - ref) == 0


@given(symbols_(2, 2), symbols_(2, 2), symbols_(2, 2))
def test_star_product_associative(F, G, K):
    assert (star_product(star_product(F, G), K) - star_product(F, star_product(G, K))).is_zero


@given(symbols_(), symbols_())
def test_star_conjugation_reverses_order(F, G):
    assert star_product(F, G).conjugate() == star_product(G.conjugate(), F.conjugate())


@given(symbols_(), symbols_())
def test_classical_limit_vanishes(F, G):
    assert classical_limit_check(F, G).is_zero


def _fock_expectation(word, z, h, N=70):
    """[DERIVED] <z|W|z>/<z|z> on a truncated Fock space with [a, a*] = h (one factor per mode)."""
    a = np.diag(np.sqrt(h * np.arange(1, N)), 1)
    val = 1.0 + 0j
    for mode in range(3):
        M = np.eye(N, dtype=complex)
        for m, dag in word:
            if m == mode:
                M = M @ (a.T if dag else a)
        coh = np.array([z[mode] ** n / math.sqrt(math.factorial(n) * h ** n) for n in range(N)], dtype=complex)
        val *= np.vdot(coh, M @ coh) / np.vdot(coh, coh)
    return val


letters = st.tuples(st.integers(0, 2), st.booleans())


@given(st.lists(letters, max_size=6))
def test_word_symbol_vs_fock_expectation(word):
    z = (0.5 + 0.3j, -0.4 + 0.2j, 0.3 - 0.6j)
    h = 0.7
    sym = symbol_of_word(word)
    got = sym.evaluate(np.conj(z), z, h)
    assert abs(got - _fock_expectation(word, z, h)) < 1e-10


@given(st.lists(letters, max_size=4), st.lists(letters, max_size=4))
def test_word_product_is_star_product(w1, w2):
    assert symbol_of_word(w1 + w2) == star_product(symbol_of_word(w1), symbol_of_word(w2))


def test_normal_order_small_example():
    # a0 a0* = a0* a0 + hbar
    terms = sorted(normal_order(["a0", "a0*"]))
    assert terms == [(0, [(0, True), (0, False)]), (1, [])]
    assert symbol_of_word(["a0", "a0*"]) == monomial((1, 0, 0), (1, 0, 0)) + HBAR


def test_normal_word_forms_and_errors():
    assert symbol_of_normal_word(["a1*", "a0"]) == symbol_of_normal_word(creators=(0, 1, 0), annihilators=(1, 0, 0))
    with pytest.raises(OrderError):
        symbol_of_normal_word(["a0", "a0*"])
    with pytest.raises(ValueError):
        symbol_of_normal_word(["b0"])


def test_generators_relations_exact():
    g0 = Fraction(5, 3)
    G = generators(g0)
    I0, I1, I2, z, zb, x, y = (G[k] for k in ("I0", "I1", "I2", "z", "zbar", "x", "y"))
    h = HBAR
    kummer = 3 * I0 ** 2 - 2 * (I1 + I2) * I0 + I1 * I2
    sc = star_commutator
    assert (sc(I0, z) + h * z).is_zero
    assert (sc(I0, zb) - h * zb).is_zero
    assert (sc(z, zb) - h * g0 ** 2 * (kummer - h * I0)).is_zero
    for a in (I1, I2):
        assert sc(a, z).is_zero and sc(a, zb).is_zero
    pb = poisson_bracket
    assert (pb(I0, x) + y).is_zero and (pb(I0, y) - x).is_zero
    assert (pb(x, y) - Fraction(1, 2) * g0 ** 2 * kummer).is_zero
    assert (x * x + y * y - g0 ** 2 * I0 * (I1 - I0) * (I2 - I0)).is_zero


def test_hbar_division_and_substitution():
    F = monomial((1, 0, 0), (0, 1, 0), 2, 2)
    assert F.divide_hbar() == monomial((1, 0, 0), (0, 1, 0), 2, 1)
    assert F.subs_hbar(0).is_zero
    assert F.hbar_degree() == 2
    with pytest.raises(ArithmeticError):
        monomial((1, 0, 0), (0, 0, 0)).divide_hbar()


def test_terms_round_trip_and_immutability():
    F = monomial((1, 0, 2), (0, 3, 0), 1 + 2j, 1) + constant(Fraction(1, 3))
    assert from_terms(F.terms()) == F
    with pytest.raises(AttributeError):
        F._p = None
    assert hash(F) == hash(from_terms(F.terms()))


def test_derivative_and_evaluation():
    F = monomial((0, 0, 0), (2, 0, 0), 3)
    assert F.diff("z0") == monomial((0, 0, 0), (1, 0, 0), 6)
    assert F.evaluate((0, 0, 0), (2.0, 0, 0), 1.0) == pytest.approx(12.0)
