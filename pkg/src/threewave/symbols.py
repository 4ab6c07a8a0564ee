"""Exact polynomial covariant symbols and their star product.

Symbols live in the ring ``Q(i)[zb0, zb1, zb2, z0, z1, z2, hbar]`` where
``hbar`` is a formal parameter.  All arithmetic is exact.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial
from numbers import Number
from typing import Iterable, Mapping, Sequence

import sympy
from sympy import QQ_I, ring

from .errors import OrderError

__all__ = [
    "PolySymbol",
    "symbol_ring",
    "constant",
    "monomial",
    "generators",
    "symbol_of_normal_word",
    "normal_order",
    "symbol_of_word",
    "star_product",
    "star_commutator",
    "poisson_bracket",
    "classical_limit_check",
    "from_terms",
    "HBAR",
]

_R, _ZB0, _ZB1, _ZB2, _Z0, _Z1, _Z2, _H = ring("zb0,zb1,zb2,z0,z1,z2,hbar", QQ_I)
_ZB = (_ZB0, _ZB1, _ZB2)
_Z = (_Z0, _Z1, _Z2)


def symbol_ring():
    """Return the underlying sympy sparse polynomial ring."""
    return _R


def _to_domain(c) -> object:
    """Convert a Python or sympy number exactly into Q(i)."""
    if isinstance(c, PolySymbol):
        raise TypeError("expected a scalar")
    if isinstance(c, complex):
        return QQ_I.from_sympy(sympy.Rational(Fraction(c.real)) + sympy.I * sympy.Rational(Fraction(c.imag)))
    if isinstance(c, float):
        return QQ_I.from_sympy(sympy.Rational(Fraction(c)))
    if isinstance(c, (int, Fraction)):
        return QQ_I.from_sympy(sympy.Rational(c))
    if isinstance(c, sympy.Basic):
        return QQ_I.from_sympy(sympy.nsimplify(c))
    return QQ_I.convert(c)


class PolySymbol:
    """Immutable exact polynomial in (zb, z) with coefficients in Q(i)[hbar].

    Exponent tuples are ordered ``(m0, m1, m2, n0, n1, n2)``: powers of the
    conjugate variables first, then of the holomorphic ones.
    """

    __slots__ = ("_p",)

    def __init__(self, poly=None):
        object.__setattr__(self, "_p", _R.zero if poly is None else _R(poly))

    def __setattr__(self, name, value):
        raise AttributeError("PolySymbol is immutable")

    @property
    def poly(self):
        return self._p

    # arithmetic -------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, PolySymbol):
            return other._p
        if isinstance(other, (Number, sympy.Basic)):
            return _R(_to_domain(other))
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else PolySymbol(self._p + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else PolySymbol(self._p - o)

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else PolySymbol(o - self._p)

    def __neg__(self):
        return PolySymbol(-self._p)

    def __mul__(self, other):
        """Pointwise (commutative) product; use :func:`star_product` for the deformed one."""
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else PolySymbol(self._p * o)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        return PolySymbol(self._p ** k)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self._p == o

    def __hash__(self):
        return hash(self._p)

    def __bool__(self):
        return bool(self._p)

    def __repr__(self):
        return f"PolySymbol({self._p.as_expr()})"

    # structure --------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return not self._p

    def terms(self) -> dict[tuple[int, ...], dict[int, complex]]:
        """Map exponent tuples to ``{hbar power: exact coefficient}``.

        Coefficients are returned as sympy numbers (exact Gaussian rationals).
        """
        out: dict[tuple[int, ...], dict[int, object]] = {}
        for mon, c in self._p.terms():
            out.setdefault(tuple(mon[:6]), {})[mon[6]] = QQ_I.to_sympy(c)
        return out

    def hbar_degree(self) -> int:
        return max((m[6] for m in self._p.monoms()), default=0)

    def conjugate(self) -> "PolySymbol":
        """Complex conjugate: swap z and zb and conjugate coefficients (hbar is real)."""
        acc = {}
        for mon, c in self._p.terms():
            new = tuple(mon[3:6]) + tuple(mon[0:3]) + (mon[6],)
            acc[new] = QQ_I(c.x, -c.y)
        return PolySymbol(_R.from_dict(acc) if acc else _R.zero)

    def diff(self, var: str) -> "PolySymbol":
        """Partial derivative with respect to one of ``z0..z2``, ``zb0..zb2``."""
        return PolySymbol(self._p.diff(_var(var)))

    def subs_hbar(self, value=0) -> "PolySymbol":
        return PolySymbol(_eval_hbar(self._p, value))

    def divide_hbar(self) -> "PolySymbol":
        """Exact division by hbar; raises ``ArithmeticError`` if not divisible."""
        acc = {}
        for mon, c in self._p.terms():
            if mon[6] == 0:
                raise ArithmeticError("symbol is not divisible by hbar")
            acc[mon[:6] + (mon[6] - 1,)] = c
        return PolySymbol(_R.from_dict(acc) if acc else _R.zero)

    def evaluate(self, zbar: Sequence[complex], z: Sequence[complex], hbar: float) -> complex:
        """Numerical value at a point (``zbar`` need not be the conjugate of ``z``)."""
        total = 0j
        vals = tuple(zbar) + tuple(z) + (hbar,)
        for mon, c in self._p.terms():
            t = complex(float(c.x), float(c.y))
            for v, e in zip(vals, mon):
                if e:
                    t *= v ** e
            total += t
        return total


def _eval_hbar(p, value):
    d = _to_domain(value)
    acc: dict = {}
    for mon, c in p.terms():
        key = mon[:6] + (0,)
        acc[key] = acc.get(key, QQ_I.zero) + c * d ** mon[6]
    acc = {k: v for k, v in acc.items() if v}
    return _R.from_dict(acc) if acc else _R.zero


def _var(name: str):
    table = {"zb0": _ZB0, "zb1": _ZB1, "zb2": _ZB2, "z0": _Z0, "z1": _Z1, "z2": _Z2, "hbar": _H}
    try:
        return table[name]
    except KeyError:
        raise ValueError(f"unknown variable {name!r}") from None


def constant(c=1) -> PolySymbol:
    return PolySymbol(_R(_to_domain(c)))


def monomial(m: Sequence[int], n: Sequence[int], coeff=1, hbar_power: int = 0) -> PolySymbol:
    """``coeff * hbar^k * zb^m * z^n``."""
    key = tuple(int(v) for v in m) + tuple(int(v) for v in n) + (int(hbar_power),)
    if len(key) != 7 or min(key) < 0:
        raise ValueError("exponents must be three non-negative integers each")
    c = _to_domain(coeff)
    return PolySymbol(_R.from_dict({key: c}) if c else _R.zero)


HBAR = PolySymbol(_H)


@lru_cache(maxsize=32)
def _generators_cached(g0_key) -> dict[str, PolySymbol]:
    g0 = _to_domain(g0_key)
    I0 = PolySymbol(_ZB0 * _Z0)
    I1 = PolySymbol(_ZB0 * _Z0 + _ZB1 * _Z1)
    I2 = PolySymbol(_ZB0 * _Z0 + _ZB2 * _Z2)
    z = PolySymbol(g0 * _Z0 * _ZB1 * _ZB2)
    zb = z.conjugate()
    half = QQ_I(1, 0) / 2
    x = PolySymbol((z.poly + zb.poly) * half)
    y = PolySymbol((z.poly - zb.poly) * (QQ_I(0, -1) / 2))
    return {"I0": I0, "I1": I1, "I2": I2, "z": z, "zbar": zb, "x": x, "y": y, "hbar": HBAR}


def generators(g0=1) -> dict[str, PolySymbol]:
    """Symbols I0, I1, I2, z = g0 z0 zb1 zb2, zbar, x, y and hbar.

    ``g0`` must be exactly representable (int, Fraction, float or sympy
    rational); floats are taken at their exact binary value.
    """
    if isinstance(g0, float):
        g0 = Fraction(g0)
    return dict(_generators_cached(g0))


# words ---------------------------------------------------------------

def _parse_letter(tok) -> tuple[int, bool]:
    """Return (mode, is_creator) for a letter such as ``"a1*"`` or ``(1, True)``."""
    if isinstance(tok, tuple):
        mode, dag = tok
    else:
        s = str(tok).strip()
        dag = s.endswith("*")
        s = s.rstrip("*")
        if not s.startswith("a") or s[1:] not in ("0", "1", "2"):
            raise ValueError(f"bad letter {tok!r}")
        mode = int(s[1:])
    if mode not in (0, 1, 2):
        raise ValueError(f"bad mode {mode!r}")
    return int(mode), bool(dag)


def symbol_of_normal_word(word: Iterable | None = None, *, creators: Sequence[int] | None = None,
                          annihilators: Sequence[int] | None = None, coeff=1) -> PolySymbol:
    """Covariant symbol of a normally ordered word.

    Either pass ``word`` as a sequence of letters (``"a0*"``, ``"a1"``, ...,
    or ``(mode, is_creator)`` pairs), or give the exponent triples directly
    via ``creators`` and ``annihilators``.

    Raises
    ------
    OrderError
        If a creator appears to the right of an annihilator.
    """
    if word is None:
        m = tuple(creators or (0, 0, 0))
        n = tuple(annihilators or (0, 0, 0))
        return monomial(m, n, coeff)
    m = [0, 0, 0]
    n = [0, 0, 0]
    seen_annihilator = False
    for tok in word:
        mode, dag = _parse_letter(tok)
        if dag:
            if seen_annihilator:
                raise OrderError("creator to the right of an annihilator; normal-order the word first")
            m[mode] += 1
        else:
            seen_annihilator = True
            n[mode] += 1
    return monomial(m, n, coeff)


def normal_order(word: Iterable) -> list[tuple[int, list[tuple[int, bool]]]]:
    """Normal-order a word using ``[a_k, a_k*] = hbar``.

    Returns a list of ``(hbar_power, normal_word)`` pairs whose sum equals the
    input word; every returned word is accepted by
    :func:`symbol_of_normal_word`.
    """
    letters = [_parse_letter(t) for t in word]
    out: list[tuple[int, list[tuple[int, bool]]]] = []
    stack = [(0, letters)]
    while stack:
        hp, w = stack.pop()
        for i in range(len(w) - 1):
            (ma, da), (mb, db) = w[i], w[i + 1]
            if not da and db:
                swapped = w[:i] + [w[i + 1], w[i]] + w[i + 2:]
                stack.append((hp, swapped))
                if ma == mb:
                    stack.append((hp + 1, w[:i] + w[i + 2:]))
                break
        else:
            out.append((hp, w))
    return out


def symbol_of_word(word: Iterable) -> PolySymbol:
    """Covariant symbol of an arbitrary word, via explicit normal ordering."""
    acc = PolySymbol()
    for hp, w in normal_order(word):
        acc = acc + symbol_of_normal_word(w) * (HBAR ** hp)
    return acc


# star product and bracket ---------------------------------------------

def _nth_derivative(p, var, k):
    for _ in range(k):
        if not p:
            break
        p = p.diff(var)
    return p


def star_product(F: PolySymbol, G: PolySymbol) -> PolySymbol:
    """Exact star product: sum over j of hbar^|j|/j! d^j_z F * d^j_zb G."""
    f, g = F.poly, G.poly
    if not f or not g:
        return PolySymbol()
    acc = _R.zero
    # Peel one mode at a time so each partial derivative is computed once.
    level = [(f, g, 0, 1)]
    for k in range(3):
        nxt = []
        for fp, gp, hp, fact in level:
            jmax = min(fp.degree(_Z[k]), gp.degree(_ZB[k]))
            df, dg = fp, gp
            for j in range(max(jmax, 0) + 1):
                if j:
                    df = df.diff(_Z[k])
                    dg = dg.diff(_ZB[k])
                if not df or not dg:
                    break
                nxt.append((df, dg, hp + j, fact * factorial(j)))
        level = nxt
    for fp, gp, hp, fact in level:
        acc += fp * gp * _H ** hp * (QQ_I(1, 0) / fact)
    return PolySymbol(acc)


def star_commutator(F: PolySymbol, G: PolySymbol) -> PolySymbol:
    return star_product(F, G) - star_product(G, F)


def poisson_bracket(F: PolySymbol, G: PolySymbol) -> PolySymbol:
    """{F, G} = -i sum_n (dF/dz_n dG/dzb_n - dG/dz_n dF/dzb_n)."""
    f, g = F.poly, G.poly
    acc = _R.zero
    for k in range(3):
        acc += f.diff(_Z[k]) * g.diff(_ZB[k]) - g.diff(_Z[k]) * f.diff(_ZB[k])
    return PolySymbol(acc * QQ_I(0, -1))


def classical_limit_check(F: PolySymbol, G: PolySymbol) -> PolySymbol:
    """Residual ``[(-i/hbar)(F*G - G*F)]_{hbar=0} - {F, G}_{hbar=0}``; zero when consistent.

    Both sides are taken at ``hbar = 0`` so symbols may carry explicit hbar terms.
    """
    comm = star_commutator(F, G).divide_hbar()
    lim = PolySymbol(_eval_hbar(comm.poly * QQ_I(0, -1), 0))
    return lim - poisson_bracket(F, G).subs_hbar(0)


def from_terms(terms: Mapping[tuple[int, ...], Mapping[int, object]]) -> PolySymbol:
    """Inverse of :meth:`PolySymbol.terms`."""
    acc = {}
    for mon, coeffs in terms.items():
        for k, c in coeffs.items():
            d = _to_domain(c)
            if d:
                acc[tuple(mon) + (int(k),)] = d
    return PolySymbol(_R.from_dict(acc) if acc else _R.zero)
