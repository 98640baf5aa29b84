"""Exact arithmetic on sums of monomials with rational exponents.

Every scalar handled by the engine is an Expr: a finite sum of terms

    coeff * atom_1**e_1 * ... * atom_k**e_k

with an exact Fraction coefficient and Fraction exponents (negative and
fractional exponents allowed).  The atom vocabulary is fixed:

    x                   independent variable
    u, p, q, r          jet coordinates (u, u', u'', u''')
    f0 .. f3 + primes   operator coefficients and their x-derivatives
    a1 .. a6            structure group parameters
    F, F_x .. F_r       a formal scalar function and its partials

Atoms are totally ordered as listed (derivatives of f_i sort right after
f_i), and an Expr's term list is kept sorted by that order, so equal
expressions are structurally identical: Expr equality is term-for-term.

Fractional powers attach to single terms only; (f3*u)**(1/3) is stored as
f3**(1/3) * u**(1/3).  That identity is valid on the chamber u > 0,
f3 > 0, which is where all symbolic normalizations live.  Numeric
evaluation outside the chamber uses the real odd-root convention
sign(v)*|v|**(1/n) and is not covered by the symbolic guarantees.

No gcd, factorization or division by multi-term expressions is provided:
the reduction only ever divides by single terms, and anything else is a
bug worth surfacing (NonMonomialDivisor).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

import mpmath

from .errors import (
    EvenRootOfNegative,
    IrrationalCoefficient,
    NonMonomialBase,
    NonMonomialDivisor,
    UnboundAtom,
    ZeroDivisor,
)

Rat = Union[int, Fraction]

# Working precision (bits) for numeric evaluation involving fractional
# exponents; everything rational stays exact.
EVAL_PRECISION = 128

# atom kinds, listed in sort order
_KIND_X, _KIND_JET, _KIND_COEF, _KIND_GROUP, _KIND_FUNC = range(5)
_JET_NAMES = ("u", "p", "q", "r")
_FUNC_NAMES = ("F", "F_x", "F_u", "F_p", "F_q", "F_r")


@dataclass(frozen=True, order=True)
class Atom:
    kind: int
    major: int = 0
    minor: int = 0

    @property
    def name(self) -> str:
        if self.kind == _KIND_X:
            return "x"
        if self.kind == _KIND_JET:
            return _JET_NAMES[self.major]
        if self.kind == _KIND_COEF:
            return f"f{self.major}" + "'" * self.minor
        if self.kind == _KIND_GROUP:
            return f"a{self.major}"
        return _FUNC_NAMES[self.major]

    def __repr__(self) -> str:
        return self.name

    def __str__(self) -> str:
        return self.name


X = Atom(_KIND_X)
U, P, Q, R = (Atom(_KIND_JET, i) for i in range(4))
JET_ATOMS = (U, P, Q, R)


def coef(i: int, order: int = 0) -> Atom:
    """The atom f_i differentiated `order` times."""
    if not 0 <= i <= 3:
        raise ValueError(f"coefficient index {i} out of range")
    if order < 0:
        raise ValueError("negative derivative order")
    return Atom(_KIND_COEF, i, order)


def group_param(j: int) -> Atom:
    if not 1 <= j <= 6:
        raise ValueError(f"group parameter index {j} out of range")
    return Atom(_KIND_GROUP, j)


GROUP_ATOMS = tuple(group_param(j) for j in range(1, 7))
FUNC = Atom(_KIND_FUNC, 0)
FUNC_DX, FUNC_DU, FUNC_DP, FUNC_DQ, FUNC_DR = (Atom(_KIND_FUNC, i) for i in range(1, 6))
FUNC_PARTIALS = (FUNC_DX, FUNC_DU, FUNC_DP, FUNC_DQ, FUNC_DR)


def is_group_atom(a: Atom) -> bool:
    return a.kind == _KIND_GROUP


def is_coef_atom(a: Atom) -> bool:
    return a.kind == _KIND_COEF


def atom_from_name(name: str) -> Atom:
    """Inverse of Atom.name (primes allowed on f0..f3)."""
    if name == "x":
        return X
    if name in _JET_NAMES:
        return Atom(_KIND_JET, _JET_NAMES.index(name))
    if name in _FUNC_NAMES:
        return Atom(_KIND_FUNC, _FUNC_NAMES.index(name))
    base = name.rstrip("'")
    order = len(name) - len(base)
    if len(base) == 2 and base[0] == "f" and base[1] in "0123":
        return coef(int(base[1]), order)
    if len(base) == 2 and base[0] == "a" and base[1] in "123456" and order == 0:
        return group_param(int(base[1]))
    raise ValueError(f"unknown atom name {name!r}")


Powers = tuple  # tuple[tuple[Atom, Fraction], ...], sorted by atom


@dataclass(frozen=True)
class Term:
    coeff: Fraction
    powers: Powers

    def render(self) -> str:
        if not self.powers:
            return str(self.coeff)
        factors = []
        for atom, e in self.powers:
            if e == 1:
                factors.append(atom.name)
            else:
                factors.append(f"{atom.name}^{e}")
        body = "*".join(factors)
        if self.coeff == 1:
            return body
        if self.coeff == -1:
            return "-" + body
        return f"{self.coeff}*{body}"


class Expr:
    """Canonical sum of terms; immutable, hashable, totally ordered terms."""

    __slots__ = ("terms",)

    def __init__(self, terms: tuple = ()):
        object.__setattr__(self, "terms", terms)

    # -- constructors --------------------------------------------------

    @staticmethod
    def zero() -> "Expr":
        return _ZERO

    @staticmethod
    def one() -> "Expr":
        return _ONE

    @staticmethod
    def number(value: Rat) -> "Expr":
        c = Fraction(value)
        if c == 0:
            return _ZERO
        return Expr((Term(c, ()),))

    @staticmethod
    def atom(a: Atom, exponent: Rat = 1) -> "Expr":
        e = Fraction(exponent)
        if e == 0:
            return _ONE
        return Expr((Term(Fraction(1), ((a, e),)),))

    @staticmethod
    def monomial(coeff: Rat, powers: Mapping[Atom, Rat]) -> "Expr":
        c = Fraction(coeff)
        if c == 0:
            return _ZERO
        pw = tuple(sorted((a, Fraction(e)) for a, e in powers.items() if Fraction(e) != 0))
        return Expr((Term(c, pw),))

    @staticmethod
    def _from_map(acc: dict) -> "Expr":
        terms = tuple(Term(c, pw) for pw, c in sorted(acc.items()) if c != 0)
        return Expr(terms)

    # -- predicates / accessors ----------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and not self.terms[0].powers)

    def constant_value(self) -> Fraction:
        if not self.terms:
            return Fraction(0)
        if len(self.terms) == 1 and not self.terms[0].powers:
            return self.terms[0].coeff
        raise ValueError(f"not a constant: {self}")

    def single_term(self) -> Term:
        if len(self.terms) != 1:
            raise ValueError("not a single term")
        return self.terms[0]

    def atoms(self) -> set:
        return {a for t in self.terms for a, _ in t.powers}

    # -- arithmetic -----------------------------------------------------

    def __add__(self, other: "Expr") -> "Expr":
        if not isinstance(other, Expr):
            return NotImplemented
        if not self.terms:
            return other
        if not other.terms:
            return self
        acc = {t.powers: t.coeff for t in self.terms}
        for t in other.terms:
            acc[t.powers] = acc.get(t.powers, Fraction(0)) + t.coeff
        return Expr._from_map(acc)

    def __neg__(self) -> "Expr":
        return Expr(tuple(Term(-t.coeff, t.powers) for t in self.terms))

    def __sub__(self, other: "Expr") -> "Expr":
        return self + (-other)

    def __mul__(self, other: "Expr") -> "Expr":
        if not isinstance(other, Expr):
            return NotImplemented
        if not self.terms or not other.terms:
            return _ZERO
        acc: dict = {}
        for ta in self.terms:
            pa = dict(ta.powers)
            for tb in other.terms:
                pw = dict(pa)
                for a, e in tb.powers:
                    ne = pw.get(a, Fraction(0)) + e
                    if ne == 0:
                        pw.pop(a, None)
                    else:
                        pw[a] = ne
                key = tuple(sorted(pw.items()))
                acc[key] = acc.get(key, Fraction(0)) + ta.coeff * tb.coeff
        return Expr._from_map(acc)

    def __eq__(self, other) -> bool:
        return isinstance(other, Expr) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(self.terms)

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = [self.terms[0].render()]
        for t in self.terms[1:]:
            body = Term(abs(t.coeff), t.powers).render()
            parts.append(("- " if t.coeff < 0 else "+ ") + body)
        return " ".join(parts)

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"Expr({self.render()})"


_ZERO = Expr(())
_ONE = Expr((Term(Fraction(1), ()),))


# -- module-level operations (the public surface) ---------------------------

def add(a: Expr, b: Expr) -> Expr:
    return a + b


def neg(a: Expr) -> Expr:
    return -a


def mul(a: Expr, b: Expr) -> Expr:
    return a * b


def div_by_term(a: Expr, d: Expr) -> Expr:
    """Exact division by a single-term divisor: mul(result, d) == a."""
    if d.is_zero():
        raise ZeroDivisor("division by zero")
    if len(d.terms) != 1:
        raise NonMonomialDivisor(f"divisor has {len(d.terms)} terms: {d}")
    dt = d.terms[0]
    inv_powers = {a: -e for a, e in dt.powers}
    return a * Expr.monomial(Fraction(1) / dt.coeff, inv_powers)


def _int_nth_root(n: int, k: int):
    """Exact k-th root of n >= 0, or None."""
    if n in (0, 1):
        return n
    lo, hi = 1, 1 << (n.bit_length() // k + 1)
    while lo < hi:
        mid = (lo + hi) // 2
        if mid ** k < n:
            lo = mid + 1
        else:
            hi = mid
    return lo if lo ** k == n else None


def _rational_pow(c: Fraction, e: Fraction) -> Fraction:
    """c**e when the result is rational; IrrationalCoefficient otherwise."""
    if e.denominator == 1:
        return c ** e.numerator
    if c < 0 and e.denominator % 2 == 0:
        raise EvenRootOfNegative(f"({c})**({e})")
    sign = 1
    if c < 0:
        sign = -1 if e.numerator % 2 else 1
        c = -c
    rn = _int_nth_root(c.numerator, e.denominator)
    rd = _int_nth_root(c.denominator, e.denominator)
    if rn is None or rd is None:
        raise IrrationalCoefficient(f"({sign * c})**({e}) is not rational")
    return sign * Fraction(rn, rd) ** e.numerator


def pow_rational(a: Expr, e: Rat) -> Expr:
    """a**e.  Multi-term bases need a nonnegative integer e; single terms
    take any rational e provided the coefficient's power stays rational."""
    e = Fraction(e)
    if e == 0:
        return Expr.one()
    if e.denominator == 1 and e >= 0 and len(a.terms) != 1:
        out = Expr.one()
        base = a
        k = e.numerator
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out
    if len(a.terms) != 1:
        raise NonMonomialBase(f"cannot raise {len(a.terms)}-term expression to power {e}")
    t = a.terms[0]
    coeff = _rational_pow(t.coeff, e)
    return Expr.monomial(coeff, {atom: ex * e for atom, ex in t.powers})


def partial_derivative(a: Expr, v: Atom) -> Expr:
    """Term-wise power rule; atoms are algebraically independent."""
    acc: dict = {}
    for t in a.terms:
        for atom, e in t.powers:
            if atom != v:
                continue
            pw = {b: x for b, x in t.powers if b != v}
            if e != 1:
                pw[v] = e - 1
            key = tuple(sorted(pw.items()))
            acc[key] = acc.get(key, Fraction(0)) + t.coeff * e
            break
    return Expr._from_map(acc)


def substitute(a: Expr, bindings: Mapping[Atom, Expr]) -> Expr:
    """Simultaneous substitution; fractional/negative powers require the
    binding to be a single term so the result stays in the ring."""
    if not bindings:
        return a
    out = Expr.zero()
    for t in a.terms:
        factor = Expr.number(t.coeff)
        for atom, e in t.powers:
            b = bindings.get(atom)
            if b is None:
                factor = factor * Expr.atom(atom, e)
            else:
                factor = factor * pow_rational(b, e)
        out = out + factor
    return out


def collect_linear(a: Expr, markers: Iterable[Atom]):
    """Split a == sum(marker * coeff) + rest, each marker appearing linearly.

    Returns (dict marker -> Expr, rest).  Raises ValueError if any term
    mixes markers or carries one with exponent != 1.
    """
    marker_set = set(markers)
    acc: dict = {m: {} for m in marker_set}
    rest: dict = {}
    for t in a.terms:
        hits = [(atom, e) for atom, e in t.powers if atom in marker_set]
        if not hits:
            rest[t.powers] = rest.get(t.powers, Fraction(0)) + t.coeff
            continue
        if len(hits) > 1 or hits[0][1] != 1:
            raise ValueError(f"term {t.render()} is not linear in the markers")
        m = hits[0][0]
        pw = tuple(pair for pair in t.powers if pair[0] != m)
        acc[m][pw] = acc[m].get(pw, Fraction(0)) + t.coeff
    return {m: Expr._from_map(d) for m, d in acc.items()}, Expr._from_map(rest)


# -- numeric evaluation ------------------------------------------------------

def _pow_numeric_exact(v: Fraction, e: Fraction):
    """Fraction result for integer exponents, mpf otherwise (odd-root rule)."""
    if e.denominator == 1:
        if v == 0 and e < 0:
            raise ZeroDivisor("0 raised to a negative power")
        return v ** e.numerator
    if v < 0 and e.denominator % 2 == 0:
        raise EvenRootOfNegative(f"({v})**({e})")
    if v == 0:
        if e < 0:
            raise ZeroDivisor("0 raised to a negative power")
        return Fraction(0)
    sign = 1
    if v < 0:
        sign = -1 if e.numerator % 2 else 1
        v = -v
    try:
        return sign * _rational_pow(v, e)
    except IrrationalCoefficient:
        pass
    with mpmath.workprec(EVAL_PRECISION):
        root = mpmath.root(mpmath.mpf(v.numerator) / mpmath.mpf(v.denominator), e.denominator)
        return sign * root ** e.numerator


def evaluate(a: Expr, env: Mapping[Atom, Fraction]):
    """Exact Fraction when every exponent stays integral, high-precision
    mpf otherwise.  Raises UnboundAtom for missing values."""
    total_rat = Fraction(0)
    total_mpf = None
    with mpmath.workprec(EVAL_PRECISION):
        for t in a.terms:
            rat = t.coeff
            irr = None
            for atom, e in t.powers:
                if atom not in env:
                    raise UnboundAtom(f"no value for atom {atom.name}")
                v = _pow_numeric_exact(Fraction(env[atom]), e)
                if isinstance(v, Fraction):
                    rat *= v
                else:
                    irr = v if irr is None else irr * v
            if irr is None:
                total_rat += rat
            else:
                contrib = irr * mpmath.mpf(rat.numerator) / mpmath.mpf(rat.denominator)
                total_mpf = contrib if total_mpf is None else total_mpf + contrib
        if total_mpf is None:
            return total_rat
        return total_mpf + mpmath.mpf(total_rat.numerator) / mpmath.mpf(total_rat.denominator)


def _pow_float(v: float, e: Fraction) -> float:
    if e.denominator == 1:
        return v ** e.numerator
    if v < 0:
        if e.denominator % 2 == 0:
            raise EvenRootOfNegative(f"({v})**({e})")
        sign = -1.0 if e.numerator % 2 else 1.0
        return sign * (-v) ** float(e)
    return v ** float(e)


def evaluate_float(a: Expr, env: Mapping[Atom, float]) -> float:
    """Fast float64 evaluation (used for grid sweeps; 1e-6..1e-9 checks)."""
    total = 0.0
    for t in a.terms:
        val = float(t.coeff)
        for atom, e in t.powers:
            if atom not in env:
                raise UnboundAtom(f"no value for atom {atom.name}")
            val *= _pow_float(env[atom], e)
        total += val
    return total
