"""Exact univariate polynomials and rational functions over Q.

Used for concrete operator coefficients f_i(x) and for the maps xi, phi of
fiber-preserving transformations.  Polynomials are dense coefficient
tuples (lowest degree first); rational functions are kept reduced with a
monic denominator, so equality is structural.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

from .errors import PoleAtPoint, ZeroDivisor

RatLike = Union[int, Fraction]


class Poly:
    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):  # lowest degree first
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @staticmethod
    def const(c: RatLike) -> "Poly":
        return Poly((Fraction(c),))

    @staticmethod
    def x() -> "Poly":
        return Poly((0, 1))

    def is_zero(self) -> bool:
        return not self.coeffs

    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    def leading(self) -> Fraction:
        if not self.coeffs:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def __add__(self, other: "Poly") -> "Poly":
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly(
            tuple(
                (self.coeffs[i] if i < len(self.coeffs) else 0)
                + (other.coeffs[i] if i < len(other.coeffs) else 0)
                for i in range(n)
            )
        )

    def __neg__(self) -> "Poly":
        return Poly(tuple(-c for c in self.coeffs))

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        if self.is_zero() or other.is_zero():
            return Poly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly(tuple(out))

    def scale(self, c: RatLike) -> "Poly":
        return Poly(tuple(Fraction(c) * a for a in self.coeffs))

    def derivative(self) -> "Poly":
        return Poly(tuple(i * c for i, c in enumerate(self.coeffs) if i > 0))

    def evaluate(self, x: Fraction) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def evaluate_float(self, x: float) -> float:
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + float(c)
        return acc

    def divmod(self, other: "Poly"):
        if other.is_zero():
            raise ZeroDivisor("polynomial division by zero")
        rem = list(self.coeffs)
        quo = [Fraction(0)] * max(len(rem) - len(other.coeffs) + 1, 0)
        d = other.degree()
        lead = other.leading()
        while len(rem) - 1 >= d and rem:
            k = len(rem) - 1 - d
            c = rem[-1] / lead
            quo[k] = c
            for i, b in enumerate(other.coeffs):
                rem[k + i] -= c * b
            while rem and rem[-1] == 0:
                rem.pop()
        return Poly(tuple(quo)), Poly(tuple(rem))

    def gcd(self, other: "Poly") -> "Poly":
        a, b = self, other
        while not b.is_zero():
            a, b = b, a.divmod(b)[1]
        if a.is_zero():
            return a
        return a.scale(1 / a.leading())  # monic

    def compose_rat(self, g: "RatFunc") -> "RatFunc":
        """self(g(x)) as a rational function (Horner in RatFunc arithmetic)."""
        acc = RatFunc.const(0)
        for c in reversed(self.coeffs):
            acc = acc * g + RatFunc.const(c)
        return acc

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def render(self, var: str = "x") -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if i == 0:
                body = str(abs(c))
            else:
                xs = var if i == 1 else f"{var}^{i}"
                body = xs if abs(c) == 1 else f"{abs(c)}*{xs}"
            if not parts:
                parts.append(("-" if c < 0 else "") + body)
            else:
                parts.append(("- " if c < 0 else "+ ") + body)
        return " ".join(parts)

    def __repr__(self):
        return f"Poly({self.render()})"


class RatFunc:
    """num/den, reduced, den monic and nonzero."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly = None):
        if den is None:
            den = Poly.const(1)
        if den.is_zero():
            raise ZeroDivisor("zero denominator")
        if num.is_zero():
            num, den = Poly(), Poly.const(1)
        else:
            g = num.gcd(den)
            if g.degree() > 0:
                num = num.divmod(g)[0]
                den = den.divmod(g)[0]
            lead = den.leading()
            if lead != 1:
                num = num.scale(1 / lead)
                den = den.scale(1 / lead)
        self.num = num
        self.den = den

    @staticmethod
    def const(c: RatLike) -> "RatFunc":
        return RatFunc(Poly.const(c))

    @staticmethod
    def x() -> "RatFunc":
        return RatFunc(Poly.x())

    @staticmethod
    def from_poly(p: Poly) -> "RatFunc":
        return RatFunc(p)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.degree() <= 0 and self.den.degree() == 0

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"not constant: {self.render()}")
        if self.num.is_zero():
            return Fraction(0)
        return self.num.coeffs[0] / self.den.coeffs[0]

    def __add__(self, other: "RatFunc") -> "RatFunc":
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    def __neg__(self) -> "RatFunc":
        return RatFunc(-self.num, self.den)

    def __sub__(self, other: "RatFunc") -> "RatFunc":
        return self + (-other)

    def __mul__(self, other: "RatFunc") -> "RatFunc":
        return RatFunc(self.num * other.num, self.den * other.den)

    def __truediv__(self, other: "RatFunc") -> "RatFunc":
        if other.is_zero():
            raise ZeroDivisor("division by the zero rational function")
        return RatFunc(self.num * other.den, self.den * other.num)

    def scale(self, c: RatLike) -> "RatFunc":
        return RatFunc(self.num.scale(c), self.den)

    def derivative(self) -> "RatFunc":
        return RatFunc(
            self.num.derivative() * self.den - self.num * self.den.derivative(),
            self.den * self.den,
        )

    def compose(self, g: "RatFunc") -> "RatFunc":
        """self(g(x))."""
        n = self.num.compose_rat(g)
        d = self.den.compose_rat(g)
        return n / d

    def evaluate(self, x: RatLike) -> Fraction:
        x = Fraction(x)
        dv = self.den.evaluate(x)
        if dv == 0:
            raise PoleAtPoint(f"pole at x = {x}")
        return self.num.evaluate(x) / dv

    def evaluate_float(self, x: float) -> float:
        dv = self.den.evaluate_float(x)
        if dv == 0.0:
            raise PoleAtPoint(f"pole at x = {x}")
        return self.num.evaluate_float(x) / dv

    def __eq__(self, other) -> bool:
        return isinstance(other, RatFunc) and self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def render(self, var: str = "x") -> str:
        if self.den.degree() == 0 and self.den.coeffs and self.den.coeffs[0] == 1:
            return self.num.render(var)
        return f"({self.num.render(var)})/({self.den.render(var)})"

    def __repr__(self):
        return f"RatFunc({self.render()})"


ZERO_RF = RatFunc(Poly())
ONE_RF = RatFunc.const(1)
