"""Third jet space semantics: operators, the fiber-preserving pseudogroup
and its prolongation, transformation rules, contact ideal, base coframes,
and numeric evaluation.

Concrete operators carry rational-function coefficients so that every
transformation rule stays exact; the symbolic reduction itself only ever
sees the abstract coefficient atoms f0..f3, which numeric evaluation binds
to concrete values on demand.

JetExpr is the small carrier for prolonged coordinates: a polynomial in
(u, p, q, r) whose coefficients are rational functions of x.  It is all
that chain-rule prolongation of x-fiber maps ever produces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Optional, Union

from . import algebra, forms
from .algebra import Atom, Expr
from .errors import (
    DegenerateOperator,
    NonInvertibleTransformation,
    PoleAtPoint,
    SingularAtPoint,
)
from .forms import Coframe, DForm
from .rational import Poly, RatFunc


class Mode(str, Enum):
    """The two equivalence problems: D-bar = D o (1/phi), or phi D (1/phi)."""

    DIRECT = "direct"
    GAUGE = "gauge"


# -- operators ---------------------------------------------------------------

@dataclass(frozen=True)
class Operator:
    """Third-order linear operator sum f_i(x) D^i; coeffs None = abstract."""

    coeffs: Optional[tuple] = None  # (f0, f1, f2, f3) as RatFunc

    @staticmethod
    def concrete(f0, f1, f2, f3) -> "Operator":
        cs = tuple(c if isinstance(c, RatFunc) else RatFunc.const(c) for c in (f0, f1, f2, f3))
        if cs[3].is_zero():
            raise DegenerateOperator("f3 vanishes identically")
        return Operator(cs)

    @property
    def is_abstract(self) -> bool:
        return self.coeffs is None

    def f(self, i: int) -> RatFunc:
        if self.is_abstract:
            raise ValueError("abstract operator has no concrete coefficients")
        return self.coeffs[i]

    def apply_to_jet(self, jet: tuple) -> Fraction:
        """D[u] at x given (x, u, u', u'', u''')."""
        x, vals = jet[0], jet[1:]
        return sum((self.f(i).evaluate(x) * vals[i] for i in range(4)), Fraction(0))

    def render(self) -> str:
        return "; ".join(f"f{i} = {self.f(i).render()}" for i in (3, 2, 1, 0))


ABSTRACT = Operator()


@lru_cache(maxsize=None)
def _coeff_derivative(op: Operator, i: int, order: int) -> RatFunc:
    if order == 0:
        return op.f(i)
    return _coeff_derivative(op, i, order - 1).derivative()


def coefficient_value(op: Operator, i: int, order: int, x: Fraction) -> Fraction:
    return _coeff_derivative(op, i, order).evaluate(x)


# -- jet points --------------------------------------------------------------

@dataclass(frozen=True)
class JetPoint:
    x: Fraction
    u: Fraction
    p: Fraction
    q: Fraction
    r: Fraction

    @staticmethod
    def make(x, u, p, q, r) -> "JetPoint":
        return JetPoint(*(Fraction(v) for v in (x, u, p, q, r)))

    def coords(self) -> tuple:
        return (self.x, self.u, self.p, self.q, self.r)

    def env(self) -> dict:
        return {
            algebra.X: self.x,
            algebra.U: self.u,
            algebra.P: self.p,
            algebra.Q: self.q,
            algebra.R: self.r,
        }

    def on_domain(self, op: Operator) -> bool:
        """u != 0 and f3(x) != 0 (and no coefficient pole)."""
        if self.u == 0:
            return False
        try:
            return all(op.f(i).den.evaluate(self.x) != 0 for i in range(4)) and \
                op.f(3).evaluate(self.x) != 0
        except PoleAtPoint:
            return False

    def on_chamber(self, op: Operator) -> bool:
        """The validated chamber: u > 0 and f3(x) > 0."""
        return self.u > 0 and self.on_domain(op) and op.f(3).evaluate(self.x) > 0


# -- JetExpr: polynomials in (u,p,q,r) with RatFunc coefficients -------------

_UPQR = ("u", "p", "q", "r")


class JetExpr:
    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple, RatFunc] = ()):
        acc = {}
        for k, v in dict(terms).items():
            if not v.is_zero():
                acc[k] = v
        self.terms = acc

    @staticmethod
    def const(c: Union[int, Fraction, RatFunc]) -> "JetExpr":
        rf = c if isinstance(c, RatFunc) else RatFunc.const(c)
        return JetExpr({(0, 0, 0, 0): rf})

    @staticmethod
    def coordinate(name: str) -> "JetExpr":
        if name == "x":
            return JetExpr.const(RatFunc.x())
        exps = [0, 0, 0, 0]
        exps[_UPQR.index(name)] = 1
        return JetExpr({tuple(exps): RatFunc.const(1)})

    def __add__(self, other: "JetExpr") -> "JetExpr":
        acc = dict(self.terms)
        for k, v in other.terms.items():
            acc[k] = acc.get(k, RatFunc.const(0)) + v
        return JetExpr(acc)

    def __neg__(self) -> "JetExpr":
        return JetExpr({k: -v for k, v in self.terms.items()})

    def __sub__(self, other: "JetExpr") -> "JetExpr":
        return self + (-other)

    def __mul__(self, other: "JetExpr") -> "JetExpr":
        acc: dict = {}
        for ka, va in self.terms.items():
            for kb, vb in other.terms.items():
                key = tuple(a + b for a, b in zip(ka, kb))
                prod = va * vb
                acc[key] = acc.get(key, RatFunc.const(0)) + prod
        return JetExpr(acc)

    def scale(self, rf: RatFunc) -> "JetExpr":
        return JetExpr({k: v * rf for k, v in self.terms.items()})

    def partial(self, name: str) -> "JetExpr":
        """Partial derivative; name in {x, u, p, q, r} (x hits coefficients)."""
        if name == "x":
            return JetExpr({k: v.derivative() for k, v in self.terms.items()})
        i = _UPQR.index(name)
        acc = {}
        for k, v in self.terms.items():
            if k[i] == 0:
                continue
            nk = list(k)
            nk[i] -= 1
            acc[tuple(nk)] = acc.get(tuple(nk), RatFunc.const(0)) + v.scale(k[i])
        return JetExpr(acc)

    def total_x_derivative(self) -> "JetExpr":
        """d/dx along jets: coefficients differentiate, u->p->q->r chain.
        Only defined for expressions with no r dependence."""
        if any(k[3] for k in self.terms):
            raise ValueError("total derivative would leave the third jet space")
        out = self.partial("x")
        for lower, upper in (("u", "p"), ("p", "q"), ("q", "r")):
            out = out + self.partial(lower) * JetExpr.coordinate(upper)
        return out

    def compose(self, x_map: RatFunc, jets: tuple) -> "JetExpr":
        """Substitute x -> x_map and (u,p,q,r) -> jets (four JetExprs)."""
        out = JetExpr({})
        for k, v in self.terms.items():
            term = JetExpr.const(v.compose(x_map))
            for i, e in enumerate(k):
                for _ in range(e):
                    term = term * jets[i]
            out = out + term
        return out

    def evaluate(self, pt: JetPoint) -> Fraction:
        vals = (pt.u, pt.p, pt.q, pt.r)
        acc = Fraction(0)
        for k, v in self.terms.items():
            m = v.evaluate(pt.x)
            for base, e in zip(vals, k):
                if e:
                    m *= base ** e
            acc += m
        return acc

    def evaluate_float(self, x: float, u: float, p: float, q: float, r: float) -> float:
        vals = (u, p, q, r)
        acc = 0.0
        for k, v in self.terms.items():
            m = v.evaluate_float(x)
            for base, e in zip(vals, k):
                if e:
                    m *= base ** e
            acc += m
        return acc

    def __eq__(self, other) -> bool:
        return isinstance(other, JetExpr) and self.terms == other.terms

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for k in sorted(self.terms):
            mono = "*".join(
                (n if e == 1 else f"{n}^{e}") for n, e in zip(_UPQR, k) if e
            )
            c = self.terms[k].render()
            parts.append(f"({c})" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)

    def __repr__(self):
        return f"JetExpr({self.render()})"


# -- fiber-preserving transformations ----------------------------------------

@dataclass(frozen=True)
class FiberTransformation:
    """x-bar = xi(x), u-bar = phi(x) u, with a validated exact inverse of xi."""

    xi: RatFunc
    xi_inv: RatFunc
    phi: RatFunc

    def __post_init__(self):
        ident = RatFunc.x()
        if self.xi.compose(self.xi_inv) != ident or self.xi_inv.compose(self.xi) != ident:
            raise NonInvertibleTransformation("xi_inv is not an exact inverse of xi")
        if self.phi.is_zero():
            raise NonInvertibleTransformation("phi vanishes identically")
        if self.xi.derivative().is_zero():
            raise NonInvertibleTransformation("xi is constant")

    @staticmethod
    def identity() -> "FiberTransformation":
        return FiberTransformation(RatFunc.x(), RatFunc.x(), RatFunc.const(1))

    @staticmethod
    def affine(a, b, phi=None) -> "FiberTransformation":
        """xi = a x + b with exact inverse; phi defaults to 1."""
        a, b = Fraction(a), Fraction(b)
        if a == 0:
            raise NonInvertibleTransformation("affine map needs a != 0")
        xi = RatFunc(Poly((b, a)))
        xi_inv = RatFunc(Poly((-b / a, 1 / a)))
        return FiberTransformation(xi, xi_inv, phi if phi is not None else RatFunc.const(1))

    @property
    def alpha(self) -> RatFunc:
        """d(x-bar)/dx."""
        return self.xi.derivative()

    @property
    def beta(self) -> RatFunc:
        """phi'/phi."""
        return self.phi.derivative() / self.phi

    def compose(self, inner: "FiberTransformation") -> "FiberTransformation":
        """self after inner (apply inner first)."""
        return FiberTransformation(
            self.xi.compose(inner.xi),
            inner.xi_inv.compose(self.xi_inv),
            self.phi.compose(inner.xi) * inner.phi,
        )

    def inverse(self) -> "FiberTransformation":
        return FiberTransformation(
            self.xi_inv,
            self.xi,
            RatFunc.const(1) / self.phi.compose(self.xi_inv),
        )

    def is_identity(self) -> bool:
        return self.xi == RatFunc.x() and self.phi == RatFunc.const(1)


class Prolongation:
    """The third-order prolongation of a fiber transformation: five exact
    coordinate maps (x,u,p,q,r) -> (x-bar, u-bar, p-bar, q-bar, r-bar)."""

    def __init__(self, t: FiberTransformation):
        self.transformation = t
        inv_alpha = RatFunc.const(1) / t.alpha
        ubar = JetExpr.coordinate("u").scale(t.phi)
        pbar = ubar.total_x_derivative().scale(inv_alpha)
        qbar = pbar.total_x_derivative().scale(inv_alpha)
        rbar = qbar.total_x_derivative().scale(inv_alpha)
        self.xbar = t.xi
        self.maps = (ubar, pbar, qbar, rbar)
        self._jacobian = None

    def apply(self, pt: JetPoint) -> JetPoint:
        t = self.transformation
        if t.alpha.evaluate(pt.x) == 0:
            raise SingularAtPoint(f"xi'({pt.x}) = 0")
        if t.phi.evaluate(pt.x) == 0:
            raise SingularAtPoint(f"phi({pt.x}) = 0")
        return JetPoint(
            self.xbar.evaluate(pt.x), *(m.evaluate(pt) for m in self.maps)
        )

    def jacobian(self) -> list:
        """5x5 matrix of JetExpr partials, rows = image coords, cols = x,u,p,q,r."""
        if self._jacobian is None:
            rows = [[JetExpr.const(self.xbar.derivative())] + [JetExpr({})] * 4]
            for m in self.maps:
                rows.append([m.partial(n) for n in ("x",) + _UPQR])
            self._jacobian = rows
        return self._jacobian

    def jacobian_at(self, pt: JetPoint) -> list:
        return [[e.evaluate(pt) for e in row] for row in self.jacobian()]


def prolong(t: FiberTransformation) -> Prolongation:
    return Prolongation(t)


def transform_operator(op: Operator, t: FiberTransformation, mode: Mode) -> Operator:
    """Push an operator through a fiber transformation.

    Direct: D-bar = D o (1/phi); gauge: D-bar = phi * D o (1/phi), both
    written in the x-bar variable via xi_inv.  Exact in RatFunc arithmetic.
    """
    if op.is_abstract:
        raise ValueError("transform_operator needs a concrete operator")
    one_over_phi = RatFunc.const(1) / t.phi
    # Leibniz: D^i (v/phi) = sum_k C(i,k) (1/phi)^(i-k) v^(k)
    inv_phi_derivs = [one_over_phi]
    for _ in range(3):
        inv_phi_derivs.append(inv_phi_derivs[-1].derivative())
    g = []
    for k in range(4):
        acc = RatFunc.const(0)
        for i in range(k, 4):
            acc = acc + op.f(i) * inv_phi_derivs[i - k].scale(math.comb(i, k))
        g.append(acc)
    # change of independent variable: D^i [v(xi(x))] = sum_k c_{i,k} v^(k)(xi)
    alpha = t.alpha
    c = [[RatFunc.const(1)]]
    for i in range(3):
        prev = c[-1]
        nxt = []
        for k in range(len(prev) + 1):
            term = RatFunc.const(0)
            if k < len(prev):
                term = term + prev[k].derivative()
            if k >= 1:
                term = term + alpha * prev[k - 1]
            nxt.append(term)
        c.append(nxt)
    h = []
    for k in range(4):
        acc = RatFunc.const(0)
        for i in range(k, 4):
            acc = acc + g[i] * c[i][k]
        if mode == Mode.GAUGE:
            acc = acc * t.phi
        h.append(acc)
    fbar = tuple(hk.compose(t.xi_inv) for hk in h)
    if fbar[3].is_zero():
        raise DegenerateOperator("transformed operator lost its leading coefficient")
    return Operator(fbar)


# -- contact ideal and base coframes ------------------------------------------

def contact_ideal() -> tuple:
    """Generators du - p dx, dp - q dx, dq - r dx."""
    return (
        DForm.one_form({forms.DX: -Expr.atom(algebra.P), forms.DU: Expr.one()}),
        DForm.one_form({forms.DX: -Expr.atom(algebra.Q), forms.DP: Expr.one()}),
        DForm.one_form({forms.DX: -Expr.atom(algebra.R), forms.DQ: Expr.one()}),
    )


def invariant_scalar(mode: Mode) -> Expr:
    """The invariant I whose differential closes the coframe:
    D[u] for the direct problem, D[u]/u for gauge."""
    f0, f1, f2, f3 = (Expr.atom(algebra.coef(i)) for i in range(4))
    u, p, q, r = (Expr.atom(a) for a in algebra.JET_ATOMS)
    if mode == Mode.DIRECT:
        return f3 * r + f2 * q + f1 * p + f0 * u
    uinv = Expr.atom(algebra.U, -1)
    return (f3 * r + f2 * q + f1 * p) * uinv + f0


def base_coframe(mode: Mode, op: Operator = ABSTRACT) -> Coframe:
    """The five base one-forms; coefficients stay symbolic in the f-atoms
    (concrete operators bind them at evaluation time)."""
    if not op.is_abstract and op.f(3).is_zero():
        raise DegenerateOperator("f3 vanishes identically")
    uinv = Expr.atom(algebra.U, -1)
    p = Expr.atom(algebra.P)
    w1 = DForm.one_form({forms.DX: Expr.one()})
    w2 = DForm.one_form({forms.DX: -(p * uinv), forms.DU: uinv})
    contact = contact_ideal()
    w5 = DForm.scalar(invariant_scalar(mode)).d()
    return Coframe((w1, w2, contact[1], contact[2], w5),
                   ("omega1", "omega2", "omega3", "omega4", "omega5"))


# -- numeric evaluation --------------------------------------------------------

def binding_env(pt: JetPoint, op: Operator = None, params: Mapping[int, Fraction] = None,
                atoms=None) -> dict:
    """Build the atom environment for evaluation at a jet point."""
    env = pt.env()
    if params:
        for j, v in params.items():
            env[algebra.group_param(j)] = Fraction(v)
    if atoms is not None and op is not None and not op.is_abstract:
        for a in atoms:
            if algebra.is_coef_atom(a):
                env[a] = coefficient_value(op, a.major, a.minor, pt.x)
    return env


def evaluate(obj, pt: JetPoint, op: Operator = None, params: Mapping[int, Fraction] = None):
    """Evaluate an Expr (to a number) or a DForm (to numeric components).

    Coefficient atoms f_i^(k) are bound by differentiating the concrete
    operator k times; group atoms come from params (keyed 1..6)."""
    if isinstance(obj, Expr):
        env = binding_env(pt, op, params, obj.atoms())
        return algebra.evaluate(obj, env)
    if isinstance(obj, DForm):
        env = binding_env(pt, op, params, obj.atoms())
        return {idx: algebra.evaluate(c, env) for idx, c in obj.comps.items()}
    raise TypeError(f"cannot evaluate {type(obj).__name__}")
