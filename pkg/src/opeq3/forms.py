"""Exterior algebra over the 11 coordinate one-forms on the lifted space.

Basis order (fixed): dx, du, dp, dq, dr, da1, ..., da6.  A DForm of degree
g keeps a map from strictly increasing g-tuples of basis indices to Expr
coefficients; zero coefficients are never stored.  Base-space forms are
simply DForms whose da-components vanish.

The exterior derivative acts through the atom table

    d(x) = dx   d(u) = du  ...  d(a_j) = da_j
    d(f_i^(k)) = f_i^(k+1) dx
    d(F) = F_x dx + F_u du + F_p dp + F_q dq + F_r dr,   d(F_v) = 0

so the x-dependence of operator coefficients is carried by the derivative
bookkeeping, not by the atoms themselves.

Coframes are inverted by structured elimination: repeatedly pick a row
with a single surviving column and divide by that pivot, which must be a
single term.  Every coframe in the reduction is triangular up to row and
column order, so no multi-term pivot (i.e. no general Gaussian step) is
ever needed; hitting one raises NonTriangularCoframe.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

from . import algebra
from .algebra import Atom, Expr
from .errors import DerivOrderOverflow, NonTriangularCoframe, SingularCoframe

DX, DU, DP, DQ, DR = range(5)
DA = tuple(range(5, 11))  # da1 .. da6
N_BASIS = 11
BASIS_NAMES = ("dx", "du", "dp", "dq", "dr", "da1", "da2", "da3", "da4", "da5", "da6")

DEFAULT_MAX_DERIV_ORDER = 6

_JET_DIFFERENTIALS = {
    algebra.X: DX,
    algebra.U: DU,
    algebra.P: DP,
    algebra.Q: DQ,
    algebra.R: DR,
}


def atom_differential(a: Atom, max_deriv_order: int = DEFAULT_MAX_DERIV_ORDER) -> "DForm":
    """d(atom) as a one-form."""
    if a in _JET_DIFFERENTIALS:
        return DForm.one_form({_JET_DIFFERENTIALS[a]: Expr.one()})
    if algebra.is_group_atom(a):
        return DForm.one_form({DA[a.major - 1]: Expr.one()})
    if algebra.is_coef_atom(a):
        if a.minor + 1 > max_deriv_order:
            raise DerivOrderOverflow(
                f"derivative of {a.name} exceeds maximum order {max_deriv_order}"
            )
        return DForm.one_form({DX: Expr.atom(algebra.coef(a.major, a.minor + 1))})
    if a == algebra.FUNC:
        return DForm.one_form(
            {i: Expr.atom(fp) for i, fp in enumerate(algebra.FUNC_PARTIALS)}
        )
    # formal partials F_v are treated as free coefficients
    return DForm.zero(1)


def _merge_indices(left: tuple, right: tuple):
    """Merge two strictly increasing index tuples; returns (sign, merged)
    or None on a repeated index."""
    sign = 1
    out = []
    i = j = 0
    while i < len(left) and j < len(right):
        a, b = left[i], right[j]
        if a == b:
            return None
        if a < b:
            out.append(a)
            i += 1
        else:
            # b jumps over the remaining entries of left
            if (len(left) - i) % 2:
                sign = -sign
            out.append(b)
            j += 1
    out.extend(left[i:])
    out.extend(right[j:])
    return sign, tuple(out)


class DForm:
    """Graded exterior form with Expr coefficients."""

    __slots__ = ("degree", "comps")

    def __init__(self, degree: int, comps: dict):
        self.degree = degree
        self.comps = comps

    @staticmethod
    def _make(degree: int, acc: dict) -> "DForm":
        return DForm(degree, {k: v for k, v in acc.items() if not v.is_zero()})

    @staticmethod
    def zero(degree: int = 0) -> "DForm":
        return DForm(degree, {})

    @staticmethod
    def scalar(e: Expr) -> "DForm":
        return DForm._make(0, {(): e})

    @staticmethod
    def one_form(comps: Mapping[int, Expr]) -> "DForm":
        return DForm._make(1, {(i,): c for i, c in comps.items()})

    def is_zero(self) -> bool:
        return not self.comps

    def component(self, *indices: int) -> Expr:
        return self.comps.get(tuple(indices), Expr.zero())

    def __add__(self, other: "DForm") -> "DForm":
        if self.degree != other.degree and not (self.is_zero() or other.is_zero()):
            raise ValueError("degree mismatch in form addition")
        acc = dict(self.comps)
        for k, v in other.comps.items():
            acc[k] = acc.get(k, Expr.zero()) + v
        return DForm._make(max(self.degree, other.degree), acc)

    def __neg__(self) -> "DForm":
        return DForm(self.degree, {k: -v for k, v in self.comps.items()})

    def __sub__(self, other: "DForm") -> "DForm":
        return self + (-other)

    def scale(self, e: Expr) -> "DForm":
        acc = {k: e * v for k, v in self.comps.items()}
        return DForm._make(self.degree, acc)

    def wedge(self, other: "DForm") -> "DForm":
        deg = self.degree + other.degree
        if deg > N_BASIS:
            return DForm.zero(deg)
        acc: dict = {}
        for ia, ca in self.comps.items():
            for ib, cb in other.comps.items():
                merged = _merge_indices(ia, ib)
                if merged is None:
                    continue
                sign, key = merged
                contrib = ca * cb
                if sign < 0:
                    contrib = -contrib
                acc[key] = acc.get(key, Expr.zero()) + contrib
        return DForm._make(deg, acc)

    def d(self, max_deriv_order: int = DEFAULT_MAX_DERIV_ORDER) -> "DForm":
        """Exterior derivative through the atom differential table."""
        acc: dict = {}
        for idx, c in self.comps.items():
            for atom in sorted(c.atoms()):
                dc = algebra.partial_derivative(c, atom)
                da = atom_differential(atom, max_deriv_order)
                for (j,), w in da.comps.items():
                    merged = _merge_indices((j,), idx)
                    if merged is None:
                        continue
                    sign, key = merged
                    contrib = dc * w
                    if sign < 0:
                        contrib = -contrib
                    acc[key] = acc.get(key, Expr.zero()) + contrib
        return DForm._make(self.degree + 1, acc)

    def substitute(self, bindings: Mapping[Atom, Expr]) -> "DForm":
        acc = {k: algebra.substitute(v, bindings) for k, v in self.comps.items()}
        return DForm._make(self.degree, acc)

    def atoms(self) -> set:
        out: set = set()
        for c in self.comps.values():
            out |= c.atoms()
        return out

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DForm)
            and self.degree == other.degree
            and self.comps == other.comps
        )

    def __hash__(self):
        return hash((self.degree, tuple(sorted(self.comps.items()))))

    def render(self) -> str:
        if not self.comps:
            return "0"
        parts = []
        for idx in sorted(self.comps):
            label = "∧".join(BASIS_NAMES[i] for i in idx) if idx else "1"
            parts.append(f"({self.comps[idx].render()})·{label}" if idx else self.comps[idx].render())
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"DForm<{self.degree}>({self.render()})"


class Coframe:
    """An ordered, invertible set of one-forms over some basis columns."""

    def __init__(self, forms: Iterable[DForm], labels: Iterable[str]):
        self.forms = tuple(forms)
        self.labels = tuple(labels)
        if len(self.forms) != len(self.labels):
            raise ValueError("labels do not match forms")
        for f in self.forms:
            if f.degree != 1:
                raise ValueError("coframe entries must be one-forms")
        self._inverse = None

    def columns(self) -> tuple:
        cols: set = set()
        for f in self.forms:
            cols |= {i[0] for i in f.comps}
        return tuple(sorted(cols))

    def matrix(self) -> list:
        cols = self.columns()
        return [[f.component(c) for c in cols] for f in self.forms]

    def inverse(self) -> dict:
        """dict col -> {row -> Expr}: basis one-form `col` as a combination
        of this coframe's entries."""
        if self._inverse is not None:
            return self._inverse
        cols = self.columns()
        n = len(self.forms)
        if len(cols) != n:
            raise SingularCoframe(
                f"{n} forms span {len(cols)} coordinate directions"
            )
        remaining_rows = set(range(n))
        remaining_cols = set(cols)
        solved: dict = {}
        while remaining_rows:
            pick = None
            for rw in sorted(remaining_rows):
                live = [c for c in remaining_cols if (c,) in self.forms[rw].comps]
                if len(live) == 1:
                    pick = (rw, live[0])
                    break
                if not live:
                    raise SingularCoframe(f"row {self.labels[rw]} became dependent")
            if pick is None:
                raise NonTriangularCoframe(
                    "no row with a single surviving column; coframe is not "
                    "triangular under any row/column order"
                )
            rw, cl = pick
            pivot = self.forms[rw].component(cl)
            if len(pivot.terms) != 1:
                raise NonTriangularCoframe(
                    f"pivot for {BASIS_NAMES[cl]} in {self.labels[rw]} is not a single term"
                )
            # basis_cl = (theta_rw - sum over already-solved columns) / pivot
            combo = {rw: Expr.one()}
            for c2 in cols:
                if c2 == cl or c2 in remaining_cols:
                    continue
                coeff = self.forms[rw].component(c2)
                if coeff.is_zero():
                    continue
                for r2, e2 in solved[c2].items():
                    combo[r2] = combo.get(r2, Expr.zero()) - coeff * e2
            solved[cl] = {
                r: algebra.div_by_term(e, pivot)
                for r, e in combo.items()
                if not e.is_zero()
            }
            remaining_rows.discard(rw)
            remaining_cols.discard(cl)
        self._inverse = solved
        return solved

    def express(self, form: DForm) -> dict:
        """Coefficients of a 1- or 2-form over this coframe (and its wedges).

        Degree 1 returns {row: Expr}; degree 2 returns {(row_i, row_j): Expr}
        with row_i < row_j.
        """
        inv = self.inverse()
        acc: dict = {}
        if form.degree == 1:
            for (j,), c in form.comps.items():
                if j not in inv:
                    raise SingularCoframe(f"form has a {BASIS_NAMES[j]} component outside the coframe span")
                for r, e in inv[j].items():
                    acc[r] = acc.get(r, Expr.zero()) + c * e
            return {k: v for k, v in acc.items() if not v.is_zero()}
        if form.degree == 2:
            for (j, k), c in form.comps.items():
                if j not in inv or k not in inv:
                    raise SingularCoframe("form component outside the coframe span")
                for r1, e1 in inv[j].items():
                    for r2, e2 in inv[k].items():
                        if r1 == r2:
                            continue
                        contrib = c * e1 * e2
                        key = (r1, r2) if r1 < r2 else (r2, r1)
                        if r1 > r2:
                            contrib = -contrib
                        acc[key] = acc.get(key, Expr.zero()) + contrib
            return {k: v for k, v in acc.items() if not v.is_zero()}
        raise ValueError("express supports degree 1 and 2 only")

    def reconstruct(self, coeffs: Mapping, degree: int) -> DForm:
        """Rebuild the form from express() output (round-trip check)."""
        out = DForm.zero(degree)
        if degree == 1:
            for r, e in coeffs.items():
                out = out + self.forms[r].scale(e)
            return out
        for (r1, r2), e in coeffs.items():
            out = out + self.forms[r1].wedge(self.forms[r2]).scale(e)
        return out

    def dual_derivatives(self, scalar: Expr) -> list:
        """Coframe derivatives of a scalar: dF = sum_j (dF/dtheta_j) theta_j."""
        coeffs = self.express(DForm.scalar(scalar).d())
        return [coeffs.get(r, Expr.zero()) for r in range(len(self.forms))]
