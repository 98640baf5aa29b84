"""The equivalence-method engine.

Pipeline (per problem mode): lift the base coframe by the structure group,
compute structure equations and torsion, find the essential (unabsorbable,
non-constant) torsion slots, solve the normalization plan for the group
parameters, substitute, repeat once, and land on an invariant coframe on
the jet space with no group parameters left (an {e}-structure).  The
structure "constants" of that final coframe are the fundamental invariants.

The normalization plan (which torsion slot is set to which constant, and
which parameter it eliminates, in which order) is configuration data: the
branch choices are made by inspection once, not rediscovered at run time.
Normalizations take cube roots, so the whole reduction lives on the
chamber u > 0, f3 > 0; the opposite chamber would flip signs in the
root-taking step and is not implemented.

Everything is exact.  Each structure-equation decomposition is rebuilt and
compared against the actual exterior derivative, term for term, before it
is trusted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Optional

from . import algebra, forms, jet, published
from .algebra import Atom, Expr, Term
from .errors import (
    InconsistentPlan,
    IrrationalCoefficient,
    NonMonomialBase,
    ResidualGroupParameter,
    UnsolvableNormalization,
)
from .forms import Coframe, DForm
from .jet import Mode, Operator, ABSTRACT

_A = algebra.GROUP_ATOMS  # a1..a6, indexed 0..5


def group_matrix() -> list:
    """The 5x5 structure-group matrix acting on the base coframe."""
    one, zero = Expr.one(), Expr.zero()
    a = [Expr.atom(g) for g in _A]
    return [
        [a[0], zero, zero, zero, zero],
        [zero, one, zero, zero, zero],
        [zero, a[1], a[2], zero, zero],
        [zero, a[3], a[4], a[5], zero],
        [zero, zero, zero, zero, one],
    ]


def _invert_lower_triangular(m: list) -> list:
    n = len(m)
    inv = [[Expr.zero()] * n for _ in range(n)]
    for i in range(n):
        inv[i][i] = algebra.div_by_term(Expr.one(), m[i][i])
        for j in range(i - 1, -1, -1):
            acc = Expr.zero()
            for k in range(j, i):
                acc = acc + m[i][k] * inv[k][j]
            inv[i][j] = algebra.div_by_term(-acc, m[i][i])
    return inv


@lru_cache(maxsize=1)
def maurer_cartan_forms() -> tuple:
    """The six right-invariant one-forms dg . g^(-1), read off the group
    matrix at its six free entries."""
    g = group_matrix()
    ginv = _invert_lower_triangular(g)
    n = len(g)
    dgginv = [[DForm.zero(1)] * n for _ in range(n)]
    for i in range(n):
        for l in range(n):
            if g[i][l].is_zero():
                continue
            dg = DForm.scalar(g[i][l]).d()
            for k in range(n):
                if ginv[l][k].is_zero():
                    continue
                dgginv[i][k] = dgginv[i][k] + dg.scale(ginv[l][k])
    labeled = ((0, 0), (2, 1), (2, 2), (3, 1), (3, 2), (3, 3))
    for i in range(n):
        for k in range(n):
            if (i, k) not in labeled and not dgginv[i][k].is_zero():
                raise AssertionError(f"unexpected Maurer-Cartan entry at {(i, k)}")
    return tuple(dgginv[i][k] for i, k in labeled)


@dataclass(frozen=True)
class LiftedCoframe:
    thetas: tuple  # five DForms on J3 x G
    group_atoms: tuple = _A


def lift(base: Coframe) -> LiftedCoframe:
    """theta_i = sum_j g_ij omega_j."""
    g = group_matrix()
    thetas = []
    for row in g:
        th = DForm.zero(1)
        for entry, w in zip(row, base.forms):
            if not entry.is_zero():
                th = th + w.scale(entry)
        thetas.append(th)
    return LiftedCoframe(tuple(thetas))


@dataclass(frozen=True)
class StructureEquations:
    """d theta_i = sum mc_part[(i,k,j)] alpha_k ^ theta_j
                 + sum torsion[(i,j,k)] theta_j ^ theta_k   (1-based indices)."""

    coframe: Coframe
    mc_labels: tuple
    mc_part: dict
    torsion: dict

    def torsion_at(self, i: int, j: int, k: int) -> Expr:
        return self.torsion.get((i, j, k), Expr.zero())

    def partners(self, i: int) -> frozenset:
        """Theta columns reachable by redefining Maurer-Cartan forms in row i."""
        return frozenset(j for (ii, _, j) in self.mc_part if ii == i)


def structure_equations(thetas, mc_forms=(), mc_labels=()) -> StructureEquations:
    """Decompose each d theta over the combined {theta, alpha} coframe and
    split into Maurer-Cartan and torsion parts.  The decomposition is
    verified by exact reconstruction before being returned."""
    thetas = tuple(thetas)
    n = len(thetas)
    labels = tuple(f"theta{i+1}" for i in range(n)) + tuple(mc_labels)
    cof = Coframe(thetas + tuple(mc_forms), labels)
    mc_part: dict = {}
    torsion: dict = {}
    for i, th in enumerate(thetas, start=1):
        dth = th.d()
        coeffs = cof.express(dth)
        if cof.reconstruct(coeffs, 2) != dth:
            raise AssertionError(f"structure equation for theta{i} failed to reconstruct")
        for (r1, r2), c in coeffs.items():
            if r2 < n:
                torsion[(i, r1 + 1, r2 + 1)] = c
            elif r1 < n:
                # c * theta_{r1} ^ alpha_{r2-n}  ==  -c * alpha ^ theta
                mc_part[(i, r2 - n + 1, r1 + 1)] = -c
            else:
                raise AssertionError(
                    f"d theta{i} has an alpha^alpha component at {(r1, r2)}"
                )
    return StructureEquations(cof, tuple(mc_labels), mc_part, torsion)


def essential_torsion(se: StructureEquations) -> set:
    """Torsion slots that no Maurer-Cartan redefinition can touch and that
    still carry non-constant coefficients (the normalization candidates)."""
    out = set()
    for (i, j, k), c in se.torsion.items():
        if c.is_constant():
            continue
        partners = se.partners(i)
        if j not in partners and k not in partners:
            out.add((i, j, k))
    return out


@dataclass(frozen=True)
class NormalizationStep:
    slot: tuple  # (i, j, k), 1-based
    target: Fraction
    param: Atom


LOOP1_PLAN = (
    NormalizationStep((2, 1, 2), Fraction(0), _A[1]),  # a2
    NormalizationStep((3, 1, 4), Fraction(1), _A[2]),  # a3
    NormalizationStep((4, 1, 5), Fraction(1), _A[5]),  # a6
    NormalizationStep((2, 1, 3), Fraction(1), _A[0]),  # a1
)
LOOP2_PLAN = (
    NormalizationStep((3, 1, 2), Fraction(0), _A[3]),  # a4
    NormalizationStep((3, 1, 3), Fraction(0), _A[4]),  # a5
)


def _solve_slot(t_expr: Expr, target: Fraction, param: Atom) -> Expr:
    """Solve torsion == target for param.

    Supported shape: param appears in exactly one term, as a power; the
    equation c*mu*param**n + rest == target solves to
    param = ((target - rest)/(c*mu))**(1/n)."""
    carrying = [t for t in t_expr.terms if any(a == param for a, _ in t.powers)]
    if len(carrying) != 1:
        raise UnsolvableNormalization(
            f"{param.name} appears in {len(carrying)} terms of {t_expr}"
        )
    t = carrying[0]
    n = next(e for a, e in t.powers if a == param)
    mu = Expr((Term(t.coeff, tuple(pw for pw in t.powers if pw[0] != param)),))
    rest = t_expr - Expr((t,))
    rhs = Expr.number(target) - rest
    quotient = algebra.div_by_term(rhs, mu)
    if n == 1:
        return quotient
    try:
        return algebra.pow_rational(quotient, Fraction(1) / n)
    except (NonMonomialBase, IrrationalCoefficient) as exc:
        raise UnsolvableNormalization(
            f"cannot take power 1/{n} of {quotient}: {exc}"
        ) from exc


def _chase(e: Expr, solved: Mapping[Atom, Expr]) -> Expr:
    """Substitute solved parameters repeatedly until none remain reachable."""
    for _ in range(len(solved) + 1):
        if not (e.atoms() & set(solved)):
            return e
        e = algebra.substitute(e, solved)
    raise InconsistentPlan("normalization values depend on each other cyclically")


def normalize(se: StructureEquations, plan) -> dict:
    """Solve the plan sequentially (substituting earlier solutions into each
    torsion first), then back-substitute so no value depends on another."""
    essentials = essential_torsion(se)
    solved: dict = {}
    for step in plan:
        if step.slot not in essentials:
            raise UnsolvableNormalization(f"planned slot {step.slot} is not essential")
        if step.param in solved:
            raise InconsistentPlan(f"{step.param.name} solved twice")
        t_expr = _chase(se.torsion_at(*step.slot), solved)
        solved[step.param] = _solve_slot(t_expr, step.target, step.param)
    for a in list(solved):
        solved[a] = _chase(solved[a], {b: v for b, v in solved.items() if b != a})
    return solved


# -- the full reduction -------------------------------------------------------

_INVARIANT_SLOTS = {
    Mode.DIRECT: {"I": ((4, 1, 2), Fraction(-1)), "I2": ((4, 1, 3), Fraction(9)),
                  "I1": ((4, 1, 4), Fraction(1))},
    Mode.GAUGE: {"I1": ((4, 1, 3), Fraction(1)), "I2": ((4, 1, 4), Fraction(1))},
}

_FP = dict(zip("xupqr", algebra.FUNC_PARTIALS))


@dataclass(frozen=True)
class SyzygyCheck:
    invariant: str
    theta_index: int
    recomputed: Expr
    expected: Optional[Expr]
    matches: Optional[bool]


@dataclass(frozen=True)
class SyzygyReport:
    checks: tuple
    d_squared_zero: bool
    derivative_consistency: bool

    def mismatches(self) -> tuple:
        return tuple(c for c in self.checks if c.matches is False)


@dataclass(frozen=True)
class ReductionResult:
    mode: Mode
    base: Coframe
    lifted: LiftedCoframe
    stage1: StructureEquations
    stage2: StructureEquations
    normalizations: dict  # Atom -> Expr, all six parameters
    final_coframe: Coframe
    structure_constants: dict  # (i, j, k) -> Expr
    invariants: dict  # name -> Expr
    invariant_derivatives: dict  # name -> [dInv/dtheta_1 .. dtheta_5]
    derivative_table: tuple  # five rows: dict partial-atom -> Expr
    dhat_scale: Expr
    dhat_R: Expr
    syzygy_report: SyzygyReport

    def structure_constant(self, i: int, j: int, k: int) -> Expr:
        return self.structure_constants.get((i, j, k), Expr.zero())


def coordinate_partials(e: Expr) -> dict:
    """The five jet-coordinate derivatives of a scalar, with the x-slot
    including the chain rule through the f-atoms (read off d(e))."""
    de = DForm.scalar(e).d()
    return {
        _FP[name]: de.component(idx)
        for name, idx in zip("xupqr", range(5))
    }


def apply_derivative_table(rr: ReductionResult, e: Expr) -> list:
    """Coframe derivatives of e via the closed-form operator table."""
    parts = coordinate_partials(e)
    out = []
    for row in rr.derivative_table:
        acc = Expr.zero()
        for v, coeff in row.items():
            acc = acc + coeff * parts[v]
        out.append(acc)
    return out


def _extract_derivative_table(final: Coframe):
    """Closed-form coframe-derivative operators, read off the dual solve of
    the formal function atom, plus the total-derivative decomposition of
    the first row."""
    rows = final.dual_derivatives(Expr.atom(algebra.FUNC))
    table = []
    for row_expr in rows:
        coeffs, rest = algebra.collect_linear(row_expr, algebra.FUNC_PARTIALS)
        if not rest.is_zero():
            raise AssertionError("derivative table row has a non-linear part")
        table.append({v: c for v, c in coeffs.items() if not c.is_zero()})
    first = table[0]
    s = first.get(_FP["x"], Expr.zero())
    for name, velocity in (("u", algebra.P), ("p", algebra.Q), ("q", algebra.R)):
        expected = s * Expr.atom(velocity)
        if first.get(_FP[name], Expr.zero()) != expected:
            raise AssertionError("first derivative row is not a total-derivative multiple")
    big_r = algebra.div_by_term(first.get(_FP["r"], Expr.zero()), s)
    return tuple(table), s, big_r


def verify_syzygies(mode: Mode, invariants: Mapping[str, Expr],
                    derivatives: Mapping[str, list], final: Coframe) -> SyzygyReport:
    """Check the published first-order identities among the invariants
    against the recomputed coframe derivatives, plus d.d = 0 on the final
    coframe and exact reconstruction of each dInv from its derivatives."""
    checks = []
    for name, idx, kind, payload in published.syzygy_expectations(mode):
        recomputed = derivatives[name][idx - 1]
        if kind == "const":
            expected = Expr.number(payload)
        else:
            factor_name, c = payload
            expected = Expr.number(c) * invariants[factor_name]
        checks.append(SyzygyCheck(name, idx, recomputed, expected, recomputed == expected))
    d2_ok = all(th.d().d().is_zero() for th in final.forms)
    consistent = True
    for name, derivs in derivatives.items():
        rebuilt = final.reconstruct(dict(enumerate(derivs)), 1)
        if rebuilt != DForm.scalar(invariants[name]).d():
            consistent = False
    return SyzygyReport(tuple(checks), d2_ok, consistent)


@lru_cache(maxsize=None)
def run_reduction(mode: Mode, op: Operator = ABSTRACT) -> ReductionResult:
    """Run both normalization loops and assemble the {e}-structure data."""
    if not op.is_abstract:
        raise ValueError(
            "run_reduction is symbolic; use equivalence.invariant_signature "
            "for concrete operators"
        )
    mode = Mode(mode)
    base = jet.base_coframe(mode, op)
    lifted = lift(base)

    se1 = structure_equations(lifted.thetas, maurer_cartan_forms(),
                              tuple(f"alpha{k}" for k in range(1, 7)))
    sol1 = normalize(se1, LOOP1_PLAN)

    thetas2 = tuple(th.substitute(sol1) for th in lifted.thetas)
    remaining = (_A[3], _A[4])
    da_forms = tuple(forms.atom_differential(a) for a in remaining)
    se2 = structure_equations(thetas2, da_forms, ("da4", "da5"))
    sol2 = normalize(se2, LOOP2_PLAN)

    final_thetas = tuple(th.substitute(sol2) for th in thetas2)
    leftovers = {a.name for th in final_thetas for a in th.atoms() if algebra.is_group_atom(a)}
    if leftovers:
        raise ResidualGroupParameter(f"group parameters survived: {sorted(leftovers)}")
    final = Coframe(final_thetas, tuple(f"theta{i}" for i in range(1, 6)))

    se3 = structure_equations(final.forms)
    constants = dict(se3.torsion)

    slots = _INVARIANT_SLOTS[mode]
    nonconstant = {key for key, c in constants.items() if not c.is_constant()}
    expected_slots = {slot for slot, _ in slots.values()}
    if nonconstant - expected_slots:
        raise AssertionError(
            f"unexpected non-constant structure coefficients at {sorted(nonconstant - expected_slots)}"
        )
    invariants = {
        name: Expr.number(scale) * constants.get(slot, Expr.zero())
        for name, (slot, scale) in slots.items()
    }
    derivatives = {name: final.dual_derivatives(inv) for name, inv in invariants.items()}

    table, scale, big_r = _extract_derivative_table(final)
    syzygies = verify_syzygies(mode, invariants, derivatives, final)

    normalizations = dict(sol1)
    normalizations.update(sol2)
    return ReductionResult(
        mode=mode,
        base=base,
        lifted=lifted,
        stage1=se1,
        stage2=se2,
        normalizations=normalizations,
        final_coframe=final,
        structure_constants=constants,
        invariants=invariants,
        invariant_derivatives=derivatives,
        derivative_table=table,
        dhat_scale=scale,
        dhat_R=big_r,
        syzygy_report=syzygies,
    )
