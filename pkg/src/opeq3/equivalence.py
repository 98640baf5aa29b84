"""Equivalence toolkit over concrete operators: invariant signatures,
a sampled necessary-condition test, exact certificate checking, and a
generator of equivalent pairs for testing.

The signature of an operator is the pair of fundamental invariants plus
their first coframe x-derivatives, evaluated on a deterministic grid over
the validated chamber (u > 0, f3 > 0).  Two equivalent operators trace
the same signature locus, so a sampled locus-inclusion test gives a sound
necessary condition: Incompatible means provably different, Compatible
means nothing more than "not separated at this tolerance".  Cloud
matching refines adaptively: a tuple of one cloud with no close neighbor
in the other triggers a damped Gauss-Newton search for a preimage on the
other operator's (enlarged) chamber box, which is the adaptive
densification step.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Optional

from . import algebra, cartan, jet
from .algebra import Expr
from .errors import DegenerateOperator, IrrationalCoefficient, PoleAtPoint
from .jet import (
    FiberTransformation,
    JetPoint,
    Mode,
    Operator,
    prolong,
    transform_operator,
)
from .rational import Poly, RatFunc


@dataclass(frozen=True)
class GridConfig:
    """Deterministic rational grid over a chamber box; poles are dodged by
    nudging the x coordinate."""

    x_range: tuple = (Fraction(0), Fraction(1))
    u_range: tuple = (Fraction(1), Fraction(2))
    p_range: tuple = (Fraction(-1), Fraction(1))
    q_range: tuple = (Fraction(-1), Fraction(1))
    r_range: tuple = (Fraction(-1), Fraction(1))
    counts: tuple = (5, 5, 5, 5, 5)
    nudge_tries: int = 12

    def axis(self, i: int) -> list:
        lo, hi = (self.x_range, self.u_range, self.p_range, self.q_range, self.r_range)[i]
        n = self.counts[i]
        if n == 1:
            return [(lo + hi) / 2]
        step = (hi - lo) / (n - 1)
        return [lo + k * step for k in range(n)]

    def box(self, expand: float = 1.0) -> list:
        """Float (lo, hi) per coordinate, optionally widened about the center;
        u stays positive."""
        out = []
        for i, (lo, hi) in enumerate(
            (self.x_range, self.u_range, self.p_range, self.q_range, self.r_range)
        ):
            lo, hi = float(lo), float(hi)
            c, h = (lo + hi) / 2, (hi - lo) / 2 * expand
            lo2, hi2 = c - h, c + h
            if i == 1:
                lo2 = max(lo2, 1e-3)
            out.append((lo2, hi2))
        return out

    def search_box(self) -> list:
        """Clipping region for the adaptive preimage search.  Sized so that
        the documented generate_equivalent_pair family (affine maps with
        slope in [1/3, 3] and bounded low-degree phi) keeps all preimages of
        this grid inside: third-jet coordinates pick up at most a slope^3
        factor plus bounded phi-derivative terms."""
        xw = max(float(self.x_range[1] - self.x_range[0]), 1.0)
        x_lo, x_hi = float(self.x_range[0]) - 5 * xw, float(self.x_range[1]) + 5 * xw
        u_hi = max(64.0, 8 * float(self.u_range[1]))
        spread = max(
            1024.0,
            *(64 * max(abs(float(lo)), abs(float(hi)))
              for lo, hi in (self.p_range, self.q_range, self.r_range)),
        )
        return [(x_lo, x_hi), (1e-3, u_hi),
                (-spread, spread), (-spread, spread), (-spread, spread)]


DEFAULT_GRID = GridConfig()
#: a second, independent grid for stability checks
ALTERNATE_GRID = GridConfig(
    x_range=(Fraction(1, 10), Fraction(9, 10)),
    u_range=(Fraction(5, 4), Fraction(9, 4)),
    p_range=(Fraction(-3, 4), Fraction(5, 4)),
    q_range=(Fraction(-5, 4), Fraction(3, 4)),
    r_range=(Fraction(-1, 2), Fraction(3, 2)),
    counts=(4, 4, 4, 4, 4),
)


def signature_exprs(mode: Mode) -> tuple:
    """(I1, I2, dI1/dtheta1, dI2/dtheta1) from the cached reduction."""
    rr = cartan.run_reduction(Mode(mode))
    return (
        rr.invariants["I1"],
        rr.invariants["I2"],
        rr.invariant_derivatives["I1"][0],
        rr.invariant_derivatives["I2"][0],
    )


def _coef_atoms(exprs) -> list:
    out = set()
    for e in exprs:
        out |= {a for a in e.atoms() if algebra.is_coef_atom(a)}
    return sorted(out)


def make_evaluator(exprs, op: Operator) -> Callable:
    """Compile exprs into a float evaluator (x, u, p, q, r) -> tuple."""
    coef_atoms = _coef_atoms(exprs)
    derivs = {a: jet._coeff_derivative(op, a.major, a.minor) for a in coef_atoms}

    def evaluate(x: float, u: float, p: float, q: float, r: float) -> tuple:
        env = {algebra.X: x, algebra.U: u, algebra.P: p, algebra.Q: q, algebra.R: r}
        for a, rf in derivs.items():
            env[a] = rf.evaluate_float(x)
        return tuple(algebra.evaluate_float(e, env) for e in exprs)

    return evaluate


def _usable_x(op: Operator, x: Fraction, cfg: GridConfig) -> Fraction:
    """Nudge x off poles and out of the f3 <= 0 region."""
    width = cfg.x_range[1] - cfg.x_range[0]
    nudge = width / 997 if width else Fraction(1, 997)
    for k in range(cfg.nudge_tries):
        cand = x + k * nudge
        try:
            ok = all(op.f(i).den.evaluate(cand) != 0 for i in range(4))
            if ok and op.f(3).evaluate(cand) > 0:
                return cand
        except PoleAtPoint:
            pass
    raise DegenerateOperator(f"no usable chamber point near x = {x}")


@dataclass(frozen=True)
class InvariantSignature:
    mode: Mode
    operator: Operator
    exprs: dict  # name -> Expr, f-atoms substituted where the coefficients allow
    cloud: tuple  # sorted tuples (I1, I2, dI1/dth1, dI2/dth1)
    grid: GridConfig


def substitute_operator(e: Expr, op: Operator) -> Expr:
    """Substitute concrete coefficients into an invariant where the result
    stays in the ring: the coefficient must be a monomial in x, and any
    fractional power of it must keep rational coefficients.  Anything else
    stays symbolic (numeric evaluation binds it later regardless)."""
    for a in sorted(e.atoms()):
        if not algebra.is_coef_atom(a):
            continue
        rf = jet._coeff_derivative(op, a.major, a.minor)
        if rf.den.degree() != 0:
            continue
        nonzero = [(i, c) for i, c in enumerate(rf.num.coeffs) if c != 0]
        if not nonzero:
            binding = Expr.zero()
        elif len(nonzero) == 1:
            i, c = nonzero[0]
            binding = Expr.monomial(c / rf.den.coeffs[0], {algebra.X: i})
        else:
            continue
        try:
            e = algebra.substitute(e, {a: binding})
        except IrrationalCoefficient:
            continue
    return e


def invariant_signature(op: Operator, mode: Mode, grid: GridConfig = DEFAULT_GRID,
                        include_gauge_identity: bool = False) -> InvariantSignature:
    """Symbolic invariants (substituted as far as the coefficients allow)
    plus the sampled signature cloud on the grid."""
    mode = Mode(mode)
    if op.is_abstract:
        raise ValueError("invariant_signature needs a concrete operator")
    rr = cartan.run_reduction(mode)
    named = dict(rr.invariants)
    if mode == Mode.GAUGE and include_gauge_identity:
        named["I"] = jet.invariant_scalar(mode)
    exprs = {name: substitute_operator(v, op) for name, v in named.items()}
    sig = signature_exprs(mode)
    evaluate = make_evaluator(sig, op)
    cloud = []
    for x in grid.axis(0):
        x = _usable_x(op, x, grid)
        fx = float(x)
        for u in grid.axis(1):
            for p in grid.axis(2):
                for q in grid.axis(3):
                    for r in grid.axis(4):
                        cloud.append(evaluate(fx, float(u), float(p), float(q), float(r)))
    return InvariantSignature(mode, op, exprs, tuple(sorted(cloud)), grid)


# -- sampled necessary test ------------------------------------------------------

def _solve_dense(a: list, b: list) -> list:
    """Small dense float solve with partial pivoting."""
    n = len(b)
    m = [row[:] + [b[i]] for i, row in enumerate(a)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(m[r][col]))
        if abs(m[piv][col]) < 1e-300:
            raise ZeroDivisionError("singular system")
        m[col], m[piv] = m[piv], m[col]
        for r in range(col + 1, n):
            f = m[r][col] / m[col][col]
            for c in range(col, n + 1):
                m[r][c] -= f * m[col][c]
    out = [0.0] * n
    for r in range(n - 1, -1, -1):
        s = m[r][n] - sum(m[r][c] * out[c] for c in range(r + 1, n))
        out[r] = s / m[r][r]
    return out


def _sup(vec) -> float:
    return max(abs(v) for v in vec)


def _guarded(evaluate: Callable) -> Callable:
    def inner(*z):
        try:
            return evaluate(*z)
        except (ZeroDivisionError, OverflowError, PoleAtPoint):
            return None
    return inner


def _refine(raw_evaluate: Callable, z0: list, target: tuple, tol: float, box: list,
            max_iter: int = 80) -> float:
    """Damped Gauss-Newton search for a point whose signature hits target;
    returns the best sup-norm residual found."""
    evaluate = _guarded(raw_evaluate)

    def clip(z):
        return [min(max(z[i], box[i][0]), box[i][1]) for i in range(5)]

    z = clip(z0)
    fz = evaluate(*z)
    if fz is None:
        return float("inf")
    best = _sup([a - b for a, b in zip(fz, target)])
    damp = 1e-6  # relative to the normal-matrix scale
    for _ in range(max_iter):
        if best <= tol:
            return best
        resid = [a - b for a, b in zip(fz, target)]
        jac = []  # stored column-wise: jac[j][i] = d f_i / d z_j
        for j in range(5):
            h = 1e-6 * max(1.0, abs(z[j]))
            zh = z[:]
            zh[j] += h
            zh = clip(zh)
            dh = zh[j] - z[j]
            if dh == 0.0:
                zh[j] -= 2 * h
                dh = zh[j] - z[j]
            fh = evaluate(*zh)
            if fh is None:
                return best
            jac.append([(fh[i] - fz[i]) / dh for i in range(4)])
        # minimum-norm Levenberg step: -J^T (J J^T + lam I)^{-1} resid
        jjt = [[sum(jac[c][i] * jac[c][k] for c in range(5)) for k in range(4)]
               for i in range(4)]
        scale = max(sum(jjt[i][i] for i in range(4)) / 4.0, 1e-30)
        improved = False
        for _ in range(24):
            lam = damp * scale
            try:
                lhs = [[jjt[i][k] + (lam if i == k else 0.0) for k in range(4)]
                       for i in range(4)]
                w = _solve_dense(lhs, resid)
            except ZeroDivisionError:
                damp *= 10
                continue
            step = [-sum(jac[j][i] * w[i] for i in range(4)) for j in range(5)]
            z_new = clip([z[j] + step[j] for j in range(5)])
            f_new = evaluate(*z_new)
            if f_new is None:
                damp *= 10
                continue
            r_new = _sup([a - b for a, b in zip(f_new, target)])
            if r_new < best:
                z, fz, best = z_new, f_new, r_new
                damp = max(damp / 10, 1e-9)
                improved = True
                break
            damp *= 10
        if not improved:
            break
    return best


@dataclass(frozen=True)
class Verdict:
    compatible: bool
    mode: Mode
    tolerance: float
    witness: Optional[tuple] = None
    witness_residual: Optional[float] = None
    details: dict = field(default_factory=dict)

    def report(self) -> dict:
        out = {
            "verdict": "Compatible" if self.compatible else "Incompatible",
            "mode": self.mode.value,
            "tolerance": self.tolerance,
            "note": "Compatible is a necessary condition only, not a proof of equivalence",
        }
        out.update(self.details)
        if self.witness is not None:
            out["witness_tuple"] = list(self.witness)
            out["witness_residual"] = self.witness_residual
        return out


# Which signature component is linear in which jet coordinate, per mode:
# three coordinates are solved exactly in sequence, the leftover component
# is the consistency function of the remaining (x, u) parameters.
_SOLVE_PLAN = {
    Mode.DIRECT: ((2, 0), (3, 1), (4, 3)),  # p from I1, q from I2, r from dI2/dth1
    Mode.GAUGE: ((2, 1), (3, 0), (4, 2)),  # p from I2, q from I1, r from dI1/dth1
}
_CONSISTENCY = {Mode.DIRECT: 2, Mode.GAUGE: 3}


def _structured_probe(evaluate: Callable, mode: Mode, x: float, u: float, y: tuple):
    """Solve the three linearly-entering coordinates exactly; return the
    signed consistency residual, or None off the usable domain."""
    z = [x, u, 0.0, 0.0, 0.0]
    for coord, comp in _SOLVE_PLAN[mode]:
        z[coord] = 0.0
        f0 = evaluate(*z)
        z[coord] = 1.0
        f1 = evaluate(*z)
        if f0 is None or f1 is None:
            return None
        slope = f1[comp] - f0[comp]
        if abs(slope) < 1e-14:
            return None
        z[coord] = (y[comp] - f0[comp]) / slope
        if abs(z[coord]) > 1e8:
            return None
    full = evaluate(*z)
    if full is None:
        return None
    solved_resid = max(
        abs(full[comp] - y[comp]) for _, comp in _SOLVE_PLAN[mode]
    )
    if solved_resid > 1e-6 * max(1.0, _sup(y)):
        return None
    comp = _CONSISTENCY[mode]
    return full[comp] - y[comp]


def _scan_and_bisect(probe: Callable, samples: list, tol: float) -> float:
    """Best |probe| over samples, bisecting every sign change."""
    best = float("inf")
    prev_s, prev_g = None, None
    for s in samples:
        g = probe(s)
        if g is not None:
            best = min(best, abs(g))
            if best <= tol:
                return best
            if prev_g is not None and (g < 0) != (prev_g < 0):
                lo, glo, hi = prev_s, prev_g, s
                for _ in range(80):
                    mid = 0.5 * (lo + hi)
                    gm = probe(mid)
                    if gm is None:
                        break
                    best = min(best, abs(gm))
                    if best <= tol:
                        return best
                    if (gm < 0) == (glo < 0):
                        lo, glo = mid, gm
                    else:
                        hi = mid
        prev_s, prev_g = s, g
    return best


def _structured_match(evaluate: Callable, mode: Mode, y: tuple, tol: float,
                      box: list) -> float:
    """Scan (x, u), solving the other coordinates exactly and bisecting the
    one remaining consistency equation.  The solution locus is a curve in
    the (x, u) plane and can run parallel to either axis (for gauge
    signatures it is exactly u-parallel), so both scan directions are
    tried.  Returns the best residual found."""
    guarded = _guarded(evaluate)
    x_lo, x_hi = box[0]
    xs_coarse = [x_lo + (x_hi - x_lo) * k / 12 for k in range(13)]
    xs_fine = [x_lo + (x_hi - x_lo) * k / 48 for k in range(49)]
    us_fine = [2.0 ** (k / 2) / 8.0 for k in range(0, 19)]  # 0.125 .. 64
    us_coarse = [0.25, 0.5, 1.0, 1.5, 2.0, 4.0, 16.0]
    best = float("inf")
    for x in xs_coarse:
        best = min(best, _scan_and_bisect(
            lambda u, x=x: _structured_probe(guarded, mode, x, u, y), us_fine, tol))
        if best <= tol:
            return best
    for u in us_coarse:
        best = min(best, _scan_and_bisect(
            lambda x, u=u: _structured_probe(guarded, mode, x, u, y), xs_fine, tol))
        if best <= tol:
            return best
    return best


def _half_check(sig_from: InvariantSignature, op_to: Operator, mode: Mode,
                tol: float, samples: int, seed: int, grid_to: GridConfig) -> tuple:
    """Each sampled tuple of sig_from must be attainable by op_to."""
    rng = random.Random(seed)
    cloud = list(sig_from.cloud)
    picks = cloud if len(cloud) <= samples else rng.sample(cloud, samples)
    sig = signature_exprs(mode)
    evaluate = make_evaluator(sig, op_to)
    nodes = _grid_nodes(op_to, grid_to)
    values = [evaluate(*z) for z in nodes]
    box = grid_to.search_box()
    worst = 0.0
    for y in picks:
        nearest = sorted(
            range(len(nodes)),
            key=lambda i: _sup([a - b for a, b in zip(values[i], y)]),
        )[:3]
        best = _sup([a - b for a, b in zip(values[nearest[0]], y)])
        for i in nearest:
            if best <= tol:
                break
            best = min(best, _refine(evaluate, list(nodes[i]), y, tol, box))
        if best > tol:
            best = min(best, _structured_match(evaluate, mode, y, tol, box))
        worst = max(worst, best)
        if best > tol:
            return False, y, best
    return True, None, worst


def _grid_nodes(op: Operator, grid: GridConfig) -> list:
    nodes = []
    for x in grid.axis(0):
        x = _usable_x(op, x, grid)
        for u in grid.axis(1):
            for p in grid.axis(2):
                for q in grid.axis(3):
                    for r in grid.axis(4):
                        nodes.append((float(x), float(u), float(p), float(q), float(r)))
    return nodes


def check_necessary(op1: Operator, op2: Operator, mode: Mode, tolerance: float = 1e-6,
                    grid1: GridConfig = DEFAULT_GRID, grid2: GridConfig = None,
                    samples: int = 96, seed: int = 0) -> Verdict:
    """Symmetric sampled inclusion test of the two signature clouds."""
    mode = Mode(mode)
    grid2 = grid2 if grid2 is not None else grid1
    sig1 = invariant_signature(op1, mode, grid1)
    sig2 = invariant_signature(op2, mode, grid2)
    ok12, witness, resid = _half_check(sig1, op2, mode, tolerance, samples, seed, grid2)
    if not ok12:
        return Verdict(False, mode, tolerance, witness, resid,
                       {"direction": "first cloud not matched by second operator"})
    ok21, witness, resid = _half_check(sig2, op1, mode, tolerance, samples, seed + 1, grid1)
    if not ok21:
        return Verdict(False, mode, tolerance, witness, resid,
                       {"direction": "second cloud not matched by first operator"})
    return Verdict(True, mode, tolerance, details={"max_unmatched_residual": resid})


# -- exact certificate checking ---------------------------------------------------

def sample_chamber_points(op: Operator, n: int, seed: int = 0,
                          grid: GridConfig = DEFAULT_GRID) -> list:
    """Deterministic random rational points on the validated chamber."""
    rng = random.Random(seed)
    den = 64
    pts = []
    guard = 0
    while len(pts) < n:
        guard += 1
        if guard > 100 * n:
            raise DegenerateOperator("could not sample enough chamber points")
        coords = []
        for lo, hi in (grid.x_range, grid.u_range, grid.p_range, grid.q_range, grid.r_range):
            coords.append(Fraction(rng.randint(int(lo * den), int(hi * den)), den))
        pt = JetPoint.make(*coords)
        if pt.on_chamber(op):
            pts.append(pt)
    return pts


def _float_env(pt: JetPoint, op: Operator, atoms) -> dict:
    env = {algebra.X: float(pt.x), algebra.U: float(pt.u), algebra.P: float(pt.p),
           algebra.Q: float(pt.q), algebra.R: float(pt.r)}
    for a in atoms:
        if algebra.is_coef_atom(a):
            env[a] = jet._coeff_derivative(op, a.major, a.minor).evaluate_float(float(pt.x))
    return env


def _numeric_coframe_rows(coframe, pt: JetPoint, op: Operator) -> list:
    """Each form as a float row over (dx, du, dp, dq, dr)."""
    rows = []
    for f in coframe.forms:
        env = _float_env(pt, op, f.atoms())
        row = [0.0] * 5
        for (j,), c in f.comps.items():
            row[j] = algebra.evaluate_float(c, env)
        rows.append(row)
    return rows


# zero pattern of the structure group matrix (g[i][j] must vanish)
_G_ZEROS = [(0, 1), (0, 2), (0, 3), (0, 4),
            (1, 0), (1, 2), (1, 3), (1, 4),
            (2, 0), (2, 3), (2, 4),
            (3, 0), (3, 4),
            (4, 0), (4, 1), (4, 2), (4, 3)]
_G_ONES = [(1, 1), (4, 4)]


def verify_candidate(op1: Operator, op2: Operator, t: FiberTransformation, mode: Mode,
                     points: int = 8, tolerance: float = 1e-9, seed: int = 3):
    """Exact certificate check: transform_operator(op1, t, mode) == op2
    coefficient-wise, plus a numeric check that the pulled-back base coframe
    lies in the structure-group orbit of the source coframe.

    Returns (bool, report dict)."""
    mode = Mode(mode)
    transformed = transform_operator(op1, t, mode)
    deltas = {}
    for i in range(4):
        diff = transformed.f(i) - op2.f(i)
        if not diff.is_zero():
            deltas[f"f{i}"] = diff.render()
    exact = not deltas

    base1 = jet.base_coframe(mode, op1)
    base2 = jet.base_coframe(mode, op2)
    pro = prolong(t)
    worst = 0.0
    try:
        pts = sample_chamber_points(op1, points, seed)
    except DegenerateOperator:
        pts = []
    for pt in pts:
        image = pro.apply(pt)
        jac = [[float(v) for v in row] for row in pro.jacobian_at(pt)]
        rows2 = _numeric_coframe_rows(base2, image, op2)
        pulled = [
            [sum(rows2[i][w] * jac[w][v] for w in range(5)) for v in range(5)]
            for i in range(5)
        ]
        rows1 = _numeric_coframe_rows(base1, pt, op1)
        m = [list(col) for col in zip(*rows1)]  # 5x5, columns = coframe rows
        g = []
        for i in range(5):
            g.append(_solve_dense([row[:] for row in m], pulled[i]))
        scale = max(1.0, max(abs(v) for row in g for v in row))
        for (i, j) in _G_ZEROS:
            worst = max(worst, abs(g[i][j]) / scale)
        for (i, j) in _G_ONES:
            worst = max(worst, abs(g[i][j] - 1.0) / scale)
    orbit_ok = bool(pts) and worst <= tolerance
    report = {
        "exact_match": exact,
        "coefficient_deltas": deltas,
        "orbit_check_points": len(pts),
        "orbit_max_violation": worst,
        "orbit_within_tolerance": orbit_ok,
        "mode": mode.value,
    }
    return exact, report


def generate_equivalent_pair(op: Operator, mode: Mode, seed: int = 0):
    """A documented random family of certified-equivalent pairs: affine
    xi = a x + b with a in [1/3, 3], |b| <= 1/2, and phi a degree <= 2
    polynomial positive on the sample chamber.  seed 0 is the identity."""
    mode = Mode(mode)
    if seed == 0:
        t = FiberTransformation.identity()
        return transform_operator(op, t, mode), t
    rng = random.Random(seed)
    a = Fraction(rng.randint(1, 3), rng.randint(1, 3))
    b = Fraction(rng.randint(-2, 2), 4)
    c0 = Fraction(rng.randint(2, 8), 4)
    c1 = Fraction(rng.randint(0, 3), 4)
    c2 = Fraction(rng.randint(0, 2), 4)
    phi = RatFunc(Poly((c0, c1, c2)))
    t = FiberTransformation.affine(a, b, phi)
    return transform_operator(op, t, mode), t


# -- numeric invariance sweeps (the property-based core) --------------------------

def coframe_pullback_residual(op: Operator, t: FiberTransformation, mode: Mode,
                              points: int = 100, seed: int = 0) -> float:
    """Max relative error between the pullback of the transformed operator's
    final invariant coframe and the original one, over random chamber points."""
    mode = Mode(mode)
    rr = cartan.run_reduction(mode)
    opbar = transform_operator(op, t, mode)
    pro = prolong(t)
    worst = 0.0
    for pt in sample_chamber_points(op, points, seed):
        image = pro.apply(pt)
        if not image.on_chamber(opbar):
            continue
        jac = [[float(v) for v in row] for row in pro.jacobian_at(pt)]
        rows_bar = _numeric_coframe_rows(rr.final_coframe, image, opbar)
        rows_src = _numeric_coframe_rows(rr.final_coframe, pt, op)
        for i in range(5):
            pulled = [sum(rows_bar[i][w] * jac[w][v] for w in range(5)) for v in range(5)]
            for v in range(5):
                err = abs(pulled[v] - rows_src[i][v])
                rel = err / max(1.0, abs(pulled[v]), abs(rows_src[i][v]))
                worst = max(worst, rel)
    return worst


def invariant_equivariance_residual(op: Operator, t: FiberTransformation, mode: Mode,
                                    points: int = 100, seed: int = 0) -> float:
    """Max relative error of invariant equivariance: each fundamental
    invariant at a source point equals its value for the transformed
    operator at the image point."""
    mode = Mode(mode)
    rr = cartan.run_reduction(mode)
    names = sorted(rr.invariants)
    exprs = [rr.invariants[n] for n in names]
    opbar = transform_operator(op, t, mode)
    ev_src = make_evaluator(exprs, op)
    ev_img = make_evaluator(exprs, opbar)
    pro = prolong(t)
    worst = 0.0
    for pt in sample_chamber_points(op, points, seed):
        image = pro.apply(pt)
        if not image.on_chamber(opbar):
            continue
        src = ev_src(*(float(v) for v in pt.coords()))
        img = ev_img(*(float(v) for v in image.coords()))
        for a, b in zip(src, img):
            worst = max(worst, abs(a - b) / max(1.0, abs(a), abs(b)))
    return worst
