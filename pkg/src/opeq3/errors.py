"""Exception hierarchy for the whole engine.

Everything derives from OpeqError so callers (and the CLI) can separate
engine failures from programming errors.
"""


class OpeqError(Exception):
    """Base class for all engine errors."""


# -- exact arithmetic -------------------------------------------------------

class ZeroDivisor(OpeqError):
    pass


class NonMonomialDivisor(OpeqError):
    """Division is only defined by a single nonzero term."""


class NonMonomialBase(OpeqError):
    """Fractional powers are only defined for single terms."""


class IrrationalCoefficient(OpeqError):
    """A coefficient root fell outside the rationals (e.g. 2**(1/3))."""


class UnboundAtom(OpeqError):
    """Numeric evaluation hit an atom with no value supplied."""


class EvenRootOfNegative(OpeqError):
    pass


# -- exterior calculus ------------------------------------------------------

class DerivOrderOverflow(OpeqError):
    """A coefficient derivative exceeded the configured maximum order."""


class NonTriangularCoframe(OpeqError):
    """Coframe inversion needed a multi-term pivot (unsupported ring op)."""


class SingularCoframe(OpeqError):
    pass


# -- jet space / operators --------------------------------------------------

class DegenerateOperator(OpeqError):
    """Leading coefficient vanishes identically."""


class SingularAtPoint(OpeqError):
    """Transformation not regular at an evaluation point."""


class NonInvertibleTransformation(OpeqError):
    pass


class PoleAtPoint(OpeqError):
    """A rational coefficient has a pole at the requested point."""


# -- reduction --------------------------------------------------------------

class UnsolvableNormalization(OpeqError):
    """Planned torsion slot is not of the supported solvable shape."""


class InconsistentPlan(OpeqError):
    pass


class ResidualGroupParameter(OpeqError):
    """A group parameter survived the reduction (no {e}-structure)."""


# -- text formats -----------------------------------------------------------

class ParseError(OpeqError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
