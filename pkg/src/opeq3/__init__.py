"""Exact Cartan-reduction engine and equivalence toolkit for third-order
linear differential operators on the line."""

from .algebra import Atom, Expr
from .forms import Coframe, DForm
from .jet import (
    ABSTRACT,
    FiberTransformation,
    JetPoint,
    Mode,
    Operator,
    base_coframe,
    contact_ideal,
    prolong,
    transform_operator,
)
from .cartan import ReductionResult, run_reduction

__all__ = [
    "ABSTRACT",
    "Atom",
    "Coframe",
    "DForm",
    "Expr",
    "FiberTransformation",
    "JetPoint",
    "Mode",
    "Operator",
    "ReductionResult",
    "base_coframe",
    "contact_ideal",
    "prolong",
    "run_reduction",
    "transform_operator",
]
