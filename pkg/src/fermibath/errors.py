"""Exception hierarchy.

Validation problems (bad parameters, mismatched inputs) derive from
:class:`ValidationError`; numerical obstructions discovered while computing
derive from :class:`NumericalError`.  The CLI maps the two families onto
exit codes 1 and 2.
"""


class FermibathError(Exception):
    """Base class for all package errors."""


class ValidationError(FermibathError, ValueError):
    """Invalid parameters or inputs, detected before computing."""


class NumericalError(FermibathError, ArithmeticError):
    """A computation hit a numerical obstruction."""


class SizeLimit(ValidationError):
    pass


class GridMismatch(ValidationError):
    pass


class EmptyTrace(ValidationError):
    pass


class NonHermitian(NumericalError):
    pass


class SingularIntermediate(NumericalError):
    """|x(t_m)| is below the singularity tolerance; the pseudo-inverse is undefined."""

    def __init__(self, x_m, tol_sing):
        super().__init__(f"|x(t_m)| = {abs(x_m):.3e} <= tol_sing = {tol_sing:.1e}")
        self.x_m = x_m
        self.tol_sing = tol_sing


class NoRevival(NumericalError):
    pass


class NoOnset(NumericalError):
    pass


class ParityAmbiguity(NumericalError):
    pass


class InsufficientPoints(NumericalError):
    pass


class NonNegativeEta(NumericalError):
    pass
