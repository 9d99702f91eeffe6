"""Exception hierarchy.  Each class carries the CLI exit code it maps to."""


class ContextaError(Exception):
    exit_code = 1


class InputError(ContextaError, ValueError):
    """Malformed or inconsistent input (shapes, file contents, names)."""

    exit_code = 2


class DomainError(ContextaError, ValueError):
    """Input is well formed but outside the operation's domain."""

    exit_code = 2


class CapacityError(ContextaError):
    """An enumeration or matrix size guard was exceeded."""

    exit_code = 3


class NumericalIntegrityError(ContextaError, ArithmeticError):
    exit_code = 4


class InputPrecisionError(NumericalIntegrityError):
    """A float could not be snapped to a small-denominator rational."""


class FormulaInterpretationError(NumericalIntegrityError):
    """A closed-form count evaluated to a non-integer."""


class IncompatibleModelError(DomainError):
    """Marginals of an empirical model disagree, so no global preimage exists."""
