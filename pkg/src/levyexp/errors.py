"""Exception hierarchy shared by all modules.

Every error raised deliberately by the library derives from
:class:`LevyExpError`, so callers (and the CLI) can map them onto exit codes.
"""


class LevyExpError(Exception):
    """Base class for library errors."""


class ValidationError(LevyExpError, ValueError):
    """Invalid parameters or arguments (admissibility, domain, grid syntax)."""


class AdmissibilityError(ValidationError):
    """Parameters fall outside the admissible set."""


class DomainError(ValidationError):
    """Argument outside the domain of a closed-form formula."""


class PoleError(LevyExpError, ArithmeticError):
    """Evaluation requested at (or numerically too close to) a pole or zero."""


class NumericalError(LevyExpError, ArithmeticError):
    """A numerical procedure failed to reach its accuracy target."""


class ConvergenceError(NumericalError):
    """Series or iterative procedure did not converge."""


class DegeneracyError(NumericalError):
    """Parameter combination hits a degenerate case of a formula."""


class RationalAlphaError(ConvergenceError):
    """alpha is (numerically) rational, so coefficient recursions break down."""


class CancellationError(NumericalError):
    """Catastrophic cancellation produced an unusable (negative) density."""
