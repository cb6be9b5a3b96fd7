"""Exception hierarchy shared by all sitgrid modules."""


class SitgridError(Exception):
    """Base class for all errors raised by this package."""


class SpaceError(SitgridError):
    """Invalid axis configuration or situation encoding/decoding failure."""


class LogError(SitgridError):
    """Malformed or inconsistent observation log."""


class EstimationError(SitgridError):
    """Transition counting or probability estimation failure."""


class GridError(SitgridError):
    """Invalid augmented grid (row stochasticity, successor closure, file format)."""


class ModelError(SitgridError):
    """Invalid Markov chain or failed synthesis precondition."""


class PctlError(SitgridError):
    """Invalid PCTL query (non-syntax: range, structure, resolution)."""


class PctlSyntaxError(PctlError):
    """Syntax error in the concrete PCTL syntax.

    Carries the byte offset of the offending position and the set of
    token kinds that would have been accepted there.
    """

    def __init__(self, message: str, offset: int, expected: frozenset[str] = frozenset()):
        self.offset = offset
        self.expected = expected
        detail = f"at offset {offset}: {message}"
        if expected:
            detail += " (expected " + ", ".join(sorted(expected)) + ")"
        super().__init__(detail)


class CheckError(SitgridError):
    """Model checking failure (unresolvable query, solver non-convergence)."""


class ReportError(SitgridError):
    """Report rendering or serialization failure."""
