"""Exception hierarchy shared by every module of the package."""


class PMSpaceError(Exception):
    """Base class for all errors raised by pmspaces."""


class MalformedOracleError(PMSpaceError):
    """The perimeter oracle returned a negative or non-finite value."""


class SizeError(PMSpaceError):
    """The instance is too large for an exhaustive computation."""


class UnsupportedOperationError(PMSpaceError):
    """The oracle does not provide the requested structure (e.g. a cut form)."""


class AdmissibilityError(PMSpaceError):
    """The domain does not contain an N-cluster."""


class AxiomMissingError(PMSpaceError):
    """An axiom needed by the operation is neither declared nor verified."""


class TheoremViolationError(PMSpaceError):
    """A verifier found a counterexample to a proven statement.

    This always indicates an implementation bug. ``witness`` carries
    whatever data reproduces the failure.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NumericalDegeneracyError(PMSpaceError):
    """Floating point tolerance could not resolve a combinatorial decision."""


class CoercivityError(PMSpaceError):
    """Part of the domain is not connected to its complement."""


class SymmetryError(PMSpaceError):
    """A kernel or weight definition is not symmetric."""


class PositivityError(PMSpaceError):
    """A measure or density that must be strictly positive is not."""


class DomainError(PMSpaceError):
    """A function argument lies outside the admissible domain."""


class ConfigError(PMSpaceError):
    """Malformed experiment configuration; ``path`` locates the bad field."""

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
