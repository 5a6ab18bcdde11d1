"""Exception taxonomy shared across the package.

The CLI maps these onto distinct exit codes (see ``tanglewalk.cli``), so
new error conditions should reuse one of the classes below rather than
raising bare ``ValueError``.
"""


class TanglewalkError(Exception):
    """Base class for all package errors."""


class ConfigError(TanglewalkError):
    """Invalid configuration, flags, or input files."""


class DomainError(TanglewalkError):
    """An argument violates an operation's precondition."""


class GenerationError(DomainError):
    """Instance generation failed for the given parameters."""


class SizeCapError(TanglewalkError):
    """A size cap (statevector width, enumeration budget, ...) was exceeded."""


class ExternalSolverError(TanglewalkError):
    """External MAX-SAT solver output could not be used."""
