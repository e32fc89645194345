"""Exception hierarchy shared by all modules."""


class QError(Exception):
    """Base class for every error raised by this package."""


class ModeError(QError):
    """Exact and floating scalars were mixed, or a float-only routine got exact input."""


class PoleError(QError):
    """A special function was evaluated at a pole."""


class ResonanceError(QError):
    """A parameter coincidence makes a generic formula singular."""


class DomainError(QError):
    """An argument lies outside the region where a series or product is valid."""


class SingularityError(QError):
    """A rational map hit a vanishing denominator."""


class ConvergenceError(QError):
    """A truncated sum or product did not reach the requested accuracy."""
