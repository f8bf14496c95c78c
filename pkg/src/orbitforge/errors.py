"""Exception hierarchy shared by all orbitforge modules."""

from __future__ import annotations


class OrbitForgeError(Exception):
    """Base class for every error raised by the library."""


class ParameterError(OrbitForgeError, ValueError):
    """An argument is outside the legal domain (bad type/rank, foreign element, ...)."""


class DegenerateOrbitError(ParameterError):
    """Gamma equals the full set of simple roots, so the orbit is a point."""


class PreconditionError(OrbitForgeError):
    """A documented precondition of an operation does not hold."""


class ResourceError(OrbitForgeError):
    """The requested computation exceeds the configured size limits."""


class NotInvariantError(OrbitForgeError):
    """A bivector is not of the invariant (fiber-constant, paired) form."""


class DegenerateFormError(ParameterError):
    """A linear form vanishes on some quasiroot where it must not."""


class InadmissibleSeedError(OrbitForgeError):
    """The recursive solver hit a zero denominator."""

    def __init__(self, message: str, pair: tuple | None = None) -> None:
        super().__init__(message)
        self.pair = pair


class ExtractionFailedError(OrbitForgeError):
    """No real linear form reproduces the coefficients on the principal branch."""


class InternalInconsistencyError(OrbitForgeError):
    """A computed object failed its own exact verification."""
