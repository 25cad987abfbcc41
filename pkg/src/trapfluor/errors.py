"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations


class TrapFluorError(Exception):
    """Base class for all errors raised by trapfluor."""


class ParameterError(TrapFluorError, ValueError):
    """A physical or numerical input is outside its allowed range.

    ``name`` is the offending field when a single one is to blame.
    """

    def __init__(self, message: str, name: str | None = None):
        super().__init__(message)
        self.name = name


class ConfigError(TrapFluorError, ValueError):
    """A run configuration could not be parsed; ``line`` is 1-based or None."""

    def __init__(self, message: str, line: int | None = None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


class PhysicsDomainError(TrapFluorError):
    """The parameters are valid but the physics has no regime of validity
    (for example the laser heats instead of cooling)."""


class NumericalError(TrapFluorError):
    """A numerical step failed (eigensolve, linear solve, truncation)."""


class DefectiveMatrixError(NumericalError):
    def __init__(self, residual: float):
        super().__init__(
            f"superoperator is not diagonalizable to working precision "
            f"(reconstruction residual {residual:.3e})"
        )
        self.residual = residual


class NearPoleError(NumericalError):
    def __init__(self, z: complex, eigenvalue: complex):
        super().__init__(
            f"resolvent evaluated at z={z:.6g} coincides with the "
            f"non-excluded eigenvalue {eigenvalue:.6g}"
        )
        self.z = z
        self.eigenvalue = eigenvalue


class UnknownEigenvalueError(TrapFluorError, KeyError):
    def __init__(self, value: complex):
        super().__init__(f"eigenvalue {value!r} is not part of the eigensystem")
        self.value = value


class TruncationError(NumericalError):
    """The Fock-space cutoff is too small for the requested accuracy."""


class ModelViolationError(NumericalError):
    """A computed object lacks the structure the theory guarantees."""
