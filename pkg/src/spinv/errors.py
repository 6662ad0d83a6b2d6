"""Shared exception types."""


class DimensionError(ValueError):
    """An ambient dimension or matrix shape is invalid for the operation."""


class SingularMatrixError(ValueError):
    """A matrix required to be invertible is singular."""


class PrimeCollisionError(RuntimeError):
    """A modular computation hit a denominator divisible by the prime.

    Callers should retry with a different prime.
    """
