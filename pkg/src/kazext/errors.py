"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations


class KazextError(Exception):
    """Base class for all library errors."""


class GroupError(KazextError, ValueError):
    """Invalid group data or a violated group-theoretic precondition."""


class CocycleError(GroupError):
    """A 2-cocycle failed the cocycle identity or normalization."""

    def __init__(self, message: str, witness: tuple[int, ...] | None = None):
        super().__init__(message)
        self.witness = witness


class NotNormalError(GroupError):
    """A subgroup expected to be normal is not; ``witness`` is ``(g, n)``."""

    def __init__(self, message: str, witness: tuple[int, int] | None = None):
        super().__init__(message)
        self.witness = witness


class SizeGuardError(KazextError):
    """Requested object is too large to enumerate."""


class PreconditionError(KazextError):
    """Hypotheses of a verifier are not met (not a violation of the claim)."""


class ConvergenceError(KazextError):
    """Iterative eigensolver did not reach its tolerance."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class SearchCapError(KazextError):
    """A randomized search exhausted its size cap."""

    def __init__(self, message: str, best: dict | None = None):
        super().__init__(message)
        self.best = best
