from __future__ import annotations


class WalkLabError(Exception):
    """Base class for every error raised by the laboratory."""

    exit_code = 1


class PreconditionError(WalkLabError, ValueError):
    """An operation was called outside its domain (bad site, alpha, radius...)."""

    exit_code = 1


class TruncationError(PreconditionError):
    """The walk left the supported lattice window; usually a misconfigured alpha."""


class NonConvergenceError(WalkLabError, RuntimeError):
    """Power iteration hit its iteration cap."""

    exit_code = 1


class VerificationError(WalkLabError):
    """At least one verification check failed."""

    exit_code = 2

    def __init__(self, failed):
        self.failed = list(failed)
        super().__init__("verification failed: " + ", ".join(self.failed))
