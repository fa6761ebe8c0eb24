"""Exception hierarchy shared by the scenario model, solver, engine and service."""

from __future__ import annotations


class SarSwarmError(Exception):
    """Base class for every error raised by this package."""


# --- scenario model -------------------------------------------------------

class ScenarioError(SarSwarmError):
    pass


class MalformedJson(ScenarioError):
    """The document is not well-formed JSON."""


class SchemaViolation(ScenarioError):
    """Missing, unknown or mistyped field. ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class InvariantViolation(ScenarioError):
    """Structurally valid document that breaks a domain invariant."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


# --- allocation -----------------------------------------------------------

class AllocationError(SarSwarmError):
    pass


class ConstraintRefError(AllocationError):
    """An operator constraint references an agent or task not in the problem."""


class InfeasibleConstraint(AllocationError):
    """The constraint set admits no assignment (e.g. two pins on one task)."""


class TooLarge(AllocationError):
    """Exhaustive enumeration would exceed the configured bound."""


class InfeasibleAllocation(AllocationError):
    """An allocation assigns one task twice or violates a constraint."""


# --- perception / engine --------------------------------------------------

class EngineError(SarSwarmError):
    pass


class UnknownTarget(EngineError):
    pass


class AlreadyClassified(EngineError):
    pass


class NoFeedAvailable(EngineError):
    """A human tried to classify a target no agent currently observes."""


class UnknownAgent(EngineError):
    pass


class ModeForbids(EngineError):
    """Human command received while the session runs fully autonomous."""


class ZeroElapsed(EngineError):
    """Score requested before any simulated time elapsed."""


# --- session service ------------------------------------------------------

class ServiceError(SarSwarmError):
    pass


class UnknownSession(ServiceError):
    pass


class NotJoined(ServiceError):
    """Command submitted by a client that never joined the session stream."""


class MalformedCommand(ServiceError):
    pass


# --- bench CLI ------------------------------------------------------------

class BenchError(SarSwarmError):
    pass


class DigestMismatch(BenchError):
    """Two reports being compared were produced from different scenarios."""


class MalformedReport(BenchError):
    pass
