"""Human-swarm teaming simulation platform for UAV search and rescue.

Deterministic discrete-time engine with max-sum task allocation, a
distance-dependent perception model for early human classification, a
multi-client session service, and a headless benchmark CLI.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .scenario import (
    GeoPosition,
    GroundTruth,
    Mode,
    Scenario,
    default_scenario,
    load_scenario,
    parse_scenario,
    scenario_digest,
    serialize_scenario,
)

__all__ = [
    "__version__",
    "GeoPosition",
    "GroundTruth",
    "Mode",
    "Scenario",
    "default_scenario",
    "load_scenario",
    "parse_scenario",
    "scenario_digest",
    "serialize_scenario",
]
