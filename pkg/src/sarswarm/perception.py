"""Simulated camera feeds and the target-classification data model.

An agent observing a target produces a feed whose clarity rises linearly
as it closes in, quantized into resolution levels 0..8 (pixel grid doubles
per level, so level 6 is a 64x64 image). The image itself is a seeded
procedural grid: noise, plus a casualty glyph when the ground truth says
there is one, downsampled to the current level. Operators therefore see a
genuinely ambiguous picture at low clarity.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .geo import haversine_distance
from .scenario import GeoPosition, GroundTruth

#: Number of resolution levels; full clarity renders a 2^8 grid.
MAX_RESOLUTION_LEVEL = 8
_BASE_SIZE = 2 ** MAX_RESOLUTION_LEVEL


class ActorKind(str, enum.Enum):
    HUMAN = "human"
    AUTONOMOUS = "autonomous"


@dataclass(frozen=True)
class ClassificationEvent:
    actor_kind: ActorKind
    actor_id: str  # client id for humans, agent id for autonomous arrivals
    target_id: str
    label: GroundTruth
    sim_time: float
    correct: bool

    def to_obj(self) -> dict:
        return {
            "actor_kind": self.actor_kind.value,
            "actor_id": self.actor_id,
            "target_id": self.target_id,
            "label": self.label.value,
            "sim_time": self.sim_time,
            "correct": self.correct,
        }


@dataclass(frozen=True)
class CameraFeed:
    target_id: str
    clarity: float
    resolution_level: int
    image: "ImageDescriptor"

    def to_obj(self) -> dict:
        return {
            "target_id": self.target_id,
            "clarity": self.clarity,
            "resolution_level": self.resolution_level,
            "image": self.image.to_obj(),
        }


@dataclass(frozen=True)
class ImageDescriptor:
    """Square grayscale pixel grid, ``size`` = 2^resolution_level."""

    size: int
    cells: tuple[int, ...]  # row-major, values 0..255

    def to_obj(self) -> dict:
        return {"size": self.size, "cells": list(self.cells)}


def clarity_at(agent_pos: GeoPosition, target_pos: GeoPosition, visibility_radius: float) -> float:
    """Linear clarity: 1 on top of the target, 0 at or beyond the radius."""
    d = haversine_distance(agent_pos, target_pos)
    value = 1.0 - d / visibility_radius
    if value < 0.0:
        return 0.0
    if value > 1.0:
        return 1.0
    return value


def resolution_level(clarity: float) -> int:
    level = int(clarity * MAX_RESOLUTION_LEVEL)
    if level < 0:
        return 0
    if level > MAX_RESOLUTION_LEVEL:
        return MAX_RESOLUTION_LEVEL
    return level


def _feed_seed(scenario_seed: int, target_id: str) -> int:
    digest = hashlib.sha256(f"{scenario_seed}:{target_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


@lru_cache(maxsize=512)
def _base_image(scenario_seed: int, target_id: str, has_casualty: bool) -> np.ndarray:
    """Full-resolution source image: seeded noise, casualty glyph on top."""
    rng = np.random.default_rng(_feed_seed(scenario_seed, target_id))
    img = rng.integers(40, 180, size=(_BASE_SIZE, _BASE_SIZE), dtype=np.int64).astype(np.float64)
    if has_casualty:
        # bright cross glyph, jittered off-centre so crops at low levels differ
        cx = _BASE_SIZE // 2 + int(rng.integers(-32, 33))
        cy = _BASE_SIZE // 2 + int(rng.integers(-32, 33))
        arm, thick = 56, 12
        img[max(0, cy - thick):cy + thick, max(0, cx - arm):cx + arm] = 235.0
        img[max(0, cy - arm):cy + arm, max(0, cx - thick):cx + thick] = 235.0
    return img


def render_image(
    scenario_seed: int,
    target_id: str,
    ground_truth: GroundTruth,
    level: int,
) -> ImageDescriptor:
    """Deterministic procedural image at one resolution level.

    The base 256x256 image is block-averaged down to 2^level, so every
    level is a coarser view of the same scene.
    """
    if not 0 <= level <= MAX_RESOLUTION_LEVEL:
        raise ValueError(f"resolution level must lie in [0, {MAX_RESOLUTION_LEVEL}]")
    base = _base_image(scenario_seed, target_id, ground_truth is GroundTruth.CASUALTY)
    size = 2 ** level
    block = _BASE_SIZE // size
    coarse = base.reshape(size, block, size, block).mean(axis=(1, 3))
    cells = tuple(int(v) for v in np.clip(np.rint(coarse), 0, 255).astype(np.uint8).ravel())
    return ImageDescriptor(size=size, cells=cells)


def feed_for(
    scenario_seed: int,
    target_id: str,
    ground_truth: GroundTruth,
    target_pos: GeoPosition,
    observers: list[tuple[GeoPosition, float]],
) -> CameraFeed | None:
    """Best feed over all observing agents, or None when nobody sees it.

    ``observers`` pairs each agent's position with its visibility radius.
    Callers must not request feeds for already-classified targets.
    """
    best = 0.0
    for pos, radius in observers:
        c = clarity_at(pos, target_pos, radius)
        if c > best:
            best = c
    if best <= 0.0:
        return None
    level = resolution_level(best)
    return CameraFeed(
        target_id=target_id,
        clarity=best,
        resolution_level=level,
        image=render_image(scenario_seed, target_id, ground_truth, level),
    )
