"""Planar rigid placement math.

World space is Z-up, right handed, metric.  Orientation is reduced to a
single yaw angle in degrees (counter-clockwise about +Z seen from above),
which is all a grounded stage needs: performers and props stay upright,
only their floor position and facing are steered.

The central object is the :class:`OffsetTransform`, a rotation about +Z
followed by a translation.  It is the "frame change" that maps a captured
performer from wherever they stand in the capture volume onto a staging
goal, and it composes, inverts and replays exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

__all__ = [
    "Vec3",
    "Pose",
    "OffsetTransform",
    "SkeletonFrame",
    "FadeDirection",
    "NonPositiveDuration",
    "normalize_deg",
    "compute_offset",
    "apply_offset",
    "apply_offset_frame",
    "rotate_in_place",
    "compose",
    "fade_level",
]


def normalize_deg(angle: float) -> float:
    """Wrap an angle in degrees into [-180.0, 180.0); +180 maps to -180."""
    return (angle + 180.0) % 360.0 - 180.0


@dataclass(frozen=True)
class Vec3:
    """A point or displacement in world space, in meters."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        for c in (self.x, self.y, self.z):
            if not isinstance(c, (int, float)) or not math.isfinite(c):
                raise ValueError(f"non-finite or non-numeric component: {c!r}")

    def __add__(self, other: Vec3) -> Vec3:
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: Vec3) -> Vec3:
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    @staticmethod
    def zero() -> Vec3:
        return Vec3(0.0, 0.0, 0.0)


def _rotate_z(theta_deg: float, v: Vec3) -> Vec3:
    """Rotate a vector about +Z by theta degrees."""
    rad = math.radians(theta_deg)
    c, s = math.cos(rad), math.sin(rad)
    return Vec3(c * v.x - s * v.y, s * v.x + c * v.y, v.z)


@dataclass(frozen=True)
class Pose:
    """A placement: position plus yaw.  Yaw is normalized on construction."""

    position: Vec3
    yaw: float

    def __post_init__(self) -> None:
        if not isinstance(self.yaw, (int, float)) or not math.isfinite(self.yaw):
            raise ValueError(f"non-finite yaw: {self.yaw!r}")
        object.__setattr__(self, "yaw", normalize_deg(float(self.yaw)))

    @staticmethod
    def identity() -> Pose:
        return Pose(Vec3.zero(), 0.0)


@dataclass(frozen=True)
class OffsetTransform:
    """Rigid planar map: rotate by ``theta`` about +Z, then translate.

    Applied to a pose it yields ``(R_theta * position + translation,
    yaw + theta)``.  Heights pass through untouched; the stage floor
    stays the stage floor.
    """

    theta: float
    translation: Vec3

    def __post_init__(self) -> None:
        if not isinstance(self.theta, (int, float)) or not math.isfinite(self.theta):
            raise ValueError(f"non-finite theta: {self.theta!r}")
        object.__setattr__(self, "theta", normalize_deg(float(self.theta)))

    @staticmethod
    def identity() -> OffsetTransform:
        return OffsetTransform(0.0, Vec3.zero())


@dataclass(frozen=True)
class SkeletonFrame:
    """One captured frame of a tracked subject.

    ``joints`` carries optional per-joint local rotations as unit
    quaternions (x, y, z, w); the engine never looks inside them, it
    only re-roots the frame, so they ride along untouched.
    """

    subject: str
    timestamp: float
    root: Pose
    joints: tuple[tuple[str, tuple[float, float, float, float]], ...] = ()


def compute_offset(anchor: Pose, goal: Pose) -> OffsetTransform:
    """Offset that maps ``anchor`` exactly onto ``goal``.

    The yaw difference fixes the rotation; the translation is whatever
    is left to land the rotated anchor position on the goal position.
    """
    theta = normalize_deg(goal.yaw - anchor.yaw)
    translation = goal.position - _rotate_z(theta, anchor.position)
    return OffsetTransform(theta, translation)


def apply_offset(offset: OffsetTransform, pose: Pose) -> Pose:
    """Map a pose through an offset transform."""
    return Pose(
        _rotate_z(offset.theta, pose.position) + offset.translation,
        pose.yaw + offset.theta,
    )


def apply_offset_frame(offset: OffsetTransform, frame: SkeletonFrame) -> SkeletonFrame:
    """Re-root a captured frame; joint-local rotations are unaffected."""
    return replace(frame, root=apply_offset(offset, frame.root))


def rotate_in_place(root: Pose, delta_deg: float) -> OffsetTransform:
    """Offset that spins ``root`` by ``delta_deg`` about its own position."""
    delta = normalize_deg(delta_deg)
    return OffsetTransform(delta, root.position - _rotate_z(delta, root.position))


def compose(outer: OffsetTransform, inner: OffsetTransform) -> OffsetTransform:
    """The offset equivalent to applying ``inner`` first, then ``outer``."""
    return OffsetTransform(
        outer.theta + inner.theta,
        _rotate_z(outer.theta, inner.translation) + outer.translation,
    )


class FadeDirection(str, Enum):
    IN = "in"
    OUT = "out"


class NonPositiveDuration(ValueError):
    """A fade was asked to run over a zero or negative duration."""

    def __init__(self, duration: float):
        super().__init__(f"fade duration must be positive, got {duration}")
        self.duration = duration


def fade_level(elapsed: float, duration: float, direction: FadeDirection) -> float:
    """Linear fade level in [0, 1]; clamped outside the ramp.

    Level 0 is fully faded to black, 1 is fully revealed.  A fade-in
    ramps 0 -> 1 over ``duration``, a fade-out ramps 1 -> 0.
    """
    if duration <= 0.0:
        raise NonPositiveDuration(duration)
    progress = min(max(elapsed / duration, 0.0), 1.0)
    return progress if direction is FadeDirection.IN else 1.0 - progress
