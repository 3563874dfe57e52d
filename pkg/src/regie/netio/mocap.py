"""Mocap frame intake: newline-delimited JSON over UDP.

Capture rigs stream one JSON object per line; each carries a subject
name, a capture-clock timestamp, the skeleton root pose and optional
joint-local quaternions.  Frames arrive over UDP so they reorder and
duplicate: the stream filter delivers only frames whose timestamp is
strictly newer than the last delivered one for that subject and counts
what it drops.
"""

from __future__ import annotations

import math

from ..stagemath import Pose, SkeletonFrame, Vec3
from ..strictjson import DuplicateKey, is_number, is_text, parse_strict

__all__ = [
    "MalformedFrame",
    "StaleFrame",
    "decode_mocap_line",
    "MocapStream",
]


class MalformedFrame(ValueError):
    def __init__(self, reason: str):
        super().__init__(f"malformed mocap frame: {reason}")
        self.reason = reason


class StaleFrame(ValueError):
    def __init__(self, subject: str, timestamp: float, newest: float):
        super().__init__(
            f"stale frame for {subject!r}: t={timestamp} is not newer than {newest}"
        )
        self.subject = subject
        self.timestamp = timestamp
        self.newest = newest


def decode_mocap_line(line: str) -> SkeletonFrame:
    """Parse one frame line; strict about shape, units and quaternion norms."""
    try:
        data = parse_strict(line)
    except (DuplicateKey, ValueError) as exc:
        raise MalformedFrame(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise MalformedFrame("frame must be an object")
    for key in data:
        if key not in ("subject", "t", "root", "joints"):
            raise MalformedFrame(f"unknown key {key!r}")

    subject = data.get("subject")
    if not is_text(subject) or not subject:
        raise MalformedFrame("'subject' must be non-empty text")
    timestamp = data.get("t")
    if not is_number(timestamp) or not math.isfinite(timestamp) or timestamp < 0:
        raise MalformedFrame("'t' must be a non-negative number of seconds")

    root = data.get("root")
    if not isinstance(root, dict) or set(root) != {"pos", "yaw"}:
        raise MalformedFrame("'root' must have exactly pos and yaw")
    pos, yaw = root["pos"], root["yaw"]
    if (
        not isinstance(pos, list)
        or len(pos) != 3
        or not all(is_number(c) and math.isfinite(c) for c in pos)
        or not is_number(yaw)
        or not math.isfinite(yaw)
    ):
        raise MalformedFrame("root pos must be three finite numbers, yaw finite")

    joints: list[tuple[str, tuple[float, float, float, float]]] = []
    raw_joints = data.get("joints", {})
    if not isinstance(raw_joints, dict):
        raise MalformedFrame("'joints' must be an object")
    for name, quat in raw_joints.items():
        if (
            not isinstance(quat, list)
            or len(quat) != 4
            or not all(is_number(c) and math.isfinite(c) for c in quat)
        ):
            raise MalformedFrame(f"joint {name!r} must be four finite numbers")
        norm = math.sqrt(sum(float(c) * float(c) for c in quat))
        if abs(norm - 1.0) > 1e-6:
            raise MalformedFrame(f"joint {name!r} quaternion is not unit length")
        joints.append((name, (float(quat[0]), float(quat[1]), float(quat[2]), float(quat[3]))))

    return SkeletonFrame(
        subject=subject,
        timestamp=float(timestamp),
        root=Pose(Vec3(float(pos[0]), float(pos[1]), float(pos[2])), float(yaw)),
        joints=tuple(joints),
    )


class MocapStream:
    """Per-subject monotonic delivery filter with drop counters."""

    def __init__(self) -> None:
        self._newest: dict[str, float] = {}
        self.delivered = 0
        self.stale_dropped = 0
        self.malformed_dropped = 0

    def ingest(self, line: str) -> SkeletonFrame:
        """Decode and deliver one line; raises on malformed or stale input."""
        frame = decode_mocap_line(line)
        newest = self._newest.get(frame.subject)
        if newest is not None and frame.timestamp <= newest:
            self.stale_dropped += 1
            raise StaleFrame(frame.subject, frame.timestamp, newest)
        self._newest[frame.subject] = frame.timestamp
        self.delivered += 1
        return frame

    def feed(self, line: str) -> SkeletonFrame | None:
        """Forgiving ingest for the wire: drops bad lines, keeps counting."""
        try:
            return self.ingest(line)
        except StaleFrame:
            return None
        except MalformedFrame:
            self.malformed_dropped += 1
            return None
