"""Levels, staging goals and cast descriptions.

A *level* is the renderer-side stage: a named scene with a flat list of
staging goals.  A *goal* is a tagged placement (position plus yaw) that
cues refer to by id, so cue sheets stay portable across venues; only
the level file changes when the show moves.

The *cast* types describe who and what is on stage: avatars driven by a
mocap subject or by a local player, props that either stand on their own
or hang off an avatar socket, and named cameras.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Mapping

from .stagemath import OffsetTransform, Pose, Vec3, apply_offset
from .strictjson import MalformedDocument, DuplicateKey, is_number, is_text, parse_strict

__all__ = [
    "Vec3",
    "Pose",
    "GoalKind",
    "Goal",
    "Level",
    "MocapSource",
    "PlayerSource",
    "Source",
    "AvatarDef",
    "PropKind",
    "Dependent",
    "PropDef",
    "SceneError",
    "MalformedDocument",
    "DuplicateGoalId",
    "NonFiniteCoordinate",
    "UnknownGoal",
    "GoalKindMismatch",
    "UnknownSocket",
    "LevelFormatError",
    "load_level",
    "resolve_goal",
    "attachment_pose",
]


class SceneError(Exception):
    """Base class for level and cast problems."""


class DuplicateGoalId(SceneError):
    def __init__(self, goal_id: str):
        super().__init__(f"goal id {goal_id!r} defined more than once")
        self.goal_id = goal_id


class NonFiniteCoordinate(SceneError):
    def __init__(self, goal_id: str):
        super().__init__(f"goal {goal_id!r} has a non-finite coordinate")
        self.goal_id = goal_id


class UnknownGoal(SceneError):
    def __init__(self, goal_id: str):
        super().__init__(f"no goal named {goal_id!r} in the level")
        self.goal_id = goal_id


class GoalKindMismatch(SceneError):
    def __init__(self, goal_id: str, expected: "GoalKind", actual: "GoalKind"):
        super().__init__(
            f"goal {goal_id!r} is a {actual.value} goal, expected {expected.value}"
        )
        self.goal_id = goal_id
        self.expected = expected
        self.actual = actual


class UnknownSocket(SceneError):
    def __init__(self, socket: str):
        super().__init__(f"no socket named {socket!r} in the cast socket table")
        self.socket = socket


class LevelFormatError(SceneError):
    """One or more problems found while loading a level document."""

    def __init__(self, errors: list[Exception]):
        super().__init__("; ".join(str(e) for e in errors))
        self.errors = list(errors)


class GoalKind(str, Enum):
    AVATAR = "avatar"
    PROP = "prop"
    CAMERA = "camera"


@dataclass(frozen=True)
class Goal:
    id: str
    kind: GoalKind
    pose: Pose


@dataclass(frozen=True)
class Level:
    name: str
    goals: tuple[Goal, ...]

    def find(self, goal_id: str) -> Goal | None:
        for goal in self.goals:
            if goal.id == goal_id:
                return goal
        return None


def resolve_goal(level: Level, goal_id: str, expected: GoalKind) -> Goal:
    """Look a goal up by id and insist on its kind."""
    goal = level.find(goal_id)
    if goal is None:
        raise UnknownGoal(goal_id)
    if goal.kind is not expected:
        raise GoalKindMismatch(goal_id, expected, goal.kind)
    return goal


# --- cast --------------------------------------------------------------


@dataclass(frozen=True)
class MocapSource:
    """Avatar driven by a live captured subject."""

    subject: str


@dataclass(frozen=True)
class PlayerSource:
    """Avatar driven by a local player or left to the renderer."""


Source = MocapSource | PlayerSource


@dataclass(frozen=True)
class AvatarDef:
    id: str
    source: Source
    appearance: str = ""
    visible: bool = True


class PropKind(str, Enum):
    MESH = "mesh"
    LIGHT = "light"
    PARTICLES = "particles"
    AUDIO = "audio"


@dataclass(frozen=True)
class Dependent:
    """Prop mode: carried by an avatar, placed through a named socket."""

    avatar: str
    socket: str


@dataclass(frozen=True)
class PropDef:
    id: str
    kind: PropKind
    dependent: Dependent | None = None


def attachment_pose(avatar_root: Pose, socket: str, sockets: Mapping[str, Pose]) -> Pose:
    """World pose of a socket offset carried along an avatar root."""
    offset_pose = sockets.get(socket)
    if offset_pose is None:
        raise UnknownSocket(socket)
    return apply_offset(OffsetTransform(avatar_root.yaw, avatar_root.position), offset_pose)


# --- level loading ------------------------------------------------------


def _read_pose(
    entry: Mapping[str, Any], where: str, goal_id: str, errors: list[Exception]
) -> Pose | None:
    pos = entry.get("pos")
    yaw = entry.get("yaw")
    if not isinstance(pos, list) or len(pos) != 3 or not all(is_number(c) for c in pos):
        errors.append(MalformedDocument(where, "'pos' must be a list of three numbers"))
        return None
    if not is_number(yaw):
        errors.append(MalformedDocument(where, "'yaw' must be a number"))
        return None
    if not all(math.isfinite(float(c)) for c in [*pos, yaw]):
        errors.append(NonFiniteCoordinate(goal_id))
        return None
    return Pose(Vec3(float(pos[0]), float(pos[1]), float(pos[2])), float(yaw))


def load_level(document: str) -> Level:
    """Parse and validate a level document; collects every problem found."""
    errors: list[Exception] = []
    try:
        data = parse_strict(document)
    except DuplicateKey as exc:
        raise LevelFormatError([MalformedDocument("level", str(exc))]) from exc
    except ValueError as exc:
        raise LevelFormatError([MalformedDocument("level", f"invalid JSON: {exc}")]) from exc

    if not isinstance(data, dict):
        raise LevelFormatError([MalformedDocument("level", "top level must be an object")])
    for key in data:
        if key not in ("name", "goals"):
            errors.append(MalformedDocument("level", f"unknown key {key!r}"))
    name = data.get("name")
    if not is_text(name) or not name:
        errors.append(MalformedDocument("level", "'name' must be non-empty text"))
        name = ""
    raw_goals = data.get("goals")
    if not isinstance(raw_goals, list):
        errors.append(MalformedDocument("level", "'goals' must be a list"))
        raw_goals = []

    goals: list[Goal] = []
    seen: set[str] = set()
    for i, entry in enumerate(raw_goals):
        where = f"goals[{i}]"
        if not isinstance(entry, dict):
            errors.append(MalformedDocument(where, "goal must be an object"))
            continue
        for key in entry:
            if key not in ("id", "kind", "pos", "yaw"):
                errors.append(MalformedDocument(where, f"unknown key {key!r}"))
        goal_id = entry.get("id")
        if not is_text(goal_id) or not goal_id:
            errors.append(MalformedDocument(where, "'id' must be non-empty text"))
            continue
        if goal_id in seen:
            errors.append(DuplicateGoalId(goal_id))
            continue
        seen.add(goal_id)
        raw_kind = entry.get("kind")
        try:
            kind = GoalKind(raw_kind)
        except ValueError:
            errors.append(
                MalformedDocument(
                    where, f"'kind' must be one of avatar/prop/camera, got {raw_kind!r}"
                )
            )
            continue
        pose = _read_pose(entry, where, goal_id, errors)
        if pose is None:
            continue
        goals.append(Goal(goal_id, kind, pose))

    if errors:
        raise LevelFormatError(errors)
    return Level(str(name), tuple(goals))
