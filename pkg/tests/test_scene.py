"""Level loading, goal resolution and socket attachment."""

from __future__ import annotations

import json

import pytest

from regie.scene import (
    DuplicateGoalId,
    GoalKind,
    GoalKindMismatch,
    LevelFormatError,
    MalformedDocument,
    NonFiniteCoordinate,
    Pose,
    UnknownGoal,
    UnknownSocket,
    Vec3,
    attachment_pose,
    load_level,
    resolve_goal,
)

GOOD = {
    "name": "rehearsal",
    "goals": [
        {"id": "GA_center", "kind": "avatar", "pos": [0.0, 0.0, 0.0], "yaw": 0.0},
        {"id": "GP_table", "kind": "prop", "pos": [1.5, 0.5, 0.9], "yaw": 90.0},
        {"id": "GC_cam1", "kind": "camera", "pos": [0.0, -6.0, 1.6], "yaw": 180.0},
    ],
}


def test_load_good_level():
    level = load_level(json.dumps(GOOD))
    assert level.name == "rehearsal"
    assert [g.id for g in level.goals] == ["GA_center", "GP_table", "GC_cam1"]
    cam = level.find("GC_cam1")
    assert cam is not None and cam.kind is GoalKind.CAMERA
    assert cam.pose.yaw == -180.0  # normalized on construction


def test_resolve_goal_checks_kind():
    level = load_level(json.dumps(GOOD))
    goal = resolve_goal(level, "GA_center", GoalKind.AVATAR)
    assert goal.pose.position == Vec3(0.0, 0.0, 0.0)
    with pytest.raises(UnknownGoal):
        resolve_goal(level, "GA_missing", GoalKind.AVATAR)
    with pytest.raises(GoalKindMismatch) as err:
        resolve_goal(level, "GP_table", GoalKind.AVATAR)
    assert err.value.expected is GoalKind.AVATAR
    assert err.value.actual is GoalKind.PROP


def test_duplicate_goal_id_listed():
    doc = {
        "name": "dup",
        "goals": [
            {"id": "G1", "kind": "avatar", "pos": [0, 0, 0], "yaw": 0},
            {"id": "G1", "kind": "prop", "pos": [1, 0, 0], "yaw": 0},
        ],
    }
    with pytest.raises(LevelFormatError) as err:
        load_level(json.dumps(doc))
    dups = [e for e in err.value.errors if isinstance(e, DuplicateGoalId)]
    assert len(dups) == 1 and dups[0].goal_id == "G1"
    assert "G1" in str(err.value)


def test_nonfinite_coordinate_rejected():
    doc = {
        "name": "inf",
        "goals": [{"id": "G1", "kind": "avatar", "pos": [1e999, 0, 0], "yaw": 0}],
    }
    with pytest.raises(LevelFormatError) as err:
        load_level(json.dumps(doc))
    assert any(isinstance(e, NonFiniteCoordinate) for e in err.value.errors)


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d.pop("name"),
        lambda d: d.update(extra=1),
        lambda d: d["goals"][0].pop("yaw"),
        lambda d: d["goals"][0].update(kind="vehicle"),
        lambda d: d["goals"][0].update(pos=[1, 2]),
        lambda d: d["goals"][0].update(surprise=True),
        lambda d: d.update(goals={"not": "a list"}),
    ],
)
def test_malformed_documents_rejected(mutate):
    doc = json.loads(json.dumps(GOOD))
    mutate(doc)
    with pytest.raises(LevelFormatError) as err:
        load_level(json.dumps(doc))
    assert any(isinstance(e, MalformedDocument) for e in err.value.errors)


def test_duplicate_json_keys_rejected():
    text = '{"name": "x", "name": "y", "goals": []}'
    with pytest.raises(LevelFormatError):
        load_level(text)


def test_invalid_json_rejected():
    with pytest.raises(LevelFormatError):
        load_level("{not json")


def test_all_errors_collected_in_one_pass():
    doc = {
        "name": "",
        "goals": [
            {"id": "G1", "kind": "avatar", "pos": [0, 0, 0], "yaw": 0},
            {"id": "G1", "kind": "avatar", "pos": [0, 0, 0], "yaw": 0},
            {"id": "G2", "kind": "nope", "pos": [0, 0, 0], "yaw": 0},
        ],
    }
    with pytest.raises(LevelFormatError) as err:
        load_level(json.dumps(doc))
    assert len(err.value.errors) >= 3


# --- attachment ---------------------------------------------------------

SOCKETS = {
    "left_arm": Pose(Vec3(0.3, 0.0, 1.4), 0.0),
    "head": Pose(Vec3(0.0, 0.0, 1.7), 0.0),
}


def test_attachment_pose_follows_root():
    # root at (1,0,0) facing yaw 180: the +x socket offset lands behind it.
    root = Pose(Vec3(1.0, 0.0, 0.0), 180.0)
    out = attachment_pose(root, "left_arm", SOCKETS)
    assert abs(out.position.x - 0.7) <= 1e-9
    assert abs(out.position.y - 0.0) <= 1e-9
    assert abs(out.position.z - 1.4) <= 1e-9
    assert out.yaw == -180.0


def test_attachment_pose_adds_socket_yaw():
    root = Pose(Vec3(0.0, 0.0, 0.0), 90.0)
    table = {"hand": Pose(Vec3(0.5, 0.0, 1.0), 45.0)}
    out = attachment_pose(root, "hand", table)
    assert abs(out.position.x - 0.0) <= 1e-9
    assert abs(out.position.y - 0.5) <= 1e-9
    assert out.yaw == 135.0


def test_unknown_socket_raises():
    with pytest.raises(UnknownSocket):
        attachment_pose(Pose.identity(), "tail", SOCKETS)
