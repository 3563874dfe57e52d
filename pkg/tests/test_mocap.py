"""Mocap line decoding and the per-subject monotonic delivery filter."""

from __future__ import annotations

import json
import math
from pathlib import Path

import pytest

from regie.netio.mocap import MalformedFrame, MocapStream, StaleFrame, decode_mocap_line
from regie.stagemath import Pose, Vec3


def _fixture(name: str) -> Path:
    here = Path(__file__).resolve()
    for parent in here.parents:
        if (parent / ".git").is_dir():
            return parent / "fixtures" / name
    raise FileNotFoundError(name)


GOOD_LINE = (
    '{"subject":"subject1","t":0.5,'
    '"root":{"pos":[1.0,-2.0,0.0],"yaw":270.0},'
    '"joints":{"spine":[0.0,0.0,0.0,1.0]}}'
)


def test_decode_full_frame() -> None:
    frame = decode_mocap_line(GOOD_LINE)
    assert frame.subject == "subject1"
    assert frame.timestamp == 0.5
    assert frame.root == Pose(Vec3(1.0, -2.0, 0.0), -90.0)  # yaw normalized
    assert frame.joints == (("spine", (0.0, 0.0, 0.0, 1.0)),)


def test_decode_without_joints() -> None:
    frame = decode_mocap_line('{"subject":"a","t":0,"root":{"pos":[0,0,0],"yaw":0}}')
    assert frame.joints == ()


@pytest.mark.parametrize(
    "line",
    [
        "not json",
        "[1,2,3]",
        '{"t":0,"root":{"pos":[0,0,0],"yaw":0}}',  # no subject
        '{"subject":"","t":0,"root":{"pos":[0,0,0],"yaw":0}}',
        '{"subject":"a","root":{"pos":[0,0,0],"yaw":0}}',  # no t
        '{"subject":"a","t":-1,"root":{"pos":[0,0,0],"yaw":0}}',
        '{"subject":"a","t":"0","root":{"pos":[0,0,0],"yaw":0}}',
        '{"subject":"a","t":0,"root":{"pos":[0,0],"yaw":0}}',
        '{"subject":"a","t":0,"root":{"pos":[0,0,0]}}',
        '{"subject":"a","t":0,"root":{"pos":[0,0,"x"],"yaw":0}}',
        '{"subject":"a","t":0,"root":{"pos":[0,0,0],"yaw":0},"extra":1}',
        '{"subject":"a","t":0,"root":{"pos":[0,0,0],"yaw":0},"joints":[1]}',
        '{"subject":"a","t":0,"root":{"pos":[0,0,0],"yaw":0},"joints":{"j":[0,0,0]}}',
        '{"subject":"a","t":0,"root":{"pos":[0,0,0],"yaw":0},"joints":{"j":[0,0,0,2]}}',
    ],
)
def test_decode_rejects_bad_lines(line: str) -> None:
    with pytest.raises(MalformedFrame):
        decode_mocap_line(line)


def test_decode_rejects_duplicate_keys() -> None:
    with pytest.raises(MalformedFrame):
        decode_mocap_line('{"subject":"a","subject":"b","t":0,"root":{"pos":[0,0,0],"yaw":0}}')


def test_quaternion_norm_tolerance_boundary() -> None:
    # just inside the 1e-6 band passes, just outside fails
    eps = 4e-7
    ok = json.dumps(
        {"subject": "a", "t": 0, "root": {"pos": [0, 0, 0], "yaw": 0},
         "joints": {"j": [0.0, 0.0, 0.0, 1.0 + eps]}}
    )
    assert decode_mocap_line(ok).joints[0][1][3] == 1.0 + eps
    bad = json.dumps(
        {"subject": "a", "t": 0, "root": {"pos": [0, 0, 0], "yaw": 0},
         "joints": {"j": [0.0, 0.0, 0.0, 1.0 + 4e-6]}}
    )
    with pytest.raises(MalformedFrame):
        decode_mocap_line(bad)


def _line(subject: str, t: float) -> str:
    return json.dumps(
        {"subject": subject, "t": t, "root": {"pos": [t, 0, 0], "yaw": 0}, "joints": {}}
    )


class TestMocapStream:
    def test_monotonic_delivery_per_subject(self) -> None:
        stream = MocapStream()
        assert stream.ingest(_line("a", 1.0)).timestamp == 1.0
        with pytest.raises(StaleFrame):
            stream.ingest(_line("a", 1.0))  # equal timestamp is stale
        with pytest.raises(StaleFrame):
            stream.ingest(_line("a", 0.5))
        assert stream.ingest(_line("a", 1.5)).timestamp == 1.5
        assert stream.delivered == 2
        assert stream.stale_dropped == 2

    def test_subjects_are_independent(self) -> None:
        stream = MocapStream()
        stream.ingest(_line("a", 10.0))
        # a fresh subject starts its own clock, even behind subject a
        assert stream.ingest(_line("b", 1.0)).subject == "b"
        assert stream.delivered == 2

    def test_feed_swallows_and_counts(self) -> None:
        stream = MocapStream()
        assert stream.feed(_line("a", 1.0)) is not None
        assert stream.feed(_line("a", 1.0)) is None
        assert stream.feed("garbage") is None
        assert stream.feed(_line("a", 2.0)) is not None
        assert (stream.delivered, stream.stale_dropped, stream.malformed_dropped) == (2, 1, 1)

    def test_walk_fixture_plays_through_once(self) -> None:
        lines = _fixture("walk_arc.ndjson").read_text().splitlines()
        stream = MocapStream()
        frames = [stream.feed(line) for line in lines if line.strip()]
        assert all(frame is not None for frame in frames)
        assert stream.delivered == len(frames) == 240
        ts = [frame.timestamp for frame in frames]
        assert ts == sorted(ts)
        assert all(math.isfinite(frame.root.yaw) for frame in frames)

    def test_walk_fixture_replay_is_all_stale(self) -> None:
        lines = [l for l in _fixture("walk_arc.ndjson").read_text().splitlines() if l.strip()]
        stream = MocapStream()
        for line in lines:
            stream.feed(line)
        for line in lines:
            assert stream.feed(line) is None
        assert stream.delivered == 240
        assert stream.stale_dropped == 240
