"""World snapshots: the engine's per-tick broadcast payload.

Renderers and operator consoles never query the engine; they consume a
stream of self-contained snapshots.  A snapshot carries resolved world
poses (offsets already applied to the latest captured roots, attached
props projected through their carrier's socket), animation player
outputs, running sequences and a short tail of recently emitted
effects.  Serialization is canonical: sorted keys, compact separators.
"""

from __future__ import annotations

import json
from typing import Any, Iterable, Mapping

from ..cueengine import (
    Attach,
    AudioCommand,
    Cuesheet,
    Effect,
    Engine,
    ParticleRestart,
    SendOsc,
    StartFade,
    StartSequence,
    TriggerSalient,
    state_hash,
)
from ..motionplayer import Output, SequencePlayback
from ..scene import Level, MocapSource, attachment_pose
from ..stagemath import Pose, apply_offset

__all__ = [
    "effect_to_dict",
    "build_hello",
    "build_snapshot",
    "to_wire",
]


def _pose_json(pose: Pose) -> dict[str, Any]:
    return {"pos": [pose.position.x, pose.position.y, pose.position.z], "yaw": pose.yaw}


def effect_to_dict(effect: Effect) -> dict[str, Any]:
    if isinstance(effect, SendOsc):
        return {"kind": "send_osc", "address": effect.address, "args": list(effect.args)}
    if isinstance(effect, TriggerSalient):
        return {
            "kind": "trigger_salient",
            "avatar": effect.avatar,
            "salient": effect.salient,
            "idle": effect.idle,
        }
    if isinstance(effect, StartSequence):
        return {
            "kind": "start_sequence",
            "sequence": effect.sequence,
            "start_frame": effect.start_frame,
            "end_frame": effect.end_frame,
            "rate": effect.rate,
        }
    if isinstance(effect, StartFade):
        return {"kind": "start_fade", "direction": effect.direction.value, "duration": effect.duration}
    if isinstance(effect, AudioCommand):
        return {"kind": "audio", "prop": effect.prop, "command": effect.command}
    if isinstance(effect, ParticleRestart):
        return {"kind": "particles", "prop": effect.prop}
    raise TypeError(f"unknown effect {effect!r}")


_SET_KINDS = {
    "AvatarSet": "avatar",
    "PropSet": "prop",
    "CameraSet": "camera",
    "SequenceSet": "sequence",
    "OscSet": "osc",
}


def _set_summary(spec: Any) -> dict[str, Any]:
    summary: dict[str, Any] = {
        "type": _SET_KINDS[type(spec).__name__],
        "bypass": spec.bypass,
    }
    target = getattr(spec, "target", None)
    if target is not None:
        summary["target"] = target
    return summary


def build_hello(cuesheet: Cuesheet, level: Level) -> dict[str, Any]:
    """The one-time greeting a client gets on connect: show structure."""
    return {
        "type": "hello",
        "level": {
            "name": level.name,
            "goals": [
                {"id": g.id, "kind": g.kind.value, **_pose_json(g.pose)} for g in level.goals
            ],
        },
        "cuelists": {name: list(ids) for name, ids in cuesheet.cuelists.items()},
        "cues": {
            str(cue.id): {
                "label": cue.label,
                "sets": [_set_summary(s) for s in cue.sets],
            }
            for cue in cuesheet.cues.values()
        },
        "cast": {
            "avatars": [
                {
                    "id": a.id,
                    "appearance": a.appearance,
                    "source": {"mocap": a.source.subject}
                    if isinstance(a.source, MocapSource)
                    else "player",
                }
                for a in cuesheet.cast.avatars
            ],
            "props": [{"id": p.id, "kind": p.kind.value} for p in cuesheet.cast.props],
            "cameras": list(cuesheet.cast.cameras),
        },
    }


def build_snapshot(
    tick: int,
    time_s: float,
    engine: Engine,
    player_outputs: Mapping[str, Output],
    sequences: Iterable[SequencePlayback],
    effects_log: Iterable[tuple[int, Effect]],
) -> dict[str, Any]:
    """Resolve the engine state into a renderer-ready world description."""
    state = engine.state
    avatar_worlds: dict[str, Pose] = {}
    avatars_json: dict[str, Any] = {}
    for name, avatar in state.avatars.items():
        root = engine.live_roots.get(name, avatar.anchor)
        world = apply_offset(avatar.offset, root)
        avatar_worlds[name] = world
        avatars_json[name] = {
            "world": _pose_json(world),
            "visible": avatar.visible,
            "source": {"mocap": avatar.source.subject}
            if isinstance(avatar.source, MocapSource)
            else "player",
            "clips": [list(entry) for entry in player_outputs.get(name, ())],
        }

    def resolve_placement(placement: Pose | Attach) -> tuple[Pose, dict[str, str] | None]:
        if isinstance(placement, Pose):
            return placement, None
        carrier = avatar_worlds[placement.avatar]
        world = attachment_pose(carrier, placement.socket, engine.cuesheet.cast.sockets)
        return world, {"avatar": placement.avatar, "socket": placement.socket}

    props_json: dict[str, Any] = {}
    for name, prop in state.props.items():
        world, attached = resolve_placement(prop.placement)
        props_json[name] = {
            "world": _pose_json(world),
            "attached_to": attached,
            "visible": prop.visible,
            "light": (
                {"intensity": prop.light.intensity, "color": list(prop.light.color)}
                if prop.light
                else None
            ),
            "audio_playing": prop.audio_playing,
        }

    camera_world, camera_attached = resolve_placement(state.camera.placement)

    return {
        "type": "snapshot",
        "tick": tick,
        "time": time_s,
        "cuelist": state.active_cuelist,
        "pointer": state.pointer,
        "cue": engine.current_cue_id(),
        "bypass": {f"{c}:{i}": flag for (c, i), flag in sorted(state.bypass_overrides.items())},
        "avatars": avatars_json,
        "props": props_json,
        "camera": {
            "world": _pose_json(camera_world),
            "attached_to": camera_attached,
            "fade_level": state.camera.fade_level,
        },
        "sequences": [
            {
                "sequence": s.sequence,
                "frame": s.frame,
                "start_frame": s.start_frame,
                "end_frame": s.end_frame,
                "rate": s.rate,
            }
            for s in sequences
        ],
        "effects": [
            {"tick": at_tick, **effect_to_dict(effect)} for at_tick, effect in effects_log
        ],
        "state_hash": state_hash(engine.state),
    }


def to_wire(payload: Mapping[str, Any]) -> str:
    """Canonical JSON for the wire: sorted keys, compact separators."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))
