"""Cue sheets, Sets, bypass and deterministic state reconstruction.

A show is a *cue sheet*: named cuelists of cue ids, each cue a bundle of
*Sets*.  A Set is one declarative change (place an avatar on a goal,
attach a prop, fade the camera, emit an OSC message...) and can be
bypassed, authored or live.  ``go`` applies the next cue on top of the
current state; ``goback`` and bypass edits rebuild the state by
replaying the cuelist prefix from the initialization state, so where
the show stands is always a pure function of (cuelist, pointer, bypass
overrides) plus the anchor roots recorded when cues first fired.

The engine is renderer-agnostic: applying a cue returns *effects*
(plain values) that the service layer forwards; engine state itself
holds only placements and flags and hashes canonically.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Union

from . import devio
from .scene import (
    AvatarDef,
    Dependent,
    GoalKind,
    GoalKindMismatch,
    Level,
    MocapSource,
    PlayerSource,
    PropDef,
    PropKind,
    Source,
    UnknownGoal,
    UnknownSocket,
    attachment_pose,
    resolve_goal,
)
from .stagemath import (
    FadeDirection,
    OffsetTransform,
    Pose,
    Vec3,
    apply_offset,
    compute_offset,
    fade_level,
)
from .strictjson import DuplicateKey, MalformedDocument, is_bool, is_number, is_text, parse_strict

__all__ = [
    "EngineError",
    "EndOfCuelist",
    "BeforeStart",
    "UnknownCuelist",
    "UnknownSetRef",
    "DuplicateCueId",
    "UndefinedCueInCuelist",
    "CuesheetFormatError",
    "PlaySalient",
    "SwitchSource",
    "AvatarSet",
    "LightChange",
    "Attach",
    "Detach",
    "DETACH",
    "PropSet",
    "FadeSpec",
    "CameraSet",
    "SequenceSet",
    "OscSet",
    "SetSpec",
    "Cue",
    "Cast",
    "Cuesheet",
    "SendOsc",
    "TriggerSalient",
    "StartSequence",
    "StartFade",
    "AudioCommand",
    "ParticleRestart",
    "Effect",
    "AvatarState",
    "PropState",
    "ActiveFade",
    "CameraState",
    "EngineState",
    "initial_state",
    "apply_cue",
    "state_to_dict",
    "state_hash",
    "parse_cuesheet",
    "Engine",
]


# --- errors ---------------------------------------------------------------


class EngineError(Exception):
    """Base class for cue sheet and engine problems."""


class EndOfCuelist(EngineError):
    def __init__(self, cuelist: str):
        super().__init__(f"cuelist {cuelist!r} has no further cue")
        self.cuelist = cuelist


class BeforeStart(EngineError):
    def __init__(self) -> None:
        super().__init__("already at the initialization state")


class UnknownCuelist(EngineError):
    def __init__(self, name: str):
        super().__init__(f"no cuelist named {name!r}")
        self.name = name


class UnknownSetRef(EngineError):
    def __init__(self, cue_id: Any, set_index: int):
        super().__init__(f"cue {cue_id} has no set index {set_index}")
        self.cue_id = cue_id
        self.set_index = set_index


class DuplicateCueId(EngineError):
    def __init__(self, cue_id: int):
        super().__init__(f"cue id {cue_id} defined more than once")
        self.cue_id = cue_id


class UndefinedCueInCuelist(EngineError):
    def __init__(self, cuelist: str, cue_id: int):
        super().__init__(f"cuelist {cuelist!r} references undefined cue {cue_id}")
        self.cuelist = cuelist
        self.cue_id = cue_id


class CuesheetFormatError(EngineError):
    """One or more problems found while parsing a cue sheet."""

    def __init__(self, errors: list[Exception]):
        super().__init__("; ".join(str(e) for e in errors))
        self.errors = list(errors)


# --- Sets -----------------------------------------------------------------


@dataclass(frozen=True)
class PlaySalient:
    salient: str
    idle: str


@dataclass(frozen=True)
class SwitchSource:
    source: Source


AvatarAnimation = Union[PlaySalient, SwitchSource]


@dataclass(frozen=True)
class AvatarSet:
    target: str
    bypass: bool = False
    goal: str | None = None
    visible: bool | None = None
    animation: AvatarAnimation | None = None


@dataclass(frozen=True)
class LightChange:
    intensity: float
    color: tuple[float, float, float] = (1.0, 1.0, 1.0)


@dataclass(frozen=True)
class Attach:
    avatar: str
    socket: str


@dataclass(frozen=True)
class Detach:
    pass


DETACH = Detach()


@dataclass(frozen=True)
class PropSet:
    target: str
    bypass: bool = False
    goal: str | None = None
    attach: Attach | Detach | None = None
    light: LightChange | None = None
    particles: bool = False
    audio: str | None = None  # "play" | "stop"
    visible: bool | None = None


@dataclass(frozen=True)
class FadeSpec:
    direction: FadeDirection
    duration: float


@dataclass(frozen=True)
class CameraSet:
    bypass: bool = False
    goal: str | None = None
    attach_to: Attach | Detach | None = None
    fade: FadeSpec | None = None


@dataclass(frozen=True)
class SequenceSet:
    sequence: str
    start_frame: int
    end_frame: int
    rate: float
    bypass: bool = False


@dataclass(frozen=True)
class OscSet:
    address: str
    args: tuple[int | float | str, ...] = ()
    bypass: bool = False


SetSpec = Union[AvatarSet, PropSet, CameraSet, SequenceSet, OscSet]


@dataclass(frozen=True)
class Cue:
    id: int
    label: str
    sets: tuple[SetSpec, ...]


@dataclass(frozen=True)
class Cast:
    avatars: tuple[AvatarDef, ...] = ()
    props: tuple[PropDef, ...] = ()
    cameras: tuple[str, ...] = ()
    sockets: Mapping[str, Pose] = field(default_factory=dict)

    def avatar_ids(self) -> tuple[str, ...]:
        return tuple(a.id for a in self.avatars)

    def prop_ids(self) -> tuple[str, ...]:
        return tuple(p.id for p in self.props)


@dataclass(frozen=True)
class Cuesheet:
    cast: Cast
    devices: devio.DeviceConfig
    cuelists: Mapping[str, tuple[int, ...]]
    cues: Mapping[int, Cue]


# --- effects ----------------------------------------------------------------


@dataclass(frozen=True)
class SendOsc:
    address: str
    args: tuple[int | float | str, ...] = ()


@dataclass(frozen=True)
class TriggerSalient:
    avatar: str
    salient: str
    idle: str


@dataclass(frozen=True)
class StartSequence:
    sequence: str
    start_frame: int
    end_frame: int
    rate: float


@dataclass(frozen=True)
class StartFade:
    direction: FadeDirection
    duration: float


@dataclass(frozen=True)
class AudioCommand:
    prop: str
    command: str  # "play" | "stop"


@dataclass(frozen=True)
class ParticleRestart:
    prop: str


Effect = Union[SendOsc, TriggerSalient, StartSequence, StartFade, AudioCommand, ParticleRestart]


# --- engine state -----------------------------------------------------------


@dataclass(frozen=True)
class AvatarState:
    offset: OffsetTransform
    anchor: Pose
    visible: bool
    source: Source
    animation: PlaySalient | None = None


@dataclass(frozen=True)
class PropState:
    placement: Pose | Attach
    visible: bool = True
    light: LightChange | None = None
    audio_playing: bool = False


@dataclass(frozen=True)
class ActiveFade:
    direction: FadeDirection
    duration: float
    elapsed: float


@dataclass(frozen=True)
class CameraState:
    placement: Pose | Attach
    fade_level: float = 1.0
    fade: ActiveFade | None = None


@dataclass(frozen=True)
class EngineState:
    active_cuelist: str
    pointer: int  # -1 is the initialization state
    avatars: Mapping[str, AvatarState]
    props: Mapping[str, PropState]
    camera: CameraState
    bypass_overrides: Mapping[tuple[int, int], bool]
    anchor_log: Mapping[tuple[int, int], Pose]


def initial_state(cuesheet: Cuesheet) -> EngineState:
    """The state before any cue has fired: cast defaults, identity placements."""
    avatars = {
        a.id: AvatarState(
            offset=OffsetTransform.identity(),
            anchor=Pose.identity(),
            visible=a.visible,
            source=a.source,
        )
        for a in cuesheet.cast.avatars
    }
    props = {}
    for p in cuesheet.cast.props:
        placement: Pose | Attach
        if p.dependent is not None:
            placement = Attach(p.dependent.avatar, p.dependent.socket)
        else:
            placement = Pose.identity()
        props[p.id] = PropState(placement=placement)
    return EngineState(
        active_cuelist=next(iter(cuesheet.cuelists)),
        pointer=-1,
        avatars=avatars,
        props=props,
        camera=CameraState(placement=Pose.identity()),
        bypass_overrides={},
        anchor_log={},
    )


def _effective_bypass(state: EngineState, cue_id: int, index: int, spec: SetSpec) -> bool:
    override = state.bypass_overrides.get((cue_id, index))
    return spec.bypass if override is None else override


def _carrier_world(
    avatars: Mapping[str, AvatarState],
    attach: Attach,
    root: Pose,
) -> Pose:
    carrier = avatars[attach.avatar]
    return apply_offset(carrier.offset, root)


def apply_cue(
    state: EngineState,
    cue: Cue,
    cuesheet: Cuesheet,
    level: Level,
    live_roots: Mapping[str, Pose],
    replay_log: Mapping[tuple[int, int], Pose] | None = None,
) -> tuple[EngineState, list[Effect]]:
    """Apply one cue's non-bypassed Sets; pure, returns (state, effects).

    Avatar goal placement and detach both need a reference root for the
    target or carrier.  Live application reads it from ``live_roots``
    (identity if the subject has not streamed yet) and records it in the
    anchor log; a replay passes the previous log via ``replay_log`` so
    reconstruction reuses exactly the roots that fired originally.
    """
    effects: list[Effect] = []
    avatars = dict(state.avatars)
    props = dict(state.props)
    camera = state.camera
    log = dict(state.anchor_log)

    def anchor_root(key: tuple[int, int], subject_id: str) -> Pose:
        if replay_log is not None:
            logged = replay_log.get(key)
            if logged is not None:
                return logged
        return live_roots.get(subject_id, Pose.identity())

    for index, spec in enumerate(cue.sets):
        if _effective_bypass(state, cue.id, index, spec):
            continue
        key = (cue.id, index)

        if isinstance(spec, AvatarSet):
            avatar = avatars[spec.target]
            if spec.goal is not None:
                goal = resolve_goal(level, spec.goal, GoalKind.AVATAR)
                anchor = anchor_root(key, spec.target)
                log[key] = anchor
                avatar = replace(
                    avatar, offset=compute_offset(anchor, goal.pose), anchor=anchor
                )
            if spec.visible is not None:
                avatar = replace(avatar, visible=spec.visible)
            if isinstance(spec.animation, PlaySalient):
                effects.append(
                    TriggerSalient(spec.target, spec.animation.salient, spec.animation.idle)
                )
                avatar = replace(avatar, animation=spec.animation)
            elif isinstance(spec.animation, SwitchSource):
                avatar = replace(avatar, source=spec.animation.source)
            avatars[spec.target] = avatar

        elif isinstance(spec, PropSet):
            prop = props[spec.target]
            if spec.goal is not None:
                goal = resolve_goal(level, spec.goal, GoalKind.PROP)
                prop = replace(prop, placement=goal.pose)
            if isinstance(spec.attach, Attach):
                prop = replace(prop, placement=spec.attach)
            elif isinstance(spec.attach, Detach) and isinstance(prop.placement, Attach):
                root = anchor_root(key, prop.placement.avatar)
                log[key] = root
                world = _carrier_world(avatars, prop.placement, root)
                frozen = attachment_pose(world, prop.placement.socket, cuesheet.cast.sockets)
                prop = replace(prop, placement=frozen)
            if spec.light is not None:
                prop = replace(prop, light=spec.light)
            if spec.particles:
                effects.append(ParticleRestart(spec.target))
            if spec.audio is not None:
                effects.append(AudioCommand(spec.target, spec.audio))
                prop = replace(prop, audio_playing=spec.audio == "play")
            if spec.visible is not None:
                prop = replace(prop, visible=spec.visible)
            props[spec.target] = prop

        elif isinstance(spec, CameraSet):
            if spec.goal is not None:
                goal = resolve_goal(level, spec.goal, GoalKind.CAMERA)
                camera = replace(camera, placement=goal.pose)
            if isinstance(spec.attach_to, Attach):
                camera = replace(camera, placement=spec.attach_to)
            elif isinstance(spec.attach_to, Detach) and isinstance(camera.placement, Attach):
                root = anchor_root(key, camera.placement.avatar)
                log[key] = root
                world = _carrier_world(avatars, camera.placement, root)
                frozen = attachment_pose(world, camera.placement.socket, cuesheet.cast.sockets)
                camera = replace(camera, placement=frozen)
            if spec.fade is not None:
                start = 0.0 if spec.fade.direction is FadeDirection.IN else 1.0
                camera = replace(
                    camera,
                    fade_level=start,
                    fade=ActiveFade(spec.fade.direction, spec.fade.duration, 0.0),
                )
                effects.append(StartFade(spec.fade.direction, spec.fade.duration))

        elif isinstance(spec, SequenceSet):
            effects.append(
                StartSequence(spec.sequence, spec.start_frame, spec.end_frame, spec.rate)
            )

        elif isinstance(spec, OscSet):
            effects.append(SendOsc(spec.address, spec.args))

    return (
        replace(state, avatars=avatars, props=props, camera=camera, anchor_log=log),
        effects,
    )


# --- canonical serialization -------------------------------------------------


def _pose_dict(pose: Pose) -> dict[str, Any]:
    return {"pos": [pose.position.x, pose.position.y, pose.position.z], "yaw": pose.yaw}


def _offset_dict(offset: OffsetTransform) -> dict[str, Any]:
    t = offset.translation
    return {"theta": offset.theta, "t": [t.x, t.y, t.z]}


def _placement_dict(placement: Pose | Attach) -> dict[str, Any]:
    if isinstance(placement, Pose):
        return {"pose": _pose_dict(placement)}
    return {"attached": {"avatar": placement.avatar, "socket": placement.socket}}


def _source_dict(source: Source) -> Any:
    if isinstance(source, MocapSource):
        return {"mocap": source.subject}
    return "player"


def state_to_dict(state: EngineState) -> dict[str, Any]:
    """Plain-data view of the engine state with stable key shapes."""
    return {
        "cuelist": state.active_cuelist,
        "pointer": state.pointer,
        "avatars": {
            name: {
                "offset": _offset_dict(a.offset),
                "anchor": _pose_dict(a.anchor),
                "visible": a.visible,
                "source": _source_dict(a.source),
                "animation": (
                    {"salient": a.animation.salient, "idle": a.animation.idle}
                    if a.animation
                    else None
                ),
            }
            for name, a in state.avatars.items()
        },
        "props": {
            name: {
                "placement": _placement_dict(p.placement),
                "visible": p.visible,
                "light": (
                    {"intensity": p.light.intensity, "color": list(p.light.color)}
                    if p.light
                    else None
                ),
                "audio_playing": p.audio_playing,
            }
            for name, p in state.props.items()
        },
        "camera": {
            "placement": _placement_dict(state.camera.placement),
            "fade_level": state.camera.fade_level,
            "fade": (
                {
                    "direction": state.camera.fade.direction.value,
                    "duration": state.camera.fade.duration,
                    "elapsed": state.camera.fade.elapsed,
                }
                if state.camera.fade
                else None
            ),
        },
        "bypass": {f"{c}:{i}": flag for (c, i), flag in state.bypass_overrides.items()},
        "anchors": {f"{c}:{i}": _pose_dict(p) for (c, i), p in state.anchor_log.items()},
    }


def state_hash(state: EngineState) -> str:
    """sha256 over the canonical JSON form of the state."""
    canon = json.dumps(state_to_dict(state), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


# --- the engine ---------------------------------------------------------------


class Engine:
    """Sequencer around a cue sheet: go/goback, cuelist selection, bypass.

    ``live_roots`` maps avatar ids to their latest captured root pose;
    the service layer keeps it fresh.  All placement state lives in
    ``state`` and is rebuilt, never patched, on anything that rewinds.
    """

    def __init__(self, cuesheet: Cuesheet, level: Level):
        self.cuesheet = cuesheet
        self.level = level
        self.live_roots: dict[str, Pose] = {}
        self.state = initial_state(cuesheet)

    # -- queries --

    def cuelist_ids(self) -> tuple[int, ...]:
        return self.cuesheet.cuelists[self.state.active_cuelist]

    def current_cue_id(self) -> int | None:
        ids = self.cuelist_ids()
        return ids[self.state.pointer] if self.state.pointer >= 0 else None

    def effective_bypass(self, cue_id: int, set_index: int) -> bool:
        cue = self.cuesheet.cues.get(cue_id)
        if cue is None or not 0 <= set_index < len(cue.sets):
            raise UnknownSetRef(cue_id, set_index)
        return _effective_bypass(self.state, cue_id, set_index, cue.sets[set_index])

    def state_hash(self) -> str:
        return state_hash(self.state)

    # -- sequencing --

    def go(self) -> list[Effect]:
        """Advance to the next cue and apply it on top of the current state."""
        ids = self.cuelist_ids()
        if self.state.pointer + 1 >= len(ids):
            raise EndOfCuelist(self.state.active_cuelist)
        pointer = self.state.pointer + 1
        cue = self.cuesheet.cues[ids[pointer]]
        staged = replace(self.state, pointer=pointer)
        self.state, effects = apply_cue(staged, cue, self.cuesheet, self.level, self.live_roots)
        return effects

    def goback(self) -> list[Effect]:
        """Step back one cue by replaying the prefix; re-emits the effects
        of the cue that becomes current (none when landing on init)."""
        if self.state.pointer < 0:
            raise BeforeStart()
        return self._resync(self.state.pointer - 1, emit=True)

    def select_cuelist(self, name: str | None) -> None:
        """Switch cuelists (None cycles); resets to the initialization state
        but keeps operator bypass overrides."""
        names = list(self.cuesheet.cuelists)
        if name is None:
            name = names[(names.index(self.state.active_cuelist) + 1) % len(names)]
        elif name not in self.cuesheet.cuelists:
            raise UnknownCuelist(name)
        fresh = initial_state(self.cuesheet)
        self.state = replace(
            fresh, active_cuelist=name, bypass_overrides=self.state.bypass_overrides
        )

    def set_bypass(self, cue_id: int, set_index: int, flag: bool) -> None:
        """Override a Set's bypass and resynchronize the current state.

        The override table is normalized (entries equal to the authored
        flag are dropped) and the cuelist prefix is replayed under the
        new table without re-emitting effects, so bypassing and then
        un-bypassing is indistinguishable from never having bypassed.
        """
        cue = self.cuesheet.cues.get(cue_id)
        if cue is None or not 0 <= set_index < len(cue.sets):
            raise UnknownSetRef(cue_id, set_index)
        overrides = dict(self.state.bypass_overrides)
        key = (cue_id, set_index)
        if flag == cue.sets[set_index].bypass:
            overrides.pop(key, None)
        else:
            overrides[key] = flag
        self.state = replace(self.state, bypass_overrides=overrides)
        self._resync(self.state.pointer, emit=False)

    def toggle_bypass(self, cue_id: int, set_index: int) -> None:
        self.set_bypass(cue_id, set_index, not self.effective_bypass(cue_id, set_index))

    def _resync(self, pointer: int, emit: bool) -> list[Effect]:
        old_log = self.state.anchor_log
        ids = self.cuesheet.cuelists[self.state.active_cuelist]
        rebuilt = replace(
            initial_state(self.cuesheet),
            active_cuelist=self.state.active_cuelist,
            bypass_overrides=self.state.bypass_overrides,
        )
        effects: list[Effect] = []
        for i in range(pointer + 1):
            cue = self.cuesheet.cues[ids[i]]
            rebuilt = replace(rebuilt, pointer=i)
            rebuilt, effects = apply_cue(
                rebuilt, cue, self.cuesheet, self.level, self.live_roots, replay_log=old_log
            )
        self.state = rebuilt
        return effects if emit else []

    # -- live trims and continuous parameters --

    def execute(self, action: devio.Action) -> list[Effect]:
        """Run one operator action against the engine."""
        if isinstance(action, devio.Go):
            return self.go()
        if isinstance(action, devio.GoBack):
            return self.goback()
        if isinstance(action, devio.SelectCuelist):
            self.select_cuelist(action.name)
            return []
        if isinstance(action, devio.Bypass):
            cue_id = action.cue
            if cue_id is None:
                current = self.current_cue_id()
                if current is None:
                    raise BeforeStart()
                cue_id = current
            if action.mode == "toggle":
                self.toggle_bypass(cue_id, action.set_index)
            else:
                self.set_bypass(cue_id, action.set_index, action.mode == "on")
            return []
        if isinstance(action, devio.Nudge):
            self.state = devio.apply_nudge(
                self.state, self.cuesheet, action.target, action.dx, action.dy
            )
            return []
        if isinstance(action, devio.Rotate):
            self.state = devio.apply_rotate(
                self.state, self.cuesheet, action.target, action.degrees, self.live_roots
            )
            return []
        if isinstance(action, devio.Fader):
            self._write_fader(action)
            return []
        raise TypeError(f"unknown action {action!r}")

    def _write_fader(self, action: devio.Fader) -> None:
        if action.value is None:
            raise ValueError(f"fader {action.path!r} has no value")
        value = min(max(float(action.value), 0.0), 1.0)
        if action.path == "camera/fade":
            # manual override cancels any running fade
            self.state = replace(
                self.state, camera=replace(self.state.camera, fade_level=value, fade=None)
            )
            return
        head, _, prop_id = action.path.partition("/")
        if head == "light" and prop_id in self.state.props:
            prop = self.state.props[prop_id]
            color = prop.light.color if prop.light else (1.0, 1.0, 1.0)
            props = dict(self.state.props)
            props[prop_id] = replace(prop, light=LightChange(value, color))
            self.state = replace(self.state, props=props)
            return
        raise devio.UnknownTarget(action.path)

    def tick_fade(self, dt: float) -> None:
        """Advance an active camera fade by ``dt`` seconds."""
        fade = self.state.camera.fade
        if fade is None or dt <= 0:
            return
        elapsed = fade.elapsed + dt
        level = fade_level(elapsed, fade.duration, fade.direction)
        done = elapsed >= fade.duration
        camera = replace(
            self.state.camera,
            fade_level=level,
            fade=None if done else replace(fade, elapsed=elapsed),
        )
        self.state = replace(self.state, camera=camera)


# --- parsing -------------------------------------------------------------------


def _require(
    obj: Mapping[str, Any], where: str, allowed: tuple[str, ...], errors: list[Exception]
) -> None:
    for key in obj:
        if key not in allowed:
            errors.append(MalformedDocument(where, f"unknown key {key!r}"))


def _read_source(raw: Any, where: str, errors: list[Exception]) -> Source | None:
    if raw == "player":
        return PlayerSource()
    if isinstance(raw, dict) and set(raw) == {"mocap"} and is_text(raw["mocap"]) and raw["mocap"]:
        return MocapSource(raw["mocap"])
    errors.append(MalformedDocument(where, "source must be \"player\" or {\"mocap\": subject}"))
    return None


def _read_cast(raw: Any, errors: list[Exception]) -> Cast:
    if raw is None:
        return Cast()
    if not isinstance(raw, dict):
        errors.append(MalformedDocument("cast", "must be an object"))
        return Cast()
    _require(raw, "cast", ("avatars", "props", "cameras", "sockets"), errors)

    sockets: dict[str, Pose] = {}
    raw_sockets = raw.get("sockets", {})
    if not isinstance(raw_sockets, dict):
        errors.append(MalformedDocument("cast.sockets", "must be an object"))
    else:
        for name, entry in raw_sockets.items():
            where = f"cast.sockets[{name!r}]"
            if not isinstance(entry, dict) or set(entry) != {"pos", "yaw"}:
                errors.append(MalformedDocument(where, "socket must have exactly pos and yaw"))
                continue
            pos, yaw = entry["pos"], entry["yaw"]
            if (
                not isinstance(pos, list)
                or len(pos) != 3
                or not all(is_number(c) and math.isfinite(c) for c in pos)
                or not is_number(yaw)
                or not math.isfinite(yaw)
            ):
                errors.append(MalformedDocument(where, "pos must be three finite numbers, yaw finite"))
                continue
            sockets[name] = Pose(Vec3(float(pos[0]), float(pos[1]), float(pos[2])), float(yaw))

    taken: set[str] = set()

    avatars: list[AvatarDef] = []
    raw_avatars = raw.get("avatars", [])
    if not isinstance(raw_avatars, list):
        errors.append(MalformedDocument("cast.avatars", "must be a list"))
        raw_avatars = []
    for i, entry in enumerate(raw_avatars):
        where = f"cast.avatars[{i}]"
        if not isinstance(entry, dict):
            errors.append(MalformedDocument(where, "must be an object"))
            continue
        _require(entry, where, ("id", "source", "appearance", "visible"), errors)
        avatar_id = entry.get("id")
        if not is_text(avatar_id) or not avatar_id:
            errors.append(MalformedDocument(where, "'id' must be non-empty text"))
            continue
        if avatar_id in taken:
            errors.append(MalformedDocument(where, f"id {avatar_id!r} already used"))
            continue
        source = _read_source(entry.get("source"), where, errors)
        if source is None:
            continue
        appearance = entry.get("appearance", "")
        visible = entry.get("visible", True)
        if not is_text(appearance) or not is_bool(visible):
            errors.append(MalformedDocument(where, "'appearance' must be text, 'visible' boolean"))
            continue
        taken.add(avatar_id)
        avatars.append(AvatarDef(avatar_id, source, appearance, visible))

    props: list[PropDef] = []
    raw_props = raw.get("props", [])
    if not isinstance(raw_props, list):
        errors.append(MalformedDocument("cast.props", "must be a list"))
        raw_props = []
    avatar_ids = {a.id for a in avatars}
    for i, entry in enumerate(raw_props):
        where = f"cast.props[{i}]"
        if not isinstance(entry, dict):
            errors.append(MalformedDocument(where, "must be an object"))
            continue
        _require(entry, where, ("id", "kind", "mode"), errors)
        prop_id = entry.get("id")
        if not is_text(prop_id) or not prop_id:
            errors.append(MalformedDocument(where, "'id' must be non-empty text"))
            continue
        if prop_id in taken:
            errors.append(MalformedDocument(where, f"id {prop_id!r} already used"))
            continue
        try:
            kind = PropKind(entry.get("kind"))
        except ValueError:
            errors.append(
                MalformedDocument(where, "'kind' must be mesh, light, particles or audio")
            )
            continue
        dependent: Dependent | None = None
        mode = entry.get("mode", "autonomous")
        if mode != "autonomous":
            bad_mode = (
                not isinstance(mode, dict)
                or set(mode) != {"dependent"}
                or not isinstance(mode["dependent"], dict)
                or set(mode["dependent"]) != {"avatar", "socket"}
            )
            if bad_mode:
                errors.append(
                    MalformedDocument(
                        where, "mode must be \"autonomous\" or {\"dependent\": {avatar, socket}}"
                    )
                )
                continue
            carrier = mode["dependent"]["avatar"]
            socket = mode["dependent"]["socket"]
            if carrier not in avatar_ids:
                errors.append(MalformedDocument(where, f"unknown carrier avatar {carrier!r}"))
                continue
            if socket not in sockets:
                errors.append(UnknownSocket(socket))
                continue
            dependent = Dependent(carrier, socket)
        taken.add(prop_id)
        props.append(PropDef(prop_id, kind, dependent))

    cameras: list[str] = []
    raw_cameras = raw.get("cameras", [])
    if not isinstance(raw_cameras, list) or not all(is_text(c) and c for c in raw_cameras):
        errors.append(MalformedDocument("cast.cameras", "must be a list of names"))
    else:
        for name in raw_cameras:
            if name in taken or name in cameras:
                errors.append(MalformedDocument("cast.cameras", f"id {name!r} already used"))
            else:
                cameras.append(name)

    return Cast(tuple(avatars), tuple(props), tuple(cameras), sockets)


def _read_attach(raw: Any, where: str, avatar_ids: set[str], sockets: Mapping[str, Pose],
                 errors: list[Exception]) -> Attach | Detach | None:
    if raw == "detach":
        return DETACH
    if isinstance(raw, dict) and set(raw) == {"avatar", "socket"}:
        avatar, socket = raw["avatar"], raw["socket"]
        if avatar not in avatar_ids:
            errors.append(MalformedDocument(where, f"unknown avatar {avatar!r}"))
            return None
        if socket not in sockets:
            errors.append(UnknownSocket(socket))
            return None
        return Attach(avatar, socket)
    errors.append(MalformedDocument(where, "attach must be \"detach\" or {avatar, socket}"))
    return None


def _read_goal_ref(
    raw: Any, where: str, kind: GoalKind, level: Level, errors: list[Exception]
) -> str | None:
    if not is_text(raw) or not raw:
        errors.append(MalformedDocument(where, "'goal' must be a goal id"))
        return None
    try:
        resolve_goal(level, raw, kind)
    except (UnknownGoal, GoalKindMismatch) as exc:
        errors.append(exc)
        return None
    return raw


def _read_set(
    raw: Any, where: str, cast: Cast, level: Level, errors: list[Exception]
) -> SetSpec | None:
    if not isinstance(raw, dict):
        errors.append(MalformedDocument(where, "set must be an object"))
        return None
    set_type = raw.get("type")
    avatar_ids = set(cast.avatar_ids())
    prop_ids = set(cast.prop_ids())
    bypass = raw.get("bypass", False)
    if not is_bool(bypass):
        errors.append(MalformedDocument(where, "'bypass' must be a boolean"))
        return None

    if set_type == "avatar":
        _require(raw, where, ("type", "target", "bypass", "goal", "visible", "animation"), errors)
        target = raw.get("target")
        if target not in avatar_ids:
            errors.append(MalformedDocument(where, f"unknown avatar {target!r}"))
            return None
        goal = None
        if "goal" in raw:
            goal = _read_goal_ref(raw["goal"], where, GoalKind.AVATAR, level, errors)
            if goal is None:
                return None
        visible = raw.get("visible")
        if visible is not None and not is_bool(visible):
            errors.append(MalformedDocument(where, "'visible' must be a boolean"))
            return None
        animation: AvatarAnimation | None = None
        if "animation" in raw:
            raw_anim = raw["animation"]
            if isinstance(raw_anim, dict) and set(raw_anim) == {"trigger_salient"}:
                inner = raw_anim["trigger_salient"]
                if (
                    not isinstance(inner, dict)
                    or set(inner) != {"salient", "idle"}
                    or not all(is_text(inner[k]) and inner[k] for k in ("salient", "idle"))
                ):
                    errors.append(
                        MalformedDocument(where, "trigger_salient needs salient and idle clip ids")
                    )
                    return None
                animation = PlaySalient(inner["salient"], inner["idle"])
            elif isinstance(raw_anim, dict) and set(raw_anim) == {"switch_source"}:
                source = _read_source(raw_anim["switch_source"], where, errors)
                if source is None:
                    return None
                animation = SwitchSource(source)
            else:
                errors.append(
                    MalformedDocument(where, "animation must be trigger_salient or switch_source")
                )
                return None
        return AvatarSet(target, bypass, goal, visible, animation)

    if set_type == "prop":
        _require(
            raw,
            where,
            ("type", "target", "bypass", "goal", "attach", "light", "particles", "audio", "visible"),
            errors,
        )
        target = raw.get("target")
        if target not in prop_ids:
            errors.append(MalformedDocument(where, f"unknown prop {target!r}"))
            return None
        goal = None
        if "goal" in raw:
            goal = _read_goal_ref(raw["goal"], where, GoalKind.PROP, level, errors)
            if goal is None:
                return None
        attach = None
        if "attach" in raw:
            attach = _read_attach(raw["attach"], where, avatar_ids, cast.sockets, errors)
            if attach is None:
                return None
        light = None
        if "light" in raw:
            raw_light = raw["light"]
            ok = (
                isinstance(raw_light, dict)
                and set(raw_light) <= {"intensity", "color"}
                and "intensity" in raw_light
                and is_number(raw_light["intensity"])
                and 0.0 <= raw_light["intensity"] <= 1.0
            )
            color = (1.0, 1.0, 1.0)
            if ok and "color" in raw_light:
                raw_color = raw_light["color"]
                ok = (
                    isinstance(raw_color, list)
                    and len(raw_color) == 3
                    and all(is_number(c) and 0.0 <= c <= 1.0 for c in raw_color)
                )
                if ok:
                    color = (float(raw_color[0]), float(raw_color[1]), float(raw_color[2]))
            if not ok:
                errors.append(
                    MalformedDocument(where, "light needs intensity 0..1 and optional rgb color 0..1")
                )
                return None
            light = LightChange(float(raw_light["intensity"]), color)
        particles = raw.get("particles", False)
        if not is_bool(particles):
            errors.append(MalformedDocument(where, "'particles' must be a boolean restart flag"))
            return None
        audio = raw.get("audio")
        if audio is not None and audio not in ("play", "stop"):
            errors.append(MalformedDocument(where, "'audio' must be \"play\" or \"stop\""))
            return None
        visible = raw.get("visible")
        if visible is not None and not is_bool(visible):
            errors.append(MalformedDocument(where, "'visible' must be a boolean"))
            return None
        return PropSet(target, bypass, goal, attach, light, particles, audio, visible)

    if set_type == "camera":
        _require(raw, where, ("type", "bypass", "goal", "attach_to", "fade"), errors)
        goal = None
        if "goal" in raw:
            goal = _read_goal_ref(raw["goal"], where, GoalKind.CAMERA, level, errors)
            if goal is None:
                return None
        attach_to = None
        if "attach_to" in raw:
            attach_to = _read_attach(raw["attach_to"], where, avatar_ids, cast.sockets, errors)
            if attach_to is None:
                return None
        fade = None
        if "fade" in raw:
            raw_fade = raw["fade"]
            ok = (
                isinstance(raw_fade, dict)
                and set(raw_fade) == {"direction", "duration"}
                and raw_fade["direction"] in ("in", "out")
                and is_number(raw_fade["duration"])
                and raw_fade["duration"] > 0
            )
            if not ok:
                errors.append(
                    MalformedDocument(where, "fade needs direction in/out and positive duration")
                )
                return None
            fade = FadeSpec(FadeDirection(raw_fade["direction"]), float(raw_fade["duration"]))
        return CameraSet(bypass, goal, attach_to, fade)

    if set_type == "sequence":
        _require(raw, where, ("type", "bypass", "sequence", "start_frame", "end_frame", "rate"), errors)
        sequence = raw.get("sequence")
        start = raw.get("start_frame")
        end = raw.get("end_frame")
        rate = raw.get("rate")
        ok = (
            is_text(sequence)
            and sequence
            and isinstance(start, int)
            and not is_bool(start)
            and isinstance(end, int)
            and not is_bool(end)
            and start <= end
            and is_number(rate)
            and rate > 0
        )
        if not ok:
            errors.append(
                MalformedDocument(
                    where, "sequence needs a name, start_frame <= end_frame and positive rate"
                )
            )
            return None
        return SequenceSet(sequence, start, end, float(rate), bypass)

    if set_type == "osc":
        _require(raw, where, ("type", "bypass", "address", "args"), errors)
        address = raw.get("address")
        if not is_text(address) or not address.startswith("/") or " " in address or "\0" in address:
            errors.append(MalformedDocument(where, f"bad OSC address {address!r}"))
            return None
        args: list[int | float | str] = []
        raw_args = raw.get("args", [])
        if not isinstance(raw_args, list):
            errors.append(MalformedDocument(where, "'args' must be a list"))
            return None
        for j, arg in enumerate(raw_args):
            if not isinstance(arg, dict) or len(arg) != 1:
                errors.append(MalformedDocument(where, f"args[{j}] must be one of i/f/s tagged"))
                return None
            tag, value = next(iter(arg.items()))
            if tag == "i" and isinstance(value, int) and not is_bool(value):
                if not -(2**31) <= value < 2**31:
                    errors.append(MalformedDocument(where, f"args[{j}] out of int32 range"))
                    return None
                args.append(value)
            elif tag == "f" and is_number(value) and math.isfinite(value):
                args.append(float(value))
            elif tag == "s" and is_text(value):
                args.append(value)
            else:
                errors.append(MalformedDocument(where, f"args[{j}] must be one of i/f/s tagged"))
                return None
        return OscSet(address, tuple(args), bypass)

    errors.append(
        MalformedDocument(where, f"type must be avatar/prop/camera/sequence/osc, got {set_type!r}")
    )
    return None


def parse_cuesheet(document: str, level: Level) -> Cuesheet:
    """Parse and cross-validate a cue sheet against its level.

    Collects every problem it can find and raises
    :class:`CuesheetFormatError` carrying the full list.
    """
    errors: list[Exception] = []
    try:
        data = parse_strict(document)
    except DuplicateKey as exc:
        dup: Exception
        if exc.key.isdigit():
            dup = DuplicateCueId(int(exc.key))
        else:
            dup = MalformedDocument("cuesheet", str(exc))
        raise CuesheetFormatError([dup]) from exc
    except ValueError as exc:
        raise CuesheetFormatError([MalformedDocument("cuesheet", f"invalid JSON: {exc}")]) from exc

    if not isinstance(data, dict):
        raise CuesheetFormatError([MalformedDocument("cuesheet", "top level must be an object")])
    _require(data, "cuesheet", ("cast", "devices", "cuelists", "cues"), errors)

    cast = _read_cast(data.get("cast"), errors)

    cues: dict[int, Cue] = {}
    raw_cues = data.get("cues")
    if not isinstance(raw_cues, dict):
        errors.append(MalformedDocument("cuesheet", "'cues' must be an object"))
        raw_cues = {}
    for key, raw_cue in raw_cues.items():
        where = f"cues[{key}]"
        try:
            cue_id = int(key)
        except ValueError:
            errors.append(MalformedDocument(where, "cue ids must be integer text"))
            continue
        if cue_id <= 0:
            errors.append(MalformedDocument(where, "cue ids must be positive"))
            continue
        if not isinstance(raw_cue, dict):
            errors.append(MalformedDocument(where, "cue must be an object"))
            continue
        _require(raw_cue, where, ("label", "sets"), errors)
        label = raw_cue.get("label", "")
        if not is_text(label):
            errors.append(MalformedDocument(where, "'label' must be text"))
            label = ""
        raw_sets = raw_cue.get("sets", [])
        if not isinstance(raw_sets, list):
            errors.append(MalformedDocument(where, "'sets' must be a list"))
            continue
        sets: list[SetSpec] = []
        broken = False
        for i, raw_set in enumerate(raw_sets):
            spec = _read_set(raw_set, f"{where}.sets[{i}]", cast, level, errors)
            if spec is None:
                broken = True
            else:
                sets.append(spec)
        if not broken:
            cues[cue_id] = Cue(cue_id, label, tuple(sets))

    cuelists: dict[str, tuple[int, ...]] = {}
    raw_cuelists = data.get("cuelists")
    if not isinstance(raw_cuelists, dict) or not raw_cuelists:
        errors.append(MalformedDocument("cuesheet", "'cuelists' must be a non-empty object"))
        raw_cuelists = {}
    for name, raw_ids in raw_cuelists.items():
        where = f"cuelists[{name!r}]"
        if not is_text(name) or not name:
            errors.append(MalformedDocument(where, "cuelist names must be non-empty text"))
            continue
        if not isinstance(raw_ids, list) or not all(
            isinstance(i, int) and not is_bool(i) for i in raw_ids
        ):
            errors.append(MalformedDocument(where, "must be a list of cue ids"))
            continue
        for cue_id in raw_ids:
            if cue_id not in cues:
                errors.append(UndefinedCueInCuelist(name, cue_id))
        cuelists[name] = tuple(raw_ids)

    devices = devio.parse_devices(data.get("devices"), errors)
    targets = set(cast.avatar_ids()) | set(cast.prop_ids()) | set(cast.cameras)
    errors.extend(
        devio.config_issues(devices, targets, set(cast.prop_ids()), cuelists, cues)
    )

    if errors:
        raise CuesheetFormatError(errors)
    return Cuesheet(cast, devices, cuelists, cues)
