"""Operator input: keyboard, gamepads and the MIDI desk.

Every raw event is routed onto exactly one named channel queue
(keyboard, gamepad, MIDI) and resolved against the binding tables of
the active cue sheet into engine actions.  Nothing here touches the
engine directly; dispatch returns plain action values and the service
loop decides when to run them.

Gamepad sticks are continuous: the tracker integrates deflection into
per-tick nudges (meters = deflection * speed * dt) with a radial dead
zone, and the bumper buttons spin the assigned target while held.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import TYPE_CHECKING, Any, Iterable, Mapping, Union

from .stagemath import OffsetTransform, Pose, Vec3, apply_offset, compose, rotate_in_place
from .strictjson import MalformedDocument, is_bool, is_number, is_text

if TYPE_CHECKING:  # pragma: no cover
    from .cueengine import Cuesheet, EngineState

__all__ = [
    "CHANNEL_KEYBOARD",
    "CHANNEL_GAMEPAD",
    "CHANNEL_MIDI",
    "MAX_GAMEPADS",
    "STICK_DEADZONE",
    "DeviceKind",
    "Edge",
    "InputEvent",
    "Go",
    "GoBack",
    "SelectCuelist",
    "Bypass",
    "Nudge",
    "Rotate",
    "Fader",
    "Action",
    "BindingError",
    "TooManyGamepads",
    "UnknownTarget",
    "GamepadAssignment",
    "MidiConfig",
    "DeviceConfig",
    "parse_binding",
    "default_nanokontrol_map",
    "parse_devices",
    "config_issues",
    "DispatchBus",
    "dispatch",
    "integrate_stick",
    "GamepadTracker",
    "apply_nudge",
    "apply_rotate",
]

CHANNEL_KEYBOARD = "AKN_Keyboard_Regie"
CHANNEL_GAMEPAD = "AKN_Gamepad_Regie"
CHANNEL_MIDI = "AKN_NanoK_Regie"

MAX_GAMEPADS = 4
STICK_DEADZONE = 0.1


class DeviceKind(str, Enum):
    KEYBOARD = "keyboard"
    GAMEPAD = "gamepad"
    MIDI = "midi"


class Edge(str, Enum):
    DOWN = "down"
    UP = "up"
    MOVE = "move"


@dataclass(frozen=True)
class InputEvent:
    """A raw operator event, normalized across device kinds.

    ``control`` is a key name for keyboards, an axis or button name for
    gamepads (lx/ly/rx/ry, a/b/x/y/lb/rb) and ``cc:<n>`` for the desk.
    ``value`` holds axis deflection or the 0..1 controller value.
    """

    kind: DeviceKind
    index: int
    control: str
    value: float
    edge: Edge


# --- actions ------------------------------------------------------------


@dataclass(frozen=True)
class Go:
    pass


@dataclass(frozen=True)
class GoBack:
    pass


@dataclass(frozen=True)
class SelectCuelist:
    """Switch cuelists; ``name`` of None cycles to the next one."""

    name: str | None


@dataclass(frozen=True)
class Bypass:
    """Flip a Set's bypass; ``cue`` of None means the current cue."""

    cue: int | None
    set_index: int
    mode: str  # "on" | "off" | "toggle"


@dataclass(frozen=True)
class Nudge:
    target: str
    dx: float
    dy: float


@dataclass(frozen=True)
class Rotate:
    target: str
    degrees: float


@dataclass(frozen=True)
class Fader:
    """Continuous parameter write; value None is filled from the event."""

    path: str
    value: float | None


Action = Union[Go, GoBack, SelectCuelist, Bypass, Nudge, Rotate, Fader]


class BindingError(ValueError):
    def __init__(self, text: str, reason: str):
        super().__init__(f"bad binding {text!r}: {reason}")
        self.text = text
        self.reason = reason


class TooManyGamepads(ValueError):
    def __init__(self, count: int):
        super().__init__(f"{count} gamepads configured, at most {MAX_GAMEPADS} supported")
        self.count = count


class UnknownTarget(KeyError):
    def __init__(self, target: str):
        super().__init__(target)
        self.target = target

    def __str__(self) -> str:
        return f"no avatar, prop or camera named {self.target!r}"


# --- bindings -----------------------------------------------------------


def parse_binding(text: str) -> Action:
    """Parse a binding string into an action.

    Grammar: ``go`` | ``goback`` | ``cycle`` | ``select:<cuelist>`` |
    ``bypass:<cue|current>:<set>:<on|off|toggle>`` |
    ``nudge:<target>:<dx>:<dy>`` | ``rotate:<target>:<degrees>`` |
    ``fader:<path>[:<value>]``.
    """
    if not is_text(text):
        raise BindingError(repr(text), "binding must be text")
    head, _, rest = text.partition(":")
    if head == "go" and not rest:
        return Go()
    if head == "goback" and not rest:
        return GoBack()
    if head == "cycle" and not rest:
        return SelectCuelist(None)
    if head == "select":
        if not rest:
            raise BindingError(text, "select needs a cuelist name")
        return SelectCuelist(rest)
    if head == "bypass":
        parts = rest.split(":")
        if len(parts) != 3:
            raise BindingError(text, "expected bypass:<cue>:<set>:<mode>")
        cue_text, set_text, mode = parts
        if mode not in ("on", "off", "toggle"):
            raise BindingError(text, "mode must be on, off or toggle")
        try:
            cue = None if cue_text == "current" else int(cue_text)
            set_index = int(set_text)
        except ValueError:
            raise BindingError(text, "cue and set must be integers") from None
        if set_index < 0:
            raise BindingError(text, "set index must be >= 0")
        return Bypass(cue, set_index, mode)
    if head == "nudge":
        parts = rest.split(":")
        if len(parts) != 3:
            raise BindingError(text, "expected nudge:<target>:<dx>:<dy>")
        try:
            return Nudge(parts[0], float(parts[1]), float(parts[2]))
        except ValueError:
            raise BindingError(text, "dx and dy must be numbers") from None
    if head == "rotate":
        parts = rest.split(":")
        if len(parts) != 2:
            raise BindingError(text, "expected rotate:<target>:<degrees>")
        try:
            return Rotate(parts[0], float(parts[1]))
        except ValueError:
            raise BindingError(text, "degrees must be a number") from None
    if head == "fader":
        if not rest:
            raise BindingError(text, "fader needs a parameter path")
        path, _, value_text = rest.partition(":")
        if not value_text:
            return Fader(path, None)
        try:
            return Fader(path, float(value_text))
        except ValueError:
            raise BindingError(text, "fader value must be a number") from None
    raise BindingError(text, "unknown action")


def default_nanokontrol_map() -> dict[str, Action]:
    """Factory wiring for a nanoKONTROL-style desk.

    Transport play/stop drive go/goback, record cycles cuelists, the
    solo row toggles bypass on the current cue's first eight Sets, and
    the first fader rides the camera fade.
    """
    table: dict[str, Action] = {
        "cc:41": Go(),
        "cc:42": GoBack(),
        "cc:45": SelectCuelist(None),
        "cc:0": Fader("camera/fade", None),
    }
    for i in range(8):
        table[f"cc:{32 + i}"] = Bypass(None, i, "toggle")
    return table


# --- device configuration ------------------------------------------------


@dataclass(frozen=True)
class GamepadAssignment:
    index: int
    target: str
    speed: float = 1.0  # meters per second at full deflection
    rotate_speed: float = 45.0  # degrees per second while a bumper is held


@dataclass(frozen=True)
class MidiConfig:
    device: str = ""
    map: Mapping[str, Action] = field(default_factory=dict)


@dataclass(frozen=True)
class DeviceConfig:
    keyboard: Mapping[str, Action] = field(default_factory=dict)
    midi: MidiConfig = field(default_factory=MidiConfig)
    gamepads: tuple[GamepadAssignment, ...] = ()


def parse_devices(data: Any, errors: list[Exception], where: str = "devices") -> DeviceConfig:
    """Read the devices block of a cue sheet; collects problems into ``errors``."""
    if data is None:
        return DeviceConfig(midi=MidiConfig(map=default_nanokontrol_map()))
    if not isinstance(data, dict):
        errors.append(MalformedDocument(where, "must be an object"))
        return DeviceConfig()
    for key in data:
        if key not in ("keyboard", "midi", "gamepads"):
            errors.append(MalformedDocument(where, f"unknown key {key!r}"))

    keyboard: dict[str, Action] = {}
    raw_keyboard = data.get("keyboard", {})
    if not isinstance(raw_keyboard, dict):
        errors.append(MalformedDocument(f"{where}.keyboard", "must be an object"))
    else:
        for key, binding in raw_keyboard.items():
            try:
                keyboard[key] = parse_binding(binding)
            except BindingError as exc:
                errors.append(MalformedDocument(f"{where}.keyboard[{key!r}]", str(exc)))

    midi_map = default_nanokontrol_map()
    midi_device = ""
    raw_midi = data.get("midi", {})
    if not isinstance(raw_midi, dict):
        errors.append(MalformedDocument(f"{where}.midi", "must be an object"))
    else:
        for key in raw_midi:
            if key not in ("device", "map"):
                errors.append(MalformedDocument(f"{where}.midi", f"unknown key {key!r}"))
        device = raw_midi.get("device", "")
        if not is_text(device):
            errors.append(MalformedDocument(f"{where}.midi", "'device' must be text"))
        else:
            midi_device = device
        overrides = raw_midi.get("map", {})
        if not isinstance(overrides, dict):
            errors.append(MalformedDocument(f"{where}.midi", "'map' must be an object"))
        else:
            for control, binding in overrides.items():
                if not control.startswith("cc:"):
                    errors.append(
                        MalformedDocument(f"{where}.midi.map", f"control {control!r} must be cc:<n>")
                    )
                    continue
                try:
                    midi_map[control] = parse_binding(binding)
                except BindingError as exc:
                    errors.append(MalformedDocument(f"{where}.midi.map[{control!r}]", str(exc)))

    pads: list[GamepadAssignment] = []
    raw_pads = data.get("gamepads", [])
    if not isinstance(raw_pads, list):
        errors.append(MalformedDocument(f"{where}.gamepads", "must be a list"))
        raw_pads = []
    if len(raw_pads) > MAX_GAMEPADS:
        errors.append(TooManyGamepads(len(raw_pads)))
        raw_pads = []
    seen_indices: set[int] = set()
    for i, entry in enumerate(raw_pads):
        pad_where = f"{where}.gamepads[{i}]"
        if not isinstance(entry, dict):
            errors.append(MalformedDocument(pad_where, "must be an object"))
            continue
        for key in entry:
            if key not in ("index", "target", "speed", "rotate_speed"):
                errors.append(MalformedDocument(pad_where, f"unknown key {key!r}"))
        index = entry.get("index")
        target = entry.get("target")
        speed = entry.get("speed", 1.0)
        rotate_speed = entry.get("rotate_speed", 45.0)
        if not isinstance(index, int) or is_bool(index) or not 0 <= index < MAX_GAMEPADS:
            errors.append(MalformedDocument(pad_where, f"'index' must be 0..{MAX_GAMEPADS - 1}"))
            continue
        if index in seen_indices:
            errors.append(MalformedDocument(pad_where, f"index {index} assigned twice"))
            continue
        seen_indices.add(index)
        if not is_text(target) or not target:
            errors.append(MalformedDocument(pad_where, "'target' must be non-empty text"))
            continue
        if not is_number(speed) or speed <= 0 or not is_number(rotate_speed) or rotate_speed <= 0:
            errors.append(MalformedDocument(pad_where, "speeds must be positive numbers"))
            continue
        pads.append(GamepadAssignment(index, target, float(speed), float(rotate_speed)))

    return DeviceConfig(keyboard, MidiConfig(midi_device, midi_map), tuple(pads))


def _fader_path_ok(path: str, prop_ids: Iterable[str]) -> bool:
    if path == "camera/fade":
        return True
    head, _, prop = path.partition("/")
    return head == "light" and prop in set(prop_ids)


def config_issues(
    config: DeviceConfig,
    targets: set[str],
    prop_ids: set[str],
    cuelists: Mapping[str, Any],
    cues: Mapping[int, Any],
) -> list[Exception]:
    """Cross-check bound actions against the cue sheet they ship with."""
    issues: list[Exception] = []

    def check(where: str, action: Action) -> None:
        if isinstance(action, (Nudge, Rotate)) and action.target not in targets:
            issues.append(MalformedDocument(where, f"unknown target {action.target!r}"))
        elif isinstance(action, SelectCuelist) and action.name is not None:
            if action.name not in cuelists:
                issues.append(MalformedDocument(where, f"unknown cuelist {action.name!r}"))
        elif isinstance(action, Bypass) and action.cue is not None:
            cue = cues.get(action.cue)
            if cue is None:
                issues.append(MalformedDocument(where, f"unknown cue {action.cue}"))
            elif not 0 <= action.set_index < len(cue.sets):
                issues.append(MalformedDocument(where, f"cue {action.cue} has no set {action.set_index}"))
        elif isinstance(action, Fader) and not _fader_path_ok(action.path, prop_ids):
            issues.append(MalformedDocument(where, f"unknown fader path {action.path!r}"))

    for key, action in config.keyboard.items():
        check(f"devices.keyboard[{key!r}]", action)
    for control, action in config.midi.map.items():
        check(f"devices.midi.map[{control!r}]", action)
    for pad in config.gamepads:
        if pad.target not in targets:
            issues.append(
                MalformedDocument(
                    f"devices.gamepads[index {pad.index}]", f"unknown target {pad.target!r}"
                )
            )
    return issues


# --- dispatch -----------------------------------------------------------


class DispatchBus:
    """Per-device-channel queues of (event, resolved actions).

    Keeps the last few hundred entries per channel so an operator UI
    can show what each surface has been doing.
    """

    def __init__(self, limit: int = 256):
        self.channels: dict[str, deque[tuple[InputEvent, tuple[Action, ...]]]] = {
            CHANNEL_KEYBOARD: deque(maxlen=limit),
            CHANNEL_GAMEPAD: deque(maxlen=limit),
            CHANNEL_MIDI: deque(maxlen=limit),
        }

    def record(self, channel: str, event: InputEvent, actions: tuple[Action, ...]) -> None:
        self.channels[channel].append((event, actions))


_CHANNEL_OF_KIND = {
    DeviceKind.KEYBOARD: CHANNEL_KEYBOARD,
    DeviceKind.GAMEPAD: CHANNEL_GAMEPAD,
    DeviceKind.MIDI: CHANNEL_MIDI,
}


def dispatch(event: InputEvent, config: DeviceConfig, bus: DispatchBus | None = None) -> list[Action]:
    """Resolve one event against the binding tables.

    Every event is recorded on exactly one channel; unbound events
    resolve to no actions but still land in the queue.  Gamepad motion
    never resolves here, it is integrated by the :class:`GamepadTracker`.
    """
    actions: list[Action] = []
    if event.kind is DeviceKind.KEYBOARD:
        bound = config.keyboard.get(event.control)
        if bound is not None and event.edge is Edge.DOWN:
            actions.append(bound)
    elif event.kind is DeviceKind.MIDI:
        bound = config.midi.map.get(event.control)
        if isinstance(bound, Fader):
            actions.append(bound if bound.value is not None else replace(bound, value=event.value))
        elif bound is not None and event.edge is Edge.DOWN:
            actions.append(bound)
    if bus is not None:
        bus.record(_CHANNEL_OF_KIND[event.kind], event, tuple(actions))
    return actions


def integrate_stick(x: float, y: float, speed: float, dt: float) -> tuple[float, float]:
    """Stick deflection to a per-tick nudge; the dead zone boundary is dead."""
    if math.hypot(x, y) <= STICK_DEADZONE:
        return 0.0, 0.0
    return x * speed * dt, y * speed * dt


@dataclass
class _PadState:
    axes: dict[str, float] = field(default_factory=dict)
    held: set[str] = field(default_factory=set)


class GamepadTracker:
    """Holds stick and button state between events; polled once per tick."""

    def __init__(self) -> None:
        self._pads: dict[int, _PadState] = {}

    def update(self, event: InputEvent) -> None:
        if event.kind is not DeviceKind.GAMEPAD:
            return
        pad = self._pads.setdefault(event.index, _PadState())
        if event.control in ("lx", "ly", "rx", "ry"):
            pad.axes[event.control] = max(-1.0, min(1.0, event.value))
        elif event.edge is Edge.DOWN:
            pad.held.add(event.control)
        elif event.edge is Edge.UP:
            pad.held.discard(event.control)

    def poll(self, config: DeviceConfig, dt: float) -> list[Action]:
        """Turn held sticks and bumpers into nudge/rotate actions for one tick."""
        actions: list[Action] = []
        for assignment in config.gamepads:
            pad = self._pads.get(assignment.index)
            if pad is None:
                continue
            dx, dy = integrate_stick(
                pad.axes.get("lx", 0.0), pad.axes.get("ly", 0.0), assignment.speed, dt
            )
            if dx != 0.0 or dy != 0.0:
                actions.append(Nudge(assignment.target, dx, dy))
            spin = ("rb" in pad.held) - ("lb" in pad.held)
            if spin:
                actions.append(Rotate(assignment.target, spin * assignment.rotate_speed * dt))
        return actions


# --- applying trims to engine state --------------------------------------


def apply_nudge(
    state: "EngineState", cuesheet: "Cuesheet", target: str, dx: float, dy: float
) -> "EngineState":
    """Translate a target in the floor plane; carried props ignore trims."""
    move = Vec3(dx, dy, 0.0)
    if target in state.avatars:
        avatar = state.avatars[target]
        shifted = compose(OffsetTransform(0.0, move), avatar.offset)
        avatars = dict(state.avatars)
        avatars[target] = replace(avatar, offset=shifted)
        return replace(state, avatars=avatars)
    if target in state.props:
        prop = state.props[target]
        if not isinstance(prop.placement, Pose):
            return state
        props = dict(state.props)
        props[target] = replace(
            prop, placement=Pose(prop.placement.position + move, prop.placement.yaw)
        )
        return replace(state, props=props)
    if target in cuesheet.cast.cameras:
        camera = state.camera
        if not isinstance(camera.placement, Pose):
            return state
        moved = Pose(camera.placement.position + move, camera.placement.yaw)
        return replace(state, camera=replace(camera, placement=moved))
    raise UnknownTarget(target)


def apply_rotate(
    state: "EngineState",
    cuesheet: "Cuesheet",
    target: str,
    degrees: float,
    live_roots: Mapping[str, Pose] | None = None,
) -> "EngineState":
    """Spin a target about its own position; carried props ignore trims."""
    if target in state.avatars:
        avatar = state.avatars[target]
        root = (live_roots or {}).get(target, avatar.anchor)
        world = apply_offset(avatar.offset, root)
        spun = compose(rotate_in_place(world, degrees), avatar.offset)
        avatars = dict(state.avatars)
        avatars[target] = replace(avatar, offset=spun)
        return replace(state, avatars=avatars)
    if target in state.props:
        prop = state.props[target]
        if not isinstance(prop.placement, Pose):
            return state
        props = dict(state.props)
        props[target] = replace(
            prop, placement=Pose(prop.placement.position, prop.placement.yaw + degrees)
        )
        return replace(state, props=props)
    if target in cuesheet.cast.cameras:
        camera = state.camera
        if not isinstance(camera.placement, Pose):
            return state
        turned = Pose(camera.placement.position, camera.placement.yaw + degrees)
        return replace(state, camera=replace(camera, placement=turned))
    raise UnknownTarget(target)
