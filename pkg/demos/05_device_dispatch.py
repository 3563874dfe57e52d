#!/usr/bin/env python3
"""Operator surfaces: keyboard, gamepads, and the nanoKONTROL desk.

Every raw event lands on exactly one named channel and resolves into
engine actions through the binding tables in the cue sheet.  Gamepad
sticks do not fire actions directly: a tracker holds their state and a
per-tick poll integrates deflection into nudges past a deadzone.
"""

from pathlib import Path

from regie.cueengine import Engine, parse_cuesheet
from regie.devio import (
    CHANNEL_GAMEPAD,
    CHANNEL_KEYBOARD,
    CHANNEL_MIDI,
    DeviceKind,
    DispatchBus,
    Edge,
    GamepadTracker,
    InputEvent,
    default_nanokontrol_map,
    dispatch,
)
from regie.scene import load_level

ROOT = Path(__file__).resolve().parent.parent
level = load_level((ROOT / "fixtures" / "figure4.level.json").read_text())
cuesheet = parse_cuesheet((ROOT / "fixtures" / "figure4.cue.json").read_text(), level)
config = cuesheet.devices

print("gamepad assignments:")
for pad in config.gamepads:
    print(f"  pad {pad.index} -> {pad.target} at {pad.speed} m/s, {pad.rotate_speed} deg/s")
print("desk map (defaults):")
for control, action in sorted(default_nanokontrol_map().items()):
    print(f"  {control:>6} -> {action}")

# -- one event, one channel, zero or more actions --------------------------

bus = DispatchBus()
engine = Engine(cuesheet, level)

events = [
    InputEvent(DeviceKind.KEYBOARD, 0, "space", 1.0, Edge.DOWN),
    InputEvent(DeviceKind.MIDI, 0, "cc:41", 1.0, Edge.DOWN),      # desk Go button
    InputEvent(DeviceKind.MIDI, 0, "cc:0", 64 / 127, Edge.DOWN),  # first fader
    InputEvent(DeviceKind.KEYBOARD, 0, "q", 1.0, Edge.DOWN),      # unbound
]
for event in events:
    actions = dispatch(event, config, bus)
    for action in actions:
        engine.execute(action)
    print(f"{event.kind.value:>8} {event.control:>6} -> {list(actions) or 'nothing'}")

print("camera fade after the fader write:", engine.state.camera.fade_level)
for channel in (CHANNEL_KEYBOARD, CHANNEL_GAMEPAD, CHANNEL_MIDI):
    print(f"{channel}: {len(bus.channels[channel])} events recorded")

# -- stick integration with a radial deadzone --------------------------------

tracker = GamepadTracker()
print("\nholding the left stick at (0.8, 0.0) for half a second:")
tracker.update(InputEvent(DeviceKind.GAMEPAD, 0, "lx", 0.8, Edge.MOVE))
for _ in range(30):
    for action in tracker.poll(config, 1 / 60):
        engine.execute(action)
world = engine.state.avatars["Avatar1"]
print(f"  Avatar1 offset translation x: {world.offset.translation.x:.3f} m")

print("drift inside the deadzone goes nowhere:")
tracker.update(InputEvent(DeviceKind.GAMEPAD, 0, "lx", 0.05, Edge.MOVE))
before = engine.state.avatars["Avatar1"].offset.translation.x
for _ in range(30):
    for action in tracker.poll(config, 1 / 60):
        engine.execute(action)
after = engine.state.avatars["Avatar1"].offset.translation.x
print(f"  moved {after - before:.4f} m")
