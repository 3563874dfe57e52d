"""Input dispatch, binding grammar, stick integration and trims."""

from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regie.devio import (
    CHANNEL_GAMEPAD,
    CHANNEL_KEYBOARD,
    CHANNEL_MIDI,
    STICK_DEADZONE,
    BindingError,
    Bypass,
    DeviceKind,
    DispatchBus,
    Edge,
    Fader,
    GamepadTracker,
    Go,
    GoBack,
    InputEvent,
    Nudge,
    Rotate,
    SelectCuelist,
    TooManyGamepads,
    config_issues,
    default_nanokontrol_map,
    dispatch,
    integrate_stick,
    parse_binding,
    parse_devices,
)


def _key(key: str, edge: Edge = Edge.DOWN) -> InputEvent:
    return InputEvent(DeviceKind.KEYBOARD, 0, key, 1.0, edge)


def _cc(number: int, value: float, edge: Edge = Edge.DOWN) -> InputEvent:
    return InputEvent(DeviceKind.MIDI, 0, f"cc:{number}", value, edge)


def _pad(index: int, control: str, value: float, edge: Edge = Edge.MOVE) -> InputEvent:
    return InputEvent(DeviceKind.GAMEPAD, index, control, value, edge)


# --- binding grammar ------------------------------------------------------


@pytest.mark.parametrize(
    "text,expected",
    [
        ("go", Go()),
        ("goback", GoBack()),
        ("cycle", SelectCuelist(None)),
        ("select:Encore", SelectCuelist("Encore")),
        ("bypass:20:1:on", Bypass(20, 1, "on")),
        ("bypass:current:0:toggle", Bypass(None, 0, "toggle")),
        ("nudge:Avatar1:0.1:-0.2", Nudge("Avatar1", 0.1, -0.2)),
        ("rotate:Prop1:15", Rotate("Prop1", 15.0)),
        ("fader:camera/fade", Fader("camera/fade", None)),
        ("fader:light/Prop2:0.8", Fader("light/Prop2", 0.8)),
    ],
)
def test_binding_grammar(text, expected):
    assert parse_binding(text) == expected


@pytest.mark.parametrize(
    "text",
    ["", "go:now", "select:", "bypass:x:y:on", "bypass:10:0:maybe", "nudge:A:fast:0",
     "rotate:A", "fader:", "launch:missiles", "bypass:10:-1:on"],
)
def test_bad_bindings_rejected(text):
    with pytest.raises(BindingError):
        parse_binding(text)


def test_default_desk_map():
    table = default_nanokontrol_map()
    assert table["cc:41"] == Go()
    assert table["cc:42"] == GoBack()
    assert table["cc:45"] == SelectCuelist(None)
    for i in range(8):
        assert table[f"cc:{32 + i}"] == Bypass(None, i, "toggle")
    assert table["cc:0"] == Fader("camera/fade", None)


# --- device config --------------------------------------------------------


def test_parse_devices_defaults():
    errors: list[Exception] = []
    config = parse_devices(None, errors)
    assert not errors
    assert config.midi.map["cc:41"] == Go()
    assert config.gamepads == ()
    assert config.keyboard == {}


def test_parse_devices_full():
    errors: list[Exception] = []
    config = parse_devices(
        {
            "keyboard": {"space": "go"},
            "midi": {"device": "nanoKONTROL2", "map": {"cc:41": "goback"}},
            "gamepads": [{"index": 2, "target": "Avatar1", "speed": 2.0}],
        },
        errors,
    )
    assert not errors
    assert config.keyboard["space"] == Go()
    assert config.midi.map["cc:41"] == GoBack()  # override beats the default
    assert config.midi.map["cc:42"] == GoBack()  # defaults retained
    assert config.gamepads[0].index == 2
    assert config.gamepads[0].rotate_speed == 45.0


def test_parse_devices_rejects_fifth_gamepad():
    errors: list[Exception] = []
    parse_devices(
        {"gamepads": [{"index": i % 4, "target": "A"} for i in range(5)]}, errors
    )
    assert any(isinstance(e, TooManyGamepads) for e in errors)


@pytest.mark.parametrize(
    "block",
    [
        {"gamepads": [{"index": 9, "target": "A"}]},
        {"gamepads": [{"index": 0, "target": "A"}, {"index": 0, "target": "B"}]},
        {"gamepads": [{"index": 0, "target": "A", "speed": -1}]},
        {"keyboard": {"space": "warp"}},
        {"midi": {"map": {"note:60": "go"}}},
        {"joystick": {}},
    ],
)
def test_parse_devices_rejects_bad_blocks(block):
    errors: list[Exception] = []
    parse_devices(block, errors)
    assert errors


def test_config_cross_checks():
    errors: list[Exception] = []
    config = parse_devices(
        {
            "keyboard": {
                "n": "nudge:Ghost:1:0",
                "s": "select:Matinee",
                "b": "bypass:99:0:on",
                "f": "fader:smoke/machine",
            }
        },
        errors,
    )
    assert not errors
    issues = config_issues(config, {"Avatar1"}, {"Prop1"}, {"Main": (10,)}, {})
    assert len(issues) == 4


# --- dispatch -------------------------------------------------------------


CONFIG = parse_devices(
    {
        "keyboard": {"space": "go", "backspace": "goback"},
        "gamepads": [{"index": 0, "target": "Avatar1", "speed": 1.5, "rotate_speed": 45.0}],
    },
    [],
)


def test_keyboard_dispatch_on_down_edge():
    assert dispatch(_key("space"), CONFIG) == [Go()]
    assert dispatch(_key("space", Edge.UP), CONFIG) == []
    assert dispatch(_key("escape"), CONFIG) == []


def test_midi_dispatch_press_and_fader():
    assert dispatch(_cc(41, 1.0), CONFIG) == [Go()]
    assert dispatch(_cc(41, 0.0, Edge.UP), CONFIG) == []
    out = dispatch(_cc(0, 0.5, Edge.MOVE), CONFIG)
    assert out == [Fader("camera/fade", 0.5)]


def test_every_event_lands_on_exactly_one_channel():
    bus = DispatchBus()
    events = [_key("space"), _cc(41, 1.0), _pad(0, "lx", 0.4), _key("unbound")]
    for event in events:
        dispatch(event, CONFIG, bus)
    sizes = {name: len(queue) for name, queue in bus.channels.items()}
    assert sizes == {CHANNEL_KEYBOARD: 2, CHANNEL_MIDI: 1, CHANNEL_GAMEPAD: 1}
    assert sum(sizes.values()) == len(events)
    # unbound events are recorded with no actions
    event, actions = bus.channels[CHANNEL_KEYBOARD][-1]
    assert event.control == "unbound" and actions == ()


def test_channel_names_are_contractual():
    assert CHANNEL_KEYBOARD == "AKN_Keyboard_Regie"
    assert CHANNEL_GAMEPAD == "AKN_Gamepad_Regie"
    assert CHANNEL_MIDI == "AKN_NanoK_Regie"


# --- stick integration -----------------------------------------------------


def test_deadzone_boundary_is_dead():
    assert integrate_stick(STICK_DEADZONE, 0.0, 1.5, 1.0) == (0.0, 0.0)
    assert integrate_stick(0.0, -STICK_DEADZONE, 1.5, 1.0) == (0.0, 0.0)


def test_deflection_is_not_rescaled():
    dx, dy = integrate_stick(0.5, -0.25, 2.0, 0.1)
    assert dx == pytest.approx(0.1)
    assert dy == pytest.approx(-0.05)


@given(
    st.floats(-1, 1, allow_nan=False),
    st.floats(-1, 1, allow_nan=False),
)
@settings(max_examples=300)
def test_deadzone_is_radial(x, y):
    dx, dy = integrate_stick(x, y, 1.0, 1.0)
    if math.hypot(x, y) <= STICK_DEADZONE:
        assert (dx, dy) == (0.0, 0.0)
    else:
        assert (dx, dy) == (x, y)


def test_tracker_integrates_per_tick():
    tracker = GamepadTracker()
    tracker.update(_pad(0, "lx", 0.5))
    tracker.update(_pad(0, "ly", 0.0))
    actions = tracker.poll(CONFIG, 1.0 / 60.0)
    assert actions == [Nudge("Avatar1", 0.5 * 1.5 / 60.0, 0.0)]


def test_tracker_bumpers_rotate_while_held():
    tracker = GamepadTracker()
    tracker.update(_pad(0, "rb", 1.0, Edge.DOWN))
    assert tracker.poll(CONFIG, 0.5) == [Rotate("Avatar1", 22.5)]
    tracker.update(_pad(0, "rb", 0.0, Edge.UP))
    tracker.update(_pad(0, "lb", 1.0, Edge.DOWN))
    assert tracker.poll(CONFIG, 0.5) == [Rotate("Avatar1", -22.5)]


def test_tracker_ignores_unassigned_pads():
    tracker = GamepadTracker()
    tracker.update(_pad(3, "lx", 1.0))
    assert tracker.poll(CONFIG, 1.0) == []


def test_tracker_axis_values_clamped():
    tracker = GamepadTracker()
    tracker.update(_pad(0, "lx", 5.0))
    actions = tracker.poll(CONFIG, 1.0)
    assert actions == [Nudge("Avatar1", 1.5, 0.0)]
