"""Salient/idle animation blending and frame-sequence playback.

An avatar that is not being puppeteered plays a loopable *idle* clip.
A cue can fire a one-shot *salient* clip (a wave, a bow): the player
hard-cuts into it, then crossfades back into the idle over a blend
window that starts ``window`` seconds before the salient ends, so the
salient never freezes on its last frame.  Re-triggering mid-flight
blends from whatever is currently dominant, keeping weights continuous.

The player is a pure value: ``tick`` and ``trigger_salient`` return new
states, and the weighted clip list handed to renderers always sums to 1
over at most two entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Union

from .strictjson import DuplicateKey, MalformedDocument, is_bool, is_number, is_text, parse_strict

__all__ = [
    "DEFAULT_BLEND_WINDOW",
    "Clip",
    "Idle",
    "Salient",
    "Crossfade",
    "PlayerState",
    "Output",
    "MotionError",
    "NonLoopableIdle",
    "UnknownClip",
    "ClipCatalogError",
    "load_clip_catalog",
    "trigger_salient",
    "tick",
    "output",
    "SequencePlayback",
    "Finished",
    "FINISHED",
    "sequence_tick",
]

DEFAULT_BLEND_WINDOW = 0.3


class MotionError(Exception):
    """Base class for animation player problems."""


class NonLoopableIdle(MotionError):
    def __init__(self, clip_id: str):
        super().__init__(f"idle clip {clip_id!r} is not loopable")
        self.clip_id = clip_id


class UnknownClip(MotionError):
    def __init__(self, clip_id: str):
        super().__init__(f"no clip named {clip_id!r} in the catalog")
        self.clip_id = clip_id


class ClipCatalogError(MotionError):
    def __init__(self, errors: list[Exception]):
        super().__init__("; ".join(str(e) for e in errors))
        self.errors = list(errors)


@dataclass(frozen=True)
class Clip:
    id: str
    duration: float
    loopable: bool = False

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("clip id must be non-empty")
        if not (is_number(self.duration) and math.isfinite(self.duration) and self.duration > 0):
            raise ValueError(f"clip {self.id!r} duration must be a positive number")


def load_clip_catalog(document: str) -> dict[str, Clip]:
    """Parse a clip catalog: a JSON list of id/duration/loopable records."""
    errors: list[Exception] = []
    try:
        data = parse_strict(document)
    except (DuplicateKey, ValueError) as exc:
        raise ClipCatalogError([MalformedDocument("clips", f"invalid JSON: {exc}")]) from exc
    if not isinstance(data, list):
        raise ClipCatalogError([MalformedDocument("clips", "top level must be a list")])
    catalog: dict[str, Clip] = {}
    for i, entry in enumerate(data):
        where = f"clips[{i}]"
        if not isinstance(entry, dict):
            errors.append(MalformedDocument(where, "clip must be an object"))
            continue
        for key in entry:
            if key not in ("id", "duration", "loopable"):
                errors.append(MalformedDocument(where, f"unknown key {key!r}"))
        clip_id = entry.get("id")
        duration = entry.get("duration")
        loopable = entry.get("loopable")
        if not is_text(clip_id) or not clip_id:
            errors.append(MalformedDocument(where, "'id' must be non-empty text"))
            continue
        if clip_id in catalog:
            errors.append(MalformedDocument(where, f"duplicate clip id {clip_id!r}"))
            continue
        if not is_number(duration) or not math.isfinite(duration) or duration <= 0:
            errors.append(MalformedDocument(where, "'duration' must be a positive number"))
            continue
        if not is_bool(loopable):
            errors.append(MalformedDocument(where, "'loopable' must be a boolean"))
            continue
        catalog[clip_id] = Clip(clip_id, float(duration), loopable)
    if errors:
        raise ClipCatalogError(errors)
    return catalog


# --- player states ------------------------------------------------------


@dataclass(frozen=True)
class Idle:
    """Looping the idle clip; phase wraps at the clip duration."""

    clip: Clip
    phase: float = 0.0


@dataclass(frozen=True)
class Salient:
    """Playing a one-shot at full weight until its tail blend starts."""

    clip: Clip
    elapsed: float
    idle: Clip
    window: float  # tail blend length, pre-clamped to the clip duration


@dataclass(frozen=True)
class Crossfade:
    """Linear blend from one clip into another over ``window`` seconds.

    ``pending_idle`` is set when the incoming clip is itself a salient:
    on completion the player lands in :class:`Salient` with that idle
    queued, otherwise the incoming clip is the idle and the player
    settles into :class:`Idle`.
    """

    from_clip: Clip
    from_phase: float
    to_clip: Clip
    to_phase: float
    blend_elapsed: float
    window: float
    pending_idle: Clip | None = None
    to_tail_window: float = 0.0


PlayerState = Union[Idle, Salient, Crossfade]

# (clip id, phase into the clip in seconds, weight); weights sum to 1.
Output = tuple[tuple[str, float, float], ...]


def output(state: PlayerState) -> Output:
    """Weighted clip list for renderers; at most two entries."""
    if isinstance(state, Idle):
        return ((state.clip.id, state.phase, 1.0),)
    if isinstance(state, Salient):
        return ((state.clip.id, state.elapsed, 1.0),)
    progress = state.blend_elapsed / state.window
    return (
        (state.from_clip.id, state.from_phase, 1.0 - progress),
        (state.to_clip.id, state.to_phase, progress),
    )


def trigger_salient(
    state: PlayerState,
    salient: Clip,
    idle: Clip,
    window: float = DEFAULT_BLEND_WINDOW,
) -> PlayerState:
    """Fire a one-shot clip, returning the new player state.

    From idle this is a hard cut.  From a running salient or crossfade
    it starts a fresh crossfade out of the currently dominant clip, with
    the incoming weight picked up where the dominant one leaves off.
    """
    if not idle.loopable:
        raise NonLoopableIdle(idle.id)
    if not (is_number(window) and window > 0):
        raise ValueError(f"blend window must be positive, got {window!r}")
    tail = min(window, salient.duration)
    if isinstance(state, Idle):
        return Salient(salient, 0.0, idle, tail)
    if isinstance(state, Salient):
        from_clip, from_phase, from_weight = state.clip, state.elapsed, 1.0
    else:
        progress = state.blend_elapsed / state.window
        if progress >= 0.5:
            from_clip, from_phase, from_weight = state.to_clip, state.to_phase, progress
        else:
            from_clip, from_phase, from_weight = state.from_clip, state.from_phase, 1.0 - progress
    blend_window = min(window, salient.duration)
    return Crossfade(
        from_clip=from_clip,
        from_phase=from_phase,
        to_clip=salient,
        to_phase=0.0,
        blend_elapsed=(1.0 - from_weight) * blend_window,
        window=blend_window,
        pending_idle=idle,
        to_tail_window=tail,
    )


def tick(state: PlayerState, dt: float) -> tuple[PlayerState, Output]:
    """Advance the player by ``dt`` seconds (must be positive)."""
    if not (is_number(dt) and math.isfinite(dt) and dt > 0):
        raise ValueError(f"dt must be a positive number, got {dt!r}")
    advanced = _advance(state, dt)
    return advanced, output(advanced)


def _phase_after(clip: Clip, phase: float, dt: float) -> float:
    moved = phase + dt
    return moved % clip.duration if clip.loopable else min(moved, clip.duration)


def _advance(state: PlayerState, dt: float) -> PlayerState:
    if isinstance(state, Idle):
        return replace(state, phase=(state.phase + dt) % state.clip.duration)

    if isinstance(state, Salient):
        tail_start = state.clip.duration - state.window
        if state.elapsed + dt < tail_start:
            return replace(state, elapsed=state.elapsed + dt)
        consumed = max(0.0, tail_start - state.elapsed)
        fade = Crossfade(
            from_clip=state.clip,
            from_phase=state.elapsed + consumed,
            to_clip=state.idle,
            to_phase=0.0,
            blend_elapsed=0.0,
            window=state.window,
        )
        remaining = dt - consumed
        return _advance(fade, remaining) if remaining > 0 else fade

    blend = state.blend_elapsed + dt
    if blend < state.window:
        return replace(
            state,
            from_phase=_phase_after(state.from_clip, state.from_phase, dt),
            to_phase=_phase_after(state.to_clip, state.to_phase, dt),
            blend_elapsed=blend,
        )
    consumed = state.window - state.blend_elapsed
    to_phase = _phase_after(state.to_clip, state.to_phase, consumed)
    landed: PlayerState
    if state.pending_idle is None:
        landed = Idle(state.to_clip, to_phase)
    else:
        landed = Salient(state.to_clip, to_phase, state.pending_idle, state.to_tail_window)
    remaining = dt - consumed
    return _advance(landed, remaining) if remaining > 0 else landed


# --- frame sequences ----------------------------------------------------


@dataclass(frozen=True)
class SequencePlayback:
    """A renderer-side frame sequence being scrubbed by the engine clock."""

    sequence: str
    frame: float
    start_frame: int
    end_frame: int
    rate: float

    def __post_init__(self) -> None:
        if self.start_frame > self.end_frame:
            raise ValueError(f"sequence {self.sequence!r}: start frame after end frame")
        if not self.rate > 0:
            raise ValueError(f"sequence {self.sequence!r}: rate must be positive")


class Finished:
    """Sentinel: a sequence has reached its end frame."""

    _instance: "Finished | None" = None

    def __new__(cls) -> "Finished":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Finished"


FINISHED = Finished()


def sequence_tick(playback: SequencePlayback, dt: float) -> SequencePlayback | Finished:
    """Advance a sequence; returns FINISHED once the end frame is reached."""
    if not (is_number(dt) and math.isfinite(dt) and dt > 0):
        raise ValueError(f"dt must be a positive number, got {dt!r}")
    frame = playback.frame + playback.rate * dt
    if frame >= playback.end_frame:
        return FINISHED
    return replace(playback, frame=frame)
