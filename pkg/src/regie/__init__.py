"""Headless show-control engine for staging motion-captured avatars.

The package splits along the data flow of a live show:

- :mod:`regie.stagemath` -- planar rigid placement math (frame-change
  offsets, in-place rotation, fades).
- :mod:`regie.scene` -- levels, staging goals, cast descriptions.
- :mod:`regie.cueengine` -- cue sheets, Sets, bypass, deterministic
  go/goback state reconstruction.
- :mod:`regie.motionplayer` -- salient/idle animation blending and
  frame-sequence playback.
- :mod:`regie.devio` -- operator input (keyboard, gamepads, MIDI desk)
  normalized into engine actions.
- :mod:`regie.netio` -- OSC wire codec, mocap ingest, the fixed-rate
  service loop, snapshot broadcast and the command line front end.

Everything above :mod:`regie.netio` is pure and synchronous; rendering
is somebody else's job, the engine only publishes state.
"""

from __future__ import annotations

__version__ = "0.1.0"

__all__ = ["__version__"]
