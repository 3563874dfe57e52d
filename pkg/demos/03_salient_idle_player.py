#!/usr/bin/env python3
"""The salient/idle animation player, tick by tick.

An avatar between cues breathes in a loop.  A cue triggers a one-shot
"salient" movement; the player cuts to it, and near its end blends
back into the idle over a short window.  Retriggering mid-blend starts
a new crossfade from whichever clip currently dominates, so weights
never jump.
"""

from pathlib import Path

from regie.motionplayer import Idle, load_clip_catalog, tick, trigger_salient

ROOT = Path(__file__).resolve().parent.parent
clips = load_clip_catalog((ROOT / "fixtures" / "clips.json").read_text())
print("catalog:", {c.id: f"{c.duration}s loop={c.loopable}" for c in clips.values()})

wave, bow, breathing = clips["wave"], clips["bow"], clips["breathing"]


def bar(weight: float, width: int = 24) -> str:
    filled = round(weight * width)
    return "#" * filled + "." * (width - filled)


state = Idle(breathing, 0.0)
print("\nt=0.00 trigger 'wave' (2.0 s clip, 0.3 s blend window)")
state = trigger_salient(state, wave, breathing)

t = 0.0
retriggered = False
while True:
    state, weights = tick(state, 0.1)
    t += 0.1
    row = "  ".join(f"{clip:>9} {bar(w)} {w:.2f}" for clip, _, w in weights)
    print(f"t={t:4.2f}  {row}")
    if not retriggered and t >= 1.9:
        # mid-crossfade retrigger: the blend restarts from the dominant
        # clip and the incoming weight picks up where it left off
        print(f"t={t:4.2f} trigger 'bow' while blending")
        state = trigger_salient(state, bow, breathing)
        retriggered = True
    if isinstance(state, Idle) and t > 2.0:
        break

print("\nsettled back into", state.clip.id)
