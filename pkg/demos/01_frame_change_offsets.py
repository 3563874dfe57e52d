#!/usr/bin/env python3
"""Placing a captured performer onto stage goals with frame-change offsets.

A mocap subject walks around the capture volume while the show needs
the avatar standing on a marked goal.  The trick is never to touch the
incoming stream: compute one rigid offset (a yaw plus a translation)
at cue time and keep applying it to every frame that follows.
"""

from regie.stagemath import (
    Pose,
    Vec3,
    apply_offset,
    compose,
    compute_offset,
    rotate_in_place,
)

# The subject happens to stand two meters off to the side, facing away
# from the audience.  The blocking wants them center stage, facing front.
subject_root = Pose(Vec3(2.0, -1.0, 0.0), 135.0)
goal = Pose(Vec3(0.0, 0.0, 0.0), 0.0)

offset = compute_offset(subject_root, goal)
print("subject root:", subject_root)
print("stage goal:  ", goal)
print("offset:       rotate %.1f deg, then translate (%.3f, %.3f, %.3f)"
      % (offset.theta, offset.translation.x, offset.translation.y, offset.translation.z))

# Applying the offset to the anchoring frame lands exactly on the goal.
print("anchor through offset:", apply_offset(offset, subject_root))

# The performer keeps moving; the same offset carries every new frame.
# A step forward in capture space is a step forward on stage, rotated
# into the goal's heading.
for step in range(4):
    live = Pose(Vec3(2.0, -1.0 - 0.3 * step, 0.0), 135.0)
    staged = apply_offset(offset, live)
    print("  capture y=%6.2f  ->  stage (%.2f, %.2f) yaw %.1f"
          % (live.position.y, staged.position.x, staged.position.y, staged.yaw))

# Live trims compose on the outside.  A five degree nudge about the
# avatar's current world position leaves that position fixed.
world = apply_offset(offset, subject_root)
trim = rotate_in_place(world, 5.0)
trimmed = compose(trim, offset)
print("after trim:", apply_offset(trimmed, subject_root))
