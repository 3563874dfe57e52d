#!/usr/bin/env python3
"""What the engine actually puts on the wire for the show rigs.

Voice, shadow and lighting systems listen for OSC 1.0 messages over
UDP.  This walks through the byte layout and shows why the decoder is
strict: a framing slip on stage is worse than a dropped packet.
"""

from regie.netio.osc import MalformedPacket, OscMessage, decode, encode


def dump(packet: bytes) -> str:
    rows = []
    for start in range(0, len(packet), 4):
        word = packet[start : start + 4]
        hexes = " ".join(f"{b:02x}" for b in word)
        chars = "".join(chr(b) if 32 <= b < 127 else "." for b in word)
        rows.append(f"  {start:3d}  {hexes}  |{chars}|")
    return "\n".join(rows)


examples = [
    OscMessage("/cue/go", (10,)),
    OscMessage("/voice/effect", (2,)),
    OscMessage("/shadow/scene", ("finale",)),
    OscMessage("/mix", (-1, 0.5, "ok")),
]

for message in examples:
    packet = encode(message)
    print(f"{message.address} {message.args} -> {len(packet)} bytes")
    print(dump(packet))
    assert decode(packet) == message
    print()

# Every section is padded to four bytes with zeros, and the decoder
# refuses anything else: nonzero padding, unknown typetags, trailing
# garbage, truncated arguments, bundles.
broken = [
    ("nonzero padding", bytes.fromhex("2f6100582c000000")),
    ("unknown typetag", bytes.fromhex("2f6100002c710000")),
    ("trailing bytes", encode(OscMessage("/a", (1,))) + b"\x00" * 4),
    ("truncated int", bytes.fromhex("2f6100002c690000")),
    ("bundle", b"#bundle\x00" + b"\x00" * 8),
]
for label, packet in broken:
    try:
        decode(packet)
        print(f"{label}: decoded?!")
    except MalformedPacket as exc:
        print(f"{label}: rejected ({exc})")
