"""OSC 1.0 wire codec for messages (bundles are out of scope).

Hand-rolled on purpose: the engine talks to voice, shadow and lighting
rigs over UDP and a framing bug there is a show-stopper, so the codec
is small, strict and fuzzed.  Everything is big-endian and every
section is padded to a 4-byte boundary with zero bytes; the decoder
rejects nonzero padding, unknown typetags and trailing garbage instead
of guessing.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

__all__ = [
    "OscError",
    "InvalidAddress",
    "MalformedPacket",
    "OscMessage",
    "encode",
    "decode",
]


class OscError(ValueError):
    """Base class for codec problems."""


class InvalidAddress(OscError):
    def __init__(self, address: str, reason: str):
        super().__init__(f"bad OSC address {address!r}: {reason}")
        self.address = address
        self.reason = reason


class MalformedPacket(OscError):
    def __init__(self, offset: int, reason: str):
        super().__init__(f"malformed OSC packet at byte {offset}: {reason}")
        self.offset = offset
        self.reason = reason


def _check_address(address: str) -> None:
    if not address.startswith("/"):
        raise InvalidAddress(address, "must start with '/'")
    if " " in address:
        raise InvalidAddress(address, "must not contain spaces")
    if any(ord(c) < 0x20 or ord(c) == 0x7F for c in address):
        raise InvalidAddress(address, "must not contain control characters")


@dataclass(frozen=True)
class OscMessage:
    """Address pattern plus typed arguments (int32, float32, string, blob)."""

    address: str
    args: tuple[int | float | str | bytes, ...] = ()

    def __post_init__(self) -> None:
        _check_address(self.address)


def _padded_string(text: str) -> bytes:
    if "\0" in text:
        raise OscError(f"string argument contains NUL: {text!r}")
    raw = text.encode("utf-8") + b"\x00"
    return raw + b"\x00" * (-len(raw) % 4)


def encode(message: OscMessage) -> bytes:
    """Serialize a message; output length is always a multiple of 4."""
    tags = [","]
    body = bytearray()
    for arg in message.args:
        if isinstance(arg, bool):
            raise OscError("booleans are not wire arguments; send an int")
        if isinstance(arg, int):
            if not -(2**31) <= arg < 2**31:
                raise OscError(f"int argument {arg} outside int32 range")
            tags.append("i")
            body += struct.pack(">i", arg)
        elif isinstance(arg, float):
            tags.append("f")
            body += struct.pack(">f", arg)
        elif isinstance(arg, str):
            tags.append("s")
            body += _padded_string(arg)
        elif isinstance(arg, (bytes, bytearray)):
            tags.append("b")
            body += struct.pack(">i", len(arg)) + bytes(arg) + b"\x00" * (-len(arg) % 4)
        else:
            raise OscError(f"unsupported argument type {type(arg).__name__}")
    return _padded_string(message.address) + _padded_string("".join(tags)) + bytes(body)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def fail(self, reason: str) -> None:
        raise MalformedPacket(self.offset, reason)

    def take(self, count: int) -> bytes:
        if self.offset + count > len(self.data):
            self.fail("truncated")
        chunk = self.data[self.offset : self.offset + count]
        self.offset += count
        return chunk

    def take_string(self) -> str:
        start = self.offset
        end = self.data.find(b"\x00", start)
        if end == -1:
            self.fail("unterminated string")
        total = ((end - start) // 4 + 1) * 4
        if start + total > len(self.data):
            self.fail("truncated string padding")
        if any(self.data[end : start + total]):
            self.fail("nonzero string padding")
        self.offset = start + total
        try:
            return self.data[start:end].decode("utf-8")
        except UnicodeDecodeError:
            self.fail("string is not valid UTF-8")
            raise AssertionError  # unreachable


def decode(data: bytes) -> OscMessage:
    """Parse one datagram into a message; strict about every byte."""
    if not data:
        raise MalformedPacket(0, "empty packet")
    if len(data) % 4:
        raise MalformedPacket(len(data), "length not a multiple of 4")
    if data[:1] == b"#":
        raise MalformedPacket(0, "bundles are not supported")
    reader = _Reader(data)
    address = reader.take_string()
    tags = reader.take_string()
    if not tags.startswith(","):
        raise MalformedPacket(0, "typetag string must start with ','")
    args: list[int | float | str | bytes] = []
    for tag in tags[1:]:
        if tag == "i":
            args.append(struct.unpack(">i", reader.take(4))[0])
        elif tag == "f":
            args.append(struct.unpack(">f", reader.take(4))[0])
        elif tag == "s":
            args.append(reader.take_string())
        elif tag == "b":
            (length,) = struct.unpack(">i", reader.take(4))
            if length < 0:
                reader.fail("negative blob length")
            blob = reader.take(length)
            if any(reader.take(-length % 4)):
                reader.fail("nonzero blob padding")
            args.append(blob)
        else:
            reader.fail(f"unsupported typetag {tag!r}")
    if reader.offset != len(data):
        raise MalformedPacket(reader.offset, "trailing bytes after arguments")
    return OscMessage(address, tuple(args))
