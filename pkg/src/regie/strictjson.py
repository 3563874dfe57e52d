"""Strict JSON intake shared by the document loaders.

Show documents are authored by hand and by tools; both misspell keys
and both occasionally paste an object twice.  Loaders here reject
anything they do not understand instead of guessing.
"""

from __future__ import annotations

import json
from typing import Any

__all__ = [
    "DuplicateKey",
    "MalformedDocument",
    "parse_strict",
    "is_bool",
    "is_number",
    "is_text",
]


class DuplicateKey(ValueError):
    """The same key appeared twice inside one JSON object."""

    def __init__(self, key: str):
        super().__init__(f"duplicate object key {key!r}")
        self.key = key


class MalformedDocument(ValueError):
    """A document violates its schema at a named location."""

    def __init__(self, location: str, reason: str):
        super().__init__(f"{location}: {reason}")
        self.location = location
        self.reason = reason


def _reject_dupes(pairs: list[tuple[str, Any]]) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for key, value in pairs:
        if key in out:
            raise DuplicateKey(key)
        out[key] = value
    return out


def parse_strict(text: str) -> Any:
    """Parse JSON, refusing duplicate keys anywhere in the document."""
    return json.loads(text, object_pairs_hook=_reject_dupes)


def is_bool(value: Any) -> bool:
    return isinstance(value, bool)


def is_number(value: Any) -> bool:
    # bool is an int subclass; a flag is never a coordinate.
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def is_text(value: Any) -> bool:
    return isinstance(value, str)
