"""JSON helpers shared by the codecs: strict loading and canonical dumping."""

from __future__ import annotations

import hashlib
import json
from typing import Any

from .errors import DuplicateKey, MalformedDocument


class _DuplicateKeyFound(Exception):
    def __init__(self, key: str):
        self.key = key


def _reject_duplicates(pairs: list[tuple[str, Any]]) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for key, value in pairs:
        if key in out:
            raise _DuplicateKeyFound(key)
        out[key] = value
    return out


def _reject_constant(name: str) -> Any:
    raise ValueError(f"non-standard JSON constant {name}")


def loads_strict(document: bytes | str) -> Any:
    """Parse JSON, rejecting duplicate object keys and NaN/Infinity."""
    if isinstance(document, (bytes, bytearray)):
        try:
            document = bytes(document).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedDocument(f"document is not UTF-8: {exc}") from None
    try:
        return json.loads(
            document,
            object_pairs_hook=_reject_duplicates,
            parse_constant=_reject_constant,
        )
    except _DuplicateKeyFound as exc:
        raise DuplicateKey("$", exc.key) from None
    except (json.JSONDecodeError, ValueError) as exc:
        raise MalformedDocument(f"invalid JSON: {exc}") from None


def dumps_pretty(value: Any) -> bytes:
    """Two-space indented JSON, insertion key order, trailing newline."""
    return (json.dumps(value, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def dumps_canonical(value: Any) -> bytes:
    """Compact JSON with sorted keys; the basis for every state hash."""
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode(
        "utf-8"
    )


def digest(value: Any) -> str:
    return hashlib.sha256(dumps_canonical(value)).hexdigest()


def strip_whitespace(text: str | bytes) -> str:
    """Remove every whitespace character that sits outside a JSON string literal."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    out: list[str] = []
    in_string = False
    escaped = False
    for ch in text:
        if in_string:
            out.append(ch)
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
        elif ch == '"':
            in_string = True
            out.append(ch)
        elif not ch.isspace():
            out.append(ch)
    return "".join(out)
