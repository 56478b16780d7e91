"""Flat ``key = value`` record files, with a JSON twin.

Every record written by this package starts with ``schema_version``.  A file
whose first non-blank character is ``{`` is read as JSON; anything else is
read as flat text, one ``key = value`` pair per line; lines starting with
``#`` are comments.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping

SCHEMA_VERSION = 1


class RecordFormatError(ValueError):
    """A record file is malformed, has unknown keys or an unsupported version."""


def _coerce(text: str) -> Any:
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    if len(text) >= 2 and text[0] == text[-1] == '"':
        return text[1:-1]
    return text


def loads(text: str, source: str = "<record>") -> dict[str, Any]:
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise RecordFormatError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
        if not isinstance(data, dict):
            raise RecordFormatError(f"{source}: top-level JSON value must be an object")
        return data

    data: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise RecordFormatError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        if key in data:
            raise RecordFormatError(f"{source}:{lineno}: duplicate key {key!r}")
        data[key] = _coerce(value.strip())
    return data


def check_version(data: Mapping[str, Any], source: str = "<record>") -> None:
    version = data.get("schema_version")
    if version is None:
        raise RecordFormatError(f"{source}: missing schema_version")
    if version != SCHEMA_VERSION:
        raise RecordFormatError(f"{source}: unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")


def dumps(record: Mapping[str, Any], fmt: str = "text") -> str:
    body = {"schema_version": SCHEMA_VERSION, **{k: v for k, v in record.items() if k != "schema_version"}}
    if fmt == "json":
        return json.dumps(body, indent=2) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown record format {fmt!r}")
    lines = []
    for key, value in body.items():
        if isinstance(value, float):
            value = repr(value)
        elif isinstance(value, bool):
            value = int(value)
        elif isinstance(value, str):
            # quote strings that would otherwise read back as numbers
            if value != _coerce(value):
                value = f'"{value}"'
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def load(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    return loads(path.read_text(encoding="utf-8"), source=str(path))
