"""Line-delimited JSON files with a versioned header line."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable, Iterator

from .core import GroundProbeError


class SchemaMismatch(GroundProbeError):
    pass


def dumps(obj: Any) -> str:
    """Canonical one-line JSON: sorted keys, no spaces, so dumps are byte-stable."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def header(schema: str, version: int, **extra: Any) -> dict[str, Any]:
    return {"schema": schema, "version": version, **extra}


def write_records(path: str | Path, head: dict[str, Any] | None, records: Iterable[dict[str, Any]]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        if head is not None:
            fh.write(dumps(head) + "\n")
        for rec in records:
            fh.write(dumps(rec) + "\n")
            n += 1
    return n


def iter_lines(path: str | Path) -> Iterator[dict[str, Any]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                # a torn last line from an interrupted append is tolerated by callers
                raise SchemaMismatch(f"{path}:{lineno}: not JSON ({exc})") from None


def read_records(
    path: str | Path, schema: str | None = None, version: int | None = None
) -> tuple[dict[str, Any] | None, list[dict[str, Any]]]:
    """Return (header, records). The header is the first line when it has a ``schema`` key."""
    lines = list(iter_lines(path))
    head = lines[0] if lines and "schema" in lines[0] else None
    body = lines[1:] if head is not None else lines
    if schema is not None:
        if head is None or head.get("schema") != schema:
            found = head.get("schema") if head else None
            raise SchemaMismatch(f"{path}: expected schema {schema!r}, found {found!r}")
        if version is not None and head.get("version") != version:
            raise SchemaMismatch(f"{path}: unsupported {schema} version {head.get('version')}")
    return head, body
