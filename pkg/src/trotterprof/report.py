"""Result tables and their CSV serialization.

Rows carry ``(method, t, a_or_steps, estimate, exact, abs_error)`` in a
deterministic order; numbers are written in shortest round-trip decimal
form, metadata rides in leading ``#`` comment lines, and files are written
atomically (temp file + rename) so interrupted runs never leave torn data.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping

from .errors import ConfigError

CSV_HEADER = "method,t,a_or_steps,estimate,exact,abs_error"


@dataclass(frozen=True)
class ResultRow:
    method: str
    t: float
    a_or_steps: float | int
    estimate: float
    exact: float
    abs_error: float

    def sort_key(self) -> tuple:
        return (self.method, self.t, float(self.a_or_steps))


@dataclass(frozen=True)
class ResultTable:
    """Sorted result rows plus run metadata (config hash, seed, version)."""

    rows: tuple[ResultRow, ...]
    metadata: Mapping[str, str] = field(default_factory=dict)

    @classmethod
    def from_rows(
        cls, rows: Iterable[ResultRow], metadata: Mapping[str, str] | None = None
    ) -> ResultTable:
        ordered = tuple(sorted(rows, key=ResultRow.sort_key))
        return cls(ordered, dict(metadata or {}))


def _format_number(value: float | int) -> str:
    if isinstance(value, bool):  # guard against bool-as-int surprises
        raise ConfigError("boolean is not a valid table number")
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def _parse_number(text: str) -> float | int:
    try:
        return int(text)
    except ValueError:
        return float(text)


def render_csv(table: ResultTable, *, timestamp: bool = True) -> str:
    """The full file contents for a table, newline = LF."""
    lines = []
    for key in sorted(table.metadata):
        lines.append(f"# {key}: {table.metadata[key]}")
    if timestamp:
        stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        lines.append(f"# generated: {stamp}")
    lines.append(CSV_HEADER)
    for row in table.rows:
        lines.append(
            ",".join(
                (
                    row.method,
                    _format_number(row.t),
                    _format_number(row.a_or_steps),
                    _format_number(row.estimate),
                    _format_number(row.exact),
                    _format_number(row.abs_error),
                )
            )
        )
    return "\n".join(lines) + "\n"


def atomic_write_text(text: str, path: str | os.PathLike) -> None:
    """Write via a sibling temp file and rename, so readers never see a torn file."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    handle = tempfile.NamedTemporaryFile(
        "w",
        dir=target.parent,
        prefix=f".{target.name}.",
        suffix=".tmp",
        newline="\n",
        delete=False,
    )
    try:
        with handle as fh:
            fh.write(text)
        os.replace(handle.name, target)
    except BaseException:
        try:
            os.unlink(handle.name)
        except OSError:
            pass
        raise


def write_csv(table: ResultTable, path: str | os.PathLike, *, timestamp: bool = True) -> None:
    """Serialize the table; metadata first, then the header, then data rows."""
    atomic_write_text(render_csv(table, timestamp=timestamp), path)


def read_csv(path: str | os.PathLike) -> ResultTable:
    """Parse a file produced by :func:`write_csv` back into a table."""
    metadata: dict[str, str] = {}
    rows: list[ResultRow] = []
    saw_header = False
    with open(path, "r", newline="\n") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if ":" in body:
                    key, value = body.split(":", 1)
                    metadata[key.strip()] = value.strip()
                continue
            if not saw_header:
                if line != CSV_HEADER:
                    raise ConfigError(
                        f"line {lineno}: expected header {CSV_HEADER!r}", field="header"
                    )
                saw_header = True
                continue
            parts = line.split(",")
            if len(parts) != 6:
                raise ConfigError(
                    f"line {lineno}: expected 6 fields, got {len(parts)}", field="rows"
                )
            rows.append(
                ResultRow(
                    method=parts[0],
                    t=float(parts[1]),
                    a_or_steps=_parse_number(parts[2]),
                    estimate=float(parts[3]),
                    exact=float(parts[4]),
                    abs_error=float(parts[5]),
                )
            )
    if not saw_header:
        raise ConfigError("missing CSV header", field="header")
    metadata.pop("generated", None)
    return ResultTable(tuple(rows), metadata)
