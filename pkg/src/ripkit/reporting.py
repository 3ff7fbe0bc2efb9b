"""Report envelopes, output formats, and plot-data emission.

Every command writes a payload table preceded by metadata lines starting
with '#' (tool version, timestamp, resolved configuration). The comment
convention matches the matrix text format, holds in all three output
formats, and keeps payload bytes separable from wall-clock metadata: two
runs of the same config agree on every non-'#' byte.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from datetime import datetime, timezone

from . import __version__

FORMATS = ("csv", "json-lines", "text")


def format_value(value) -> str:
    """Render a payload cell deterministically (floats via repr round-trip)."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    text = str(value)
    if any(ch in text for ch in (",", "\n", "\r")):
        raise ValueError(f"payload string {text!r} may not contain commas or newlines")
    return text


@dataclass(frozen=True)
class ReportEnvelope:
    """A payload table plus the metadata needed to reproduce it."""

    tool_version: str
    config_echo: dict
    timestamp: str
    columns: list
    rows: list

    @classmethod
    def build(cls, config_echo: dict, columns, rows) -> "ReportEnvelope":
        return cls(
            tool_version=__version__,
            config_echo=dict(config_echo),
            timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
            columns=list(columns),
            rows=[list(r) for r in rows],
        )

    def _meta_lines(self) -> list[str]:
        echo = " ".join(f"{k}={format_value(v)}" for k, v in sorted(self.config_echo.items()))
        return [
            f"# ripkit-version: {self.tool_version}",
            f"# generated: {self.timestamp}",
            f"# config: {echo}",
        ]

    def render(self, fmt: str) -> str:
        if fmt == "csv":
            return self._render_csv()
        if fmt == "json-lines":
            return self._render_json_lines()
        if fmt == "text":
            return self._render_text()
        raise ValueError(f"unknown output format {fmt!r}; expected one of {FORMATS}")

    def _render_csv(self) -> str:
        lines = self._meta_lines()
        lines.append(",".join(self.columns))
        for row in self.rows:
            lines.append(",".join(format_value(v) for v in row))
        return "\n".join(lines) + "\n"

    def _render_json_lines(self) -> str:
        lines = self._meta_lines()
        for row in self.rows:
            record = dict(zip(self.columns, row))
            lines.append(json.dumps(record, sort_keys=True))
        return "\n".join(lines) + "\n"

    def _render_text(self) -> str:
        lines = self._meta_lines()
        for row in self.rows:
            lines.append("")
            lines.extend(f"{col}={format_value(v)}" for col, v in zip(self.columns, row))
        return "\n".join(lines) + "\n"


def write_report(envelope: ReportEnvelope, path: str, fmt: str) -> None:
    """Write the rendered report to ``path``, or stdout when path is '-'."""
    text = envelope.render(fmt)
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


def payload_lines(text: str) -> list[str]:
    """The deterministic (non-'#') lines of a rendered report."""
    return [ln for ln in text.splitlines() if not ln.startswith("#")]


def parse_strict_csv(text: str) -> tuple[list[str], list[list[str]]]:
    """Parse the documented CSV dialect back into header and string rows.

    '#' lines are metadata; every data row must have exactly as many cells
    as the header. Used to guarantee that emitted CSV round-trips.
    """
    lines = payload_lines(text)
    lines = [ln for ln in lines if ln != ""]
    if not lines:
        raise ValueError("CSV payload is empty")
    header = lines[0].split(",")
    rows = []
    for i, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != len(header):
            raise ValueError(f"CSV row {i} has {len(cells)} cells, expected {len(header)}")
        rows.append(cells)
    return header, rows


def emit_plot_data(series: dict, path: str) -> None:
    """Write named (x, y) series as a ``series,x,y`` CSV, sorted by (series, x).

    The flat schema feeds any plotting tool directly.
    """
    if not series:
        raise ValueError("at least one series is required")
    rows = []
    for name, points in series.items():
        if any(ch in str(name) for ch in (",", "\n", "\r")):
            raise ValueError(f"series name {name!r} may not contain commas or newlines")
        for x, y in points:
            rows.append((str(name), float(x), float(y)))
    rows.sort(key=lambda r: (r[0], r[1]))
    with open(path, "w", newline="\n") as fh:
        fh.write("series,x,y\n")
        for name, x, y in rows:
            fh.write(f"{name},{x!r},{y!r}\n")
