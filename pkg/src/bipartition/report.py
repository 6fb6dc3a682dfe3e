"""Self-describing command reports: a flat list of entries, each carrying
the operation that produced its value."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

REPORT_SCHEMA = 1

CONVENTIONS = {
    "ordering": "xxpp (positions first)",
    "hbar": 1.0,
    "vacuum_symplectic_eigenvalue": 0.5,
    "logarithm": "natural",
}


def to_plain(value: Any) -> Any:
    """Coerce numpy/tuple values into JSON-native ones; non-finite floats become strings."""
    if isinstance(value, np.ndarray):
        return to_plain(value.tolist())
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else repr(value)
    return value


@dataclass
class Entry:
    section: str
    item: str
    quantity: str
    value: Any
    source: str


@dataclass
class Report:
    command: str
    config: str
    entries: list[Entry] = field(default_factory=list)
    tolerances: dict[str, Any] = field(default_factory=dict)
    conventions: dict[str, Any] = field(default_factory=lambda: dict(CONVENTIONS))
    messages: list[str] = field(default_factory=list)
    status: str = "ok"
    exit_code: int = 0
    schema: int = REPORT_SCHEMA
    timestamp: str | None = field(default=None, compare=False)

    def add(self, section: str, item: str, quantity: str, value: Any, source: str) -> None:
        self.entries.append(Entry(section, item, quantity, to_plain(value), source))

    def get(self, section: str, item: str, quantity: str) -> Any:
        for e in self.entries:
            if (e.section, e.item, e.quantity) == (section, item, quantity):
                return e.value
        raise KeyError((section, item, quantity))

    def fail(self, message: str, exit_code: int) -> None:
        self.status = "failed"
        self.exit_code = max(self.exit_code, exit_code)
        self.messages.append(message)

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["timestamp"] is None:
            del d["timestamp"]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False)

    @classmethod
    def from_dict(cls, d: dict) -> "Report":
        d = dict(d)
        d["entries"] = [Entry(**e) for e in d.get("entries", [])]
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "Report":
        return cls.from_dict(json.loads(text))

    def render(self) -> str:
        lines = [f"bipartition {self.command}: {self.config}"]
        sections: dict[str, list[Entry]] = {}
        for e in self.entries:
            sections.setdefault(e.section, []).append(e)
        for section, entries in sections.items():
            lines.append("")
            lines.append(f"[{section}]")
            quantities = list(dict.fromkeys(e.quantity for e in entries))
            items = list(dict.fromkeys(e.item for e in entries))
            scalar_q = [q for q in quantities
                        if all(not isinstance(e.value, list) for e in entries if e.quantity == q)]
            table = {(e.item, e.quantity): e.value for e in entries}
            if scalar_q:
                header = ["item"] + scalar_q
                rows = [[item] + [_fmt(table.get((item, q), "")) for q in scalar_q]
                        for item in items if any((item, q) in table for q in scalar_q)]
                widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
                lines.append("  ".join(h.ljust(w) for h, w in zip(header, widths)))
                lines.append("  ".join("-" * w for w in widths))
                for r in rows:
                    lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)))
            for item in items:
                for q in quantities:
                    if q in scalar_q or (item, q) not in table:
                        continue
                    lines.append(f"{item} {q}:")
                    lines.extend("  " + row for row in _fmt_array(table[(item, q)]))
        if self.messages:
            lines.append("")
            lines.extend(f"! {m}" for m in self.messages)
        lines.append("")
        lines.append(f"status: {self.status} (exit {self.exit_code})")
        return "\n".join(lines)


def _fmt(value: Any) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.6g}"
    if value is None:
        return "-"
    return str(value)


def _fmt_array(value: list) -> list[str]:
    if value and all(isinstance(v, list) for v in value):
        return ["  ".join(f"{x:>12.6g}" if isinstance(x, float) else f"{x!s:>12}" for x in row)
                for row in value]
    return ["  ".join(_fmt(v) for v in value)]
