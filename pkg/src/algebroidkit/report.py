"""Check results and their text/JSON rendering."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

SCHEMA_VERSION = "1.0"


def fmt_number(x):
    """Floats with 17 significant digits; everything else via ``str``."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""
    residuals: list = field(default_factory=list)  # (label, text) pairs
    values: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "name": self.name,
            "passed": self.passed,
            "detail": self.detail,
            "residuals": [{"label": a, "value": b} for a, b in self.residuals],
            "values": {k: _jsonable(v) for k, v in self.values.items()},
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["name"], d["passed"], d.get("detail", ""),
                   [(r["label"], r["value"]) for r in d.get("residuals", [])],
                   dict(d.get("values", {})))


def _jsonable(v):
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (bool, int, float, str)) or v is None:
        return v
    try:
        return float(v)
    except (TypeError, ValueError):
        return str(v)


@dataclass
class Report:
    command: str
    checks: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def add(self, check):
        self.checks.append(check)
        return check

    def first_failure(self):
        return next((c for c in self.checks if not c.passed), None)

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["command"], [Check.from_dict(c) for c in d.get("checks", [])], list(d.get("notes", [])))

    def to_json(self):
        return _dump_json(self.to_dict()) + "\n"

    def to_text(self):
        lines = [f"report: {self.command}", f"status: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            lines.append(f"[{'ok' if c.passed else 'FAILED'}] {c.name}")
            if c.detail:
                lines.append(f"    {c.detail}")
            for k in sorted(c.values):
                lines.append(f"    {k} = {_text_value(c.values[k])}")
            for label, text in c.residuals:
                lines.append(f"    residual {label}: {text}")
        for n in self.notes:
            lines.append(f"note: {n}")
        return "\n".join(lines) + "\n"


def _text_value(v):
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_text_value(x) for x in v) + "]"
    return fmt_number(v)


def _dump_json(d):
    # floats go through the 17-digit repr; json's C encoder would bypass it
    return json.dumps(d, indent=2, cls=_PyEncoder)


class _PyEncoder(json.JSONEncoder):
    def encode(self, o):
        return "".join(self.iterencode(o))

    def iterencode(self, o, _one_shot=False):
        from json.encoder import _make_iterencode, encode_basestring

        def floatstr(x):
            if x != x or x in (float("inf"), float("-inf")):
                return json.dumps(float(x))
            return format(x, ".17g")

        it = _make_iterencode({} if self.check_circular else None, self.default, encode_basestring,
                              self.indent, floatstr, self.key_separator, self.item_separator,
                              self.sort_keys, self.skipkeys, _one_shot)
        return it(o, 0)
