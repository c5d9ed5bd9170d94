"""Automaton files and result tables.

Automaton files are JSON documents with schema tag ``sftpress.automaton/1``::

    {
      "schema": "sftpress.automaton/1",
      "states": [{"name": "0", "initial": true}, ...],
      "edges": [{"from": 0, "to": 1, "label": "a", "r": 1, "psi": "1/2"}, ...],
      "alphabet": ["a", "A"],
      "metadata": {"provenance": "..."}
    }

``from``/``to`` are state indices or names.  ``r`` defaults to 1 and ``psi``
to 0; values are JSON numbers or exact ``"p/q"`` strings.  See
``docs/automaton_format.md``.
"""
from __future__ import annotations

import csv
import io as _io
import json
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

import jsonschema

from .freegroup.automaton import DualMetricAutomaton

__all__ = [
    "SCHEMA_TAG",
    "AUTOMATON_SCHEMA",
    "AutomatonFormatError",
    "automaton_from_dict",
    "automaton_to_dict",
    "load_automaton",
    "save_automaton",
    "example_path",
    "ResultTable",
    "curve_svg",
]

SCHEMA_TAG = "sftpress.automaton/1"

_value = {
    "oneOf": [
        {"type": "number"},
        {"type": "string", "pattern": r"^\s*-?\d+(\s*/\s*\d+)?\s*$"},
    ]
}
_ref = {"oneOf": [{"type": "integer", "minimum": 0}, {"type": "string"}]}

AUTOMATON_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema", "states", "edges"],
    "additionalProperties": False,
    "properties": {
        "schema": {"const": SCHEMA_TAG},
        "states": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["name"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "initial": {"type": "boolean"},
                },
            },
        },
        "edges": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["from", "to"],
                "additionalProperties": False,
                "properties": {
                    "from": _ref,
                    "to": _ref,
                    "label": {"type": ["string", "null"]},
                    "r": _value,
                    "psi": _value,
                },
            },
        },
        "alphabet": {"type": "array", "items": {"type": "string"}},
        "metadata": {"type": "object"},
    },
}


class AutomatonFormatError(ValueError):
    """Schema or semantic violation in an automaton file."""


def _parse_value(x, where):
    if isinstance(x, bool):
        raise AutomatonFormatError(f"{where}: expected a number, got a boolean")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return x
    try:
        return Fraction(x.replace(" ", ""))
    except (ValueError, ZeroDivisionError) as exc:
        raise AutomatonFormatError(f"{where}: bad value {x!r}") from exc


def _dump_value(x):
    if isinstance(x, float):
        return x
    x = Fraction(x)
    return int(x) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _line_of(text, where):
    """Best-effort line number for an ``edges[i]`` / ``states[i]`` path."""
    if text is None:
        return ""
    try:
        key, idx = where.split("[", 1)
        idx = int(idx.split("]", 1)[0])
    except ValueError:
        return ""
    pos = text.find(f'"{key}"')
    if pos < 0:
        return ""
    depth = 0
    count = -1
    for i in range(text.index("[", pos), len(text)):
        ch = text[i]
        if ch in "[{":
            depth += 1
            if depth == 2 and ch == "{":
                count += 1
                if count == idx:
                    return f" (line {text.count(chr(10), 0, i) + 1})"
        elif ch in "]}":
            depth -= 1
            if depth == 0:
                break
    return ""


def automaton_from_dict(doc: dict, *, prune=True, text=None) -> DualMetricAutomaton:
    """Validate a parsed document and build the automaton.

    Unreachable states are removed with a warning naming them.
    """
    validator = jsonschema.Draft202012Validator(AUTOMATON_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        path = "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in e.absolute_path).lstrip(".")
        raise AutomatonFormatError(f"schema violation at {path or '<root>'}: {e.message}")
    states = doc["states"]
    names = [s["name"] for s in states]
    if len(set(names)) != len(names):
        raise AutomatonFormatError("state names must be unique")
    index = {n: i for i, n in enumerate(names)}
    initial = [i for i, s in enumerate(states) if s.get("initial", False)]
    if not initial:
        raise AutomatonFormatError("no initial state")
    alphabet = list(doc.get("alphabet", []))
    labels = {l: i for i, l in enumerate(alphabet)}
    edges, r, psi = [], [], []
    for i, e in enumerate(doc["edges"]):
        where = f"edges[{i}]"
        ends = []
        for side in ("from", "to"):
            ref = e[side]
            if isinstance(ref, int):
                ok = ref < len(states)
                st = ref
            else:
                ok = ref in index
                st = index.get(ref)
            if not ok:
                raise AutomatonFormatError(
                    f"{where}.{side}{_line_of(text, where)}: dangling reference {ref!r}"
                )
            ends.append(st)
        lab = e.get("label")
        lab = "" if lab is None else lab
        if lab not in labels:
            labels[lab] = len(alphabet)
            alphabet.append(lab)
        rv = _parse_value(e.get("r", 1), f"{where}.r")
        if rv <= 0:
            raise AutomatonFormatError(f"{where}.r{_line_of(text, where)}: roof must be positive, got {rv}")
        edges.append((ends[0], ends[1], labels[lab]))
        r.append(rv)
        psi.append(_parse_value(e.get("psi", 0), f"{where}.psi"))
    auto = DualMetricAutomaton(
        n_states=len(states),
        initial=initial,
        edges=edges,
        labels=alphabet,
        r=r,
        psi=psi,
        names=names,
        meta=dict(doc.get("metadata", {})),
    )
    return _prune(auto) if prune else auto


def _prune(auto: DualMetricAutomaton) -> DualMetricAutomaton:
    out = {}
    for a, b, _ in auto.edges:
        out.setdefault(a, []).append(b)
    seen = set(auto.initial)
    stack = list(auto.initial)
    while stack:
        for b in out.get(stack.pop(), []):
            if b not in seen:
                seen.add(b)
                stack.append(b)
    if len(seen) == auto.n_states:
        return auto
    dropped = [auto.names[i] if auto.names else str(i) for i in range(auto.n_states) if i not in seen]
    warnings.warn("pruned unreachable states: " + ", ".join(dropped), stacklevel=3)
    keep = sorted(seen)
    pos = {s: i for i, s in enumerate(keep)}
    kept = [i for i, (a, b, _) in enumerate(auto.edges) if a in pos and b in pos]
    return DualMetricAutomaton(
        n_states=len(keep),
        initial=[pos[s] for s in auto.initial],
        edges=[(pos[auto.edges[i][0]], pos[auto.edges[i][1]], auto.edges[i][2]) for i in kept],
        labels=list(auto.labels),
        r=[auto.r[i] for i in kept],
        psi=[auto.psi[i] for i in kept],
        names=[auto.names[s] for s in keep] if auto.names else [],
        meta=dict(auto.meta),
    )


def _jsonable(x):
    if isinstance(x, Fraction):
        return _dump_value(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def automaton_to_dict(auto: DualMetricAutomaton) -> dict:
    names = list(auto.names) if auto.names else [str(i) for i in range(auto.n_states)]
    init = set(auto.initial)
    return {
        "schema": SCHEMA_TAG,
        "states": [{"name": n, "initial": i in init} for i, n in enumerate(names)],
        "edges": [
            {"from": a, "to": b, "label": auto.labels[l], "r": _dump_value(r), "psi": _dump_value(p)}
            for (a, b, l), r, p in zip(auto.edges, auto.r, auto.psi)
        ],
        "alphabet": list(auto.labels),
        "metadata": _jsonable(auto.meta),
    }


def load_automaton(path) -> DualMetricAutomaton:
    """Read, validate and prune an automaton file."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise AutomatonFormatError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    return automaton_from_dict(doc, text=text)


def save_automaton(auto: DualMetricAutomaton, path) -> None:
    Path(path).write_text(json.dumps(automaton_to_dict(auto), indent=1) + "\n")


def example_path(name: str) -> Path:
    """Path of a shipped example file (``full_2shift``, ``bridged_2state``, ``f2_sstar_dual``)."""
    fname = name if name.endswith(".json") else name + ".json"
    return Path(str(resources.files("sftpress") / "data" / fname))


# ---------------------------------------------------------------------------
# result tables


def _fmt_real(x):
    return float(f"{x:.12g}")


@dataclass
class ResultTable:
    """Rows of typed values with deterministic CSV/JSON rendering.

    Fractions stay exact in JSON as ``{"num": p, "den": q}``; reals are
    rounded to 12 significant digits.
    """

    columns: list
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(f"expected {len(self.columns)} values, got {len(values)}")
        self.rows.append(list(values))

    @staticmethod
    def _json_cell(x):
        if isinstance(x, Fraction):
            return {"num": x.numerator, "den": x.denominator}
        if isinstance(x, bool):
            return x
        if isinstance(x, float):
            return _fmt_real(x) if x == x and abs(x) != float("inf") else str(x)
        if hasattr(x, "item"):
            return ResultTable._json_cell(x.item())
        return x

    @staticmethod
    def _csv_cell(x):
        if isinstance(x, bool):
            return "true" if x else "false"
        if isinstance(x, (Fraction, float)) or hasattr(x, "item"):
            x = float(x)
            return repr(_fmt_real(x)) if x == x and abs(x) != float("inf") else str(x)
        return str(x)

    def to_json(self) -> str:
        doc = {
            "columns": list(self.columns),
            "rows": [[self._json_cell(v) for v in row] for row in self.rows],
        }
        if self.meta:
            doc["meta"] = _jsonable(self.meta)
        # one row per line keeps tables readable and diffable
        rows = ",\n  ".join(json.dumps(r) for r in doc["rows"])
        parts = [f' "columns": {json.dumps(doc["columns"])}', f' "rows": [\n  {rows}\n ]' if rows else ' "rows": []']
        if "meta" in doc:
            parts.append(f' "meta": {json.dumps(doc["meta"])}')
        return "{\n" + ",\n".join(parts) + "\n}"

    def to_csv(self) -> str:
        buf = _io.StringIO()
        buf.write("# lossy export: exact rationals are rendered as floats; use JSON for exact values\n")
        for k, v in self.meta.items():
            buf.write(f"# {k}: {v}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([self._csv_cell(v) for v in row])
        return buf.getvalue()

    def render(self, fmt="json") -> str:
        if fmt == "json":
            return self.to_json()
        if fmt == "csv":
            return self.to_csv()
        raise ValueError(f"unsupported table format {fmt!r}")

    @classmethod
    def from_json(cls, text: str) -> "ResultTable":
        doc = json.loads(text)

        def cell(x):
            if isinstance(x, dict) and set(x) == {"num", "den"}:
                return Fraction(x["num"], x["den"])
            return x

        return cls(doc["columns"], [[cell(v) for v in row] for row in doc["rows"]], doc.get("meta", {}))


# ---------------------------------------------------------------------------
# SVG


def curve_svg(points, slopes=None, *, width=480, height=360, title="theta(s)", ticks=5) -> str:
    """A static SVG of a sampled curve with optional tangent segments.

    Parameters
    ----------
    points : sequence of (x, y)
    slopes : sequence of float, optional
        Derivative at each point; a short tangent is drawn through each.
    """
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 2:
        raise ValueError("need at least two points")
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    pad = 48

    def X(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def Y(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-family="sans-serif" '
        f'font-size="14">{title}</text>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
    ]
    for i in range(ticks + 1):
        xv = x0 + (x1 - x0) * i / ticks
        yv = y0 + (y1 - y0) * i / ticks
        out.append(
            f'<line x1="{X(xv):.2f}" y1="{height - pad}" x2="{X(xv):.2f}" y2="{height - pad + 5}" stroke="black"/>'
            f'<text x="{X(xv):.2f}" y="{height - pad + 18}" text-anchor="middle" font-family="sans-serif" '
            f'font-size="10">{xv:.3g}</text>'
        )
        out.append(
            f'<line x1="{pad - 5}" y1="{Y(yv):.2f}" x2="{pad}" y2="{Y(yv):.2f}" stroke="black"/>'
            f'<text x="{pad - 8}" y="{Y(yv) + 3:.2f}" text-anchor="end" font-family="sans-serif" '
            f'font-size="10">{yv:.3g}</text>'
        )
    if slopes is not None:
        half = 0.06 * (x1 - x0)
        for (x, y), d in zip(pts, slopes):
            xa, xb = x - half, x + half
            out.append(
                f'<line x1="{X(xa):.2f}" y1="{Y(y - d * half):.2f}" x2="{X(xb):.2f}" '
                f'y2="{Y(y + d * half):.2f}" stroke="#c33" stroke-width="0.8"/>'
            )
    poly = " ".join(f"{X(x):.2f},{Y(y):.2f}" for x, y in pts)
    out.append(f'<polyline points="{poly}" fill="none" stroke="#236" stroke-width="1.6"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
