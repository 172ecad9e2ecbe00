"""Deterministic text and JSON renderings of a replay report."""
from __future__ import annotations

import json
from typing import List

from ..hgring import HGPoly, format_poly, to_json
from ..spectral import SpectralGrid, format_grid, grid_to_json


def _choice_text(report, choices) -> str:
    if not choices:
        return ""
    parts = [f"{t}#{v}" for t, v in sorted(choices.items())]
    return " [" + ", ".join(parts) + "]"


def _value_text(v) -> str:
    if isinstance(v, SpectralGrid):
        return format_grid(v)
    if isinstance(v, HGPoly):
        return format_poly(v)
    return str(v)


def _value_json(v):
    if isinstance(v, SpectralGrid):
        return {"grid": grid_to_json(v)}
    if isinstance(v, HGPoly):
        return {"poly": format_poly(v), "terms": to_json(v)}
    return {"value": str(v)}


def emit_text(report) -> str:
    out: List[str] = [f"scenario {report.name}", ""]
    out.append("== outputs")
    for name, cands in report.outputs.items():
        for c in cands:
            tag = _choice_text(report, c.choices)
            if isinstance(c.value, SpectralGrid):
                out.append(f"{name}{tag}:")
                out.extend("    " + line for line in format_grid(c.value).splitlines())
            else:
                out.append(f"{name}{tag} = {_value_text(c.value)}")
    if report.choices:
        out += ["", "== choices"]
        for tag in sorted(report.choices):
            for label, desc in sorted(report.choices[tag].items()):
                out.append(f"{tag}#{label}: {desc}")
    out += ["", "== facts used"]
    for name, kind, cite in report.ledger:
        out.append(f"{name} ({kind}): {cite}")
    out += ["", "== discrepancies"]
    for d in report.discrepancies:
        out.append(f"{d['id']}: computed {d['computed']}; printed {d['printed']}; {d['status']}. {d['note']}")
    out += ["", "== assertions"]
    for a in report.assertions:
        out.append(f"{'ok  ' if a.ok else 'FAIL'} line {a.line} {a.op}: {a.message}")
    out += ["", "== finals"]
    for name, v in report.finals.items():
        if isinstance(v, list):
            out.append(f"{name}: ambiguous, " + " | ".join(_value_text(x) for x in v))
        else:
            out.append(f"{name} = {_value_text(v)}")
    return "\n".join(out) + "\n"


def emit_json(report) -> str:
    obj = {
        "scenario": report.name,
        "outputs": {name: [dict(_value_json(c.value), choices=dict(sorted(c.choices.items())))
                           for c in cands] for name, cands in report.outputs.items()},
        "choices": {t: {str(k): v for k, v in sorted(lbl.items())} for t, lbl in sorted(report.choices.items())},
        "ledger": [{"name": n, "kind": k, "citation": c} for n, k, c in report.ledger],
        "discrepancies": report.discrepancies,
        "assertions": [{"line": a.line, "op": a.op, "target": a.target, "ok": a.ok, "message": a.message}
                       for a in report.assertions],
        "finals": {name: ([_value_json(x) for x in v] if isinstance(v, list) else _value_json(v))
                   for name, v in report.finals.items()},
        "ok": report.ok,
    }
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def emit(report, fmt: str = "text") -> bytes:
    if fmt == "text":
        return emit_text(report).encode("utf-8")
    if fmt == "json":
        return emit_json(report).encode("utf-8")
    raise ValueError(f"unknown format {fmt!r}")
