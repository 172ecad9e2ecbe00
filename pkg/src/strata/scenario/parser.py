"""Line-oriented scenario grammar.

    version 1
    name flex
    fact NAME = POLY cite "text" [external]
    stratum ID family=F points=M system=constant rank=K column=U [group_column=G] [orientable] space=(...)
    <directive> ARGS...

Blank lines and '#' comments are ignored; a trailing backslash continues a
line.  Keys named ``space``, ``expr`` and the body of ``let`` run to the end
of the line; other values containing spaces must be quoted.
"""
from __future__ import annotations

import os
import re
import shlex
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

from ..confspace import CONSTANT, LOCAL_SYSTEMS, Fact, Stratum, parse_space
from ..hgring import HGError, parse_poly


class ScenarioError(ValueError):
    def __init__(self, msg: str, line: Optional[int] = None, source: str = ""):
        self.line = line
        self.source = source
        where = f"{source}:{line}: " if line is not None else (f"{source}: " if source else "")
        super().__init__(where + msg)


@dataclass
class Directive:
    line: int
    op: str
    args: List[str]
    kw: Dict[str, str]
    flags: Set[str] = field(default_factory=set)
    text: str = ""

    def get(self, key: str, default=None):
        return self.kw.get(key, default)

    def need(self, key: str) -> str:
        if key not in self.kw:
            raise ScenarioError(f"{self.op}: missing {key}=", self.line)
        return self.kw[key]


@dataclass
class ScenarioDoc:
    version: int
    name: str
    strata: List[Stratum]
    families: Dict[str, str]
    facts: Dict[str, Fact]
    pipeline: List[Directive]
    path: Optional[str] = None

    def stratum(self, sid: str) -> Optional[Stratum]:
        for s in self.strata:
            if s.id == sid:
                return s
        return None

    def base_dir(self) -> str:
        return os.path.dirname(os.path.abspath(self.path)) if self.path else os.getcwd()


# op -> (positional count, required keys, optional keys, allowed flags)
DIRECTIVES: Dict[str, Tuple[int, Set[str], Set[str], Set[str]]] = {
    "load": (1, {"as"}, set(), set()),
    "space": (1, {"expr"}, {"system", "group"}, set()),
    "e1": (1, {"family", "which"}, {"group", "factor"}, {"grouped"}),
    "stratum-bm": (1, {"id", "which"}, {"group", "factor"}, set()),
    "assert-zero-stratum": (1, set(), {"group"}, set()),
    "expect-grid": (1, {"file"}, set(), set()),
    "place": (1, {"column", "from"}, set(), set()),
    "purity": (1, set(), {"expect"}, set()),
    "assemble": (1, {"grid"}, set(), set()),
    "let": (1, {"expr"}, set(), set()),
    "alexander": (1, {"from", "M"}, set(), {"unit"}),
    "poincare": (1, {"from", "d", "dir"}, set(), set()),
    "leray": (1, {"base", "fibre"}, {"twisted-base"}, set()),
    "rank-search": (1, {"grid", "divisor", "max-page"}, {"coupled"}, set()),
    "ranks": (1, {"grid", "max-page"}, set(), set()),
    "les": (1, {"closed"}, {"open", "total"}, set()),
    "cone": (1, {"base"}, set(), set()),
    "gysin": (1, {"open", "closed"}, {"codim"}, set()),
    "divide": (1, {"num", "by"}, set(), set()),
    "weight-bound": (1, set(), set(), {"pure"}),
    "require-degree": (1, {"degree", "equals"}, set(), set()),
    "assert-equals": (1, {"expected"}, {"label"}, {"forget"}),
    "assert-zero": (1, set(), {"label"}, set()),
    "assert-unique": (1, set(), set(), set()),
    "discrepancy": (1, {"value", "printed", "note"}, set(), set()),
    "assert-no-coupling": (1, set(), set(), set()),
    "assert-maximal": (1, {"page", "grid"}, set(), set()),
    "final": (1, set(), set(), set()),
}

# directives that check or modify an existing object instead of defining one
CHECKS = {"expect-grid", "place", "purity", "weight-bound", "require-degree", "assert-equals",
          "assert-zero", "assert-unique", "assert-no-coupling", "assert-maximal", "final",
          "assert-zero-stratum", "discrepancy"}

REST_KEYS = ("space=", "expr=")
_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_.']*$")
_FACT = re.compile(r'^fact\s+(\S+)\s*=\s*(.*?)\s+cite\s+"([^"]*)"\s*(external)?\s*$')
_REF = re.compile(r"\{([^}]+)\}")

# keys whose values name earlier objects
_REF_KEYS = {"from", "grid", "base", "fibre", "twisted-base", "closed", "open", "total",
             "num", "by", "divisor", "coupled", "value"}
# keys whose values are polynomial expressions
_EXPR_KEYS = {"expr", "expected", "printed", "equals", "factor"}


def _logical_lines(text: str):
    buf, start = "", None
    for no, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw).rstrip()
        if start is None:
            start = no
        if line.endswith("\\"):
            buf += line[:-1] + " "
            continue
        buf += line
        if buf.strip():
            yield start, buf.strip()
        buf, start = "", None
    if buf.strip():
        yield start, buf.strip()


def _strip_comment(line: str) -> str:
    quoted = False
    for i, ch in enumerate(line):
        if ch == '"':
            quoted = not quoted
        elif ch == "#" and not quoted:
            return line[:i]
    return line


def _split_rest(body: str) -> Tuple[str, Optional[Tuple[str, str]]]:
    best = None
    for key in REST_KEYS:
        m = re.search(r"(?:^|\s)" + re.escape(key), body)
        if m and (best is None or m.start() < best[0]):
            best = (m.start(), key)
    if best is None:
        return body, None
    pos, key = best
    head = body[:pos]
    rest = body[pos:].strip()[len(key):].strip()
    return head, (key[:-1], rest)


_KEY = re.compile(r"(?:^|(?<=\s))([A-Za-z][\w-]*)=")


def _key_spans(body: str):
    """Positions of key= markers outside quotes."""
    spans, quoted = [], False
    for i, ch in enumerate(body):
        if ch == '"':
            quoted = not quoted
        elif not quoted and (i == 0 or body[i - 1].isspace()):
            m = _KEY.match(body, i)
            if m:
                spans.append((m.start(), m.end(), m.group(1)))
    return spans


def _kv(body: str, line: int):
    """Split 'ARG... key=value ... flag' into positionals, keywords and flags.

    Values of expression keys run up to the next key=; other values are a
    single (possibly quoted) token and any further bare words are flags.
    """
    spans = _key_spans(body)
    head = body[:spans[0][0]] if spans else body
    args = shlex.split(head)
    kw, flags = {}, set()
    for j, (start, end, key) in enumerate(spans):
        stop = spans[j + 1][0] if j + 1 < len(spans) else len(body)
        raw = body[end:stop].strip()
        if key in kw:
            raise ScenarioError(f"duplicate key {key!r}", line)
        if key in _EXPR_KEYS:
            kw[key] = raw
            continue
        toks = shlex.split(raw)
        if not toks:
            raise ScenarioError(f"empty value for {key}=", line)
        kw[key] = toks[0]
        flags.update(toks[1:])
    return args, kw, flags


def parse(data, source: str = "<scenario>", path: Optional[str] = None) -> ScenarioDoc:
    """Parse scenario text (str or UTF-8 bytes) into a validated document."""
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ScenarioError(f"not UTF-8: {exc}", None, source)
    version, name = None, None
    strata: List[Stratum] = []
    families: Dict[str, str] = {}
    facts: Dict[str, Fact] = {}
    pipeline: List[Directive] = []
    defined: Set[str] = set()
    prefixes: Set[str] = set()
    from ..confspace import bm_constants
    builtins = set(bm_constants())

    def err(msg, line):
        return ScenarioError(msg, line, source)

    for line, text in _logical_lines(data):
        word = text.split(None, 1)[0]
        try:
            if word == "version":
                version = int(text.split()[1])
                if version != 1:
                    raise err(f"unsupported version {version}", line)
            elif word == "name":
                name = text.split(None, 1)[1].strip()
            elif word == "fact":
                m = _FACT.match(text)
                if not m:
                    raise err("fact needs: fact NAME = POLY cite \"...\" [external]", line)
                fname, poly, cite, ext = m.groups()
                if fname in facts or fname in defined:
                    raise err(f"duplicate name {fname!r}", line)
                if not cite.strip():
                    raise err(f"fact {fname} has an empty citation", line)
                facts[fname] = Fact(fname, parse_poly(poly), cite, "external" if ext else "fact")
            elif word == "stratum":
                strata.append(_parse_stratum(text, line, strata, families, err))
            elif word in DIRECTIVES:
                d = _parse_directive(word, text, line, err)
                _check_refs(d, defined, facts, builtins, prefixes, strata, err)
                if d.op == "load":
                    prefixes.add(d.kw["as"])
                elif d.op not in CHECKS:
                    out = d.args[0]
                    if out in defined or out in facts:
                        raise err(f"duplicate name {out!r}", line)
                    defined.add(out)
                    if d.op == "rank-search":
                        defined.update({out + ".grid", out + ".quotient"})
                    if d.op == "ranks":
                        defined.add(out + ".grid")
                pipeline.append(d)
            else:
                raise err(f"unknown directive {word!r}", line)
        except ScenarioError:
            raise
        except (HGError, ValueError, IndexError) as exc:
            raise err(str(exc), line) from exc

    if version is None:
        raise ScenarioError("missing 'version 1' line", None, source)
    if name is None:
        raise ScenarioError("missing 'name' line", None, source)
    if not strata and not any(d.op == "load" for d in pipeline):
        raise ScenarioError("scenario has no strata", None, source)
    return ScenarioDoc(version, name, strata, families, facts, pipeline, path)


def _parse_stratum(text, line, strata, families, err) -> Stratum:
    head, rest = _split_rest(text)
    args, kw, flags = _kv(head.split(None, 1)[1] if " " in head.strip() else "", line)
    if len(args) != 1:
        raise err("stratum needs exactly one id", line)
    sid = args[0]
    if any(s.id == sid for s in strata):
        raise err(f"duplicate stratum id {sid!r}", line)
    known = {"family", "points", "system", "rank", "column", "group_column"}
    bad = set(kw) - known
    if bad:
        raise err(f"unknown stratum keys {sorted(bad)}", line)
    orientable = "orientable" in flags or "orientable" in args
    flags.discard("orientable")
    if "orientable" in args:
        args.remove("orientable")
    if flags:
        raise err(f"unknown stratum flags {sorted(flags)}", line)
    pts = kw.get("points")
    if pts is None:
        raise err("stratum needs points=", line)
    points = pts if pts in ("curve", "plane") else int(pts)
    space = None
    if rest is not None:
        space = parse_space(rest[1])
    elif isinstance(points, int):
        raise err("finite stratum needs space=", line)
    system = kw.get("system", CONSTANT)
    if system not in LOCAL_SYSTEMS:
        raise err(f"unknown local system {system!r}", line)
    s = Stratum(sid, space, points, system, not orientable, int(kw.get("rank", 0)),
                int(kw.get("column", 0)),
                int(kw["group_column"]) if "group_column" in kw else None)
    families[sid] = kw.get("family", "")
    return s


def _parse_directive(word, text, line, err) -> Directive:
    if word == "let":
        m = re.match(r"^let\s+(\S+)\s*=\s*(.+)$", text)
        if not m:
            raise err("let needs: let NAME = EXPR", line)
        d = Directive(line, "let", [m.group(1)], {"expr": m.group(2).strip()}, set(), text)
    else:
        head, rest = _split_rest(text)
        args, kw, flags = _kv(head.split(None, 1)[1] if " " in head.strip() else "", line)
        if word == "load":
            # load FILE as PREFIX
            if len(args) == 3 and args[1] == "as":
                args, kw = [args[0]], {"as": args[2]}
        if rest is not None:
            kw[rest[0]] = rest[1]
        d = Directive(line, word, args, kw, flags, text)
    npos, req, opt, allowed = DIRECTIVES[word]
    while len(d.args) > npos and d.args[-1] in allowed:
        d.flags.add(d.args.pop())
    if len(d.args) != npos:
        raise err(f"{word}: expected {npos} positional argument(s), got {len(d.args)}", line)
    missing = req - set(d.kw)
    if missing:
        raise err(f"{word}: missing {', '.join(sorted(k + '=' for k in missing))}", line)
    extra = set(d.kw) - req - opt
    if extra:
        raise err(f"{word}: unknown keys {sorted(extra)}", line)
    bad = d.flags - allowed
    if bad:
        raise err(f"{word}: unknown flags {sorted(bad)}", line)
    if word not in ("load", "assert-zero-stratum") and not _NAME.match(d.args[0]):
        raise err(f"{word}: bad name {d.args[0]!r}", line)
    return d


def _known(name, defined, facts, builtins, prefixes):
    if name in defined or name in facts or name in builtins:
        return True
    return any(name.startswith(p + ".") for p in prefixes)


def _check_refs(d, defined, facts, builtins, prefixes, strata, err):
    names = []
    for k, v in d.kw.items():
        if k in _REF_KEYS:
            names.append(v)
        if k in _EXPR_KEYS:
            names.extend(_REF.findall(v))
    if d.op in CHECKS and d.op not in ("assert-zero-stratum", "discrepancy"):
        names.append(d.args[0] + (".grid" if d.op == "assert-maximal" else ""))
    for n in names:
        if not _known(n, defined, facts, builtins, prefixes):
            raise err(f"{d.op}: reference to undefined name {n!r}", d.line)
    sid = d.kw.get("id", "")
    if d.op == "stratum-bm" and sid.partition(".")[0] not in prefixes and not any(s.id == sid for s in strata):
        raise err(f"stratum-bm: unknown stratum {d.kw['id']!r}", d.line)


def parse_file(path: str) -> ScenarioDoc:
    with open(path, "rb") as fh:
        return parse(fh.read(), source=os.path.basename(path), path=path)
