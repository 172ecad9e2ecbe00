"""Replay of a parsed scenario.

Every named object is a candidate set: a list of (choices, value) pairs.
Directives that enumerate alternatives (les, ranks, rank-search, gysin) add a
choice tag named after their output; filters (divide, weight-bound,
require-degree) record which choice combinations survive, and that
restriction applies to every object carrying the same tags.
"""
from __future__ import annotations

import logging
import os
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from ..confspace import (CONSTANT, BMContext, Fact, bm, bm_constants, les_solve, open_cone,
                         parse_space, stratum_bm)
from ..hgring import (HGError, HGPoly, as_poly, div_exact, forget_equivariant, format_poly, isotypic_part,
                      parse_poly, poincare_dual)
from ..spectral import (SpectralError, SpectralGrid, alexander_dual, add_unit, assemble_abutment,
                        connecting_assignments, diff_grids, enumerate_pages, format_grid, leray_e2,
                        page_assignments, parse_grid, purity_check, rank_search, HOMOLOGICAL)
from ..symrep import parse_partition
from .parser import Directive, ScenarioDoc, ScenarioError, parse_file

log = logging.getLogger(__name__)

_REF = re.compile(r"\{([^}]+)\}")


class ReplayError(ScenarioError):
    pass


class ReplayAssertion(ReplayError):
    """Raised in strict mode on the first failed assertion."""


@dataclass
class Cand:
    choices: Dict[str, int]
    value: object


@dataclass
class Assertion:
    line: int
    op: str
    target: str
    ok: bool
    message: str


@dataclass
class ReplayReport:
    name: str
    outputs: Dict[str, List[Cand]] = field(default_factory=dict)
    kinds: Dict[str, str] = field(default_factory=dict)
    ledger: List[Tuple[str, str, str]] = field(default_factory=list)  # (name, kind, citation)
    discrepancies: List[dict] = field(default_factory=list)
    assertions: List[Assertion] = field(default_factory=list)
    events: List[str] = field(default_factory=list)
    choices: Dict[str, Dict[int, str]] = field(default_factory=dict)
    finals: Dict[str, object] = field(default_factory=dict)
    solution_counts: Dict[str, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(a.ok for a in self.assertions)

    def failures(self) -> List[Assertion]:
        return [a for a in self.assertions if not a.ok]

    def value(self, name: str):
        """The unique surviving value of name; raises if ambiguous."""
        cands = self.outputs[name]
        vals = _distinct([c.value for c in cands])
        if len(vals) != 1:
            raise ReplayError(f"{name} has {len(vals)} surviving values")
        return vals[0]

    def external_facts(self) -> List[str]:
        return [n for n, k, _ in self.ledger if k == "external"]


def _distinct(vals):
    out = []
    for v in vals:
        if not any(_same(v, w) for w in out):
            out.append(v)
    return out


def _same(a, b):
    if type(a) is not type(b):
        return False
    if isinstance(a, SpectralGrid):
        return a == b and a.page == b.page
    return a == b


class _Replayer:
    def __init__(self, doc: ScenarioDoc, strict: bool = False, data_dir: Optional[str] = None):
        self.doc = doc
        self.strict = strict
        self.data_dir = data_dir
        self.report = ReplayReport(doc.name)
        self.env: Dict[str, List[Cand]] = {}
        self.loaded: Dict[str, ScenarioDoc] = {}
        self.constraints: List[Tuple[frozenset, List[Dict[str, int]]]] = []
        self.used: List[str] = []
        self.facts: Dict[str, Fact] = dict(doc.facts)
        self.imported_ledger: List[Tuple[str, str, str]] = []
        for k, v in bm_constants().items():
            self.env[k] = [Cand({}, v)]

    # ------------------------------------------------------------ candidates

    def alive(self, choices: Dict[str, int]) -> bool:
        for tags, allowed in self.constraints:
            shared = [t for t in tags if t in choices]
            if not shared:
                continue
            if not any(all(a[t] == choices[t] for t in shared) for a in allowed):
                return False
        return True

    def restrict(self, survivors: List[Cand]):
        tags = frozenset(t for c in survivors for t in c.choices)
        if not tags:
            return
        self.constraints.append((tags, [dict(c.choices) for c in survivors]))

    def get(self, name: str, line: int) -> List[Cand]:
        if name in self.facts:
            self._use_fact(name)
            return [Cand({}, self.facts[name].value)]
        if name not in self.env:
            raise ReplayError(f"undefined name {name!r}", line, self.doc.name)
        return [c for c in self.env[name] if self.alive(c.choices)]

    def _use_fact(self, name: str):
        if name not in self.used:
            self.used.append(name)

    def combine(self, names: List[str], line: int):
        """Consistent tuples of candidates for the named inputs."""
        combos = [({}, [])]
        for n in names:
            nxt = []
            for ch, vals in combos:
                for c in self.get(n, line):
                    if any(ch.get(t, v) != v for t, v in c.choices.items()):
                        continue
                    merged = dict(ch)
                    merged.update(c.choices)
                    if self.alive(merged):
                        nxt.append((merged, vals + [c.value]))
            combos = nxt
        return combos

    def eval_expr(self, text: str, line: int):
        """Candidates of a polynomial expression with {name} references."""
        refs = list(dict.fromkeys(_REF.findall(text)))
        out = []
        for ch, vals in self.combine(refs, line):
            table = dict(zip(refs, vals))

            def resolve(name):
                v = table[name]
                if not isinstance(v, HGPoly):
                    raise ReplayError(f"{name} is not a polynomial", line, self.doc.name)
                return v

            try:
                out.append(Cand(ch, parse_poly(text, resolve)))
            except HGError as exc:
                raise ReplayError(f"bad expression {text!r}: {exc}", line, self.doc.name) from exc
        return out

    def put(self, name: str, cands: List[Cand], kind: str = "poly"):
        self.env[name] = cands
        self.report.kinds[name] = kind

    def ctx(self, group=None) -> BMContext:
        return BMContext(facts=self.facts, n=int(group) if group else None, used=self.used,
                         events=self.report.events)

    def check(self, d: Directive, target: str, ok: bool, msg: str):
        a = Assertion(d.line, d.op, target, bool(ok), msg)
        self.report.assertions.append(a)
        if not ok:
            log.warning("%s:%d: %s", self.doc.name, d.line, msg)
            if self.strict:
                raise ReplayAssertion(msg, d.line, self.doc.name)

    def path(self, rel: str) -> str:
        if os.path.isabs(rel):
            return rel
        for base in (self.doc.base_dir(), self.data_dir):
            if base and os.path.exists(os.path.join(base, rel)):
                return os.path.join(base, rel)
        return os.path.join(self.doc.base_dir(), rel)

    # ------------------------------------------------------------ main loop

    def run(self) -> ReplayReport:
        for d in self.doc.pipeline:
            handler = getattr(self, "op_" + d.op.replace("-", "_"))
            try:
                handler(d)
            except (ReplayError, ScenarioError):
                raise
            except (HGError, ValueError) as exc:
                raise ReplayError(f"{d.op} {d.args[0] if d.args else ''}: {exc}", d.line,
                                  self.doc.name) from exc
        r = self.report
        for name, cands in self.env.items():
            if name in r.kinds:
                r.outputs[name] = [c for c in cands if self.alive(c.choices)]
        r.ledger = list(self.imported_ledger) + [
            (n, self.facts[n].kind, self.facts[n].citation) for n in self.used]
        for name in list(r.finals):
            vals = _distinct([c.value for c in r.outputs[name]])
            r.finals[name] = vals[0] if len(vals) == 1 else vals
        return r

    # ------------------------------------------------------------ directives

    def op_load(self, d: Directive):
        prefix = d.kw["as"]
        sub = parse_file(self.path(d.args[0]))
        rep = _Replayer(sub, strict=self.strict, data_dir=self.data_dir).run()
        self.loaded[prefix] = sub
        for name, cands in rep.outputs.items():
            full = f"{prefix}.{name}"
            self.env[full] = [Cand({f"{prefix}.{t}": v for t, v in c.choices.items()}, c.value)
                              for c in cands]
            self.report.kinds[full] = rep.kinds[name]
        for tag, labels in rep.choices.items():
            self.report.choices[f"{prefix}.{tag}"] = labels
        self.imported_ledger += [(f"{prefix}.{n}", k, c) for n, k, c in rep.ledger]
        self.report.discrepancies += [dict(x, id=f"{prefix}.{x['id']}") for x in rep.discrepancies]
        self.report.assertions += [Assertion(a.line, a.op, f"{prefix}.{a.target}", a.ok,
                                             f"[{prefix}] {a.message}") for a in rep.assertions]
        self.report.events += [f"[{prefix}] {e}" for e in rep.events]
        for k, v in rep.solution_counts.items():
            self.report.solution_counts[f"{prefix}.{k}"] = v

    def op_space(self, d: Directive):
        expr = parse_space(d.kw["expr"])
        val = bm(expr, d.get("system", CONSTANT), self.ctx(d.get("group")))
        self.put(d.args[0], [Cand({}, val)])

    def _factor(self, d: Directive):
        if "factor" not in d.kw:
            return None
        cands = self.eval_expr(d.kw["factor"], d.line)
        if len(cands) != 1:
            raise ReplayError("factor must be a single polynomial", d.line, self.doc.name)
        return cands[0].value

    def _stratum_value(self, s, which, ctx, factor, line):
        try:
            if which == "x":
                # the configuration space itself, with the stratum's local system
                p = ctx.lift(HGPoly.zero()) if s.space is None else bm(s.space, s.local_system, ctx)
            else:
                p = stratum_bm(s, ctx, which)
        except HGError as exc:
            raise ReplayError(f"stratum {s.id}: {exc}", line, self.doc.name) from exc
        if factor is not None and not p.is_zero():
            q = div_exact(p, factor)
            if not isinstance(q, HGPoly):
                raise ReplayError(f"stratum {s.id}: not divisible by the factor", line, self.doc.name)
            p = q
        return p

    def op_e1(self, d: Directive):
        fam, which = d.kw["family"], d.kw["which"]
        if which not in ("phi", "f"):
            raise ReplayError(f"which must be phi or f, not {which!r}", d.line, self.doc.name)
        strata = [s for s in self.doc.strata if self.doc.families.get(s.id) == fam]
        if not strata:
            raise ReplayError(f"no strata in family {fam!r}", d.line, self.doc.name)
        ctx = self.ctx(d.get("group"))
        factor = self._factor(d)
        grouped = "grouped" in d.flags
        cols: Dict[int, HGPoly] = {}
        for s in strata:
            p = self._stratum_value(s, which, ctx, factor, d.line)
            if p.is_zero():
                ctx.note(f"stratum {s.id}: trivial homology, column left empty")
                continue
            col = s.group_column if grouped and s.group_column is not None else s.column
            if col < 1:
                raise ReplayError(f"stratum {s.id} has nonzero homology but no column", d.line,
                                  self.doc.name)
            cols[col] = cols.get(col, HGPoly.zero(p.n)) + p
        entries = {}
        for u, p in cols.items():
            for i in p.degrees():
                entries[(u, i - u)] = p.degree_part(i)
        g = SpectralGrid(entries, page=1, orientation=HOMOLOGICAL, n=ctx.n)
        self.put(d.args[0], [Cand({}, g)], "grid")

    def _find_stratum(self, sid: str, line: int):
        # PREFIX.ID names a stratum of a loaded scenario, evaluated with that scenario's facts
        prefix, _, rest = sid.partition(".")
        if rest and prefix in self.loaded:
            sub = self.loaded[prefix]
            return sub.stratum(rest), sub.facts
        return self.doc.stratum(sid), None

    def op_stratum_bm(self, d: Directive):
        s, facts = self._find_stratum(d.kw["id"], d.line)
        if s is None:
            raise ReplayError(f"unknown stratum {d.kw['id']!r}", d.line, self.doc.name)
        ctx = self.ctx(d.get("group"))
        if facts is not None:
            # the loaded run has already put these facts in the ledger
            ctx = BMContext(facts=facts, n=ctx.n, used=[], events=self.report.events)
        p = self._stratum_value(s, d.kw["which"], ctx, self._factor(d), d.line)
        self.put(d.args[0], [Cand({}, p)])

    def op_assert_zero_stratum(self, d: Directive):
        sid = d.args[0]
        s = self.doc.stratum(sid)
        if s is None:
            self.check(d, sid, False, f"stratum {sid} is missing")
            return
        ctx = self.ctx(d.get("group"))
        vals = [stratum_bm(s, ctx, w) for w in ("phi", "f")]
        self.check(d, sid, all(v.is_zero() for v in vals),
                   f"stratum {sid}: expected trivial homology, got {format_poly(vals[0])}")

    def op_expect_grid(self, d: Directive):
        name = d.args[0]
        with open(self.path(d.kw["file"]), encoding="utf-8") as fh:
            expected = parse_grid(fh.read())
        for c in self.get(name, d.line):
            diffs = diff_grids(c.value, expected)
            self.check(d, name, not diffs,
                       f"grid {name} vs {d.kw['file']}: " + ("matches" if not diffs else "; ".join(diffs)))

    def op_place(self, d: Directive):
        name, col = d.args[0], int(d.kw["column"])
        out = []
        for ch, (g, p) in self.combine([name, d.kw["from"]], d.line):
            entries = dict(g.entries)
            for i in p.degrees():
                cell = (col, i - col)
                entries[cell] = entries.get(cell, HGPoly.zero(p.n)) + p.degree_part(i)
            out.append(Cand(ch, g.copy(entries=entries)))
        self.put(name, out, "grid")

    def op_purity(self, d: Directive):
        want = d.get("expect", "degenerate")
        for c in self.get(d.args[0], d.line):
            ok, arrows = purity_check(c.value)
            got = "degenerate" if ok else "open"
            self.check(d, d.args[0], got == want,
                       f"purity of {d.args[0]}: {got} ({len(arrows)} open arrows), expected {want}")

    def op_assemble(self, d: Directive):
        out = [Cand(c.choices, assemble_abutment(c.value)) for c in self.get(d.kw["grid"], d.line)]
        self.put(d.args[0], out)

    def op_let(self, d: Directive):
        self.put(d.args[0], self.eval_expr(d.kw["expr"], d.line))

    def op_alexander(self, d: Directive):
        m = int(d.kw["M"])
        out = []
        for c in self.get(d.kw["from"], d.line):
            v = alexander_dual(c.value, m)
            out.append(Cand(c.choices, add_unit(v) if "unit" in d.flags else v))
        self.put(d.args[0], out)

    def op_poincare(self, d: Directive):
        dim, direction = int(d.kw["d"]), d.kw["dir"]
        out = [Cand(c.choices, poincare_dual(c.value, dim, direction))
               for c in self.get(d.kw["from"], d.line)]
        self.put(d.args[0], out)

    def op_leray(self, d: Directive):
        names = [d.kw["base"], d.kw["fibre"]] + ([d.kw["twisted-base"]] if "twisted-base" in d.kw else [])
        out = []
        for ch, vals in self.combine(names, d.line):
            out.append(Cand(ch, leray_e2(vals[0], vals[1], vals[2] if len(vals) > 2 else None)))
        self.put(d.args[0], out, "grid")

    def _tagged(self, tag: str, label: int, desc: str, ch: Dict[str, int]):
        self.report.choices.setdefault(tag, {})[label] = desc
        new = dict(ch)
        new[tag] = label
        return new

    def op_rank_search(self, d: Directive):
        name = d.args[0]
        names = [d.kw["grid"], d.kw["divisor"]] + ([d.kw["coupled"]] if "coupled" in d.kw else [])
        page = int(d.kw["max-page"])
        ab, grids, quots = [], [], []
        label = 0
        for ch, vals in self.combine(names, d.line):
            try:
                sols = rank_search(vals[0], vals[1], page, vals[2] if len(vals) > 2 else None)
            except SpectralError as exc:
                self.report.events.append(f"rank-search {name}: inputs {ch} excluded ({exc})")
                continue
            for s in sols:
                desc = "; ".join(s.describe_ranks()) or "all differentials zero"
                new = self._tagged(name, label, desc, ch)
                label += 1
                ab.append(Cand(new, s.abutment))
                grids.append(Cand(new, s.grid))
                quots.append(Cand(new, s.quotient))
        if not ab:
            raise ReplayError(f"rank-search {name}: no solution", d.line, self.doc.name)
        self.report.solution_counts[name] = len(ab)
        self.restrict(ab)
        self.put(name, ab)
        self.put(name + ".grid", grids, "grid")
        self.put(name + ".quotient", quots)

    def op_ranks(self, d: Directive):
        name = d.args[0]
        page = int(d.kw["max-page"])
        out, grids = [], []
        label = 0
        for c in self.get(d.kw["grid"], d.line):
            for g in enumerate_pages(c.value, page):
                if not purity_check(g)[0]:
                    continue
                desc = "; ".join(f"d{r} {s}->{t} weight {w}: rank {k}"
                                 for (r, s, t, w, lam), k in sorted(g.ranks.items(), key=str))
                new = self._tagged(name, label, desc or "all differentials zero", c.choices)
                label += 1
                out.append(Cand(new, assemble_abutment(g)))
                grids.append(Cand(new, g))
        if not out:
            raise ReplayError(f"ranks {name}: no degenerate outcome", d.line, self.doc.name)
        self.restrict(out)
        self.put(name, out)
        self.put(name + ".grid", grids, "grid")

    def op_les(self, d: Directive):
        name = d.args[0]
        known = "open" if "open" in d.kw else "total"
        if ("open" in d.kw) == ("total" in d.kw):
            raise ReplayError("les needs exactly one of open= or total=", d.line, self.doc.name)
        out = []
        label = 0
        for ch, (z, k) in self.combine([d.kw["closed"], d.kw[known]], d.line):
            sols = les_solve(closed_bm=z, **{f"{known}_bm": k})
            for s in sols:
                desc = ", ".join(f"degree {i} weight {w}: rank {r}" for (i, w, lam), r in s.ranks)
                out.append(Cand(self._tagged(name, label, desc or "connecting map zero", ch), s.value))
                label += 1
        self.restrict(out)
        self.put(name, out)

    def op_cone(self, d: Directive):
        out = []
        for c in self.get(d.kw["base"], d.line):
            warn: List[str] = []
            out.append(Cand(c.choices, open_cone(c.value, warn)))
            self.report.events += [f"cone {d.args[0]}: {w}" for w in warn]
        self.put(d.args[0], out)

    def op_gysin(self, d: Directive):
        name, codim = d.args[0], int(d.get("codim", 1))
        out = []
        label = 0
        for ch, (u, z) in self.combine([d.kw["open"], d.kw["closed"]], d.line):
            target = HGPoly.monomial(2 * codim, codim) * z
            for ranks, val in connecting_assignments(u, target):
                desc = ", ".join(f"degree {i} weight {w}: rank {r}" for (i, w, lam), r in sorted(ranks.items(), key=str))
                out.append(Cand(self._tagged(name, label, desc or "connecting map zero", ch), val))
                label += 1
        self.restrict(out)
        self.put(name, out)

    def _filter(self, d: Directive, name: str, keep, what: str):
        cands = self.get(name, d.line)
        survivors = [c for c in cands if keep(c)]
        self.report.events.append(f"{what} on {name}: {len(survivors)} of {len(cands)} candidates kept")
        if not survivors:
            raise ReplayError(f"{what} on {name} removes every candidate", d.line, self.doc.name)
        self.restrict(survivors)
        return survivors

    def op_divide(self, d: Directive):
        out = []
        for ch, (p, q) in self.combine([d.kw["num"], d.kw["by"]], d.line):
            r = div_exact(p, q)
            if isinstance(r, HGPoly):
                out.append(Cand(ch, r))
        if not out:
            raise ReplayError(f"divide {d.args[0]}: nothing divisible", d.line, self.doc.name)
        self.restrict(out)
        self.put(d.args[0], out)

    def op_weight_bound(self, d: Directive):
        # cohomology of a smooth variety has weights at most twice the degree;
        # with the pure flag, every class in degree i has weight exactly 2i
        if "pure" in d.flags:
            self._filter(d, d.args[0], lambda c: all(w == i for i, w, _ in as_poly(c.value).terms),
                         "purity bound")
            return
        self._filter(d, d.args[0], lambda c: all(w <= i for i, w, _ in as_poly(c.value).terms),
                     "weight bound")

    def op_require_degree(self, d: Directive):
        k = int(d.kw["degree"])
        wanted = self.eval_expr(d.kw["equals"], d.line)
        if len(wanted) != 1:
            raise ReplayError("require-degree needs a single value", d.line, self.doc.name)
        w = wanted[0].value
        self._filter(d, d.args[0], lambda c: c.value.degree_part(k) == w.degree_part(k),
                     f"degree {k} requirement")

    def _label(self, p: HGPoly, d: Directive) -> HGPoly:
        if "label" not in d.kw:
            return p
        return isotypic_part(p, parse_partition(d.kw["label"]))

    def op_assert_equals(self, d: Directive):
        name = d.args[0]
        exp = self.eval_expr(d.kw["expected"], d.line)
        for c in self.get(name, d.line):
            for e in exp:
                if any(c.choices.get(t, v) != v for t, v in e.choices.items()):
                    continue
                got = self._label(c.value, d)
                if "forget" in d.flags:
                    got = forget_equivariant(got)
                self.check(d, name, got == e.value,
                           f"{name}: got {format_poly(got)}, expected {format_poly(e.value)}")

    def op_assert_zero(self, d: Directive):
        name = d.args[0]
        for c in self.get(name, d.line):
            got = self._label(c.value, d)
            self.check(d, name, got.is_zero(), f"{name}: expected 0, got {format_poly(got)}")

    def op_assert_unique(self, d: Directive):
        name = d.args[0]
        cands = self.get(name, d.line)
        self.check(d, name, len(cands) == 1, f"{name}: {len(cands)} surviving candidate(s)")

    def op_discrepancy(self, d: Directive):
        did = d.args[0]
        printed = self.eval_expr(d.kw["printed"], d.line)[0].value
        flipped = printed.map_terms(lambda i, w: (i, -w))
        # alternating-sign convention: t -> -t
        alternating = HGPoly({(i, w, lam): c * (-1) ** (i % 2) for (i, w, lam), c in printed.terms.items()},
                             printed.n)
        for c in self.get(d.kw["value"], d.line):
            got = c.value
            if got == printed:
                status = "agrees"
            elif got == flipped:
                status = "agrees after L-sign normalization"
            elif got == alternating:
                status = "agrees after sign normalization"
            else:
                status = "differs"
            self.report.discrepancies.append({
                "id": did, "value": d.kw["value"], "computed": format_poly(got),
                "printed": format_poly(printed), "status": status, "note": d.kw["note"]})

    def op_assert_no_coupling(self, d: Directive):
        name = d.args[0]
        for c in self.get(name, d.line):
            desc = self.report.choices.get(name, {}).get(c.choices.get(name), "")
            self.check(d, name, "coupling" not in desc, f"{name}: {desc or 'no coupling'}")

    def op_assert_maximal(self, d: Directive):
        """Total d_page rank is the largest among all divisible outcomes of the search.

        The unconstrained maximum over every admissible d_page assignment of the
        input grid is reported alongside for comparison.
        """
        name, page = d.args[0], int(d.kw["page"])
        every = self.env[name + ".grid"]

        def total(g):
            return sum(k for (r, *_), k in g.ranks.items() if r == page)

        best = max(total(c.value) for c in every)
        free = 0
        for src in self.get(d.kw["grid"], d.line):
            g = src.value
            if g.page < page:
                g = enumerate_pages(g, page - 1)[0]
            free = max([free] + [sum(a.values()) for a in page_assignments(g, page)])
        for c in self.get(name + ".grid", d.line):
            got = total(c.value)
            self.check(d, name, got == best,
                       f"{name}: total d{page} rank {got}; largest among divisible outcomes {best}; "
                       f"largest admissible without divisibility {free}")

    def op_final(self, d: Directive):
        self.get(d.args[0], d.line)
        self.report.finals[d.args[0]] = None


def replay(doc: ScenarioDoc, strict: bool = False, data_dir: Optional[str] = None) -> ReplayReport:
    """Execute the pipeline of doc in order and collect the report."""
    if data_dir is None:
        from . import data_path
        data_dir = data_path()
    return _Replayer(doc, strict=strict, data_dir=data_dir).run()


def replay_file(path: str, strict: bool = False) -> ReplayReport:
    return replay(parse_file(path), strict=strict)
