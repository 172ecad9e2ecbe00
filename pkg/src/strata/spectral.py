"""Spectral-sequence grids over HG coefficients.

A cell (u, v) stores an HGPoly whose t-degree is the total degree u+v, so the
abutment of a degenerate grid is simply the sum of its cells.  Homological
grids have d^r: (u, v) -> (u-r, v+r-1); cohomological grids have
d_r: (p, q) -> (p+r, q-r+1).
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .confspace import BMContext, Stratum, stratum_bm
from .hgring import (HGError, HGPoly, as_poly, div_exact, format_poly, invariant_part,
                     parse_poly, poincare_dual, sign_part)

log = logging.getLogger(__name__)

HOMOLOGICAL = "homological"
COHOMOLOGICAL = "cohomological"

Cell = Tuple[int, int]
Block = Tuple[int, Optional[tuple]]  # (weight, label)


class SpectralError(HGError):
    pass


@dataclass(frozen=True)
class DualityFrame:
    dim: int

    def __post_init__(self):
        if self.dim <= 0:
            raise SpectralError("duality frames need a positive dimension")


@dataclass
class SpectralGrid:
    entries: Dict[Cell, HGPoly] = field(default_factory=dict)
    page: int = 1
    orientation: str = HOMOLOGICAL
    ranks: Dict[tuple, int] = field(default_factory=dict)
    n: Optional[int] = None

    def __post_init__(self):
        if self.orientation not in (HOMOLOGICAL, COHOMOLOGICAL):
            raise SpectralError(f"bad orientation {self.orientation!r}")
        self.entries = {c: as_poly(p) for c, p in self.entries.items() if not as_poly(p).is_zero()}
        for (u, v), p in self.entries.items():
            if any(i != u + v for i, _, _ in p.terms):
                raise SpectralError(f"cell {(u, v)} holds classes outside total degree {u + v}")
            if p.n is not None:
                self.n = p.n

    def cell(self, u: int, v: int) -> HGPoly:
        return self.entries.get((u, v), HGPoly.zero(self.n))

    def blocks(self, c: Cell) -> Dict[Block, int]:
        p = self.entries.get(c)
        if p is None:
            return {}
        return {(w, lam): m for (_, w, lam), m in p.terms.items()}

    def is_empty(self) -> bool:
        return not self.entries

    def target(self, c: Cell, r: int) -> Cell:
        u, v = c
        if self.orientation == HOMOLOGICAL:
            return (u - r, v + r - 1)
        return (u + r, v - r + 1)

    def extent(self):
        if not self.entries:
            return (0, 0, 0, 0)
        us = [u for u, _ in self.entries]
        vs = [v for _, v in self.entries]
        return min(us), max(us), min(vs), max(vs)

    def copy(self, **kw) -> "SpectralGrid":
        args = dict(entries=dict(self.entries), page=self.page, orientation=self.orientation,
                    ranks=dict(self.ranks), n=self.n)
        args.update(kw)
        return SpectralGrid(**args)

    def __eq__(self, other):
        if not isinstance(other, SpectralGrid):
            return NotImplemented
        return self.orientation == other.orientation and self.entries == other.entries


# ---------------------------------------------------------------- building

def build_e1(strata: Sequence[Stratum], which: str = "f", ctx: Optional[BMContext] = None,
             grouped: bool = False) -> SpectralGrid:
    """E^1 grid with column u holding BM_(u+v) of the stratum placed there.

    grouped=True places each stratum in its group_column (several strata may
    share one column); otherwise each stratum uses its own column.
    """
    if which not in ("phi", "f"):
        raise SpectralError(f"which must be phi or f, not {which!r}")
    if ctx is None:
        ctx = BMContext()
    cols: Dict[int, HGPoly] = {}
    for s in strata:
        try:
            p = stratum_bm(s, ctx, which)
        except HGError as exc:
            raise type(exc)(f"stratum {s.id}: {exc}") from exc
        col = s.group_column if grouped and s.group_column is not None else s.column
        if p.is_zero():
            ctx.note(f"stratum {s.id}: trivial homology, column left empty")
            continue
        cols[col] = cols.get(col, HGPoly.zero(p.n)) + p
    entries = {}
    for u, p in cols.items():
        for i in p.degrees():
            entries[(u, i - u)] = p.degree_part(i)
    return SpectralGrid(entries, page=1, orientation=HOMOLOGICAL, n=ctx.n)


def leray_e2(base_coh: HGPoly, fibre_coh: HGPoly, twisted_base: Optional[HGPoly] = None) -> SpectralGrid:
    """E_2^{p,q} = H^p(base) x H^q(fibre) for trivial monodromy.

    With an S_2-equivariant fibre, the invariant part pairs with the constant
    cohomology of the base and the sign part with twisted_base.
    """
    base, fibre = as_poly(base_coh), as_poly(fibre_coh)
    if fibre.n is not None:
        if twisted_base is None:
            raise SpectralError("equivariant fibre needs the twisted base cohomology")
        total_pairs = [(base, invariant_part(fibre)), (as_poly(twisted_base), sign_part(fibre))]
    else:
        total_pairs = [(base, fibre)]
    entries: Dict[Cell, HGPoly] = {}
    for b, f in total_pairs:
        for p in b.degrees():
            for q in f.degrees():
                cell = b.degree_part(p) * f.degree_part(q)
                entries[(p, q)] = entries.get((p, q), HGPoly.zero()) + cell
    return SpectralGrid(entries, page=2, orientation=COHOMOLOGICAL)


# ---------------------------------------------------------------- differentials

def _arrows(g: SpectralGrid, r: int):
    out = []
    for c in sorted(g.entries):
        t = g.target(c, r)
        if t not in g.entries:
            continue
        src, tgt = g.blocks(c), g.blocks(t)
        for b in sorted(src, key=str):
            if b in tgt:
                out.append((c, t, b))
    return out


def purity_check(g: SpectralGrid, max_page: Optional[int] = None) -> Tuple[bool, List[tuple]]:
    """Return (degenerate, open_arrows) for pages >= g.page.

    An arrow is forced zero when source and target share no (weight, label)
    block.  The grid degenerates when every arrow on every later page is forced.
    """
    if g.is_empty():
        return True, []
    umin, umax, vmin, vmax = g.extent()
    last = max_page if max_page is not None else (umax - umin) + (vmax - vmin) + 2
    open_arrows = []
    for r in range(g.page, last + 1):
        for c, t, b in _arrows(g, r):
            open_arrows.append((r, c, t, b))
    return not open_arrows, open_arrows


def _apply(g: SpectralGrid, r: int, assignment: Dict[tuple, int]) -> SpectralGrid:
    entries = dict(g.entries)
    ranks = dict(g.ranks)
    for (c, t, (w, lam)), k in assignment.items():
        if not k:
            continue
        ranks[(r, c, t, w, lam)] = k
        for cell in (c, t):
            i = cell[0] + cell[1]
            entries[cell] = entries[cell] - HGPoly({(i, w, lam): k}, entries[cell].n)
    return SpectralGrid(entries, page=r + 1, orientation=g.orientation, ranks=ranks, n=g.n)


def _iter_assignments(g: SpectralGrid, r: int):
    arrows = _arrows(g, r)
    cap = {}
    for c in g.entries:
        for b, m in g.blocks(c).items():
            cap[(c, b)] = m
    used: Dict[tuple, int] = {}
    current: Dict[tuple, int] = {}

    def rec(j):
        if j == len(arrows):
            yield dict(current)
            return
        c, t, b = arrows[j]
        room = min(cap[(c, b)] - used.get((c, b), 0), cap[(t, b)] - used.get((t, b), 0))
        for k in range(room + 1):
            current[arrows[j]] = k
            used[(c, b)] = used.get((c, b), 0) + k
            used[(t, b)] = used.get((t, b), 0) + k
            yield from rec(j + 1)
            used[(c, b)] -= k
            used[(t, b)] -= k
        current.pop(arrows[j], None)

    return rec(0)


def page_assignments(g: SpectralGrid, r: int) -> List[Dict[tuple, int]]:
    """All rank assignments for d_r, bounded per isotypic block.

    In every (cell, weight, label) block the ranks of the incoming and the
    outgoing differential together cannot exceed the multiplicity.
    """
    return list(_iter_assignments(g, r))


def enumerate_pages(g: SpectralGrid, max_page: int) -> List[SpectralGrid]:
    """Every grid reachable by applying d_r for g.page <= r <= max_page."""
    states = [g]
    for r in range(g.page, max_page + 1):
        states = [_apply(s, r, a) for s in states for a in _iter_assignments(s, r)]
    return states


def assemble_abutment(g: SpectralGrid, check: bool = True) -> HGPoly:
    """Sum of cells by total degree; the grid must be degenerate."""
    if check:
        ok, arrows = purity_check(g)
        if not ok:
            raise SpectralError(f"grid is not degenerate at page {g.page}: {len(arrows)} open arrows")
    out = HGPoly.zero(g.n)
    for p in g.entries.values():
        out = out + p
    return out


def connecting_assignments(source: HGPoly, target: HGPoly) -> List[Tuple[Dict[tuple, int], HGPoly]]:
    """Ranks of a degree-raising connecting map source -> target.

    A class of source in degree i and weight w may hit a class of target in
    degree i+1 with the same weight and label; each unit of rank removes one
    class from both.  Returns (ranks, source + target - killed) pairs.
    """
    source, target = as_poly(source), as_poly(target)
    n = source.n if source.n is not None else target.n
    source, target = source + HGPoly.zero(n), target + HGPoly.zero(n)
    pairs = sorted(((i, w, lam), m) for (i, w, lam), m in source.terms.items()
                   if (i + 1, w, lam) in target.terms)
    pairs = [(k, min(m, target.terms[(k[0] + 1, k[1], k[2])])) for k, m in pairs]
    base: Dict[tuple, int] = dict(source.terms)
    for k, m in target.terms.items():
        base[k] = base.get(k, 0) + m
    out = []

    def rec(j, acc, val):
        if j == len(pairs):
            if all(c >= 0 for c in val.values()):
                out.append((dict(acc), HGPoly._raw(val, n)))
            return
        (i, w, lam), cap = pairs[j]
        for r in range(cap + 1):
            nv = val
            if r:
                acc[(i, w, lam)] = r
                nv = dict(val)
                nv[(i, w, lam)] -= r
                nv[(i + 1, w, lam)] -= r
            rec(j + 1, acc, nv)
            acc.pop((i, w, lam), None)

    rec(0, {}, base)
    return out


@dataclass
class RankSolution:
    grid: SpectralGrid
    abutment: HGPoly
    quotient: HGPoly
    coupling: Dict[tuple, int] = field(default_factory=dict)

    def describe_ranks(self) -> List[str]:
        lines = [f"d{r} {c}->{t} weight {w}{'' if lam is None else ' ' + str(list(lam))}: rank {k}"
                 for (r, c, t, w, lam), k in sorted(self.grid.ranks.items(), key=str)]
        lines += [f"coupling degree {i} weight {w}: rank {k}"
                  for (i, w, lam), k in sorted(self.coupling.items(), key=str)]
        return lines


def rank_search(g: SpectralGrid, divisor: HGPoly, max_page: int,
                coupled: Optional[HGPoly] = None) -> List[RankSolution]:
    """Exhaustive search for differentials whose abutment is divisible by divisor.

    coupled, if given, is a second cohomology contribution joined to the
    abutment by a degree-raising connecting map (coupled -> abutment) whose
    ranks are searched at the same time.
    """
    divisor = as_poly(divisor)
    if divisor.is_zero():
        raise SpectralError("divisor must be nonzero")
    cache: Dict[HGPoly, object] = {}

    def quotient(p):
        if p not in cache:
            cache[p] = div_exact(p, divisor)
        return cache[p]

    sols = []
    # all pages but the last are expanded into grids; the last page is streamed
    last = max(max_page, g.page - 1)
    states = enumerate_pages(g, last - 1) if last > g.page else [g]
    for st in states:
        if last < st.page:
            assigns = [{}]
        else:
            assigns = _iter_assignments(st, last)
        base = {}
        for (u, v), p in st.entries.items():
            for key, m in p.terms.items():
                base[key] = base.get(key, 0) + m
        for a in assigns:
            ab = dict(base)
            for (c, t, (w, lam)), k in a.items():
                if k:
                    for cell in (c, t):
                        key = (cell[0] + cell[1], w, lam)
                        ab[key] -= k
            ab_poly = HGPoly._raw(ab, g.n)
            options = [({}, ab_poly)] if coupled is None else connecting_assignments(coupled, ab_poly)
            for coupling, total in options:
                qt = quotient(total)
                if not isinstance(qt, HGPoly):
                    continue
                fg = _apply(st, last, a) if last >= st.page else st
                if not purity_check(fg)[0]:
                    log.debug("divisible but not degenerate at page %d; skipped", fg.page)
                    continue
                sols.append(RankSolution(fg, total, qt, coupling))
    if not sols:
        raise SpectralError("rank search: no differential assignment gives a divisible abutment")
    return sols


# ---------------------------------------------------------------- duality

def alexander_dual(sigma_bm: HGPoly, frame: int) -> HGPoly:
    """Reduced cohomology of V minus Sigma from BM homology of Sigma, dim V = frame."""
    m = frame.dim if isinstance(frame, DualityFrame) else int(frame)
    if m <= 0:
        raise SpectralError("ambient dimension must be positive")
    p = as_poly(sigma_bm)
    for i, _, _ in p.terms:
        if 2 * m - i - 1 < 0:
            raise SpectralError(f"BM degree {i} exceeds the ambient dimension {m}")
    return p.map_terms(lambda i, w: (2 * m - i - 1, w + m))


def alexander_inverse(coh: HGPoly, frame: int) -> HGPoly:
    m = frame.dim if isinstance(frame, DualityFrame) else int(frame)
    return as_poly(coh).map_terms(lambda i, w: (2 * m - i - 1, w - m))


def add_unit(p: HGPoly) -> HGPoly:
    p = as_poly(p)
    return p + HGPoly.one(p.n)


# ---------------------------------------------------------------- text and json

def _coeff_text(p: HGPoly, total: int) -> str:
    if p.is_zero():
        return "0"
    return format_poly(p.map_terms(lambda i, w: (i - total, w)))


def format_grid(g: SpectralGrid, cols: Optional[Iterable[int]] = None,
                rows: Optional[Iterable[int]] = None) -> str:
    """Table layout: rows descending, columns ascending, one line per row."""
    umin, umax, vmin, vmax = g.extent()
    cols = list(cols) if cols is not None else list(range(umin, umax + 1))
    rows = list(rows) if rows is not None else list(range(vmax, vmin - 1, -1))
    lines = [f"orientation {g.orientation}", f"page {g.page}"]
    if g.n is not None:
        lines.append(f"group {g.n}")
    lines.append("cols " + " ".join(str(c) for c in cols))
    for v in rows:
        cells = [_coeff_text(g.cell(u, v), u + v) for u in cols]
        lines.append(f"{v:>3} | " + " | ".join(cells))
    return "\n".join(lines) + "\n"


def parse_grid(text: str) -> SpectralGrid:
    orientation, page, n, cols = HOMOLOGICAL, 1, None, None
    entries: Dict[Cell, HGPoly] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(" ")
        try:
            if key == "orientation":
                orientation = rest.strip()
            elif key == "page":
                page = int(rest)
            elif key == "group":
                n = int(rest)
            elif key == "cols":
                cols = [int(x) for x in rest.split()]
            elif "|" in line:
                if cols is None:
                    raise SpectralError("row before cols header")
                head, *cells = [x.strip() for x in line.split("|")]
                v = int(head)
                if len(cells) != len(cols):
                    raise SpectralError(f"expected {len(cols)} cells, found {len(cells)}")
                for u, txt in zip(cols, cells):
                    p = parse_poly(txt)
                    if n is not None:
                        p = p + HGPoly.zero(n)
                    if not p.is_zero():
                        entries[(u, v)] = p.map_terms(lambda i, w, s=u + v: (i + s, w))
            else:
                raise SpectralError(f"unknown grid line {key!r}")
        except HGError as exc:
            raise SpectralError(f"grid line {lineno}: {exc}") from exc
    return SpectralGrid(entries, page=page, orientation=orientation, n=n)


def grid_to_json(g: SpectralGrid) -> dict:
    umin, umax, vmin, vmax = g.extent()
    cols = list(range(umin, umax + 1))
    rows = list(range(vmax, vmin - 1, -1))
    return {
        "orientation": g.orientation,
        "page": g.page,
        "group": g.n,
        "cols": cols,
        "rows": rows,
        "cells": [[_coeff_text(g.cell(u, v), u + v) for u in cols] for v in rows],
        "ranks": [{"page": r, "source": list(c), "target": list(t), "weight": w,
                   "label": None if lam is None else list(lam), "rank": k}
                  for (r, c, t, w, lam), k in sorted(g.ranks.items(), key=str)],
    }


def grid_from_json(obj: dict) -> SpectralGrid:
    lines = [f"orientation {obj['orientation']}", f"page {obj['page']}"]
    if obj.get("group") is not None:
        lines.append(f"group {obj['group']}")
    lines.append("cols " + " ".join(str(c) for c in obj["cols"]))
    for v, row in zip(obj["rows"], obj["cells"]):
        lines.append(f"{v} | " + " | ".join(row))
    return parse_grid("\n".join(lines))


def diff_grids(actual: SpectralGrid, expected: SpectralGrid) -> List[str]:
    """Cell-wise comparison; empty list when the grids agree."""
    out = []
    if actual.orientation != expected.orientation:
        out.append(f"orientation: {actual.orientation} != {expected.orientation}")
    cells = sorted(set(actual.entries) | set(expected.entries), key=lambda c: (-c[1], c[0]))
    for u, v in cells:
        a, e = actual.cell(u, v), expected.cell(u, v)
        if a != e:
            out.append(f"cell ({u},{v}): got {_coeff_text(a, u + v)}, expected {_coeff_text(e, u + v)}")
    return out


def grid_json_text(g: SpectralGrid) -> str:
    return json.dumps(grid_to_json(g), indent=2, sort_keys=True)
