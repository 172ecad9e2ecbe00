"""Borel-Moore homology of configuration spaces and the strata built over them.

Spaces are small expression trees (SpaceExpr) written in an S-expression
syntax, for instance

    (quotient (fibration pgl3 (conf 2 (proj 1)) assert-mult) (acts trivially) (char (12)(34)))

and bm() evaluates them to HG polynomials using a fixed set of rules plus a
table of named facts supplied by the caller.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .hgring import HGError, HGPoly, as_poly, format_poly, mul, parse_poly, shift
from .symrep import SpechtVector, induce, pairs_permutation_rep, parse_specht

log = logging.getLogger(__name__)

CONSTANT = "constant"
TWISTED = "sign-twisted"
LOCAL_SYSTEMS = (CONSTANT, TWISTED)


class NeedsFact(HGError):
    """Raised when an expression cannot be reduced without a supplied fact."""


class LESInconsistent(HGError):
    pass


# ---------------------------------------------------------------- constants

def bm_proj(n: int) -> HGPoly:
    return sum((HGPoly.monomial(2 * i, -i) for i in range(n + 1)), HGPoly.zero())


def bm_affine(n: int) -> HGPoly:
    return HGPoly.monomial(2 * n, -n)


def _box_partitions(rows: int, cols: int):
    if rows == 0:
        yield ()
        return
    for first in range(cols, -1, -1):
        for rest in _box_partitions(rows - 1, first):
            yield (first,) + rest


def bm_grassmannian(m: int, n: int) -> HGPoly:
    """BM homology of the Grassmannian of m-dimensional projective subspaces of P^n.

    Schubert cells of Gr(m+1, n+1) are indexed by partitions in an
    (m+1) x (n-m) box; a cell of dimension d contributes t^(2d) L^(-d).
    """
    if m < 0 or m > n:
        return HGPoly.zero()
    out = HGPoly.zero()
    for lam in _box_partitions(m + 1, n - m):
        d = sum(lam)
        out = out + HGPoly.monomial(2 * d, -d)
    return out


def bm_constants() -> Dict[str, HGPoly]:
    pgl3 = parse_poly("t^16 L^-8 + t^13 L^-6 + t^11 L^-5 + t^8 L^-3")
    coh_gl3 = parse_poly("(1 + tL)(1 + t^3 L^2)(1 + t^5 L^3)")
    return {
        "coh_gl3": coh_gl3,
        "bm_pgl3": pgl3,
        "bm_gl3": pgl3 * parse_poly("t^2 L^-1 + t"),
        "coh_pt_p2": parse_poly("(1 + t^2 L)(1 + t^2 L + t^4 L^2)"),
        "bm_p1": bm_proj(1),
        "bm_p2": bm_proj(2),
        "bm_p3": bm_proj(3),
    }


def canonical_gl3(p: HGPoly) -> HGPoly:
    """Accept the sign-alternating form of the GL(3) cohomology and return the effective one."""
    alt = parse_poly("(1 - tL)(1 - t^3 L^2)(1 - t^5 L^3)")
    if p == alt:
        log.info("canonicalised alternating GL(3) cohomology to effective signs")
        return bm_constants()["coh_gl3"]
    return p


# ---------------------------------------------------------------- expressions

@dataclass(frozen=True)
class SpaceExpr:
    op: str
    args: Tuple = ()

    def __str__(self):
        return unparse(self)


@dataclass
class Stratum:
    id: str
    space: Optional[SpaceExpr]
    points: Union[int, str]  # m, or "curve" / "plane"
    local_system: str = CONSTANT
    orientation_twisted: bool = True
    bundle_rank: int = 0
    column: int = 0
    group_column: Optional[int] = None

    def __post_init__(self):
        if isinstance(self.points, int):
            if self.points < 1:
                raise HGError(f"stratum {self.id}: finite strata need m >= 1")
        elif self.points not in ("curve", "plane"):
            raise HGError(f"stratum {self.id}: bad points marker {self.points!r}")
        if self.local_system not in LOCAL_SYSTEMS:
            raise HGError(f"stratum {self.id}: unknown local system {self.local_system!r}")
        if self.bundle_rank < 0:
            raise HGError(f"stratum {self.id}: negative bundle rank")


# --------------------------------------------------------------- S-expressions

def _tokenize(text: str) -> List[str]:
    toks, i = [], 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch == "(":
            # a cycle like (12)(34) is an atom, not a list
            j = i + 1
            while j < len(text) and text[j].isdigit():
                j += 1
            if j < len(text) and text[j] == ")" and j > i + 1:
                k = i
                while k < len(text) and text[k] == "(":
                    m = text.index(")", k)
                    if not text[k + 1:m].isdigit():
                        break
                    k = m + 1
                toks.append(text[i:k])
                i = k
            else:
                toks.append("(")
                i += 1
        elif ch == ")":
            toks.append(")")
            i += 1
        elif ch == '"':
            j = text.index('"', i + 1)
            toks.append(text[i:j + 1])
            i = j + 1
        else:
            j = i
            depth = 0
            while j < len(text) and not text[j].isspace() and (text[j] not in "()" or depth):
                if text[j] == "[":
                    depth += 1
                elif text[j] == "]":
                    depth -= 1
                j += 1
            toks.append(text[i:j])
            i = j
    return toks


def _read(toks: List[str], pos: int):
    if pos >= len(toks):
        raise HGError("unexpected end of space expression")
    tok = toks[pos]
    if tok == "(":
        items = []
        pos += 1
        while pos < len(toks) and toks[pos] != ")":
            item, pos = _read(toks, pos)
            items.append(item)
        if pos >= len(toks):
            raise HGError("unbalanced parenthesis in space expression")
        return items, pos + 1
    if tok == ")":
        raise HGError("unexpected ')' in space expression")
    return tok, pos + 1


def parse_sexpr(text: str):
    toks = _tokenize(text)
    val, pos = _read(toks, 0)
    if pos != len(toks):
        raise HGError(f"trailing input in space expression {text!r}")
    return val


_ATOMS = {"pgl3", "gl3", "point", "empty"}


def _build(node) -> SpaceExpr:
    if isinstance(node, str):
        if node in _ATOMS:
            return SpaceExpr(node)
        raise HGError(f"unknown space atom {node!r}")
    if not node:
        raise HGError("empty space expression")
    head, rest = node[0], node[1:]
    if head in ("affine", "proj"):
        return SpaceExpr(head, (int(rest[0]),))
    if head == "conf":
        return SpaceExpr("conf", (int(rest[0]), _build(rest[1])))
    if head == "grass":
        return SpaceExpr("grass", (int(rest[0]), int(rest[1])))
    if head == "fact":
        return SpaceExpr("fact", (rest[0],))
    if head == "finite":
        return SpaceExpr("finite", (" ".join(rest),))
    if head == "rep":
        return SpaceExpr("rep", (rest[0], _build(rest[1])))
    if head == "pairs":
        return SpaceExpr("pairs", (int(rest[0]),))
    if head == "induce":
        return SpaceExpr("induce", (int(rest[0]), _build(rest[1])))
    if head in ("product", "disjoint"):
        return SpaceExpr(head, tuple(_build(x) for x in rest))
    if head == "fibration":
        flag = len(rest) > 2 and rest[2] == "assert-mult"
        return SpaceExpr("fibration", (_build(rest[0]), _build(rest[1]), flag))
    if head == "quotient":
        cover = _build(rest[0])
        acts, perms = None, []
        for opt in rest[1:]:
            if isinstance(opt, list) and opt and opt[0] == "acts":
                acts = opt[1]
            elif isinstance(opt, list) and opt and opt[0] == "char":
                body = opt[1:]
                if body and body[0] in ("sign", "trivial"):
                    # "trivial" ignores the permutations, "sign" evaluates them
                    if body[0] == "trivial":
                        body = []
                    else:
                        body = body[1:]
                perms.extend(body)
            else:
                raise HGError(f"bad quotient option {opt!r}")
        return SpaceExpr("quotient", (cover, acts, tuple(perms)))
    if head in ("complement", "union"):
        a, b = _build(rest[0]), _build(rest[1])
        cons = tuple(_constraint(c) for c in rest[2:])
        return SpaceExpr(head, (a, b, cons))
    raise HGError(f"unknown space constructor {head!r}")


def _constraint(node) -> Tuple[str, int, int]:
    # (bm K = D) or (bm K <= D)
    if not (isinstance(node, list) and len(node) == 4 and node[0] == "bm"):
        raise HGError(f"bad LES constraint {node!r}")
    op = {"=": "eq", "<=": "le"}.get(node[2])
    if op is None:
        raise HGError(f"bad LES constraint operator {node[2]!r}")
    return op, int(node[1]), int(node[3])


def parse_space(text: str) -> SpaceExpr:
    return _build(parse_sexpr(text))


def unparse(e: SpaceExpr) -> str:
    op, a = e.op, e.args
    if op in _ATOMS:
        return op
    if op in ("affine", "proj"):
        return f"({op} {a[0]})"
    if op == "conf":
        return f"(conf {a[0]} {unparse(a[1])})"
    if op == "grass":
        return f"(grass {a[0]} {a[1]})"
    if op == "fact":
        return f"(fact {a[0]})"
    if op == "finite":
        return f"(finite {a[0]})"
    if op == "rep":
        return f"(rep {a[0]} {unparse(a[1])})"
    if op == "pairs":
        return f"(pairs {a[0]})"
    if op == "induce":
        return f"(induce {a[0]} {unparse(a[1])})"
    if op in ("product", "disjoint"):
        return f"({op} " + " ".join(unparse(x) for x in a) + ")"
    if op == "fibration":
        flag = " assert-mult" if a[2] else ""
        return f"(fibration {unparse(a[0])} {unparse(a[1])}{flag})"
    if op == "quotient":
        s = f"(quotient {unparse(a[0])}"
        if a[1]:
            s += f" (acts {a[1]})"
        if a[2]:
            s += " (char sign " + " ".join(a[2]) + ")"
        return s + ")"
    if op in ("complement", "union"):
        cons = "".join(f" (bm {k} {'=' if o == 'eq' else '<='} {v})" for o, k, v in a[2])
        return f"({op} {unparse(a[0])} {unparse(a[1])}{cons})"
    raise HGError(f"cannot print {op}")


# ---------------------------------------------------------------- context

@dataclass
class Fact:
    name: str
    value: HGPoly
    citation: str
    kind: str = "fact"  # or "external"


@dataclass
class BMContext:
    """Read-only fact table plus an append-only usage log for one evaluation."""
    facts: Dict[str, Fact] = field(default_factory=dict)
    n: Optional[int] = None
    used: List[str] = field(default_factory=list)
    events: List[str] = field(default_factory=list)

    def fact(self, name: str) -> HGPoly:
        if name not in self.facts:
            raise NeedsFact(f"needs scenario-supplied fact: {name}")
        if name not in self.used:
            self.used.append(name)
        return self.facts[name].value

    def note(self, msg: str):
        self.events.append(msg)
        log.info(msg)

    def lift(self, p: HGPoly) -> HGPoly:
        if self.n is not None and p.n is None:
            return p + HGPoly.zero(self.n)
        return p


def _perm_sign(cycles: str) -> int:
    sign = 1
    for part in cycles.replace(")(", ") (").split():
        body = part.strip("()")
        if len(body) > 1:
            sign *= (-1) ** (len(body) - 1)
    return sign


# ---------------------------------------------------------------- evaluation

def bm(expr: SpaceExpr, sys: str = CONSTANT, ctx: Optional[BMContext] = None) -> HGPoly:
    """Borel-Moore homology of expr with the given local system."""
    if ctx is None:
        ctx = BMContext()
    if sys not in LOCAL_SYSTEMS:
        raise HGError(f"unknown local system {sys!r}")
    return ctx.lift(_bm(expr, sys, ctx))


def _bm(e: SpaceExpr, sys: str, ctx: BMContext) -> HGPoly:
    op, a = e.op, e.args
    consts = bm_constants()
    if op == "empty":
        return HGPoly.zero()
    if op == "point":
        return HGPoly.one()
    if op == "affine":
        return bm_affine(a[0])
    if op == "proj":
        return bm_proj(a[0])
    if op == "grass":
        return bm_grassmannian(a[0], a[1])
    if op == "pgl3":
        return consts["bm_pgl3"]
    if op == "gl3":
        return consts["bm_gl3"]
    if op == "fact":
        return ctx.fact(a[0])
    if op == "finite":
        return HGPoly.from_specht(parse_specht(a[0]))
    if op == "rep":
        return mul(HGPoly.from_specht(parse_specht(a[0])), _bm(a[1], sys, ctx))
    if op == "pairs":
        # the two-element subsets of n points, as an S_n-set
        return HGPoly.from_specht(pairs_permutation_rep(a[0]))
    if op == "induce":
        return _induce(_bm(a[1], sys, ctx), a[0])
    if op == "conf":
        return _bm_conf(a[0], a[1], sys, ctx)
    if op == "product":
        out = HGPoly.one()
        for x in a:
            out = mul(out, _bm(x, sys, ctx))
        return out
    if op == "disjoint":
        out = HGPoly.zero()
        for x in a:
            out = out + _bm(x, sys, ctx)
        return out
    if op == "fibration":
        base, fibre, flag = a
        if not flag:
            raise NeedsFact(f"fibration {unparse(e)} lacks an assert-mult flag")
        ctx.note(f"multiplicative fibration asserted: {unparse(e)}")
        return mul(_bm(base, sys, ctx), _bm(fibre, sys, ctx))
    if op == "quotient":
        cover, acts, perms = a
        if acts is None:
            raise NeedsFact(f"quotient {unparse(e)} needs action data on the cover")
        # each listed permutation generates the group; one odd generator makes
        # the restricted sign character nontrivial
        character = "sign" if any(_perm_sign(p) == -1 for p in perms) else "trivial"
        return finite_quotient(_bm(cover, CONSTANT, ctx), acts, character)
    if op == "complement":
        ambient, closed, cons = a
        tot, cl = _bm(ambient, sys, ctx), _bm(closed, sys, ctx)
        sols = les_solve(closed_bm=cl, total_bm=tot, constraints=cons)
        return _unique(sols, e, "open")
    if op == "union":
        closed, opened, cons = a
        cl, op_ = _bm(closed, sys, ctx), _bm(opened, sys, ctx)
        sols = les_solve(closed_bm=cl, open_bm=op_, constraints=cons)
        return _unique(sols, e, "total")
    raise NeedsFact(f"needs scenario-supplied fact for node {op}")


def _induce(p: HGPoly, n: int) -> HGPoly:
    """Disjoint union of copies permuted by S_n, each copy carrying an S_(n-1) action."""
    if p.n is None:
        raise HGError("induce needs an equivariant polynomial")
    out = HGPoly.zero(n)
    for (i, w, lam), c in p.terms.items():
        out = out + HGPoly.from_specht(induce(SpechtVector.irrep(lam, c), n), i, w)
    return out


def _unique(sols, e, what):
    vals = {s.value for s in sols}
    if len(vals) != 1:
        raise LESInconsistent(
            f"{unparse(e)}: {len(vals)} possible {what} polynomials; add constraints")
    return sols[0].value


def _bm_conf(k: int, base: SpaceExpr, sys: str, ctx: BMContext) -> HGPoly:
    if k < 1:
        raise HGError("configuration spaces need k >= 1")
    if k == 1:
        return _bm(base, CONSTANT, ctx)
    if base.op == "affine":
        if sys == TWISTED:
            return HGPoly.zero()
        raise NeedsFact(f"needs scenario-supplied fact: constant BM of (conf {k} {unparse(base)})")
    if base.op == "proj":
        n = base.args[0]
        if sys == TWISTED:
            if k >= n + 2:
                return HGPoly.zero()
            s = k * (k - 1)
            return HGPoly.monomial(s, -s // 2) * bm_grassmannian(k - 1, n)
        if k == 2 and n >= 1:
            # fibred over the lines of P^n with fibre B(2, P^1) = P^2 minus a conic
            return HGPoly.monomial(4, -2) * bm_grassmannian(1, n)
        raise NeedsFact(f"needs scenario-supplied fact: constant BM of (conf {k} (proj {n}))")
    raise NeedsFact(f"needs scenario-supplied fact: (conf {k} {unparse(base)})")


# ---------------------------------------------------------------- constructors

def vb_total(p: HGPoly, r: int) -> HGPoly:
    """Total space of a rank-r complex vector bundle."""
    if r < 0:
        raise HGError("negative bundle rank")
    return mul(HGPoly.monomial(2 * r, -r), p)


def simplicial_bundle(base_bm: HGPoly, m: int) -> HGPoly:
    """Bundle of open (m-1)-simplices; base_bm must already use the right local system."""
    if m < 1:
        raise HGError("simplicial bundles need m >= 1")
    return shift(base_bm, m - 1)


def finite_quotient(cover_bm: HGPoly, acts: Optional[str], character: str) -> HGPoly:
    """Isotypic extraction for a finite quotient.

    acts describes the group action on the cover's homology: "trivially" means the
    whole homology is invariant.  An equivariant cover polynomial may be passed
    with acts="labels", in which case the labels are read directly (S_2 only).
    """
    if acts is None:
        raise HGError("finite quotient needs action data on the cover")
    if character not in ("trivial", "sign"):
        raise HGError(f"unknown character {character!r}")
    if acts == "trivially":
        if cover_bm.n is not None:
            raise HGError("trivial action declared for a labelled cover")
        return cover_bm if character == "trivial" else HGPoly.zero()
    if acts == "labels":
        from .hgring import invariant_part, sign_part
        return invariant_part(cover_bm) if character == "trivial" else sign_part(cover_bm)
    raise HGError(f"unknown action data {acts!r}")


def open_cone(base_bm: HGPoly, warnings: Optional[list] = None) -> HGPoly:
    """BM homology of the open cone over a space with the given BM homology."""
    base = as_poly(base_bm)
    n = base.n
    unit = HGPoly.one(n)
    deg0 = base.degree_part(0)
    out = HGPoly.zero(n)
    for (i, w, lam), c in base.terms.items():
        if i >= 1:
            out = out + HGPoly({(i + 1, w, lam): c}, n)
    if deg0.is_zero():
        if warnings is not None:
            warnings.append("open cone: base has no BM_0, vertex class survives in degree 0")
        log.warning("open cone over a base without BM_0: unit survives in degree 0")
        return out + unit
    rest = deg0 - unit
    if not rest.is_effective() and not rest.is_zero():
        raise HGError("open cone: base BM_0 does not contain the unit class")
    return out + shift(rest, 1)


# ---------------------------------------------------------------- long exact sequences

@dataclass(frozen=True)
class LESSolution:
    value: HGPoly
    ranks: Tuple[Tuple[Tuple[int, int, object], int], ...]


def _blocks(p: HGPoly):
    return {(i, w, lam): c for (i, w, lam), c in p.terms.items()}


def les_solve(closed_bm: HGPoly, open_bm: Optional[HGPoly] = None, total_bm: Optional[HGPoly] = None,
              constraints: Iterable[Tuple[str, int, int]] = ()) -> List[LESSolution]:
    """Enumerate the unknown term of  ... -> BM_k(Z) -> BM_k(X) -> BM_k(U) -> BM_(k-1)(Z) -> ...

    Give the closed part Z and exactly one of U (open) or X (total).  Connecting
    ranks are enumerated per (degree, weight, label) block; constraints
    ("eq"|"le", k, dim) bound the dimension of the unknown in degree k.
    """
    if (open_bm is None) == (total_bm is None):
        raise HGError("give exactly one of open_bm, total_bm")
    z = as_poly(closed_bm)
    known = as_poly(open_bm if open_bm is not None else total_bm)
    n = z.n if z.n is not None else known.n
    z, known = z + HGPoly.zero(n), known + HGPoly.zero(n)
    zb, kb = _blocks(z), _blocks(known)
    if open_bm is not None:
        # boundary U_k -> Z_(k-1) of rank r: X_k = Z_k - r_(k+1) + U_k - r_k
        arrows = [((i, w, lam), (i - 1, w, lam)) for (i, w, lam) in kb if (i - 1, w, lam) in zb]
        caps = [min(kb[s], zb[t]) for s, t in arrows]

        def value(rs):
            out = z + known
            for (s, t), r in zip(arrows, rs):
                out = out - HGPoly({s: r, t: r}, n)
            return out
    else:
        # Z_k -> X_k of rank s: U_k = X_k - s_k + Z_(k-1) - s_(k-1)
        arrows = [(key, key) for key in zb if key in kb]
        caps = [min(zb[k], kb[k]) for k, _ in arrows]

        def value(rs):
            out = known + shift(z, 1)
            for (key, _), r in zip(arrows, rs):
                i, w, lam = key
                out = out - HGPoly({key: r, (i + 1, w, lam): r}, n)
            return out

    sols = []
    for rs in itertools.product(*(range(c + 1) for c in caps)):
        val = value(rs)
        if not val.is_zero() and not val.is_effective():
            continue
        ok = True
        for op, k, dim in constraints:
            d = sum(c * (1 if lam is None else SpechtVector.irrep(lam).dim())
                    for (i, _, lam), c in val.terms.items() if i == k)
            if (op == "eq" and d != dim) or (op == "le" and d > dim):
                ok = False
                break
        if ok:
            sols.append(LESSolution(val, tuple(
                (arrows[j][0], r) for j, r in enumerate(rs) if r)))
    if not sols:
        raise LESInconsistent("no connecting-rank assignment satisfies the constraints")
    return sols


def stratum_bm(s: Stratum, ctx: Optional[BMContext] = None, which: str = "f") -> HGPoly:
    """BM homology of the Phi (which='phi') or F (which='f') stratum."""
    if ctx is None:
        ctx = BMContext()
    if isinstance(s.points, str):
        ctx.note(f"stratum {s.id}: zero by the {s.points} rule")
        return ctx.lift(HGPoly.zero())
    base = bm(s.space, s.local_system, ctx)
    phi = simplicial_bundle(base, s.points)
    if which == "phi":
        return phi
    return vb_total(phi, s.bundle_rank)


def describe(p: HGPoly) -> str:
    return format_poly(p)
