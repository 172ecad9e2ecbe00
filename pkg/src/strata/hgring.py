"""Hodge-Grothendieck polynomials with Tate coefficients.

A polynomial is a finite sum of terms c * s[lam] * t^i * L^w where t tracks the
(co)homological degree, L is the class of Q(-1) (so Q(m) = L^-m) and s[lam] is
an optional Specht label for an S_n-action.  Plain polynomials carry no labels.

Internally a polynomial is a dict keyed by (i, w, lam) with lam = None for plain
polynomials.  All arithmetic is over the integers.
"""
from __future__ import annotations

import logging
import re
from fractions import Fraction
from typing import Callable, Dict, Iterable, Mapping, Optional, Tuple, Union

from .symrep import (
    Partition,
    SpechtVector,
    format_partition,
    kronecker,
    parse_partition,
    partition,
    specht_dim,
)

log = logging.getLogger(__name__)

Key = Tuple[int, int, Optional[Partition]]


class HGError(ValueError):
    pass


# ---------------------------------------------------------------- TateLaurent

class TateLaurent:
    """Integer Laurent polynomial in one variable (L by default, q for point counts)."""

    __slots__ = ("coeffs", "var")

    def __init__(self, coeffs: Mapping[int, int] | None = None, var: str = "L"):
        self.coeffs = {int(k): int(v) for k, v in (coeffs or {}).items() if v}
        self.var = var

    @classmethod
    def monomial(cls, exp: int, c: int = 1, var: str = "L") -> "TateLaurent":
        return cls({exp: c}, var)

    def __add__(self, other):
        out = dict(self.coeffs)
        for k, v in _as_laurent(other, self.var).coeffs.items():
            out[k] = out.get(k, 0) + v
        return TateLaurent(out, self.var)

    __radd__ = __add__

    def __neg__(self):
        return TateLaurent({k: -v for k, v in self.coeffs.items()}, self.var)

    def __sub__(self, other):
        return self + (-_as_laurent(other, self.var))

    def __rsub__(self, other):
        return _as_laurent(other, self.var) - self

    def __mul__(self, other):
        other = _as_laurent(other, self.var)
        out: Dict[int, int] = {}
        for a, x in self.coeffs.items():
            for b, y in other.coeffs.items():
                out[a + b] = out.get(a + b, 0) + x * y
        return TateLaurent(out, self.var)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = TateLaurent({0: 1}, self.var)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        try:
            return self.coeffs == _as_laurent(other, self.var).coeffs
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def __call__(self, x):
        x = Fraction(x)
        val = sum(c * x ** e for e, c in self.coeffs.items())
        return int(val) if val.denominator == 1 else val

    def is_zero(self) -> bool:
        return not self.coeffs

    def __repr__(self):
        return f"TateLaurent({self})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        out = []
        for e in sorted(self.coeffs, reverse=True):
            c = self.coeffs[e]
            sgn = "-" if c < 0 else "+"
            mag = abs(c)
            if e == 0:
                body = str(mag)
            else:
                mono = self.var if e == 1 else f"{self.var}^{e}"
                body = mono if mag == 1 else f"{mag}{mono}"
            out.append(f"{sgn} {body}")
        s = " ".join(out)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]


def _as_laurent(x, var="L") -> TateLaurent:
    if isinstance(x, TateLaurent):
        return x
    if isinstance(x, int):
        return TateLaurent({0: x}, var)
    raise TypeError(f"cannot use {type(x).__name__} as a Laurent polynomial")


# ---------------------------------------------------------------- HGPoly

class HGPoly:
    """Finite sum of c * s[lam] * t^i * L^w.

    n is None for plain polynomials; otherwise every term carries a partition of n.
    """

    __slots__ = ("terms", "n", "_hash")

    def __init__(self, terms: Mapping[Key, int] | None = None, n: Optional[int] = None):
        clean: Dict[Key, int] = {}
        for (i, w, lam), c in (terms or {}).items():
            if n is None:
                if lam is not None:
                    raise HGError("plain polynomial with a Specht label")
            else:
                lam = partition(lam)
                if sum(lam) != n:
                    raise HGError(f"label {lam} is not a partition of {n}")
            key = (int(i), int(w), lam)
            clean[key] = clean.get(key, 0) + int(c)
        self.terms = {k: v for k, v in clean.items() if v}
        self.n = n
        self._hash = None

    @classmethod
    def _raw(cls, terms: Dict[Key, int], n: Optional[int]) -> "HGPoly":
        # trusted constructor: keys already validated, zeros allowed in input
        obj = cls.__new__(cls)
        obj.terms = {k: v for k, v in terms.items() if v}
        obj.n = n
        obj._hash = None
        return obj

    # constructors
    @classmethod
    def zero(cls, n: Optional[int] = None) -> "HGPoly":
        return cls({}, n)

    @classmethod
    def one(cls, n: Optional[int] = None) -> "HGPoly":
        return cls.monomial(0, 0, 1, n=n)

    @classmethod
    def monomial(cls, i: int = 0, w: int = 0, c: int = 1, lam: Optional[Iterable[int]] = None,
                 n: Optional[int] = None) -> "HGPoly":
        if lam is not None:
            lam = partition(lam)
            n = sum(lam)
        elif n is not None:
            lam = (n,) if n else ()
        return cls({(i, w, lam): c}, n)

    @classmethod
    def from_specht(cls, v: SpechtVector, i: int = 0, w: int = 0) -> "HGPoly":
        return cls({(i, w, lam): c for lam, c in v.coeffs.items()}, v.n)

    # structure
    @property
    def is_equivariant(self) -> bool:
        return self.n is not None

    def is_zero(self) -> bool:
        return not self.terms

    def degrees(self):
        return sorted({i for i, _, _ in self.terms})

    def min_degree(self) -> int:
        return min(i for i, _, _ in self.terms)

    def max_degree(self) -> int:
        return max(i for i, _, _ in self.terms)

    def coeff(self, i: int) -> Union[TateLaurent, Dict[Partition, TateLaurent]]:
        """Coefficient of t^i: a TateLaurent, or a map label -> TateLaurent."""
        if self.n is None:
            return TateLaurent({w: c for (d, w, _), c in self.terms.items() if d == i})
        out: Dict[Partition, Dict[int, int]] = {}
        for (d, w, lam), c in self.terms.items():
            if d == i:
                out.setdefault(lam, {})[w] = c
        return {lam: TateLaurent(m) for lam, m in out.items()}

    def degree_part(self, i: int) -> "HGPoly":
        return HGPoly({k: c for k, c in self.terms.items() if k[0] == i}, self.n)

    def specht_at(self, i: int, w: int) -> SpechtVector:
        if self.n is None:
            raise HGError("plain polynomial has no Specht coefficients")
        return SpechtVector(self.n, {lam: c for (d, e, lam), c in self.terms.items()
                                     if d == i and e == w})

    def dim_at(self, i: int, w: int) -> int:
        if self.n is None:
            return self.terms.get((i, w, None), 0)
        return self.specht_at(i, w).dim()

    def is_effective(self) -> bool:
        return all(c > 0 for c in self.terms.values())

    def total_dim(self) -> int:
        return sum(c * (1 if lam is None else specht_dim(lam))
                   for (_, _, lam), c in self.terms.items())

    # coercion between plain and equivariant
    def _promote(self, n: int) -> "HGPoly":
        if self.n == n:
            return self
        if self.n is not None:
            raise HGError(f"group size mismatch: S_{self.n} vs S_{n}")
        triv = (n,) if n else ()
        return HGPoly({(i, w, triv): c for (i, w, _), c in self.terms.items()}, n)

    def _align(self, other) -> Tuple["HGPoly", "HGPoly"]:
        other = as_poly(other)
        if self.n == other.n:
            return self, other
        if self.n is None:
            return self._promote(other.n), other
        if other.n is None:
            return self, other._promote(self.n)
        raise HGError(f"group size mismatch: S_{self.n} vs S_{other.n}")

    # ring operations
    def __add__(self, other):
        a, b = self._align(other)
        out = dict(a.terms)
        for k, v in b.terms.items():
            out[k] = out.get(k, 0) + v
        return HGPoly._raw(out, a.n)

    __radd__ = __add__

    def __neg__(self):
        return HGPoly._raw({k: -v for k, v in self.terms.items()}, self.n)

    def __sub__(self, other):
        return self + (-as_poly(other))

    def __rsub__(self, other):
        return as_poly(other) - self

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = HGPoly.one(self.n)
        for _ in range(k):
            out = out * self
        return out

    def scale(self, k: int) -> "HGPoly":
        return HGPoly({key: k * c for key, c in self.terms.items()}, self.n)

    def __eq__(self, other):
        try:
            other = as_poly(other)
        except TypeError:
            return NotImplemented
        if self.n != other.n:
            if self.is_zero() and other.is_zero():
                return True
            return False
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, frozenset(self.terms.items())))
        return self._hash

    def __repr__(self):
        return f"HGPoly({format_poly(self)!r})"

    def __str__(self):
        return format_poly(self)

    def map_terms(self, fn: Callable[[int, int], Tuple[int, int]]) -> "HGPoly":
        out: Dict[Key, int] = {}
        for (i, w, lam), c in self.terms.items():
            ni, nw = fn(i, w)
            key = (ni, nw, lam)
            out[key] = out.get(key, 0) + c
        return HGPoly(out, self.n)


def as_poly(x) -> HGPoly:
    if isinstance(x, HGPoly):
        return x
    if isinstance(x, int):
        return HGPoly.monomial(0, 0, x)
    if isinstance(x, SpechtVector):
        return HGPoly.from_specht(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to HGPoly")


def add(a, b) -> HGPoly:
    return as_poly(a) + b


def mul(a, b) -> HGPoly:
    a, b = as_poly(a), as_poly(b)
    if a.n is not None and b.n is not None and a.n != b.n:
        raise HGError(f"group size mismatch: S_{a.n} vs S_{b.n}")
    n = a.n if a.n is not None else b.n
    out: Dict[Key, int] = {}
    if a.n is None or b.n is None:
        plain, eq = (a, b) if a.n is None else (b, a)
        if eq.n is None:
            for (i, w, _), c in a.terms.items():
                for (j, v, _), d in b.terms.items():
                    k = (i + j, w + v, None)
                    out[k] = out.get(k, 0) + c * d
            return HGPoly._raw(out, None)
        for (i, w, _), c in plain.terms.items():
            for (j, v, lam), d in eq.terms.items():
                k = (i + j, w + v, lam)
                out[k] = out.get(k, 0) + c * d
        return HGPoly._raw(out, n)
    cache: Dict[Tuple[Partition, Partition], SpechtVector] = {}
    for (i, w, lam), c in a.terms.items():
        for (j, v, mu), d in b.terms.items():
            key = (lam, mu)
            if key not in cache:
                cache[key] = kronecker(SpechtVector.irrep(lam), SpechtVector.irrep(mu))
            for nu, m in cache[key].coeffs.items():
                k = (i + j, w + v, nu)
                out[k] = out.get(k, 0) + c * d * m
    return HGPoly._raw(out, n)


# ---------------------------------------------------------------- twists, shifts

def tate_twist(p: HGPoly, m: int) -> HGPoly:
    """Tensor with Q(m): multiplies every coefficient by L^-m."""
    return p.map_terms(lambda i, w: (i, w - m))


def shift(p: HGPoly, s: int) -> HGPoly:
    """Multiply by t^s."""
    return p.map_terms(lambda i, w: (i + s, w))


def t_power(i: int, w: int = 0) -> HGPoly:
    return HGPoly.monomial(i, w)


T = HGPoly.monomial(1, 0)
L = HGPoly.monomial(0, 1)


# ---------------------------------------------------------------- division

class Indivisible:
    """Structured report returned when exact division fails."""

    def __init__(self, degree: int, remainder: HGPoly, partial: HGPoly):
        self.degree = degree
        self.remainder = remainder
        self.partial = partial

    def __bool__(self):
        return False

    def __repr__(self):
        return f"Indivisible(degree={self.degree}, remainder={self.remainder})"


def _leading(p: HGPoly) -> Tuple[int, int]:
    return max((i, w) for i, w, _ in p.terms)


def div_exact(p: HGPoly, d: HGPoly) -> Union[HGPoly, Indivisible]:
    """Exact quotient p / d, or an Indivisible report.

    Division runs from the top term (degree, then weight).  The divisor must be
    plain (or carry only trivial labels) with leading coefficient +-1.
    """
    p, d = as_poly(p), as_poly(d)
    if d.is_zero():
        raise HGError("division by zero")
    if d.n is not None:
        if any(lam != ((d.n,) if d.n else ()) for _, _, lam in d.terms):
            raise HGError("divisor must be plain")
        d = HGPoly({(i, w, None): c for (i, w, _), c in d.terms.items()})
    li, lw = _leading(d)
    lc = d.terms[(li, lw, None)]
    if abs(lc) != 1:
        raise HGError("divisor leading coefficient must be a unit")
    if p.is_zero():
        return HGPoly.zero(p.n)
    # Newton polytopes add under multiplication, so quotient weights are bounded below
    wmin = min(w for _, w, _ in p.terms) - min(w for _, w, _ in d.terms)
    dterms = [(i - li, w - lw, c) for (i, w, _), c in d.terms.items()]
    rem: Dict[Key, int] = dict(p.terms)
    quot: Dict[Key, int] = {}
    while rem:
        ri, rw = max((i, w) for i, w, _ in rem)
        if ri < li or rw - lw < wmin:
            break
        qi, qw = ri - li, rw - lw
        for lam in [lam for (i, w, lam) in rem if (i, w) == (ri, rw)]:
            c = rem[(ri, rw, lam)] * lc
            quot[(qi, qw, lam)] = quot.get((qi, qw, lam), 0) + c
            for di, dw, dc in dterms:
                key = (ri + di, rw + dw, lam)
                v = rem.get(key, 0) - c * dc
                if v:
                    rem[key] = v
                else:
                    rem.pop(key, None)
    if not rem:
        return HGPoly._raw(quot, p.n)
    remp = HGPoly._raw(rem, p.n)
    return Indivisible(_leading(remp)[0], remp, HGPoly._raw(quot, p.n))


def divides(d: HGPoly, p: HGPoly) -> bool:
    return isinstance(div_exact(p, d), HGPoly)


# ---------------------------------------------------------------- duality

def poincare_dual(p: HGPoly, d: int, direction: str = "coh->bm") -> HGPoly:
    """Duality for a smooth d-fold: t^i L^w <-> t^(2d-i) L^(w-d) (resp. L^(w+d))."""
    if direction in ("coh->bm", "coh_to_bm"):
        return p.map_terms(lambda i, w: (2 * d - i, w - d))
    if direction in ("bm->coh", "bm_to_coh"):
        return p.map_terms(lambda i, w: (2 * d - i, w + d))
    raise HGError(f"unknown duality direction {direction!r}")


# ---------------------------------------------------------------- equivariant views

def forget_equivariant(p: HGPoly) -> HGPoly:
    if p.n is None:
        return p
    out: Dict[Key, int] = {}
    for (i, w, lam), c in p.terms.items():
        k = (i, w, None)
        out[k] = out.get(k, 0) + c * specht_dim(lam)
    return HGPoly(out)


def isotypic_part(p: HGPoly, lam: Iterable[int]) -> HGPoly:
    """Plain polynomial of multiplicities of the irreducible lam."""
    if p.n is None:
        raise HGError("isotypic part of a plain polynomial")
    lam = partition(lam)
    if sum(lam) != p.n:
        raise HGError(f"{lam} is not a partition of {p.n}")
    return HGPoly({(i, w, None): c for (i, w, mu), c in p.terms.items() if mu == lam})


def invariant_part(p: HGPoly) -> HGPoly:
    return isotypic_part(p, (p.n,) if p.n else ())


def sign_part(p: HGPoly) -> HGPoly:
    return isotypic_part(p, (1,) * p.n)


def with_label(p: HGPoly, v: SpechtVector) -> HGPoly:
    """Tensor a polynomial with a fixed representation v."""
    return mul(p, HGPoly.from_specht(v))


# ---------------------------------------------------------------- point counts

def e_count(p: HGPoly, q=None, mode: str = "bm", d: Optional[int] = None):
    """Point-count evaluation.

    bm mode: t^k L^w contributes (-1)^k q^(-w).  coh_smooth mode needs the
    dimension d and first dualises to Borel-Moore classes.  With q None the
    result is a Laurent polynomial in q, otherwise its value at q.
    """
    p = forget_equivariant(as_poly(p))
    if mode == "coh_smooth":
        if d is None:
            raise HGError("coh_smooth mode needs the dimension d")
        p = poincare_dual(p, d, "coh->bm")
    elif mode != "bm":
        raise HGError(f"unknown mode {mode!r}")
    out: Dict[int, int] = {}
    for (i, w, _), c in p.terms.items():
        out[-w] = out.get(-w, 0) + (-1) ** (i % 2) * c
    poly = TateLaurent(out, var="q")
    return poly if q is None else poly(q)


# ---------------------------------------------------------------- text form

def _fmt_mono(i: int, w: int) -> str:
    parts = []
    if i:
        parts.append("t" if i == 1 else f"t^{i}")
    if w:
        parts.append("L" if w == 1 else f"L^{w}")
    return "·".join(parts)


def format_poly(p: HGPoly) -> str:
    """Canonical text: '+/- c·s[lam]·t^a·L^b' terms sorted by (a, b, lam)."""
    if p.is_zero():
        return "0"
    keys = sorted(p.terms, key=lambda k: (k[0], k[1], tuple(-x for x in (k[2] or ()))))
    out = []
    for i, w, lam in keys:
        c = p.terms[(i, w, lam)]
        factors = []
        if abs(c) != 1:
            factors.append(str(abs(c)))
        if lam is not None:
            factors.append("s" + format_partition(lam))
        mono = _fmt_mono(i, w)
        if mono:
            factors.append(mono)
        if not factors:
            factors.append("1")
        out.append(("-" if c < 0 else "+", "·".join(factors)))
    text = " ".join(f"{s} {b}" for s, b in out)
    return text[2:] if text.startswith("+ ") else "-" + text[2:]


def to_json(p: HGPoly) -> dict:
    keys = sorted(p.terms, key=lambda k: (k[0], k[1], tuple(-x for x in (k[2] or ()))))
    return {
        "n": p.n,
        "terms": [
            {"t": i, "L": w, "label": None if lam is None else list(lam), "c": p.terms[(i, w, lam)]}
            for i, w, lam in keys
        ],
    }


def from_json(obj: dict) -> HGPoly:
    n = obj.get("n")
    return HGPoly({(d["t"], d["L"], None if d["label"] is None else tuple(d["label"])): d["c"]
                   for d in obj["terms"]}, n)


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<schur>[sS]\s*\[[0-9,\s]*\])|(?P<tate>Q\s*\(\s*-?\d+\s*\))"
    r"|(?P<name>\{[^}]+\}|[tL])|(?P<op>\*\*|[-+*·^()]))"
)


class _Parser:
    def __init__(self, text: str, resolve: Optional[Callable[[str], HGPoly]]):
        self.toks = []
        pos = 0
        text = text.strip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise HGError(f"cannot parse polynomial at {text[pos:]!r}")
            kind = m.lastgroup
            self.toks.append((kind, m.group(kind).replace(" ", "")))
            pos = m.end()
            while pos < len(text) and text[pos].isspace():
                pos += 1
        self.i = 0
        self.resolve = resolve

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expr(self) -> HGPoly:
        sign = 1
        kind, val = self.peek()
        if val in ("+", "-"):
            self.take()
            sign = -1 if val == "-" else 1
        out = self.term().scale(sign)
        while True:
            kind, val = self.peek()
            if val not in ("+", "-"):
                return out
            self.take()
            t = self.term()
            out = out + t if val == "+" else out - t

    def term(self) -> HGPoly:
        out = self.factor()
        while True:
            kind, val = self.peek()
            if val in ("*", "·"):
                self.take()
                out = out * self.factor()
            elif kind in ("num", "schur", "tate", "name") or val == "(":
                out = out * self.factor()
            else:
                return out

    def _exponent(self) -> int:
        sign = 1
        kind, val = self.take()
        if val == "-":
            sign = -1
            kind, val = self.take()
        elif val == "(":
            e = self._exponent()
            if self.take()[1] != ")":
                raise HGError("unbalanced exponent")
            return e
        if kind != "num":
            raise HGError(f"bad exponent {val!r}")
        return sign * int(val)

    def factor(self) -> HGPoly:
        kind, val = self.take()
        if kind == "num":
            base = HGPoly.monomial(0, 0, int(val))
        elif kind == "schur":
            base = HGPoly.monomial(lam=parse_partition(val[1:]))
        elif kind == "tate":
            m = int(val[2:-1])
            if self.peek()[1] == "^":
                # table shorthand: Q(m)^k means k copies of Q(m)
                self.take()
                return HGPoly.monomial(0, -m, self._exponent())
            return HGPoly.monomial(0, -m)
        elif kind == "name":
            if val == "t":
                base = T
            elif val == "L":
                base = L
            elif self.resolve is not None:
                base = self.resolve(val[1:-1].strip())
            else:
                raise HGError(f"unknown symbol {val!r}")
        elif val == "(":
            base = self.expr()
            if self.take()[1] != ")":
                raise HGError("unbalanced parenthesis")
        else:
            raise HGError(f"unexpected token {val!r}")
        if self.peek()[1] in ("^", "**"):
            self.take()
            e = self._exponent()
            if e >= 0:
                return base ** e
            # negative powers only for single unit monomials
            if len(base.terms) == 1:
                (i, w, lam), c = next(iter(base.terms.items()))
                if c == 1 and lam is None:
                    return HGPoly.monomial(i * e, w * e)
            raise HGError("negative power of a non-monomial")
        return base


def parse_poly(text: str, resolve: Optional[Callable[[str], HGPoly]] = None) -> HGPoly:
    """Parse a polynomial such as '(s[2]+s[1,1])·t^20·L^-10 + 3t^19 L^-9'.

    Accepts implicit multiplication, Q(m) for L^-m, Q(m)^k for k·L^-m, and
    {name} for a named polynomial looked up through resolve.
    """
    p = _Parser(text, resolve)
    if not p.toks:
        raise HGError("empty polynomial")
    out = p.expr()
    if p.i != len(p.toks):
        raise HGError(f"trailing input in {text!r}")
    return out
