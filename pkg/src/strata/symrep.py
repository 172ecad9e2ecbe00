"""Representation ring of the symmetric groups S_n for small n.

Characters come from the Murnaghan-Nakayama rule.  Everything is exact
integer arithmetic; virtual (negative) multiplicities are allowed.
"""
from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Dict, Iterable, Iterator, Mapping, Tuple

MAX_N = 8

Partition = Tuple[int, ...]


class RepError(ValueError):
    pass


def partition(parts: Iterable[int]) -> Partition:
    """Validate and normalise a partition given as an iterable of parts."""
    p = tuple(int(x) for x in parts)
    if any(x <= 0 for x in p):
        raise RepError(f"partition parts must be positive: {p}")
    if any(p[i] < p[i + 1] for i in range(len(p) - 1)):
        raise RepError(f"partition parts must be non-increasing: {p}")
    return p


def partitions(n: int) -> Tuple[Partition, ...]:
    """All partitions of n in reverse lexicographic order ((n) first)."""
    return _partitions(n, n)


@lru_cache(maxsize=None)
def _partitions(n: int, cap: int) -> Tuple[Partition, ...]:
    if n == 0:
        return ((),)
    out = []
    for first in range(min(n, cap), 0, -1):
        for rest in _partitions(n - first, first):
            out.append((first,) + rest)
    return tuple(out)


def conjugate(lam: Partition) -> Partition:
    if not lam:
        return ()
    return tuple(sum(1 for x in lam if x > i) for i in range(lam[0]))


def format_partition(lam: Partition) -> str:
    return "[" + ",".join(str(x) for x in lam) + "]"


def parse_partition(text: str) -> Partition:
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise RepError(f"bad partition literal {text!r}")
    body = text[1:-1].strip()
    if not body:
        return ()
    return partition(int(x) for x in body.split(","))


# ---------------------------------------------------------------- dimensions

@lru_cache(maxsize=None)
def specht_dim(lam: Partition) -> int:
    """Number of standard Young tableaux of shape lam (hook length formula)."""
    lam = partition(lam)
    n = sum(lam)
    conj = conjugate(lam)
    hooks = 1
    for i, row in enumerate(lam):
        for j in range(row):
            hooks *= (row - j - 1) + (conj[j] - i - 1) + 1
    return factorial(n) // hooks


# ---------------------------------------------------------------- characters

def _rim_hooks(lam: Partition, k: int) -> Iterator[Tuple[Partition, int]]:
    """Yield (lam minus a border strip of size k, height of the strip)."""
    # beta-numbers: removing a k-strip = moving a bead from b to b-k
    ln = len(lam)
    beta = [lam[i] + (ln - 1 - i) for i in range(ln)]
    bset = set(beta)
    for b in beta:
        nb = b - k
        if nb < 0 or nb in bset:
            continue
        height = sum(1 for c in beta if nb < c < b)
        new = sorted((bset - {b}) | {nb}, reverse=True)
        parts = [new[i] - (ln - 1 - i) for i in range(ln)]
        yield tuple(x for x in parts if x > 0), height


@lru_cache(maxsize=None)
def _mn(lam: Partition, mu: Partition) -> int:
    if not mu:
        return 1 if not lam else 0
    k, rest = mu[0], mu[1:]
    total = 0
    for smaller, h in _rim_hooks(lam, k):
        total += (-1) ** h * _mn(smaller, rest)
    return total


def character(lam: Partition, mu: Partition) -> int:
    """chi_lam evaluated on the conjugacy class of cycle type mu."""
    lam, mu = partition(lam), partition(mu)
    if sum(lam) != sum(mu):
        raise RepError(f"size mismatch: {lam} vs {mu}")
    if sum(lam) > MAX_N:
        raise RepError(f"n > {MAX_N} not supported")
    return _mn(lam, mu)


def class_size(mu: Partition) -> int:
    n = sum(mu)
    denom = 1
    counts: Dict[int, int] = {}
    for part in mu:
        counts[part] = counts.get(part, 0) + 1
    for part, m in counts.items():
        denom *= part ** m * factorial(m)
    return factorial(n) // denom


class CharacterTable:
    """Character table of S_n; rows are irreducibles, columns cycle types."""

    def __init__(self, n: int):
        if not 0 <= n <= MAX_N:
            raise RepError(f"n must lie in [0, {MAX_N}]")
        self.n = n
        self.irreps = partitions(n)
        self.classes = partitions(n)
        self.class_sizes = {mu: class_size(mu) for mu in self.classes}
        self.rows = {lam: {mu: _mn(lam, mu) for mu in self.classes} for lam in self.irreps}

    def inner(self, f: Mapping[Partition, int], g: Mapping[Partition, int]) -> Fraction:
        s = sum(self.class_sizes[mu] * f[mu] * g[mu] for mu in self.classes)
        return Fraction(s, factorial(self.n))

    def decompose(self, chi: Mapping[Partition, int]) -> "SpechtVector":
        coeffs = {}
        for lam in self.irreps:
            m = self.inner(self.rows[lam], chi)
            if m.denominator != 1:
                raise RepError("class function is not a virtual character")
            if m:
                coeffs[lam] = int(m)
        return SpechtVector(self.n, coeffs)


@lru_cache(maxsize=None)
def character_table(n: int) -> CharacterTable:
    return CharacterTable(n)


# ---------------------------------------------------------------- vectors

class SpechtVector:
    """Virtual representation of S_n as an integer combination of Specht modules."""

    __slots__ = ("n", "_coeffs", "_hash")

    def __init__(self, n: int, coeffs: Mapping[Partition, int] | None = None):
        if not 0 <= n <= MAX_N:
            raise RepError(f"n must lie in [0, {MAX_N}]")
        clean = {}
        for lam, c in (coeffs or {}).items():
            lam = partition(lam)
            if sum(lam) != n:
                raise RepError(f"{lam} is not a partition of {n}")
            if c:
                clean[lam] = clean.get(lam, 0) + int(c)
        self.n = n
        self._coeffs = {k: v for k, v in clean.items() if v}
        self._hash = None

    # construction helpers
    @classmethod
    def irrep(cls, lam: Iterable[int], mult: int = 1) -> "SpechtVector":
        lam = partition(lam)
        return cls(sum(lam), {lam: mult})

    @classmethod
    def trivial(cls, n: int) -> "SpechtVector":
        return cls(n, {(n,) if n else (): 1})

    @classmethod
    def sign(cls, n: int) -> "SpechtVector":
        return cls(n, {(1,) * n: 1})

    @classmethod
    def from_character(cls, n: int, chi: Mapping[Partition, int]) -> "SpechtVector":
        return character_table(n).decompose(chi)

    # accessors
    @property
    def coeffs(self) -> Dict[Partition, int]:
        return dict(self._coeffs)

    def items(self):
        return sorted(self._coeffs.items(), reverse=True)

    def __getitem__(self, lam) -> int:
        return self._coeffs.get(partition(lam), 0)

    def is_zero(self) -> bool:
        return not self._coeffs

    def dim(self) -> int:
        return sum(c * specht_dim(lam) for lam, c in self._coeffs.items())

    def is_effective(self) -> bool:
        return all(c > 0 for c in self._coeffs.values())

    def character(self) -> Dict[Partition, int]:
        tab = character_table(self.n)
        return {mu: sum(c * tab.rows[lam][mu] for lam, c in self._coeffs.items())
                for mu in tab.classes}

    # arithmetic
    def _check(self, other: "SpechtVector"):
        if not isinstance(other, SpechtVector):
            raise TypeError(f"expected SpechtVector, got {type(other).__name__}")
        if other.n != self.n:
            raise RepError(f"group size mismatch: S_{self.n} vs S_{other.n}")

    def __add__(self, other):
        self._check(other)
        out = dict(self._coeffs)
        for k, v in other._coeffs.items():
            out[k] = out.get(k, 0) + v
        return SpechtVector(self.n, out)

    def __neg__(self):
        return SpechtVector(self.n, {k: -v for k, v in self._coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, k: int) -> "SpechtVector":
        return SpechtVector(self.n, {lam: k * c for lam, c in self._coeffs.items()})

    def __rmul__(self, k):
        if isinstance(k, int):
            return self.scale(k)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        return kronecker(self, other)

    def __eq__(self, other):
        if isinstance(other, SpechtVector):
            return self.n == other.n and self._coeffs == other._coeffs
        if other == 0:
            return self.is_zero()
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, frozenset(self._coeffs.items())))
        return self._hash

    def __repr__(self):
        return f"SpechtVector({self.n}, {format_specht(self)!r})"

    def __str__(self):
        return format_specht(self)


def kronecker(a: SpechtVector, b: SpechtVector) -> SpechtVector:
    """Internal tensor product, computed pointwise on characters."""
    a._check(b)
    ca, cb = a.character(), b.character()
    return character_table(a.n).decompose({mu: ca[mu] * cb[mu] for mu in ca})


def sign_twist(a: SpechtVector) -> SpechtVector:
    return kronecker(a, SpechtVector.sign(a.n))


def induce(r: SpechtVector, n: int) -> SpechtVector:
    """Induction from S_m (acting on the first m letters) to S_n.

    Frobenius formula: Ind(chi)(g) = |C_G(g)| * chi(nu) / |C_H(nu)| where nu is
    mu with n - m fixed points removed (zero if mu has too few fixed points).
    """
    m = r.n
    if m > n:
        raise RepError(f"cannot induce from S_{m} to S_{n}")
    if n > MAX_N:
        raise RepError(f"n > {MAX_N} not supported")
    chi = r.character()
    k = n - m
    out = {}
    for mu in partitions(n):
        # Ind value = |C_G(g)| * sum over H-classes nu inside class mu of chi(nu)/|C_H(nu)|
        ones = sum(1 for x in mu if x == 1)
        if ones < k:
            out[mu] = 0
            continue
        nu = tuple(x for x in mu if x != 1) + (1,) * (ones - k)
        cg = Fraction(factorial(n), class_size(mu))
        ch = Fraction(factorial(m), class_size(nu))
        val = cg / ch * chi[nu]
        if val.denominator != 1:
            raise RepError("non-integral induced character")
        out[mu] = int(val)
    return SpechtVector.from_character(n, out)


def restrict(r: SpechtVector, m: int) -> SpechtVector:
    """Restriction from S_n to S_m (first m letters)."""
    if m > r.n:
        raise RepError("restriction target larger than source")
    chi = r.character()
    k = r.n - m
    return SpechtVector.from_character(m, {nu: chi[tuple(sorted(nu + (1,) * k, reverse=True))]
                                           for nu in partitions(m)})


def lr_product(a: SpechtVector, b: SpechtVector) -> SpechtVector:
    """Outer (induction) product S_m x S_k -> S_{m+k}, via characters.

    Used as a cross-check for induce: induce(r, n) == lr_product(r, regular_rep(n - m)).
    """
    n = a.n + b.n
    if n > MAX_N:
        raise RepError(f"n > {MAX_N} not supported")
    ca, cb = a.character(), b.character()
    out = {}
    for mu in partitions(n):
        # sum over ways to split the cycles of mu between the two factors
        total = Fraction(0)
        for left in _sub_multisets(mu):
            if sum(left) != a.n:
                continue
            right = _multiset_minus(mu, left)
            # number of elements of the Young subgroup of this type, over its order,
            # times |C_G(mu)| gives the induced value
            total += Fraction(ca[left] * cb[right],
                              class_centraliser(left) * class_centraliser(right))
        out[mu] = int(total * class_centraliser(mu))
    return SpechtVector.from_character(n, out)


def class_centraliser(mu: Partition) -> int:
    return factorial(sum(mu)) // class_size(mu)


def _sub_multisets(mu: Partition):
    counts: Dict[int, int] = {}
    for x in mu:
        counts[x] = counts.get(x, 0) + 1
    keys = sorted(counts, reverse=True)

    def rec(i):
        if i == len(keys):
            yield ()
            return
        part = keys[i]
        for c in range(counts[part] + 1):
            for rest in rec(i + 1):
                yield (part,) * c + rest

    for sub in rec(0):
        yield tuple(sorted(sub, reverse=True))


def _multiset_minus(mu: Partition, sub: Partition) -> Partition:
    rest = list(mu)
    for x in sub:
        rest.remove(x)
    return tuple(rest)


def pairs_permutation_rep(n: int) -> SpechtVector:
    """Permutation representation of S_n on 2-element subsets of {1..n}."""
    if n < 2:
        raise RepError("need n >= 2")
    chi = {}
    for mu in partitions(n):
        ones = sum(1 for x in mu if x == 1)
        twos = sum(1 for x in mu if x == 2)
        # a pair is fixed if both points are fixed, or it is a 2-cycle
        chi[mu] = ones * (ones - 1) // 2 + twos
    return SpechtVector.from_character(n, chi)


def isotypic_mult(r: SpechtVector, lam: Partition) -> int:
    lam = partition(lam)
    if sum(lam) != r.n:
        raise RepError(f"{lam} is not a partition of {r.n}")
    return r[lam]


def regular_rep(n: int) -> SpechtVector:
    return SpechtVector(n, {lam: specht_dim(lam) for lam in partitions(n)})


# ---------------------------------------------------------------- text form

_TERM = re.compile(r"\s*([+-])?\s*(\d+)?\s*\*?\s*(\[[0-9,\s]*\])")


def format_specht(v: SpechtVector) -> str:
    if v.is_zero():
        return "0"
    parts = []
    for lam, c in v.items():
        sgn = "-" if c < 0 else "+"
        mag = abs(c)
        body = format_partition(lam) if mag == 1 else f"{mag}·{format_partition(lam)}"
        parts.append((sgn, body))
    text = " ".join(f"{s} {b}" for s, b in parts)
    return text[2:] if text.startswith("+ ") else "-" + text[2:]


def parse_specht(text: str) -> SpechtVector:
    """Parse '±k·[λ]' sums, e.g. '[4] + 2·[3,1] - [2,2]'."""
    s = text.replace("·", "*").strip()
    if s == "0":
        raise RepError("cannot infer n from '0'; use SpechtVector(n) instead")
    pos = 0
    coeffs: Dict[Partition, int] = {}
    n = None
    while pos < len(s):
        m = _TERM.match(s, pos)
        if not m or m.end() == pos:
            raise RepError(f"cannot parse Specht vector at {s[pos:]!r}")
        sign = -1 if m.group(1) == "-" else 1
        mag = int(m.group(2)) if m.group(2) else 1
        lam = parse_partition(m.group(3))
        if n is None:
            n = sum(lam)
        coeffs[lam] = coeffs.get(lam, 0) + sign * mag
        pos = m.end()
        while pos < len(s) and s[pos] == " ":
            pos += 1
    return SpechtVector(n or 0, coeffs)
