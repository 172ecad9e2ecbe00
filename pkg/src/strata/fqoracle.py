"""Brute-force point counts over small finite fields.

The oracle enumerates linear systems of plane quartics over F_q and counts the
smooth members, and counts Frobenius-stable configurations of points.  Both are
compared with the point counts predicted by the cohomology engine.

Quartic coefficients are indexed by the exponent triples (a, b, c) of
x0^a x1^b x2^c with a + b + c = 4, in decreasing lexicographic order:
x0^4, x0^3 x1, x0^3 x2, x0^2 x1^2, x0^2 x1 x2, ..., x2^4.
"""
from __future__ import annotations

import functools
import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

log = logging.getLogger(__name__)

MONOMIALS: Tuple[Tuple[int, int, int], ...] = tuple(
    sorted(((a, b, 4 - a - b) for a in range(5) for b in range(5 - a)), reverse=True))
CUBICS: Tuple[Tuple[int, int, int], ...] = tuple(
    sorted(((a, b, 3 - a - b) for a in range(4) for b in range(4 - a)), reverse=True))
MAX_SINGULAR_DEGREE = 6
# multiply-adds allowed per worker before a count is refused
BUDGET = 1e12
CAVEAT = ("point counts predict the cohomology only because every class is of Tate type; "
          "a mismatch is reported as it stands")


class OracleError(ValueError):
    pass


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % d for d in range(2, int(n ** 0.5) + 1))


def prime_power(q: int) -> Tuple[int, int]:
    """Return (p, k) with q = p^k, or raise."""
    for p in range(2, q + 1):
        if q % p == 0:
            k, r = 0, q
            while r % p == 0:
                r //= p
                k += 1
            if r != 1 or not _is_prime(p):
                break
            return p, k
    raise OracleError(f"{q} is not a prime power")


# ---------------------------------------------------------------- fields

class FqField:
    """F_{p^k} with elements encoded as integers 0..q-1.

    The base-p digits of an element are its coordinates in the polynomial basis
    1, x, ..., x^(k-1) modulo a primitive polynomial, so addition is digit-wise
    and multiplication goes through discrete log tables.
    """

    def __init__(self, p: int, k: int = 1):
        if not _is_prime(p):
            raise OracleError(f"characteristic {p} is not prime")
        self.p, self.k, self.q = p, k, p ** k
        if self.q > 2 ** 20:
            raise OracleError(f"field of size {self.q} is too large")
        powers = p ** np.arange(k)
        self.digits = (np.arange(self.q)[:, None] // powers) % p
        self._powers = powers
        self.modulus, self.exp = self._primitive()
        self.log = np.zeros(self.q, dtype=np.int64)
        self.log[self.exp] = np.arange(self.q - 1)

    def _primitive(self):
        p, k, q = self.p, self.k, self.q
        if k == 1:
            # smallest primitive root
            for g in range(1, p):
                seq = [1]
                for _ in range(p - 2):
                    seq.append(seq[-1] * g % p)
                if len(set(seq)) == p - 1:
                    return (g,), np.array(seq, dtype=np.int64)
        for tail in itertools.product(range(p), repeat=k):
            if tail[0] == 0:
                continue
            # x^k = -(tail[0] + tail[1] x + ...)
            red = [(-c) % p for c in tail]
            v = [1] + [0] * (k - 1)
            seen = []
            for _ in range(q - 1):
                seen.append(sum(c * p ** i for i, c in enumerate(v)))
                top = v[-1]
                v = [0] + v[:-1]
                v = [(v[i] + top * red[i]) % p for i in range(k)]
            if len(set(seen)) == q - 1:
                return tuple(tail), np.array(seen, dtype=np.int64)
        raise OracleError(f"no primitive polynomial of degree {k} over F_{p}")

    def from_digits(self, d):
        return (np.asarray(d) % self.p) @ self._powers

    def add(self, a, b):
        return self.from_digits(self.digits[a] + self.digits[b])

    def neg(self, a):
        return self.from_digits(-self.digits[a])

    def mul(self, a, b):
        a, b = np.asarray(a), np.asarray(b)
        out = self.exp[(self.log[a] + self.log[b]) % (self.q - 1)]
        return np.where((a == 0) | (b == 0), 0, out)

    def power(self, a, n: int):
        a = np.asarray(a)
        if n == 0:
            return np.ones_like(a)
        out = self.exp[(self.log[a] * n) % (self.q - 1)]
        return np.where(a == 0, 0, out)

    def inv(self, a):
        a = np.asarray(a)
        if np.any(a == 0):
            raise ZeroDivisionError("inverse of 0")
        return self.exp[(-self.log[a]) % (self.q - 1)]

    def frobenius(self, a, times: int = 1):
        return self.power(a, self.p ** times)

    def embed_prime(self, c):
        """Image of an integer mod p in the field."""
        return np.asarray(c) % self.p


def projective_points(F: FqField, n: int = 2) -> np.ndarray:
    """Points of P^n(F) in normalized form (first nonzero coordinate 1)."""
    rows = []
    for lead in range(n + 1):
        free = n - lead
        grid = np.array(list(itertools.product(range(F.q), repeat=free)), dtype=np.int64).reshape(F.q ** free, free)
        block = np.zeros((grid.shape[0], n + 1), dtype=np.int64)
        block[:, lead] = 1
        block[:, lead + 1:] = grid
        rows.append(block)
    return np.concatenate(rows)


def closed_point_reps(p: int, d: int) -> np.ndarray:
    """One representative of each Frobenius orbit of exact size d in P^2(F_{p^d})."""
    F = _field(p, d)
    pts = projective_points(F)
    code = (pts[:, 0] * F.q + pts[:, 1]) * F.q + pts[:, 2]
    # Frobenius keeps the normalized form
    size = np.zeros(len(pts), dtype=np.int64)
    best = code.copy()
    cur = pts
    for j in range(1, d + 1):
        cur = F.frobenius(cur)
        c = (cur[:, 0] * F.q + cur[:, 1]) * F.q + cur[:, 2]
        size = np.where((size == 0) & (c == code), j, size)
        best = np.minimum(best, c)
    keep = (size == d) & (best == code)
    return pts[keep]


@functools.lru_cache(maxsize=None)
def _field(p: int, k: int) -> FqField:
    return FqField(p, k)


# ---------------------------------------------------------------- quartics

@dataclass(frozen=True)
class LinearSystemSpec:
    """A linear system of plane quartics over a prime field.

    kind is one of full, proper, flex, proper-conjugate.  Points and the line
    are given by integer coordinates mod q; for proper-conjugate the pair of
    points is the zero set on the line of the irreducible binary quadric
    `quadric` = (a, b, c), meaning a s^2 + b s u + c u^2 in the parameters of
    the line spanned by `p` and `r`.
    """
    kind: str
    p: Tuple[int, int, int] = (1, 0, 0)
    r: Tuple[int, int, int] = (0, 1, 0)
    quadric: Optional[Tuple[int, int, int]] = None


@dataclass
class QuarticVec:
    coeffs: Tuple[int, ...]
    q: int

    def __post_init__(self):
        if len(self.coeffs) != 15:
            raise OracleError("a quartic has 15 coefficients")
        self.coeffs = tuple(int(c) % self.q for c in self.coeffs)

    @classmethod
    def from_terms(cls, terms: Dict[Tuple[int, int, int], int], q: int) -> "QuarticVec":
        return cls(tuple(terms.get(m, 0) for m in MONOMIALS), q)


def _binary_restriction(a: Sequence[int], b: Sequence[int], p: int) -> np.ndarray:
    """Matrix (5 x 15) taking quartic coefficients to those of f(s a + u b).

    Row j is the coefficient of s^(4-j) u^j.
    """
    out = np.zeros((5, 15), dtype=np.int64)
    for col, mon in enumerate(MONOMIALS):
        poly = np.zeros(1, dtype=np.int64)
        poly[0] = 1
        for var, e in enumerate(mon):
            lin = np.array([a[var], b[var]], dtype=np.int64)  # coefficients of s, u
            for _ in range(e):
                poly = np.convolve(poly, lin) % p
        out[:, col] = poly
    return out


def _nullspace_mod_p(A: np.ndarray, p: int) -> np.ndarray:
    A = A.copy() % p
    rows, cols = A.shape
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if A[i, c]), None)
        if piv is None:
            continue
        A[[r, piv]] = A[[piv, r]]
        A[r] = A[r] * pow(int(A[r, c]), -1, p) % p
        for i in range(rows):
            if i != r and A[i, c]:
                A[i] = (A[i] - A[i, c] * A[r]) % p
        pivots.append(c)
        r += 1
        if r == rows:
            break
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = np.zeros(cols, dtype=np.int64)
        v[f] = 1
        for i, c in enumerate(pivots):
            v[c] = (-A[i, f]) % p
        basis.append(v)
    return np.array(basis, dtype=np.int64).reshape(len(basis), cols)


def solve_system(spec: LinearSystemSpec, q: int) -> np.ndarray:
    """Basis (rows) of the subspace of quartics defined by `spec` over F_q, q prime."""
    if not _is_prime(q):
        raise OracleError("linear systems are only set up over prime fields")
    if spec.kind == "full":
        return np.eye(15, dtype=np.int64)
    a, b = np.array(spec.p) % q, np.array(spec.r) % q
    # a and b span a line exactly when the 2 x 3 matrix has rank 2 over F_q
    if _nullspace_mod_p(np.array([a, b]), q).shape[0] != 1:
        raise OracleError("the two points must be distinct points of P^2")
    R = _binary_restriction(a, b, q)
    if spec.kind == "flex":
        # contact of order 4 at p (u = 0): only s^0 u^4 may survive
        cond = R[:4]
    elif spec.kind == "proper":
        # double zeros at p (u = 0) and r (s = 0): only s^2 u^2 survives
        cond = R[[0, 1, 3, 4]]
    elif spec.kind == "proper-conjugate":
        if spec.quadric is None:
            raise OracleError("proper-conjugate needs the quadric of the point pair")
        g = np.array(spec.quadric, dtype=np.int64) % q
        if not _irreducible_binary_quadric(g, q):
            raise OracleError("the quadric must be irreducible over the base field")
        h = np.convolve(g, g) % q
        k = int(np.flatnonzero(h)[0])
        inv = pow(int(h[k]), -1, q)
        # functionals vanishing on h: e_j - (h_j / h_k) e_k
        cond = np.array([(R[j] - h[j] * inv * R[k]) % q for j in range(5) if j != k])
    else:
        raise OracleError(f"unknown linear system {spec.kind!r}")
    basis = _nullspace_mod_p(cond, q)
    if basis.shape[0] != 11:
        raise OracleError(f"degenerate position: solution space has dimension {basis.shape[0]}")
    return basis


def _irreducible_binary_quadric(g: np.ndarray, q: int) -> bool:
    a, b, c = (int(x) for x in g)
    if a == 0 or c == 0:
        return False
    return all((a * s * s + b * s + c) % q for s in range(q))


def default_spec(kind: str, q: int) -> LinearSystemSpec:
    """The standard position used by the CLI: t = {x2 = 0}, p = (1:0:0)."""
    if kind == "proper-conjugate":
        for a, b, c in itertools.product(range(1, q), range(q), range(1, q)):
            if _irreducible_binary_quadric(np.array([a, b, c]), q):
                return LinearSystemSpec(kind, quadric=(a, b, c))
    return LinearSystemSpec(kind)


@functools.lru_cache(maxsize=None)
def _eval_tables(p: int, d: int) -> Tuple[np.ndarray, int]:
    """Matrix (15, 4 * P * d): digits of f, df/dx0, df/dx1, df/dx2 at closed point reps.

    All four are F_p-linear in the coefficients of f, so evaluating a batch of
    quartics is one integer matrix product followed by reduction mod p.
    """
    F = _field(p, d)
    pts = closed_point_reps(p, d)
    P = len(pts)

    def mono(e):
        v = np.ones(P, dtype=np.int64)
        for var, k in enumerate(e):
            if k:
                v = F.mul(v, F.power(pts[:, var], k))
        return v

    cubic_vals = {c: mono(c) for c in CUBICS}
    K = np.zeros((15, 4, P, d), dtype=np.int64)
    for col, m in enumerate(MONOMIALS):
        K[col, 0] = F.digits[mono(m)]
        for var in range(3):
            e = m[var] % p
            if m[var] and e:
                lower = tuple(x - (i == var) for i, x in enumerate(m))
                K[col, 1 + var] = (e * F.digits[cubic_vals[lower]]) % p
    return K.reshape(15, 4 * P * d).astype(np.float64), P


def _singular_mask(C: np.ndarray, p: int, max_degree: int = MAX_SINGULAR_DEGREE) -> np.ndarray:
    """Boolean mask: which rows of C (coefficients mod p) define singular quartics."""
    C = np.asarray(C, dtype=np.int64) % p
    singular = ~C.any(axis=1)  # the zero polynomial is excluded as singular
    todo = np.flatnonzero(~singular)
    for d in range(1, max_degree + 1):
        if not len(todo):
            break
        K, P = _eval_tables(p, d)
        if P == 0:
            continue
        # keep each product below about 2e7 entries
        step = max(1, int(2e7 // K.shape[1]))
        found = np.zeros(len(todo), dtype=bool)
        for s in range(0, len(todo), step):
            rows = todo[s:s + step]
            vals = np.rint(C[rows].astype(np.float64) @ K).astype(np.int64) % p
            found[s:s + step] = (~vals.reshape(len(rows), 4, P, d).any(axis=(1, 3))).any(axis=1)
        singular[todo[found]] = True
        todo = todo[~found]
    return singular


def is_singular(f: QuarticVec, q: Optional[int] = None) -> bool:
    """True iff f = 0 has a singular point over the algebraic closure.

    A reduced quartic has at most six singular points, so some singular point
    has degree at most 6; a non-reduced one has a multiple component of degree
    at most 2, which has points of degree at most 2.  Searching closed points
    of degree up to 6 is therefore exact.  f and all three partials are
    tested, since in characteristic 2 the Euler relation says nothing.
    """
    q = q or f.q
    if not _is_prime(q):
        raise OracleError("singularity test is set up over prime fields")
    if not any(f.coeffs):
        raise OracleError("the zero polynomial has no curve")
    return bool(_singular_mask(np.array([f.coeffs]), q)[0])


def _subspace_elements(basis: np.ndarray, q: int, start: int, stop: int) -> np.ndarray:
    dim = basis.shape[0]
    idx = np.arange(start, stop, dtype=np.int64)
    coords = (idx[:, None] // (q ** np.arange(dim))) % q
    return (coords @ basis) % q


def _count_chunk(args) -> int:
    basis, q, start, stop = args
    C = _subspace_elements(basis, q, start, stop)
    return int((~_singular_mask(C, q)).sum())


CHUNK = 2048


def _work_estimate(n: int, q: int) -> float:
    cols = sum(4 * d * max(1, (q ** (2 * d) + q ** d + 1) // d) for d in range(1, MAX_SINGULAR_DEGREE + 1))
    return float(n) * 15 * cols


def count_nonsingular(spec: LinearSystemSpec, q: int, jobs: int = 1) -> int:
    """Number of elements of the linear system defining smooth quartics."""
    basis = solve_system(spec, q)
    total = q ** basis.shape[0]
    if _work_estimate(total, q) > BUDGET * max(1, jobs):
        raise OracleError(f"{total} quartics over F_{q} exceed the budget; try more --jobs")
    tasks = [(basis, q, s, min(s + CHUNK, total)) for s in range(0, total, CHUNK)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(_count_chunk, tasks))
    else:
        parts = [_count_chunk(t) for t in tasks]
    return sum(parts)


# ---------------------------------------------------------------- configurations

def _point_count(space: str, p: int, k: int) -> int:
    """Number of F_{p^k}-points of the space, by enumeration."""
    F = _field(p, k)
    if space.startswith("proj:"):
        n = int(space.split(":")[1])
        if F.q ** n > 10 ** 7:
            raise OracleError("projective space too large to enumerate")
        return len(projective_points(F, n))
    if space == "four-lines":
        pts = projective_points(F)
        s = F.add(F.add(pts[:, 0], pts[:, 1]), pts[:, 2])
        keep = (pts[:, 0] != 0) & (pts[:, 1] != 0) & (pts[:, 2] != 0) & (s != 0)
        return int(keep.sum())
    raise OracleError(f"unknown space {space!r}")


def _mobius(n: int) -> int:
    out, m, d = 1, n, 2
    while d * d <= m:
        if m % d == 0:
            m //= d
            if m % d == 0:
                return 0
            out = -out
        d += 1
    return -out if m > 1 else out


def closed_point_counts(space: str, q: int, up_to: int) -> List[int]:
    """a[d] = number of closed points of degree d, d = 1..up_to."""
    p, k = prime_power(q)
    N = {e: _point_count(space, p, k * e) for e in range(1, up_to + 1)}
    out = [0]
    for d in range(1, up_to + 1):
        s = sum(_mobius(d // e) * N[e] for e in range(1, d + 1) if d % e == 0)
        out.append(s // d)
    return out


def count_configurations(k: int, space: str, q: int, signed: bool = False) -> int:
    """Frobenius-stable unordered k-point configurations.

    A stable configuration is a set of closed points of total degree k.  In
    signed mode each counts with the sign of Frobenius on its points, and a
    closed point of degree d contributes a d-cycle.
    """
    a = closed_point_counts(space, q, k)
    poly = [1] + [0] * k
    for d in range(1, k + 1):
        sign = (-1) ** (d - 1) if signed else 1
        for _ in range(a[d]):
            for j in range(k, d - 1, -1):
                poly[j] += sign * poly[j - d]
    return poly[k]


# ---------------------------------------------------------------- predictions

@dataclass
class OracleResult:
    name: str
    q: int
    count: int
    predicted: int
    match: bool
    caveat: str = CAVEAT


def _replayed(name: str, output: str):
    from .scenario import data_path
    from .scenario.replay import replay_file
    rep = replay_file(data_path(name))
    vals = rep.value(output)
    if isinstance(vals, list):
        raise OracleError(f"{output} is not determined by {name}")
    return vals


def predict(name: str, q: int, signed: bool = False, conjugate: bool = False) -> int:
    from .confspace import bm, parse_space
    from .hgring import e_count, invariant_part, sign_part
    if name == "flex-count":
        return int(e_count(_replayed("flex.strata", "flex_fibre"), q, "coh_smooth", d=11))
    if name == "proper-count":
        fibre = _replayed("proper_bitangent.strata", "fibre")
        if conjugate:
            # Frobenius swaps the two points: trace of the swap
            fibre = invariant_part(fibre) - sign_part(fibre)
        return int(e_count(fibre, q, "coh_smooth", d=11))
    if name == "pairs-count":
        system = "sign-twisted" if signed else "constant"
        return int(e_count(bm(parse_space("(conf 2 (proj 2))"), system), q))
    if name == "four-lines-count":
        return int(e_count(_replayed("lemmas.strata", "u_all"), q))
    raise OracleError(f"unknown oracle {name!r}")


def observe(name: str, q: int, signed: bool = False, conjugate: bool = False, jobs: int = 1) -> int:
    if name == "flex-count":
        return count_nonsingular(default_spec("flex", q), q, jobs)
    if name == "proper-count":
        kind = "proper-conjugate" if conjugate else "proper"
        return count_nonsingular(default_spec(kind, q), q, jobs)
    if name == "pairs-count":
        return count_configurations(2, "proj:2", q, signed)
    if name == "four-lines-count":
        return count_configurations(1, "four-lines", q, signed)
    raise OracleError(f"unknown oracle {name!r}")


def run_oracle(name: str, q: int, signed: bool = False, conjugate: bool = False, jobs: int = 1) -> OracleResult:
    count = observe(name, q, signed, conjugate, jobs)
    predicted = predict(name, q, signed, conjugate)
    log.info("oracle %s q=%d: counted %d, predicted %d", name, q, count, predicted)
    return OracleResult(name, q, count, predicted, count == predicted)
