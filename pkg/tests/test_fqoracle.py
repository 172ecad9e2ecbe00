import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strata.fqoracle import (MONOMIALS, FqField, LinearSystemSpec, OracleError, QuarticVec,
                             closed_point_counts, closed_point_reps, count_configurations,
                             count_nonsingular, default_spec, is_singular, predict, prime_power,
                             projective_points, run_oracle, solve_system, _singular_mask)

sp = pytest.importorskip("sympy")
X, Y, Z = sp.symbols("x y z")


def quartic(expr, q):
    poly = sp.Poly(sp.expand(expr), X, Y, Z)
    return QuarticVec.from_terms({m: int(c) for m, c in zip(poly.monoms(), poly.coeffs())}, q)


# ---------------------------------------------------------------- fields

@pytest.mark.parametrize("q", [2, 3, 4, 5, 8, 9, 16, 25, 27])
def test_field_axioms(q):
    p, k = prime_power(q)
    F = FqField(p, k)
    a = np.arange(q)
    A, B = np.meshgrid(a, a)
    assert (F.add(A, B) == F.add(B, A)).all()
    assert (F.mul(A, B) == F.mul(B, A)).all()
    assert (F.add(a, F.neg(a)) == 0).all()
    nz = a[1:]
    assert (F.mul(nz, F.inv(nz)) == 1).all()
    # distributivity on a sample of triples
    rng = np.random.default_rng(q)
    x, y, z = rng.integers(0, q, (3, 200))
    assert (F.mul(x, F.add(y, z)) == F.add(F.mul(x, y), F.mul(x, z))).all()
    assert (F.power(nz, q - 1) == 1).all()
    # Frobenius is additive and has order k
    assert (F.frobenius(F.add(x, y)) == F.add(F.frobenius(x), F.frobenius(y))).all()
    assert (F.frobenius(a, k) == a).all()


def test_prime_power():
    assert prime_power(2) == (2, 1)
    assert prime_power(81) == (3, 4)
    for bad in (1, 6, 12, 100):
        with pytest.raises(OracleError):
            prime_power(bad)


@pytest.mark.parametrize("q", [2, 3, 4, 5])
def test_projective_points(q):
    p, k = prime_power(q)
    pts = projective_points(FqField(p, k), 2)
    assert len(pts) == q * q + q + 1
    assert len({tuple(r) for r in pts}) == len(pts)


@pytest.mark.parametrize("p,d", [(2, 1), (2, 2), (2, 3), (3, 2), (2, 4)])
def test_closed_point_reps_count(p, d):
    # closed points of degree d on P^2 by Moebius inversion of p^(2e) + p^e + 1
    assert len(closed_point_reps(p, d)) == closed_point_counts("proj:2", p, d)[d]


# ---------------------------------------------------------------- linear systems

def test_solve_system_dimensions():
    assert solve_system(default_spec("flex", 2), 2).shape == (11, 15)
    assert solve_system(LinearSystemSpec("proper", (1, 0, 0), (0, 1, 0)), 3).shape == (11, 15)
    assert solve_system(LinearSystemSpec("full"), 5).shape == (15, 15)
    assert solve_system(default_spec("proper-conjugate", 3), 3).shape == (11, 15)


def test_solve_system_conditions_hold():
    # every basis element of the flex system meets x2 = 0 only at (1:0:0), to order 4
    basis = solve_system(default_spec("flex", 3), 3)
    for row in basis:
        on_line = {m: c for m, c in zip(MONOMIALS, row) if m[2] == 0 and c}
        assert set(on_line) <= {(0, 4, 0)}


def test_solve_system_errors():
    with pytest.raises(OracleError, match="distinct"):
        solve_system(LinearSystemSpec("flex", (1, 0, 0), (2, 0, 0)), 3)
    with pytest.raises(OracleError, match="prime"):
        solve_system(default_spec("flex", 4), 4)
    with pytest.raises(OracleError, match="irreducible"):
        solve_system(LinearSystemSpec("proper-conjugate", quadric=(1, 0, 2)), 3)
    with pytest.raises(OracleError):
        solve_system(LinearSystemSpec("bogus"), 2)


# ---------------------------------------------------------------- singularity

def test_is_singular_examples():
    assert is_singular(quartic(X**2 * Y**2, 3))
    assert not is_singular(quartic(X**4 + Y**4 + Z**4, 3))
    assert is_singular(quartic(X * Y * Z * (X + Y + Z), 3))
    assert is_singular(quartic(X * Y * Z * (X + Y + Z), 2))
    # Fermat quartic in characteristic 2 is a fourth power
    assert is_singular(quartic(X**4 + Y**4 + Z**4, 2))
    # Klein quartic is smooth away from characteristic 7
    assert not is_singular(quartic(X**3 * Y + Y**3 * Z + Z**3 * X, 2))
    assert not is_singular(quartic(X**3 * Y + Y**3 * Z + Z**3 * X, 3))
    with pytest.raises(OracleError):
        is_singular(QuarticVec((0,) * 15, 2))


def test_singular_point_off_the_base_field():
    # a node at the conjugate pair of points where x^2 + x z + z^2 = 0, y = 0 (over F_2)
    g = X**2 + X * Z + Z**2
    f = quartic(g**2 + Y**2 * (X**2 + Y**2 + Z**2 + X * Y), 2)
    assert is_singular(f)


def _reference_singular(coeffs, p):
    """Exact test over the algebraic closure: Groebner bases of f and its partials in each chart."""
    f = sum(c * X**a * Y**b * Z**e for c, (a, b, e) in zip(coeffs, MONOMIALS))
    polys = [f, sp.diff(f, X), sp.diff(f, Y), sp.diff(f, Z)]
    for v, rest in ((X, (Y, Z)), (Y, (X, Z)), (Z, (X, Y))):
        chart = [sp.expand(g.subs(v, 1)) for g in polys]
        chart = [g for g in chart if not sp.Poly(g, *rest, modulus=p).is_zero]
        if not chart:
            return True
        if list(sp.groebner(chart, *rest, modulus=p, order="grevlex").exprs) != [1]:
            return True
    return False


def _compare_with_reference(p, n, seed):
    rng = random.Random(seed)
    C = [tuple(rng.randrange(p) for _ in range(15)) for _ in range(n)]
    C = [c for c in C if any(c)]
    fast = _singular_mask(np.array(C), p)
    for c, got in zip(C, fast):
        assert bool(got) == _reference_singular(c, p), c


@pytest.mark.parametrize("p", [2, 3])
def test_is_singular_matches_reference_sample(p):
    _compare_with_reference(p, 150, seed=p)


@pytest.mark.slow
@pytest.mark.parametrize("p", [2, 3])
def test_is_singular_matches_reference_10000(p):
    _compare_with_reference(p, 10000, seed=100 + p)


def _substitution_matrix(g, p):
    """15 x 15 matrix sending coefficients of f to those of f(g . (x, y, z))."""
    lin = [sum(int(g[i][j]) * v for j, v in enumerate((X, Y, Z))) for i in range(3)]
    cols = []
    for a, b, e in MONOMIALS:
        poly = sp.Poly(sp.expand(lin[0]**a * lin[1]**b * lin[2]**e), X, Y, Z)
        d = dict(zip(poly.monoms(), poly.coeffs()))
        cols.append([int(d.get(m, 0)) % p for m in MONOMIALS])
    return np.array(cols, dtype=np.int64)


def test_full_count_invariant_under_gl3_f2():
    p = 2
    C = np.array(list(itertools.product(range(p), repeat=15)), dtype=np.int64)
    base = _singular_mask(C, p)
    assert int((~base).sum()) == count_nonsingular(LinearSystemSpec("full"), p)
    rng = np.random.default_rng(7)
    done = 0
    while done < 2:
        g = rng.integers(0, p, (3, 3))
        if round(np.linalg.det(g)) % p == 0:
            continue
        moved = (C @ _substitution_matrix(g, p)) % p
        # f is smooth exactly when f o g is
        assert (_singular_mask(moved, p) == base).all()
        done += 1


# ---------------------------------------------------------------- counts

def test_zero_polynomial_excluded():
    spec = default_spec("flex", 2)
    basis = solve_system(spec, 2)
    assert _singular_mask(np.zeros((1, 15), dtype=np.int64), 2)[0]
    assert count_nonsingular(spec, 2) < 2 ** basis.shape[0]


def test_flex_count_f2():
    assert count_nonsingular(default_spec("flex", 2), 2) == 256
    assert predict("flex-count", 2) == 256


def test_proper_count_f2_matches_prediction():
    res = run_oracle("proper-count", 2)
    assert res.match, res
    res = run_oracle("proper-count", 2, conjugate=True)
    assert res.match, res


@pytest.mark.parametrize("spec", [LinearSystemSpec("flex", (0, 1, 1), (1, 0, 0)),
                                  LinearSystemSpec("proper", (1, 1, 0), (0, 0, 1)),
                                  LinearSystemSpec("proper", (1, 0, 1), (0, 1, 1))])
def test_counts_do_not_depend_on_position(spec):
    assert count_nonsingular(spec, 2) == count_nonsingular(default_spec(spec.kind, 2), 2)


def test_jobs_independence():
    spec = default_spec("flex", 2)
    assert count_nonsingular(spec, 2, jobs=1) == count_nonsingular(spec, 2, jobs=3)
    assert count_nonsingular(spec, 2, jobs=1) == count_nonsingular(spec, 2, jobs=1)


def test_budget_refuses_large_counts():
    with pytest.raises(OracleError, match="--jobs"):
        count_nonsingular(default_spec("flex", 3), 3, jobs=1)
    with pytest.raises(OracleError):
        count_nonsingular(LinearSystemSpec("full"), 5)


@pytest.mark.parametrize("q", [2, 3, 4, 5])
def test_configuration_counts_closed_forms(q):
    assert count_configurations(2, "proj:2", q) == q**4 + q**3 + q**2
    assert count_configurations(2, "proj:2", q, signed=True) == q**3 + q**2 + q
    assert count_configurations(1, "four-lines", q) == q**2 - 3 * q + 3
    for signed in (False, True):
        assert run_oracle("pairs-count", q, signed=signed).match
    assert run_oracle("four-lines-count", q).match


@pytest.mark.parametrize("q", [2, 3, 4, 5])
def test_pairs_by_brute_force(q):
    # count Frobenius-stable 2-subsets of P^2(F_{q^2}) directly
    p, k = prime_power(q)
    F = FqField(p, 2 * k)
    pts = [tuple(r) for r in projective_points(F, 2)]
    index = {r: i for i, r in enumerate(pts)}

    def frob(r):
        v = F.frobenius(np.array(r), k)
        # renormalize: first nonzero coordinate 1
        lead = next(c for c in v if c)
        return tuple(int(c) for c in F.mul(v, F.inv(np.full(3, lead))))
    image = [index[frob(r)] for r in pts]
    rational = sum(1 for i, j in enumerate(image) if i == j)
    swapped = sum(1 for i, j in enumerate(image) if i != j) // 2
    assert rational * (rational - 1) // 2 + swapped == count_configurations(2, "proj:2", q)
    assert rational * (rational - 1) // 2 - swapped == count_configurations(2, "proj:2", q, signed=True)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([2, 3, 4, 5, 7]), st.integers(1, 4))
def test_configuration_count_deterministic(q, k):
    assert count_configurations(k, "proj:1", q) == count_configurations(k, "proj:1", q)
    # a single point is a rational point of the line
    if k == 1:
        assert count_configurations(1, "proj:1", q) == q + 1


def test_unknown_oracle():
    with pytest.raises(OracleError):
        predict("nope", 2)
