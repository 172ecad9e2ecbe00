import itertools
from math import factorial

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strata.symrep import (
    RepError,
    SpechtVector,
    character,
    character_table,
    conjugate,
    induce,
    isotypic_mult,
    kronecker,
    lr_product,
    pairs_permutation_rep,
    parse_partition,
    parse_specht,
    partitions,
    regular_rep,
    restrict,
    sign_twist,
    specht_dim,
    format_specht,
)


def s(*lam):
    return SpechtVector.irrep(lam)


def _cycle_type(perm):
    seen, out = set(), []
    for i in range(len(perm)):
        if i in seen:
            continue
        j, k = i, 0
        while j not in seen:
            seen.add(j)
            j = perm[j]
            k += 1
        out.append(k)
    return tuple(sorted(out, reverse=True))


def _standard_tableaux(lam):
    # brute force: fill cells with 1..n in every order, keep the standard ones
    cells = [(r, c) for r, row in enumerate(lam) for c in range(row)]
    count = 0
    for order in itertools.permutations(range(len(cells))):
        val = {cells[i]: v for i, v in enumerate(order)}
        if all(val[(r, c)] < val.get((r, c + 1), 99) and val[(r, c)] < val.get((r + 1, c), 99)
               for r, c in cells):
            count += 1
    return count


def test_dimensions_small():
    assert specht_dim((4,)) == 1
    assert specht_dim((1, 1)) == 1
    assert specht_dim((3, 1)) == 3


@pytest.mark.parametrize("lam", partitions(4) + partitions(5))
def test_dim_counts_standard_tableaux(lam):
    assert specht_dim(lam) == _standard_tableaux(lam)


@pytest.mark.parametrize("n", range(1, 7))
def test_sum_of_squared_dimensions(n):
    assert sum(specht_dim(lam) ** 2 for lam in partitions(n)) == factorial(n)


@pytest.mark.parametrize("n", range(1, 7))
def test_row_orthogonality(n):
    tab = character_table(n)
    for a in tab.irreps:
        for b in tab.irreps:
            assert tab.inner(tab.rows[a], tab.rows[b]) == (a == b)
    for lam in tab.irreps:
        assert tab.rows[lam][(1,) * n] == specht_dim(lam)


def test_character_values():
    assert all(character((5,), mu) == 1 for mu in partitions(5))
    assert character((1, 1, 1, 1), (2, 1, 1)) == -1


def test_character_22_against_permutation_matrices():
    # chi_{2,2} = (perm rep on 2-subsets) - (perm rep on points), read off fixed points
    for perm in itertools.permutations(range(4)):
        pairs = [frozenset(p) for p in itertools.combinations(range(4), 2)]
        fix2 = sum(frozenset(perm[i] for i in p) == p for p in pairs)
        fix1 = sum(perm[i] == i for i in range(4))
        assert character((2, 2), _cycle_type(perm)) == fix2 - fix1


def test_mismatched_sizes():
    with pytest.raises(RepError):
        character((3,), (2, 1, 1))
    with pytest.raises(RepError):
        kronecker(s(3), s(2, 2))


def test_kronecker_examples():
    assert kronecker(s(3, 1), s(4)) == s(3, 1)
    assert kronecker(s(3, 1), s(1, 1, 1, 1)) == s(2, 1, 1)
    sq = kronecker(s(3, 1), s(3, 1))
    assert sq == s(4) + s(3, 1) + s(2, 2) + s(2, 1, 1)
    assert sq.dim() == 9


def test_induction_examples():
    assert induce(SpechtVector.trivial(3), 4) == s(4) + s(3, 1)
    assert induce(s(2, 1), 4) == s(3, 1) + s(2, 2) + s(2, 1, 1)
    assert induce(SpechtVector.trivial(1), 2) == s(2) + s(1, 1)
    with pytest.raises(RepError):
        induce(s(3), 2)


@pytest.mark.parametrize("n", range(2, 7))
def test_induce_trivial_from_stabiliser(n):
    assert induce(SpechtVector.trivial(n - 1), n) == s(n) + s(n - 1, 1)


def test_induction_matches_littlewood_richardson():
    for lam in partitions(3):
        assert induce(SpechtVector.irrep(lam), 4) == lr_product(SpechtVector.irrep(lam), s(1))


def test_pairs_rep():
    assert pairs_permutation_rep(2) == s(2)
    assert pairs_permutation_rep(3) == s(3) + s(2, 1)
    four = pairs_permutation_rep(4)
    assert four.character()[(1, 1, 1, 1)] == 6
    assert four.character()[(2, 1, 1)] == 2
    assert four.character()[(2, 2)] == 2
    assert four == s(4) + s(3, 1) + s(2, 2)


def test_isotypic_multiplicities():
    assert isotypic_mult(s(4) + s(3, 1) + s(2, 2), (1, 1, 1, 1)) == 0
    assert isotypic_mult(regular_rep(4), (4,)) == 1
    assert isotypic_mult(induce(SpechtVector.trivial(1), 3), (2, 1)) == 2
    assert isotypic_mult(regular_rep(3), (2, 1)) == 2


def test_restrict_is_adjoint_to_induce():
    tab = character_table(4)
    for lam in partitions(3):
        for mu in partitions(4):
            left = isotypic_mult(induce(SpechtVector.irrep(lam), 4), mu)
            right = isotypic_mult(restrict(SpechtVector.irrep(mu), 3), lam)
            assert left == right
    assert tab.n == 4


def test_text_round_trip():
    v = 2 * s(3, 1) - s(2, 2)
    assert parse_specht(format_specht(v)) == v
    assert parse_partition("[3,1]") == (3, 1)


partitions_upto6 = st.integers(1, 6).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(st.sampled_from(partitions(n)), min_size=1, max_size=3)))


def _vec(n, lams):
    out = SpechtVector(n)
    for lam in lams:
        out = out + SpechtVector.irrep(lam)
    return out


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5).flatmap(lambda n: st.tuples(*(st.lists(st.sampled_from(partitions(n)), min_size=1,
                                                                 max_size=3) for _ in range(3)))
                                  .map(lambda t, n=n: (n, t))))
def test_kronecker_commutative_associative(data):
    n, (la, lb, lc) = data
    a, b, c = _vec(n, la), _vec(n, lb), _vec(n, lc)
    assert kronecker(a, b) == kronecker(b, a)
    assert kronecker(kronecker(a, b), c) == kronecker(a, kronecker(b, c))
    assert kronecker(a, SpechtVector.trivial(n)) == a


@settings(max_examples=60, deadline=None)
@given(partitions_upto6)
def test_sign_twist_involution(data):
    n, lams = data
    v = _vec(n, lams)
    assert sign_twist(sign_twist(v)) == v
    lam = lams[0]
    assert sign_twist(SpechtVector.irrep(lam)) == SpechtVector.irrep(conjugate(lam))
