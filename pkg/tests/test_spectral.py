import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strata.confspace import bm_constants
from strata.hgring import HGPoly, parse_poly, poincare_dual
from strata.scenario import data_path
from strata.spectral import (
    COHOMOLOGICAL,
    HOMOLOGICAL,
    SpectralError,
    SpectralGrid,
    add_unit,
    alexander_dual,
    alexander_inverse,
    assemble_abutment,
    diff_grids,
    format_grid,
    grid_from_json,
    grid_to_json,
    leray_e2,
    parse_grid,
    purity_check,
    rank_search,
)

P = parse_poly
C = bm_constants()
FLAG = P("1 + 2t^2 L + 2t^4 L^2 + t^6 L^3")


def grid_file(name):
    with open(data_path(name), encoding="utf-8") as fh:
        return parse_grid(fh.read())


def test_leray_cells():
    g = leray_e2(FLAG, P("(1 + tL)^3"))
    assert g.cell(2, 1) == P("6 t^3 L^2")
    assert g.cell(0, 3) == P("t^3 L^3")
    assert leray_e2(FLAG, HGPoly.one()).cell(4, 0) == P("2 t^4 L^2")
    assert leray_e2(HGPoly.one(), P("1 + 3tL")).cell(0, 1) == P("3tL")


def test_flex_leray_search_is_unique():
    g = leray_e2(FLAG, P("(1 + tL)^3"))
    sols = rank_search(g, C["coh_gl3"], max_page=2)
    assert len(sols) == 1
    assert sols[0].quotient == HGPoly.one()
    assert diff_grids(sols[0].grid, grid_file("flex_leray_e3.grid")) == []


def test_flex_leray_e2_rows_one_to_three_match_printed_table():
    g = leray_e2(FLAG, P("(1 + tL)^3"))
    printed = grid_file("flex_leray_e2.grid")
    for (p, q), cell in printed.entries.items():
        if q >= 1:
            assert g.cell(p, q) == cell


def test_purity_synthetic():
    forced = SpectralGrid({(1, 0): P("t L^-1"), (0, 0): P("1")})
    assert purity_check(forced)[0]
    open_ = SpectralGrid({(1, 0): P("t"), (0, 0): P("1")})
    ok, arrows = purity_check(open_)
    assert not ok and arrows
    assert purity_check(SpectralGrid())[0]


def test_nonrigid_f_grid_degenerates():
    assert purity_check(grid_file("nonrigid_e1_f.grid"))[0]


def test_alexander_examples():
    flex_sum = P("3t^20 L^-10 + 3t^19 L^-9 + t^18 L^-8")
    red = alexander_dual(flex_sum, 11)
    assert red == P("3tL + 3t^2 L^2 + t^3 L^3")
    assert add_unit(red) == P("(1 + tL)^3")
    assert add_unit(alexander_dual(HGPoly.zero(), 11)) == HGPoly.one()
    with pytest.raises(SpectralError):
        alexander_dual(P("t^30"), 11)


def test_poincare_examples():
    assert poincare_dual(C["coh_gl3"], 9) == C["bm_gl3"]
    assert poincare_dual(HGPoly.one(), 0) == HGPoly.one()
    assert poincare_dual(P("t^5 L^5 + 2t^6 L^6"), 15) == P("t^25 L^-10 + 2t^24 L^-9")


def test_abutment():
    g = SpectralGrid({(0, 0): P("1"), (2, 1): P("2t^3 L")}, orientation=COHOMOLOGICAL)
    assert assemble_abutment(g, check=False) == P("1 + 2t^3 L")
    assert assemble_abutment(SpectralGrid({(3, 2): P("t^5")})) == P("t^5")


def test_cells_must_have_their_total_degree():
    with pytest.raises(SpectralError):
        SpectralGrid({(1, 1): P("t^3")})


def test_grid_text_and_json_round_trip():
    g = grid_file("nonrigid_e1_f.grid")
    assert parse_grid(format_grid(g)) == g
    assert grid_from_json(grid_to_json(g)) == g


def test_diff_reports_cells():
    a = SpectralGrid({(0, 0): P("1")})
    b = SpectralGrid({(0, 0): P("2")})
    assert diff_grids(a, b) and not diff_grids(a, a)


small = st.dictionaries(st.tuples(st.integers(0, 6), st.integers(-4, 0)), st.integers(1, 3), max_size=4).map(
    lambda d: HGPoly({(i, w, None): c for (i, w), c in d.items()}))


@settings(max_examples=60, deadline=None)
@given(small, st.integers(4, 9))
def test_alexander_preserves_dimension_and_inverts(p, m):
    out = alexander_dual(p, m)
    assert out.total_dim() == p.total_dim()
    assert alexander_inverse(out, m) == p


@settings(max_examples=60, deadline=None)
@given(small, st.integers(0, 8))
def test_poincare_involution(p, d):
    assert poincare_dual(poincare_dual(p, d, "coh->bm"), d, "bm->coh") == p


@settings(max_examples=30, deadline=None)
@given(small, small)
def test_rank_search_with_unit_divisor_keeps_zero_assignment(a, b):
    g = leray_e2(a.map_terms(lambda i, w: (i, -w)), b.map_terms(lambda i, w: (i, -w)))
    # the zero assignment survives only when weights already rule out every arrow
    if g.is_empty() or not purity_check(g)[0]:
        return
    sols = rank_search(g, HGPoly.one(), max_page=2)
    assert any(not s.grid.ranks for s in sols)


@settings(max_examples=40, deadline=None)
@given(st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 3)), st.integers(-3, 3), max_size=5))
def test_purity_never_forces_equal_weight_arrows(cells):
    # every cell has weight 0, so any geometrically possible arrow must stay open
    entries = {(u, v): HGPoly({(u + v, 0, None): abs(c) + 1}) for (u, v), c in cells.items()}
    g = SpectralGrid(entries, orientation=HOMOLOGICAL)
    ok, arrows = purity_check(g, max_page=4)
    expected = any((u - r, v + r - 1) in entries for (u, v) in entries for r in range(1, 5))
    assert ok == (not expected)


def test_pure_grid_keeps_only_zero_assignment():
    g = leray_e2(P("1 + t^2 L^-1"), P("1 + t^2 L^-1"))
    assert purity_check(g)[0]
    sols = rank_search(g, HGPoly.one(), max_page=2)
    assert [bool(s.grid.ranks) for s in sols] == [False]
