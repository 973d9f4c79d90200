import json

import pytest
from hypothesis import given, settings, strategies as st

from khconc import catalog
from khconc.cobordism import Movie, MoveError, NormalFormError, kh_map_of_matrix, load_movie
from khconc.concordance import (CERTIFIED, NOT_OBSTRUCTED, OBSTRUCTED, UNDETERMINED, KMData,
                                ObstructionReport, ReplayError, dominance_check, iso_report,
                                self_concordance_iso, t45_replay)
from khconc.diagram import PlanarDiagram
from khconc.exactalg import BigradedDims

U = PlanarDiagram.unknot()


def _trefoil_km(candidates, published=None, einf_iso=True):
    obj = {"version": 1,
           "e2": [{"i": 0, "j": 2, "dim": 1}, {"i": 2, "j": 6, "dim": 1},
                  {"i": 3, "j": 8, "dim": 1}],
           "constraints": {"count": 1, "rank": 1, "candidates": candidates, "einf_total": 1},
           "einf_map_is_isomorphism": einf_iso}
    if published is not None:
        obj["exceptional_published"] = {"grading": "(i, j-i)", "bigradings": published}
    return KMData.from_json_obj(obj)


# -- dominance ----------------------------------------------------------------

def test_dominance_self(trefoil):
    r = dominance_check(trefoil, trefoil)
    assert r.verdict == NOT_OBSTRUCTED and r.exit_code == 0
    assert any("does not prove" in line for line in r.narrative)


def test_dominance_unknot_under_trefoil(trefoil):
    # Kh(unknot) sits at (0,0), which the trefoil lacks; s also differs
    r = dominance_check(U, trefoil)
    assert r.verdict == OBSTRUCTED and r.exit_code == 3
    assert {"i": 0, "j": 0, "dim0": 1, "dim1": 0} in r.witnesses
    assert {"invariant": "s", "s0": 0, "s1": 2} in r.witnesses


def test_dominance_figure_eight_over_unknot(fig8):
    # dimensions fit and s agrees: nothing to obstruct
    assert dominance_check(U, fig8).verdict == NOT_OBSTRUCTED
    r = dominance_check(fig8, U)
    assert r.verdict == OBSTRUCTED
    assert all("invariant" not in w for w in r.witnesses)


STARTS = ["unknot", "trefoil", "left-trefoil", "figure-eight", "T(2,5)"]


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(STARTS), st.sampled_from(STARTS), st.sampled_from(STARTS))
def test_dominance_transitive(a, b, c):
    ka, kb, kc = (catalog.lookup(x) for x in (a, b, c))
    if (dominance_check(ka, kb).verdict == NOT_OBSTRUCTED
            and dominance_check(kb, kc).verdict == NOT_OBSTRUCTED):
        assert dominance_check(ka, kc).verdict == NOT_OBSTRUCTED


def test_report_json_is_sorted(trefoil):
    text = dominance_check(U, trefoil).to_json()
    obj = json.loads(text)
    assert list(obj) == sorted(obj)
    assert obj["verdict"] == OBSTRUCTED


def test_report_rejects_unknown_verdict():
    with pytest.raises(ValueError):
        ObstructionReport("maybe", [], [])


# -- self-concordance maps ----------------------------------------------------

def test_unknot_annulus_is_isomorphism(fixtures_dir):
    m = load_movie(fixtures_dir / "unknot_bssd.mov", catalog.resolve)
    r = self_concordance_iso(m)
    assert r.verdict == CERTIFIED
    assert r.witnesses == [{"i": 0, "j": 0, "dim": 1, "rank": 1}]


def test_identity_trefoil(fixtures_dir):
    m = load_movie(fixtures_dir / "identity_trefoil.mov", catalog.resolve)
    assert self_concordance_iso(m).verdict == CERTIFIED


def test_self_concordance_needs_closed_movie(trefoil):
    with pytest.raises(MoveError):
        self_concordance_iso(Movie(trefoil, ("R1 2",)))


def test_synthetic_rank_deficit():
    bg = [(0, 2), (2, 6), (3, 8)]
    km = kh_map_of_matrix(bg, bg, [{0: 1}, {}, {2: -1}])
    r = iso_report(km)
    assert r.verdict == UNDETERMINED
    assert r.witnesses == [{"i": 2, "j": 6, "dim": 1, "rank": 0}]
    assert iso_report(kh_map_of_matrix(bg, bg, [{0: 1}, {1: 2}, {2: -1}])).verdict == CERTIFIED


def test_synthetic_wrong_bidegree():
    km = kh_map_of_matrix([(0, 0)], [(0, 0)], [{0: 1}], (0, 2))
    assert iso_report(km).verdict == UNDETERMINED


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(-2, 2), min_size=4, max_size=4))
def test_two_dim_block_iso_iff_invertible(entries):
    a, b, c, d = entries
    bg = [(0, 0), (0, 0)]
    km = kh_map_of_matrix(bg, bg, [{0: a, 1: c}, {0: b, 1: d}])
    want = CERTIFIED if a * d - b * c != 0 else UNDETERMINED
    assert iso_report(km, BigradedDims({(0, 0): 2})).verdict == want


# -- replay plumbing --------------------------------------------------------------

def test_replay_checks_normal_form_first(t45):
    # a tiny budget would fail any homology computation; normal form fails first
    m = Movie(t45, ("BIRTH", "SADDLE 4 31", "SADDLE 4 31", "DEATH 31", "BIRTH"))
    with pytest.raises(NormalFormError):
        t45_replay(m, budget=1)


def test_replay_rejects_other_knots(trefoil):
    with pytest.raises(ReplayError):
        t45_replay(Movie(trefoil))


def test_replay_with_trefoil_data_is_undetermined(trefoil):
    # the only candidate pairs the two Lee-paired classes: nothing is settled
    km = _trefoil_km([[[2, 6], [3, 8]]], published=[[2, 4], [3, 5]])
    r = t45_replay(Movie(trefoil), km)
    assert r.verdict == UNDETERMINED
    assert any("match the published" in line for line in r.narrative)
    assert {"i": 2, "j": 6} in r.witnesses


def test_replay_reports_published_mismatch(trefoil):
    km = _trefoil_km([[[0, 2], [3, 8]]], published=[[0, 2], [3, 8]])
    r = t45_replay(Movie(trefoil), km)
    assert any("differs from the derived one" in line for line in r.narrative)


def test_replay_without_instanton_iso(trefoil):
    km = _trefoil_km([[[2, 6], [3, 8]]], einf_iso=False)
    assert t45_replay(Movie(trefoil), km).verdict == UNDETERMINED


def test_bundled_km_data():
    km = KMData.load()
    assert km.e2 == catalog.T45_TABLE
    assert (km.count, km.rank, km.einf_total) == (1, 1, 7)
    assert len(km.candidates) == 2
    assert km.published_grading == "(i, j-i)"
