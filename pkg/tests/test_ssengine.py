import itertools
import json

import pytest
from hypothesis import given, settings, strategies as st

from khconc import catalog
from khconc.cobordism import Movie
from khconc.exactalg import BigradedDims
from khconc.lee import lee_pages, lee_reduction
from khconc.ssengine import (CollapseConstraints, SpectralSequenceError, SqueezeInstance,
                             check_filtered_chain_map, enumerate_collapses,
                             enumerate_from_constraints, identity_map, lee_morphism,
                             ss_morphism_ranks, squeeze_check, zero_map)

T45 = catalog.T45_TABLE
LEE_ARROWS = [((2, 16), (3, 18), 1), ((4, 18), (5, 22), 1),
              ((6, 20), (7, 24), 1), ((8, 24), (9, 26), 1)]
EXCEPTIONAL = {(2, 16), (4, 18), (9, 26)}
CANDIDATES = [((2, 16), (9, 26)), ((4, 18), (9, 26))]

# frozen from the independent count below
UNRESTRICTED_COUNT = 36


def _brute_force_count(e2, einf_total):
    # one rank-1 arrow between distinct 1-dim bigradings, i strictly increasing
    keys = list(e2)
    n = 0
    for a in keys:
        for b in keys:
            if b[0] > a[0] and e2[a] >= 1 and e2[b] >= 1 and sum(e2.values()) - 2 == einf_total:
                n += 1
    return n


# -- collapse enumeration -------------------------------------------------------

def test_t45_collapses_with_candidates():
    pats = enumerate_collapses(T45, 1, 1, CANDIDATES, einf_total=7)
    assert len(pats) == 2
    assert {p.differentials[0][:2] for p in pats} == set(CANDIDATES)
    for p in pats:
        assert p.einf.total == 7
        assert (9, 26) not in p.einf


def test_t45_unrestricted_count():
    assert _brute_force_count(dict(T45), 7) == UNRESTRICTED_COUNT
    assert len(enumerate_collapses(T45, 1, einf_total=7)) == UNRESTRICTED_COUNT


def test_zero_differentials():
    pats = enumerate_collapses({(0, 0): 1}, 0)
    assert len(pats) == 1 and pats[0].einf == BigradedDims({(0, 0): 1})


def test_rank_cannot_exceed_dimension():
    assert enumerate_collapses({(0, 0): 1, (1, 2): 1}, 1, rank=2) == []
    assert len(enumerate_collapses({(0, 0): 2, (1, 2): 2}, 1, rank=2)) == 1


def test_allowed_bidegrees():
    pats = enumerate_collapses(T45, 1, allowed_bidegrees=[(1, 2)])
    assert [p.differentials[0][:2] for p in pats] == [((2, 16), (3, 18)), ((8, 24), (9, 26))]


def test_bad_candidates():
    with pytest.raises(SpectralSequenceError):
        enumerate_collapses(T45, 1, candidates=[((1, 1), (2, 2))])
    with pytest.raises(SpectralSequenceError):
        enumerate_collapses(T45, -1)


def test_constraints_json(fixtures_dir):
    c = CollapseConstraints.from_json((fixtures_dir / "km_constraints.json").read_text())
    assert len(enumerate_from_constraints(T45, c)) == 2
    c = CollapseConstraints.from_json((fixtures_dir / "km_unrestricted.json").read_text())
    assert c.candidates is None
    assert len(enumerate_from_constraints(T45, c)) == UNRESTRICTED_COUNT
    obj = enumerate_from_constraints(T45, c)[0].to_json_obj()
    assert json.loads(json.dumps(obj)) == obj


tables = st.dictionaries(st.tuples(st.integers(0, 4), st.integers(0, 3).map(lambda x: 2 * x)),
                         st.integers(1, 2), min_size=1, max_size=6)


@settings(max_examples=80, deadline=None)
@given(tables, st.integers(0, 2))
def test_collapse_count_matches_itertools(e2, count):
    pats = enumerate_collapses(e2, count)
    pairs = [(a, b) for a in e2 for b in e2 if b[0] > a[0]]
    want = 0
    for combo in itertools.combinations(pairs, count):
        use = {}
        for a, b in combo:
            use[a] = use.get(a, 0) + 1
            use[b] = use.get(b, 0) + 1
        want += all(use[k] <= e2[k] for k in use)
    assert len(pats) == want
    for p in pats:
        assert p.einf.total == sum(e2.values()) - 2 * count


# -- squeeze ------------------------------------------------------------------

def t45_instance(pairings=LEE_ARROWS, iso=None):
    iso = set(T45.support()) - EXCEPTIONAL if iso is None else iso
    return SqueezeInstance(T45, T45, iso, list(pairings), survivor=(0, 12))


def test_t45_squeeze_isomorphism():
    v = squeeze_check(t45_instance())
    assert v.verdict == "isomorphism"
    assert v.stuck == []
    assert set(v.justification) == set(T45.support())


@pytest.mark.parametrize("drop,stuck", [
    (0, [(2, 16)]), (1, [(4, 18)]), (2, [(6, 20), (7, 24)]), (3, [(9, 26)])])
def test_t45_squeeze_missing_pairing(drop, stuck):
    pairings = [p for k, p in enumerate(LEE_ARROWS) if k != drop]
    v = squeeze_check(t45_instance(pairings))
    assert v.verdict == "undetermined"
    assert v.stuck == stuck


def test_squeeze_with_ranks():
    full = {b: 1 for b in T45.support()}
    inst = t45_instance()
    inst.ranks = full
    assert squeeze_check(inst).consistent is True
    inst.ranks = full | {(9, 26): 0}
    assert squeeze_check(inst).consistent is False


def test_squeeze_validation():
    with pytest.raises(SpectralSequenceError):
        squeeze_check(t45_instance([((2, 16), (4, 18), 1)]))
    with pytest.raises(SpectralSequenceError):
        squeeze_check(SqueezeInstance(T45, BigradedDims({(0, 12): 1}), set(), []))
    with pytest.raises(SpectralSequenceError):
        squeeze_check(t45_instance(iso={(1, 1)}))


subsets = st.sets(st.sampled_from(sorted(T45.support())))


@settings(max_examples=60, deadline=None)
@given(subsets, subsets, st.sets(st.integers(0, 3)))
def test_squeeze_monotone_in_iso_locus(a, extra, keep):
    pairings = [p for k, p in enumerate(LEE_ARROWS) if k in keep]
    small = squeeze_check(t45_instance(pairings, a))
    big = squeeze_check(t45_instance(pairings, a | extra))
    if small.verdict == "isomorphism":
        assert big.verdict == "isomorphism"
    assert not (set(big.stuck) & (a | extra))


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 3), st.sets(st.sampled_from([(0, 0), (1, 2), (2, 4)])))
def test_squeeze_never_settles_big_spaces(d, iso):
    dims = BigradedDims({(0, 0): 1, (1, 2): d, (2, 4): 1})
    inst = SqueezeInstance(dims, dims, iso, [((0, 0), (1, 2), 1), ((1, 2), (2, 4), 1)],
                           einf_total=d - 1)
    v = squeeze_check(inst)
    if (1, 2) not in iso:
        assert v.verdict == "undetermined" and (1, 2) in v.stuck


# -- page morphisms --------------------------------------------------------------

def test_identity_induces_identity_on_pages(trefoil):
    c = lee_reduction(trefoil, record=True).complex
    pm = ss_morphism_ranks(identity_map(c), c, c)
    pages = lee_pages(trefoil)
    assert [p.r for p in pm] == [p.r for p in pages]
    for m, p in zip(pm, pages):
        assert {k: v for k, v in m.ranks.items() if v} == dict(p.dims)


def test_zero_map(trefoil):
    c = lee_reduction(trefoil, record=True).complex
    assert all(m.total == 0 for m in ss_morphism_ranks(zero_map(c), c, c))


def test_reidemeister_movie_is_page_isomorphism(trefoil):
    f, a, b, shift = lee_morphism(Movie(trefoil, ("R1 2", "R2 1 4")))
    assert shift == 0
    pm = ss_morphism_ranks(f, a, b, shift)
    for m, p in zip(pm, lee_pages(trefoil)):
        assert {k: v for k, v in m.ranks.items() if v} == dict(p.dims)


def test_non_chain_map_rejected(trefoil):
    c = lee_reduction(trefoil, record=True).complex
    bad = {0: {c.size - 1: 1}} if c.igr[0] != c.igr[-1] else {0: {0: 2, 1: 1}}
    with pytest.raises(SpectralSequenceError):
        check_filtered_chain_map(bad, c, c)
