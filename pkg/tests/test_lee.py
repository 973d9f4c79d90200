import json

import pytest
from hypothesis import assume, given, settings, strategies as st

from khconc.diagram import BraidWord, PlanarDiagram, braid_closure
from khconc.exactalg import BigradedDims
from khconc.khovanov import kh_dims
from khconc.lee import (FilteredComplex, khovanov_part_matches, lee_complex, lee_pages,
                        lee_total_dim, pages_to_json, s_invariant, ss_pages)


def test_unknot_s():
    assert s_invariant(PlanarDiagram.unknot()) == 0


def test_trefoil_pages(trefoil):
    pages = lee_pages(trefoil)
    assert pages[0].r == 2
    assert pages[0].dims == kh_dims(trefoil)
    arrows = [(s, t, r) for p in pages for s, t, r in p.differentials]
    assert arrows == [((2, 6), (3, 8), 1)]
    # d_2 raises j by 2 and already acts on the Khovanov page
    assert pages[0].differentials == [((2, 6), (3, 8), 1)]
    assert len(pages) == 2 and pages[1].r == 3
    assert pages[-1].dims == BigradedDims({(0, 2): 1})
    assert s_invariant(trefoil) == 2
    assert s_invariant(trefoil.mirror()) == -2


def test_figure_eight(fig8):
    assert s_invariant(fig8) == 0
    assert sum(len(p.differentials) for p in lee_pages(fig8)) == 2


@pytest.mark.parametrize("w,s", [((1,) * 5, 4), ((1,) * 7, 6)])
def test_two_strand_torus(w, s):
    assert s_invariant(braid_closure(BraidWord(2, w))) == s


def test_lee_homology_rank_one(trefoil, fig8):
    assert lee_total_dim(trefoil) == 1
    assert lee_total_dim(fig8) == 1


def test_degree_zero_part_is_khovanov(trefoil, fig8):
    assert khovanov_part_matches(trefoil)
    assert khovanov_part_matches(fig8)


def test_filtered_degrees(trefoil):
    f = lee_complex(trefoil)
    f.check()
    assert all(k >= 0 and k % 2 == 0 for k in f.degrees())
    assert 0 in f.degrees()


def test_pages_json(trefoil):
    obj = json.loads(pages_to_json(lee_pages(trefoil)))
    assert obj[0]["differentials"] == [{"from": [2, 6], "to": [3, 8], "rank": 1}]


braids = st.integers(2, 3).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(
        st.integers(1, n - 1).flatmap(lambda g: st.sampled_from((g, -g))),
        min_size=1, max_size=5)))


def _knot(nw):
    n, w = nw
    d = braid_closure(BraidWord(n, tuple(w)))
    assume(d.is_knot)
    return d


@settings(max_examples=25, deadline=None)
@given(braids)
def test_reduction_keeps_pages(nw):
    # pages from E_2 on do not depend on the filtered simplification
    d = _knot(nw)
    f = lee_complex(d)
    a = ss_pages(f, reduce_first=False)
    b = ss_pages(f, reduce_first=True)
    assert [(p.r, p.dims, p.differentials) for p in a] == [(p.r, p.dims, p.differentials) for p in b]


@settings(max_examples=40, deadline=None)
@given(braids)
def test_s_properties(nw):
    d = _knot(nw)
    s = s_invariant(d)
    assert s % 2 == 0
    assert s_invariant(d.mirror()) == -s
    assert lee_pages(d)[0].dims == kh_dims(d)
    final = lee_pages(d)[-1].dims
    assert final == BigradedDims({(0, s): 1})


@settings(max_examples=40, deadline=None)
@given(braids)
def test_page_dimensions_drop_by_twice_rank(nw):
    d = _knot(nw)
    pages = lee_pages(d)
    for a, b in zip(pages, pages[1:]):
        assert b.dims.total == a.dims.total - 2 * sum(r for _, _, r in a.differentials)
        for (i, _), (i2, _), _ in a.differentials:
            assert i2 == i + 1


def test_filtered_complex_wrapper(trefoil):
    f = FilteredComplex(lee_complex(trefoil).complex)
    assert f.part(0).size == f.complex.size
