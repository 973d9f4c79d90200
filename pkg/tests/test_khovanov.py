import itertools

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from khconc.diagram import BraidWord, DiagramError, PlanarDiagram, braid_closure, parse_pd
from khconc.exactalg import BigradedDims, homology_dims
from khconc.khovanov import (KHOVANOV, LEE, BudgetError, Cube, FrobeniusSpec, build_complex,
                             jones_polynomial, kh_dims, state_circles)

TREFOIL = BigradedDims({(0, 2): 1, (2, 6): 1, (3, 8): 1})


def test_unknot():
    assert kh_dims(PlanarDiagram.unknot()) == BigradedDims({(0, 0): 1})
    assert jones_polynomial(PlanarDiagram.unknot()) == {0: 1}


def test_trefoil_both_routes(trefoil):
    assert kh_dims(trefoil, route="naive") == TREFOIL
    assert kh_dims(trefoil) == TREFOIL


def test_trefoil_jones(trefoil):
    assert jones_polynomial(trefoil) == {2: 1, 6: 1, 8: -1}


def test_figure_eight(fig8):
    want = BigradedDims({(-2, -4): 1, (-1, -2): 1, (0, 0): 1, (1, 2): 1, (2, 4): 1})
    assert kh_dims(fig8, route="naive") == want
    assert kh_dims(fig8) == want
    assert jones_polynomial(fig8) == {-4: 1, -2: -1, 0: 1, 2: -1, 4: 1}


def test_unreduced_trefoil(trefoil):
    c = build_complex(trefoil, KHOVANOV, reduced=False)
    assert homology_dims(c) == BigradedDims({(0, 1): 1, (0, 3): 1, (2, 5): 1, (3, 9): 1})


def test_kinked_unknot():
    d = parse_pd("X[1,1,2,2]")
    assert kh_dims(d) == BigradedDims({(0, 0): 1})


def test_links_need_flag():
    hopf = braid_closure(BraidWord(2, (1, 1)))
    with pytest.raises(DiagramError):
        build_complex(hopf)
    assert build_complex(hopf, allow_links=True).size > 0


def test_nonplanar_rejected():
    with pytest.raises(DiagramError):
        kh_dims(parse_pd("X[1,4,2,3] X[3,6,4,5] X[5,2,6,1]"))


def test_budget(trefoil):
    with pytest.raises(BudgetError):
        kh_dims(trefoil, budget=4)


def test_bad_frobenius_root():
    with pytest.raises(ValueError):
        FrobeniusSpec("bad", 0, 1, 2)


roots = st.tuples(st.integers(-2, 2), st.integers(-2, 2))


@settings(max_examples=40, deadline=None)
@given(roots)
def test_frobenius_axioms(hb):
    h, beta = hb
    spec = FrobeniusSpec("x", h, beta * beta - h * beta, beta)
    basis = (0, 1)

    def m(vec2):  # {(x, y): c} -> {z: c}
        out = {}
        for (x, y), c in vec2.items():
            for z, w in spec.mult(x, y).items():
                out[z] = out.get(z, 0) + c * w
        return {k: v for k, v in out.items() if v}

    for x, y, z in itertools.product(basis, repeat=3):
        left = {}
        for u, c in spec.mult(x, y).items():
            for w, e in spec.mult(u, z).items():
                left[w] = left.get(w, 0) + c * e
        right = {}
        for u, c in spec.mult(y, z).items():
            for w, e in spec.mult(x, u).items():
                right[w] = right.get(w, 0) + c * e
        assert {k: v for k, v in left.items() if v} == {k: v for k, v in right.items() if v}
    # Frobenius relation: Delta(m(x, y)) = (m (x) 1)(x (x) Delta(y))
    for x, y in itertools.product(basis, repeat=2):
        lhs = {}
        for u, c in spec.mult(x, y).items():
            for k, e in spec.comult(u).items():
                lhs[k] = lhs.get(k, 0) + c * e
        rhs = {}
        for (a, b), c in spec.comult(y).items():
            for u, e in spec.mult(x, a).items():
                rhs[(u, b)] = rhs.get((u, b), 0) + c * e
        assert {k: v for k, v in lhs.items() if v} == {k: v for k, v in rhs.items() if v}
    # counit of unit vanishes; e = X - beta is an X-eigenvector
    assert spec.counit(0) == 0
    assert m({(1, 1): 1, (1, 0): -beta}) == {k: v for k, v in
                                             ((1, spec.alpha), (0, -spec.alpha * beta)) if v}


braids = st.integers(2, 4).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(
        st.integers(1, n - 1).flatmap(lambda g: st.sampled_from((g, -g))),
        min_size=1, max_size=7)))


def _knot(nw):
    n, w = nw
    d = braid_closure(BraidWord(n, tuple(w)))
    assume(d.is_knot)
    return d


@settings(max_examples=60, deadline=None)
@given(braids)
def test_simplify_equals_naive(nw):
    d = _knot(nw)
    assert kh_dims(d) == kh_dims(d, route="naive")


@settings(max_examples=60, deadline=None)
@given(braids)
def test_euler_characteristic_is_jones(nw):
    d = _knot(nw)
    chi = {k: v for k, v in kh_dims(d).poincare().items() if v}
    assert chi == jones_polynomial(d)


@settings(max_examples=40, deadline=None)
@given(braids)
def test_mirror_negates(nw):
    d = _knot(nw)
    assert kh_dims(d.mirror()) == kh_dims(d).mirror()


@settings(max_examples=30, deadline=None)
@given(braids, st.data())
def test_cube_circles_match_union_find(nw, data):
    n, w = nw
    d = braid_closure(BraidWord(n, tuple(w)))
    cube = Cube(d, reduced=False)
    v = data.draw(st.integers(0, cube.V - 1))
    bits = [(v >> k) & 1 for k in range(cube.n)]
    assert state_circles(d, bits).count == int(cube.ncirc[v])


@settings(max_examples=30, deadline=None)
@given(braids)
def test_complexes_square_to_zero(nw):
    d = _knot(nw)
    for spec in (KHOVANOV, LEE):
        for reduced in (True, False):
            build_complex(d, spec, reduced).check()


def test_gradings_of_trefoil_cube(trefoil):
    igr, jgr = Cube(trefoil).gradings()
    assert min(igr) == 0 and max(igr) == 3
    assert set(np.unique(jgr) % 2) == {0}
