"""Acceptance suite.  Each test prints one PASS/FAIL line."""

import itertools
import time
from contextlib import contextmanager

import pytest

from conftest import FIXTURES
from khconc import catalog, khovanov
from khconc.cobordism import Movie, compose, induced_kh_map, load_movie, reverse
from khconc.concordance import CERTIFIED, KMData, self_concordance_iso, t45_replay
from khconc.exactalg import BigradedDims, SparseMatrix, rank
from khconc.khovanov import jones_polynomial, kh_dims
from khconc.lee import lee_pages, s_invariant
from khconc.ssengine import SqueezeInstance, enumerate_collapses, squeeze_check

# (i, j - i), read off the published grids
T45_DELTA = [(0, 12), (2, 14), (3, 15), (4, 14), (5, 17), (6, 14), (7, 17), (8, 16), (9, 17)]
LEE_DELTA = [((2, 14), (3, 15)), ((4, 14), (5, 17)), ((6, 14), (7, 17)), ((8, 16), (9, 17))]
EXCEPTIONAL_DELTA = [(2, 14), (4, 14), (9, 17)]
UNRESTRICTED_COUNT = 36  # frozen from the exhaustive count below


def _ij(b):
    return (b[0], b[0] + b[1])


def _delta(b):
    return (b[0], b[1] - b[0])


T45 = BigradedDims({_ij(b): 1 for b in T45_DELTA})


@contextmanager
def criterion(capsys, n, text):
    ok = False
    try:
        yield
        ok = True
    finally:
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {n}: {text}")


@pytest.mark.slow
def test_criterion_1_t45_table(capsys, t45):
    with criterion(capsys, 1, "T(4,5) reduced Kh table, 9 generators, <= 120 s"):
        khovanov.clear_cache()
        t0 = time.perf_counter()
        dims = kh_dims(t45)
        elapsed = time.perf_counter() - t0
        assert len(t45.crossings) == 15
        assert dims == T45
        assert dims.total == 9 and all(v == 1 for v in dims.values())
        assert sorted(dims.by_delta()) == T45_DELTA
        assert elapsed <= 120, f"took {elapsed:.1f} s"


@pytest.mark.slow
def test_criterion_2_lee_t45(capsys, t45):
    with criterion(capsys, 2, "Lee pages on T(4,5): four rank-1 arrows, E_inf at (0,12), s = 12"):
        pages = lee_pages(t45)
        assert pages[0].r == 2 and pages[0].dims == T45
        arrows = [(s, t, r) for p in pages for s, t, r in p.differentials]
        assert len(arrows) == 4 and all(r == 1 for _, _, r in arrows)
        assert sorted((_delta(s), _delta(t)) for s, t, _ in arrows) == LEE_DELTA
        assert pages[-1].dims == BigradedDims({(0, 12): 1})
        assert s_invariant(t45) == 12


def _exhaustive(e2, einf_total):
    n = 0
    for a, b in itertools.permutations(e2, 2):
        if b[0] > a[0] and sum(e2.values()) - 2 == einf_total:
            n += 1
    return n


def test_criterion_3_collapses(capsys):
    with criterion(capsys, 3, "collapse enumeration: 2 patterns with candidates, "
                              f"{UNRESTRICTED_COUNT} without"):
        km = KMData.load()
        assert km.e2 == T45
        pats = enumerate_collapses(T45, 1, 1, km.candidates, einf_total=7)
        assert len(pats) == 2
        assert sorted(_delta(b) for p in pats for s, t, _ in p.differentials
                      for b in {s, t}) == sorted([(2, 14), (4, 14), (9, 17), (9, 17)])
        free = enumerate_collapses(T45, 1, 1, None, einf_total=7)
        assert len(free) == _exhaustive(dict(T45), 7) == UNRESTRICTED_COUNT


def test_criterion_4_squeeze(capsys):
    with criterion(capsys, 4, "squeeze: isomorphism; undetermined after dropping any pairing"):
        iso = set(T45.support()) - {_ij(b) for b in EXCEPTIONAL_DELTA}
        pairings = [(_ij(s), _ij(t), 1) for s, t in LEE_DELTA]
        v = squeeze_check(SqueezeInstance(T45, T45, iso, pairings, survivor=(0, 12)))
        assert v.verdict == "isomorphism"
        for k, (s, t, _) in enumerate(pairings):
            rest = pairings[:k] + pairings[k + 1:]
            v = squeeze_check(SqueezeInstance(T45, T45, iso, rest, survivor=(0, 12)))
            assert v.verdict == "undetermined"
            assert v.stuck and set(v.stuck) <= {s, t}


def test_criterion_5_oracles(capsys):
    small = [e for e in catalog.ENTRIES if e.crossings <= 12]
    with criterion(capsys, 5, f"simplify = naive cube and chi = Jones on {len(small)} "
                              "catalog knots <= 12 crossings"):
        assert len(small) == 8
        for e in small:
            d = e.diagram()
            fast = kh_dims(d)
            assert fast == kh_dims(d, route="naive"), e.name
            assert fast == e.expected, e.name
            chi = {k: v for k, v in fast.poincare().items() if v}
            assert chi == jones_polynomial(d), e.name


def test_criterion_6_sanity(capsys):
    with criterion(capsys, 6, "unknot, trefoil, figure-eight values and mirror symmetry"):
        u, t, f = (catalog.lookup(n) for n in ("unknot", "trefoil", "figure-eight"))
        assert kh_dims(u) == BigradedDims({(0, 0): 1}) and s_invariant(u) == 0
        assert kh_dims(t) == BigradedDims({(0, 2): 1, (2, 6): 1, (3, 8): 1})
        assert s_invariant(t) == 2
        assert s_invariant(f) == 0
        for e in catalog.ENTRIES:
            d = e.diagram()
            assert kh_dims(d.mirror()) == kh_dims(d).mirror(), e.name


def _prod(a, b):
    A = {(r, c): v for c, col in enumerate(a.columns) for r, v in col.items()}
    B = {(r, c): v for c, col in enumerate(b.columns) for r, v in col.items()}
    out: dict = {}
    for (r, k), v in B.items():
        for (k2, c), w in A.items():
            if k == k2:
                out[(r, c)] = out.get((r, c), 0) + v * w
    return {k: v for k, v in out.items() if v}


def test_criterion_7_functoriality(capsys):
    with criterion(capsys, 7, "identity, Reidemeister, composition and birth-death maps"):
        for name in ("trefoil", "figure-eight", "T(2,5)"):
            d = catalog.lookup(name)
            km = induced_kh_map(Movie(d))
            assert km.ranks() == dict(kh_dims(d)), name
        r_movies = [("trefoil", ("R1 2",)), ("trefoil", ("R2 1 3", "R2INV 4 5")),
                    ("figure-eight", ("R1 3 - over", "R2 2 4")),
                    ("left-trefoil", ("R2 1 4", "R1 6 + under"))]
        for name, moves in r_movies:
            d = catalog.lookup(name)
            km = induced_kh_map(Movie(d, moves))
            assert km.bidegree == (0, 0)
            assert km.ranks() == dict(kh_dims(d)), (name, moves)
        pairs = [("trefoil", ("R1 2",), ("R2 1 4",)),
                 ("figure-eight", ("R2 2 4",), ("R1 1",)),
                 ("unknot", ("BIRTH", "SADDLE 1 2"), ("SADDLE 1 2", "DEATH 2")),
                 ("trefoil", ("BIRTH", "SADDLE 1 7"), ("SADDLE 1 7", "DEATH 7"))]
        for name, first, second in pairs:
            m1 = Movie(catalog.lookup(name), first)
            m2 = Movie(m1.end, second)
            whole = induced_kh_map(compose(m1, m2))
            direct = {(r, c): v for c, col in enumerate(whole.columns) for r, v in col.items()}
            prod = _prod(induced_kh_map(m1), induced_kh_map(m2))
            assert direct == prod or direct == {k: -v for k, v in prod.items()}
            assert whole.total_rank == rank(SparseMatrix(len(whole.target),
                                                         len(whole.source), prod))
        zero = induced_kh_map(Movie(catalog.lookup("unknot"), ("BIRTH", "DEATH 2")))
        assert zero.total_rank == 0


@pytest.mark.slow
def test_criterion_8_t45_replay(capsys, t45):
    with criterion(capsys, 8, "T(4,5) replay certifies isomorphism on every fixture "
                              "self-concordance and matches the direct ranks"):
        bs = load_movie(FIXTURES / "t45_bs.mov", catalog.resolve)
        movies = {"identity": load_movie(FIXTURES / "t45_identity.mov", catalog.resolve),
                  "birth-saddle-saddle-death": load_movie(FIXTURES / "t45_bssd.mov",
                                                          catalog.resolve),
                  "bs then reverse": compose(bs, reverse(bs))}
        for name, m in movies.items():
            assert m.start.key() == m.end.key() == t45.key(), name
            replay = t45_replay(m)
            direct = self_concordance_iso(m)
            assert replay.verdict == CERTIFIED, (name, replay.narrative)
            assert direct.verdict == CERTIFIED, name
            assert {(w["i"], w["j"]): w["rank"] for w in replay.witnesses} == \
                   {(w["i"], w["j"]): w["rank"] for w in direct.witnesses}
