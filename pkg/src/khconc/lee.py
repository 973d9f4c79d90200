"""
Lee spectral sequence of the quantum filtration and the s-invariant.

Pages are computed from the filtration by exact subspace arithmetic:

    Z_r^p = {x in F^p : dx in F^(p + r u)}
    E_r^p = Z_r^p / (Z_(r-1)^(p+u) + d Z_(r-1)^(p - (r-1) u))

with ``F^p`` spanned by generators of quantum grading >= p and ``u = 2``
the grading step.  In this (standard) indexing E_1 is Khovanov homology;
reported page numbers add one so that the Khovanov page is E_2.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

from .diagram import PlanarDiagram
from .exactalg import (BigradedDims, ChainComplex, Reduction, kernel_basis,
                       simplify, span_dim, total_homology_dims)
from .khovanov import DEFAULT_BUDGET, KHOVANOV, LEE, build_complex, check_budget

STEP = 2


class LeeError(RuntimeError):
    """The Lee computation produced something no correct implementation can."""


@dataclass
class FilteredComplex:
    """A complex whose differential only raises the quantum grading."""

    complex: ChainComplex

    def degrees(self) -> list[int]:
        return sorted(self.complex.j_degrees())

    def part(self, k: int) -> ChainComplex:
        """The summand ``d_k`` of the differential raising j by ``k``."""
        return self.complex.filtration_part(k)

    def check(self) -> None:
        self.complex.check()
        bad = [k for k in self.degrees() if k < 0 or k % 2]
        if bad:
            raise LeeError(f"differential has j-degrees {bad}")


@dataclass
class Page:
    r: int
    dims: BigradedDims
    differentials: list = field(default_factory=list)  # ((i,j), (i,j), rank)

    def to_json_obj(self) -> dict:
        return {"r": self.r, "dims": self.dims.to_json_obj(),
                "differentials": [{"from": list(s), "to": list(t), "rank": k}
                                  for s, t, k in self.differentials]}


def pages_to_json(pages: list[Page]) -> str:
    return json.dumps([p.to_json_obj() for p in pages], sort_keys=True)


_LEE_CACHE: dict = {}


def lee_complex(d: PlanarDiagram, budget: int = DEFAULT_BUDGET) -> FilteredComplex:
    """Reduced Lee complex; its j-degree-0 part is the reduced Khovanov complex."""
    return FilteredComplex(build_complex(d, LEE, True, budget=budget))


def lee_reduction(d: PlanarDiagram, budget: int = DEFAULT_BUDGET,
                  record: bool = False) -> Reduction:
    """Filtered Gaussian elimination of the Lee complex (cached)."""
    check_budget(d, budget)
    key = (d.key(), record)
    hit = _LEE_CACHE.get(key) or (None if record else _LEE_CACHE.get((d.key(), True)))
    if hit is None:
        hit = simplify(lee_complex(d, budget).complex, record=record)
        _LEE_CACHE[key] = hit
    return hit


class _Pages:
    """Cached filtration subspaces of one complex."""

    def __init__(self, c: ChainComplex):
        self.c = c
        self.by_i: dict[int, list[int]] = {}
        for g in range(c.size):
            self.by_i.setdefault(c.igr[g], []).append(g)
        js = sorted(set(c.jgr))
        self.jmin = js[0] if js else 0
        self.jmax = js[-1] if js else 0
        self._z: dict = {}

    def Z(self, i: int, p: int, r: int | None) -> list[dict]:
        """Basis of Z_r^p in homological degree i (r None means infinity)."""
        key = (i, p, r)
        hit = self._z.get(key)
        if hit is not None:
            return hit
        c = self.c
        dom = [g for g in self.by_i.get(i, []) if c.jgr[g] >= p]
        if r == 0:
            out = [{g: 1} for g in dom]
        else:
            lim = None if r is None else p + r * STEP
            cols = {g: {t: v for t, v in c.d[g].items()
                        if lim is None or c.jgr[t] < lim} for g in dom}
            out = kernel_basis(cols, dom)
        self._z[key] = out
        return out

    def boundary_part(self, i: int, p: int, r: int) -> list[dict]:
        """Z_(r-1)^(p+u) + d Z_(r-1)^(p-(r-1)u), as a spanning list."""
        span = list(self.Z(i, p + STEP, r - 1))
        for z in self.Z(i - 1, p - (r - 1) * STEP, r - 1):
            span.append(self.c.apply(z))
        return span

    def dim(self, i: int, p: int, r: int) -> int:
        return len(self.Z(i, p, r)) - span_dim(self.boundary_part(i, p, r))

    def rank_out(self, i: int, p: int, r: int) -> int:
        """Rank of d_r leaving E_r^(p, i)."""
        top = len(self.Z(i, p, r))
        ker = span_dim(list(self.Z(i, p, r + 1)) + list(self.Z(i, p + STEP, r - 1)))
        return top - ker

    def levels(self, i: int) -> list[int]:
        return sorted({self.c.jgr[g] for g in self.by_i.get(i, [])})


def ss_pages(f: FilteredComplex | ChainComplex, reduce_first: bool = True) -> list[Page]:
    """All pages from the Khovanov page (E_2) to the stable page.

    With ``reduce_first`` the complex is first cut down by filtered
    Gaussian elimination, which leaves every page from E_2 on unchanged.
    """
    c = f.complex if isinstance(f, FilteredComplex) else f
    if reduce_first:
        c = simplify(c).complex
    return _pages_of(c)


def _pages_of(c: ChainComplex) -> list[Page]:
    P = _Pages(c)
    if c.size == 0:
        return [Page(2, BigradedDims())]
    span = P.jmax - P.jmin
    rmax = span // STEP + 1
    pages = []
    for r in range(1, rmax + 2):
        dims = {}
        diffs = []
        for i in sorted(P.by_i):
            for p in P.levels(i):
                k = P.dim(i, p, r)
                if k:
                    dims[(i, p)] = k
                    rk = P.rank_out(i, p, r)
                    if rk:
                        diffs.append(((i, p), (i + 1, p + r * STEP), rk))
        pages.append(Page(r + 1, BigradedDims(dims), diffs))
    last = max((n for n, pg in enumerate(pages) if pg.differentials), default=-1)
    pages = pages[:last + 2]
    for pg in pages:
        for (i, j), (i2, _), _ in pg.differentials:
            if i2 != i + 1:
                raise LeeError("page differential of homological degree != 1")
    return pages


def lee_pages(d: PlanarDiagram, budget: int = DEFAULT_BUDGET) -> list[Page]:
    return _pages_of(lee_reduction(d, budget).complex)


def s_invariant(d: PlanarDiagram, budget: int = DEFAULT_BUDGET) -> int:
    """Quantum grading of the surviving Lee generator."""
    final = lee_pages(d, budget)[-1].dims
    if final.total != 1:
        raise LeeError(f"E_infinity has dimension {final.total}, expected 1")
    (i, j), = final.support()
    if i != 0:
        raise LeeError(f"E_infinity generator sits at i = {i}, expected 0")
    if j % 2:
        raise LeeError(f"s = {j} is odd")
    return j


def lee_total_dim(d: PlanarDiagram, budget: int = DEFAULT_BUDGET) -> int:
    """Dimension of Lee homology, straight from the unfiltered complex."""
    return sum(total_homology_dims(lee_complex(d, budget).complex).values())


def clear_cache() -> None:
    _LEE_CACHE.clear()


def khovanov_part_matches(d: PlanarDiagram) -> bool:
    """True when the j-degree-0 part of the Lee complex is the Khovanov complex."""
    lee = lee_complex(d).part(0)
    kh = build_complex(d, KHOVANOV, True)
    return lee.igr == kh.igr and lee.jgr == kh.jgr and lee.d == kh.d


def page_table(pages: list[Page]) -> Mapping:
    return {p.r: p.dims for p in pages}
