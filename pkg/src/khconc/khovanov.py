"""
Reduced rational Khovanov homology from the cube of resolutions.

The cube is built for all vertices at once with numpy: circles come from
a vectorised union-find over arc labels, generators are numbered by
``offset[v] + s`` where the bits of ``s`` label the free circles of vertex
``v`` (bit set = ``v_minus``), and the edge maps of every crossing
direction are produced as coordinate arrays.  One generic Frobenius
algebra ``X^2 = hX + t`` covers both the Khovanov (h = t = 0) and the Lee
(h = 0, t = 1) theories.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .diagram import DiagramError, PlanarDiagram
from .exactalg import BigradedDims, ChainComplex, Reduction, homology_dims, simplify

DEFAULT_BUDGET = 10 ** 7


class BudgetError(RuntimeError):
    """The complex would exceed the generator budget."""


@dataclass(frozen=True)
class FrobeniusSpec:
    """Rank-two Frobenius algebra Q[X]/(X^2 - hX - t), basis 1 = v_plus,
    X = v_minus.

    For the reduced theory the basepoint circle carries ``e = X - beta``,
    an eigenvector of multiplication by X with eigenvalue ``alpha``.
    """

    name: str
    h: int
    t: int
    beta: int

    @property
    def alpha(self) -> int:
        return self.h - self.beta

    def __post_init__(self):
        if self.beta * self.beta - self.h * self.beta - self.t != 0:
            raise ValueError("beta must be a root of x^2 - h x - t")

    # structure tables, as {basis tuple: coefficient}; 0 = v_plus, 1 = v_minus
    def mult(self, x: int, y: int) -> dict[int, int]:
        if x == 0:
            return {y: 1}
        if y == 0:
            return {x: 1}
        return {k: v for k, v in ((1, self.h), (0, self.t)) if v}

    def comult(self, x: int) -> dict[tuple[int, int], int]:
        if x == 0:
            out = {(0, 1): 1, (1, 0): 1, (0, 0): -self.h}
        else:
            out = {(1, 1): 1, (0, 0): self.t}
        return {k: v for k, v in out.items() if v}

    def unit(self) -> dict[int, int]:
        return {0: 1}

    def counit(self, x: int) -> int:
        return 1 if x == 1 else 0


KHOVANOV = FrobeniusSpec("Khovanov", 0, 0, 0)
LEE = FrobeniusSpec("Lee", 0, 1, -1)


@dataclass(frozen=True)
class CubeVertex:
    vertex: tuple[int, ...]
    circles: tuple[tuple[int, ...], ...]  # arc labels per circle, least label first
    basepoint_circle: int

    @property
    def count(self) -> int:
        return len(self.circles)


def state_circles(d: PlanarDiagram, vertex: Sequence[int]) -> CubeVertex:
    """Circles of one complete smoothing, by plain union-find.

    0-smoothing of ``X[a,b,c,d]`` joins (a,b) and (c,d); 1-smoothing
    joins (a,d) and (b,c).
    """
    vertex = tuple(int(b) for b in vertex)
    if len(vertex) != len(d.crossings):
        raise DiagramError(
            f"vertex has {len(vertex)} bits, diagram has {len(d.crossings)} crossings")
    parent = {v: v for v in d.arcs}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry)] = min(rx, ry)

    for c, bit in zip(d.crossings, vertex):
        if bit:
            union(c.a, c.d)
            union(c.b, c.c)
        else:
            union(c.a, c.b)
            union(c.c, c.d)
    groups = defaultdict(list)
    for v in sorted(d.arcs):
        groups[find(v)].append(v)
    circles = tuple(tuple(g) for _, g in sorted(groups.items()))
    base = next(k for k, g in enumerate(circles) if d.basepoint in g)
    return CubeVertex(vertex, circles, base)


def _popcount(a: np.ndarray) -> np.ndarray:
    a = a.astype(np.int64)
    out = np.zeros_like(a)
    while np.any(a):
        out += a & 1
        a = a >> 1
    return out


def _bit_at(s: np.ndarray, f: np.ndarray) -> np.ndarray:
    return np.where(f >= 0, (s >> np.maximum(f, 0)) & 1, -1)


def _set_bit(x: np.ndarray, f: np.ndarray) -> np.ndarray:
    return x | np.where(f >= 0, np.left_shift(np.int64(1), np.maximum(f, 0)), 0)


def saddle_terms(spec: FrobeniusSpec, s, base, FA, FC, FM, GA, GB, is_merge):
    """Coefficients of a merge or split for a batch of generators.

    ``s`` holds the labels before (bit f set = ``v_minus`` on free circle
    f), ``base`` the labels after on the circles the saddle does not touch.
    A merge joins circles FA and FC into FM; a split turns FA into GA and
    GB.  Index -1 stands for the basepoint circle.  Returns a list of
    (mask, labels after, scalar coefficient).
    """
    out = []
    xa, xc = _bit_at(s, FA), _bit_at(s, FC)
    both = is_merge & (FA >= 0) & (FC >= 0)
    prod = np.where(both, xa + xc, -1)
    withm = _set_bit(base, FM)
    out.append((both & (prod == 0), base, 1))
    out.append((both & (prod == 1), withm, 1))
    out.append((both & (prod == 2), withm, spec.h))
    out.append((both & (prod == 2), base, spec.t))
    into_base = is_merge & ((FA < 0) | (FC < 0))
    other = np.where(FA < 0, xc, xa)
    out.append((into_base & (other == 0), base, 1))
    out.append((into_base & (other == 1), base, spec.alpha))
    is_split = ~is_merge
    free_split = is_split & (FA >= 0)
    wa, wb = _set_bit(base, GA), _set_bit(base, GB)
    out.append((free_split & (xa == 0), wa, 1))
    out.append((free_split & (xa == 0), wb, 1))
    out.append((free_split & (xa == 0), base, -spec.h))
    out.append((free_split & (xa == 1), _set_bit(wa, GB), 1))
    out.append((free_split & (xa == 1), base, spec.t))
    base_split = is_split & (FA < 0)
    newc = np.where(GA < 0, GB, GA)
    out.append((base_split, _set_bit(base, newc), 1))
    out.append((base_split, base, -spec.beta))
    return [(m, t, c) for m, t, c in out if c != 0 and np.any(m)]


class Cube:
    """Vertices, circles and generator numbering of a diagram's cube.

    ``order`` lists crossing indices by cube bit position (default: the
    diagram's own order).  Building the edges is a separate, costlier step
    (:meth:`complex`).
    """

    def __init__(self, d: PlanarDiagram, reduced: bool = True,
                 order: Sequence[int] | None = None, budget: int = DEFAULT_BUDGET):
        if not d.is_planar:
            raise DiagramError("diagram is not planar (virtual crossings)")
        self.diagram = d
        self.reduced = reduced
        n = len(d.crossings)
        self.order = tuple(range(n)) if order is None else tuple(order)
        if sorted(self.order) != list(range(n)):
            raise ValueError("order must be a permutation of the crossings")
        self.n = n
        if (1 << n) > budget:
            raise BudgetError(f"{1 << n} cube vertices exceed the budget of {budget}")
        labels = sorted(d.arcs)
        self.labels = labels
        self.index = {v: k for k, v in enumerate(labels)}
        A = len(labels)
        V = 1 << n
        self.V = V
        verts = np.arange(V, dtype=np.int64)
        self.weight = _popcount(verts)
        cr = [d.crossings[x] for x in self.order]
        self.quads = np.array([[self.index[v] for v in c.labels] for c in cr],
                              dtype=np.int64).reshape(n, 4)
        L = self._components(verts)
        isroot = L == np.arange(A)[None, :]
        rank_ = np.cumsum(isroot, axis=1) - 1
        circ = np.take_along_axis(rank_, L, axis=1)
        self.ncirc = isroot.sum(axis=1)
        bidx = self.index[d.basepoint]
        self.base_circle = circ[:, bidx]
        if reduced:
            fidx = circ - (circ > self.base_circle[:, None])
            fidx[circ == self.base_circle[:, None]] = -1
            self.nfree = self.ncirc - 1
        else:
            fidx = circ
            self.nfree = self.ncirc.copy()
        self.circ = circ
        self.fidx = fidx
        counts = np.left_shift(np.int64(1), self.nfree)
        self.offset = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        self.size = int(self.offset[-1])
        if self.size > budget:
            raise BudgetError(
                f"{self.size} generators exceed the budget of {budget}")
        # representative (least) arc of each free circle, in free order
        maxf = int(self.nfree.max()) if V else 0
        self.maxfree = maxf
        frep = np.full((V, max(maxf, 1)), -1, dtype=np.int64)
        rows, cols = np.nonzero(isroot)
        fr = fidx[rows, cols]
        keep = fr >= 0
        frep[rows[keep], fr[keep]] = cols[keep]
        self.frep = frep
        self.n_plus = d.n_plus
        self.n_minus = d.n_minus

    def _components(self, verts: np.ndarray) -> np.ndarray:
        n, V = self.n, self.V
        A = len(self.labels)
        L = np.tile(np.arange(A, dtype=np.int64), (V, 1))
        if n == 0:
            return L
        bits = (verts[:, None] >> np.arange(n)[None, :]) & 1
        a, b, c, dd = (self.quads[:, k][None, :] for k in range(4))
        U = np.concatenate([np.broadcast_to(a, (V, n)),
                            np.broadcast_to(c, (V, n))], axis=1)
        W = np.concatenate([np.where(bits == 1, dd, b),
                            np.where(bits == 1, b, dd)], axis=1)
        rows = np.broadcast_to(np.arange(V)[:, None], U.shape)
        flat_rows = rows * A
        while True:
            lu = np.take_along_axis(L, U, axis=1)
            lw = np.take_along_axis(L, W, axis=1)
            if np.array_equal(lu, lw):
                jumped = np.take_along_axis(L, L, axis=1)
                if np.array_equal(jumped, L):
                    return L
            m = np.minimum(lu, lw)
            flat = L.reshape(-1)
            for idx in (lu, lw, U, W):
                np.minimum.at(flat, (flat_rows + idx).reshape(-1), m.reshape(-1))
            L = flat.reshape(V, A)
            for _ in range(2):
                L = np.take_along_axis(L, L, axis=1)

    # -- generator data ---------------------------------------------------

    def vertex_of(self, gids: np.ndarray) -> np.ndarray:
        return np.searchsorted(self.offset, gids, side="right") - 1

    def gradings(self) -> tuple[np.ndarray, np.ndarray]:
        V = self.V
        counts = self.offset[1:] - self.offset[:-1]
        v = np.repeat(np.arange(V, dtype=np.int64), counts)
        s = np.arange(self.size, dtype=np.int64) - self.offset[v]
        w = self.weight[v]
        igr = w - self.n_minus
        jgr = self.nfree[v] - 2 * _popcount(s) + w + self.n_plus - 2 * self.n_minus
        return igr, jgr

    def vertex(self, v: int) -> CubeVertex:
        bits = tuple((v >> k) & 1 for k in range(self.n))
        circles = defaultdict(list)
        for k, lab in enumerate(self.labels):
            circles[int(self.circ[v, k])].append(lab)
        circ = tuple(tuple(circles[c]) for c in sorted(circles))
        # report bits in diagram crossing order
        by_crossing = [0] * self.n
        for pos, x in enumerate(self.order):
            by_crossing[x] = bits[pos]
        return CubeVertex(tuple(by_crossing), circ, int(self.base_circle[v]))

    def free_circle_arcs(self, v: int) -> list[int]:
        """Least arc label of each free circle of vertex ``v``, in bit order."""
        return [self.labels[int(a)] for a in self.frep[v, :int(self.nfree[v])]]

    def decode(self, g: int) -> tuple[int, int]:
        v = int(np.searchsorted(self.offset, g, side="right") - 1)
        return v, g - int(self.offset[v])

    # -- edges ------------------------------------------------------------

    def edges(self, spec: FrobeniusSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """All differential entries as (source, target, coefficient) arrays."""
        srcs, tgts, coefs = [], [], []
        for k in range(self.n):
            s, t, c = self._edges_dir(k, spec)
            srcs.append(s)
            tgts.append(t)
            coefs.append(c)
        if not srcs:
            e = np.zeros(0, dtype=np.int64)
            return e, e, e
        return np.concatenate(srcs), np.concatenate(tgts), np.concatenate(coefs)

    def _edges_dir(self, k: int, spec: FrobeniusSpec):
        V = self.V
        verts = np.arange(V, dtype=np.int64)
        vs = verts[((verts >> k) & 1) == 0]
        ws = vs | (1 << k)
        sign = 1 - 2 * (_popcount(vs & ((1 << k) - 1)) & 1)
        a, b, c, _ = self.quads[k]
        fidx = self.fidx
        merge = self.ncirc[ws] < self.ncirc[vs]
        if np.any(self.ncirc[ws] == self.ncirc[vs]):
            raise DiagramError("cube edge preserves the circle count; diagram is not planar")
        # free-circle map v -> w for circles untouched by this crossing
        maxf = self.maxfree
        nf = self.nfree[vs]
        M = np.full((len(vs), max(maxf, 1)), -1, dtype=np.int64)
        if maxf:
            rep = self.frep[vs, :maxf]
            valid = rep >= 0
            M[valid] = fidx[np.broadcast_to(ws[:, None], rep.shape)[valid], rep[valid]]
        fa = fidx[vs, a]
        fc = fidx[vs, c]
        rows = np.arange(len(vs))
        # mask the affected circles
        for col, ok in ((fa, fa >= 0), (fc, fc >= 0)):
            M[rows[ok], col[ok]] = -1
        counts = np.left_shift(np.int64(1), nf)
        starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
        total = int(counts.sum())
        pi = np.repeat(rows, counts)
        s = np.arange(total, dtype=np.int64) - starts[pi]
        base = np.zeros(total, dtype=np.int64)
        for i in range(maxf):
            m_i = M[pi, i]
            bit = (s >> i) & 1
            ok = (m_i >= 0) & (bit == 1)
            base[ok] |= np.left_shift(np.int64(1), m_i[ok])
        src = self.offset[vs[pi]] + s
        woff = self.offset[ws[pi]]
        sg = sign[pi]
        out_s, out_t, out_c = [], [], []

        def emit(mask, tgt, coef):
            out_s.append(src[mask])
            out_t.append(woff[mask] + tgt[mask])
            out_c.append(coef * sg[mask])

        FA, FC = fa[pi], fc[pi]
        FM = fidx[ws[pi], a]
        GA = fidx[ws[pi], a]
        GB = fidx[ws[pi], b]
        for mask, tgt, coef in saddle_terms(spec, s, base, FA, FC, FM, GA, GB, merge[pi]):
            emit(mask, tgt, coef)
        if not out_s:
            e = np.zeros(0, dtype=np.int64)
            return e, e, e
        return np.concatenate(out_s), np.concatenate(out_t), np.concatenate(out_c)

    def complex(self, spec: FrobeniusSpec = KHOVANOV) -> ChainComplex:
        igr, jgr = self.gradings()
        src, tgt, coef = self.edges(spec)
        return assemble(igr, jgr, src, tgt, coef)


def assemble(igr, jgr, src, tgt, coef) -> ChainComplex:
    """ChainComplex from coordinate arrays, summing duplicate entries."""
    n = len(igr)
    d: list[dict] = [dict() for _ in range(n)]
    for s, t, c in zip(src.tolist(), tgt.tolist(), coef.tolist()):
        row = d[s]
        w = row.get(t, 0) + c
        if w:
            row[t] = w
        else:
            row.pop(t, None)
    return ChainComplex(igr.tolist(), jgr.tolist(), d)


def check_budget(d: PlanarDiagram, budget: int) -> None:
    if (1 << len(d.crossings)) > budget:
        raise BudgetError(f"{1 << len(d.crossings)} cube vertices exceed the budget of {budget}")


def _check_knot(d: PlanarDiagram, reduced: bool, allow_links: bool) -> None:
    if reduced and not allow_links and not d.is_knot:
        raise DiagramError(
            f"reduced homology needs a knot diagram; this one has {d.n_components} components")


def build_complex(d: PlanarDiagram, spec: FrobeniusSpec = KHOVANOV, reduced: bool = True,
                  budget: int = DEFAULT_BUDGET, allow_links: bool = False) -> ChainComplex:
    """Cube-of-resolutions complex of ``d`` for the given Frobenius algebra.

    With ``reduced`` the basepoint circle is fixed to ``v_minus`` (``e`` for
    deformed algebras) and j is shifted so the unknot sits at (0, 0).
    """
    _check_knot(d, reduced, allow_links)
    return Cube(d, reduced, budget=budget).complex(spec)


# -- homology ---------------------------------------------------------------

_KH_CACHE: dict = {}


def kh_reduction(d: PlanarDiagram, budget: int = DEFAULT_BUDGET,
                 record: bool = False) -> Reduction:
    """Simplified reduced Khovanov complex (cached per diagram)."""
    check_budget(d, budget)
    key = (d.key(), "kh", record)
    hit = _KH_CACHE.get(key)
    if hit is None and not record:
        hit = _KH_CACHE.get((d.key(), "kh", True))
    if hit is not None:
        return hit
    c = build_complex(d, KHOVANOV, True, budget=budget)
    hit = simplify(c, record=record)
    _KH_CACHE[key] = hit
    return hit


def kh_dims(d: PlanarDiagram, route: str = "simplify",
            budget: int = DEFAULT_BUDGET) -> BigradedDims:
    """Reduced rational Khovanov homology dimensions.

    ``route="naive"`` takes ranks block by block on the full cube complex;
    ``"simplify"`` cancels invertible entries first.
    """
    if route == "naive":
        return homology_dims(build_complex(d, KHOVANOV, True, budget=budget))
    if route != "simplify":
        raise ValueError(f"unknown route {route!r}")
    red = kh_reduction(d, budget)
    small = red.complex
    if all(not row for row in small.d):
        return small.generator_dims()
    return homology_dims(small)


def clear_cache() -> None:
    _KH_CACHE.clear()


# -- Jones polynomial by the Kauffman bracket -------------------------------

def _laurent_mul(p: dict, q: dict) -> dict:
    out: dict = defaultdict(int)
    for a, x in p.items():
        for b, y in q.items():
            out[a + b] += x * y
    return {k: v for k, v in out.items() if v}


def jones_polynomial(d: PlanarDiagram) -> dict[int, int]:
    """Jones polynomial as {exponent of q: coefficient}, unknot = 1.

    State sum of the Kauffman bracket in A, normalised by (-A^3)^(-w) and
    then rewritten with q = A^(-2); with this convention the graded Euler
    characteristic of reduced Khovanov homology equals the result.
    """
    n = len(d.crossings)
    arcs = sorted(d.arcs)
    # bracket <D> = sum_s A^(#A - #B) delta^(loops - 1), delta = -A^2 - A^-2
    by_loops: dict[tuple[int, int], int] = defaultdict(int)
    for state in itertools.product((0, 1), repeat=n):
        parent = {v: v for v in arcs}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for cr, s in zip(d.crossings, state):
            a, b, c, e = cr.a, cr.b, cr.c, cr.d
            pairs = ((a, b), (c, e)) if s == 0 else ((a, e), (b, c))
            for x, y in pairs:
                rx, ry = find(x), find(y)
                if rx != ry:
                    parent[rx] = ry
        loops = len({find(v) for v in arcs})
        nb = sum(state)
        by_loops[(n - 2 * nb, loops)] += 1
    delta = {2: -1, -2: -1}
    bracket: dict = defaultdict(int)
    for (aexp, loops), mult in by_loops.items():
        poly = {aexp: mult}
        for _ in range(loops - 1):
            poly = _laurent_mul(poly, delta)
        for k, v in poly.items():
            bracket[k] += v
    w = d.writhe
    sign = -1 if w % 2 else 1
    out = {}
    for k, v in bracket.items():
        if v:
            e = k - 3 * w
            if e % 2:
                raise ValueError("odd A-exponent in a knot bracket")
            out[-e // 2] = out.get(-e // 2, 0) + sign * v
    return {k: v for k, v in sorted(out.items()) if v}
