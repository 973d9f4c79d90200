"""
Exact linear algebra over the rationals for chain complexes.

Coefficients are Python ints or ``fractions.Fraction``; ints are kept
wherever a value is integral because almost every entry in a Khovanov
complex is +-1 and int arithmetic is several times faster than Fraction.
Nothing in this module takes a tolerance.
"""

from __future__ import annotations

import heapq
import json
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterable, Iterator, Mapping

Rational = Fraction

Vector = dict  # sparse vector: index -> nonzero coefficient


def rational(x) -> int | Fraction:
    """Normalize to an int when integral, else a reduced Fraction."""
    if isinstance(x, int):
        return x
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else x


def _div(x, lam):
    if lam == 1:
        return x
    if lam == -1:
        return -x
    q = Fraction(x) / lam
    return q.numerator if q.denominator == 1 else q


def _norm(v):
    if type(v) is Fraction and v.denominator == 1:
        return v.numerator
    return v


# -- sparse matrices ---------------------------------------------------------

@dataclass(frozen=True)
class SparseMatrix:
    rows: int
    cols: int
    entries: Mapping[tuple[int, int], object] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (r, c), v in dict(self.entries).items():
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise IndexError(f"entry ({r}, {c}) outside {self.rows}x{self.cols}")
            if v:
                clean[(r, c)] = rational(v)
        object.__setattr__(self, "entries", clean)

    @classmethod
    def from_dense(cls, rows: list[list]) -> "SparseMatrix":
        nr = len(rows)
        nc = len(rows[0]) if rows else 0
        return cls(nr, nc, {(r, c): v for r, row in enumerate(rows)
                            for c, v in enumerate(row) if v})

    @classmethod
    def zero(cls, rows: int, cols: int) -> "SparseMatrix":
        return cls(rows, cols, {})

    @classmethod
    def identity(cls, n: int) -> "SparseMatrix":
        return cls(n, n, {(i, i): 1 for i in range(n)})

    def to_dense(self) -> list[list]:
        out = [[0] * self.cols for _ in range(self.rows)]
        for (r, c), v in self.entries.items():
            out[r][c] = v
        return out

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix(self.cols, self.rows,
                            {(c, r): v for (r, c), v in self.entries.items()})

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        by_row = defaultdict(dict)
        for (r, c), v in other.entries.items():
            by_row[r][c] = v
        out: dict = defaultdict(int)
        for (r, k), v in self.entries.items():
            for c, w in by_row.get(k, {}).items():
                out[(r, c)] += v * w
        return SparseMatrix(self.rows, other.cols, out)

    def __neg__(self):
        return SparseMatrix(self.rows, self.cols, {k: -v for k, v in self.entries.items()})

    def __eq__(self, other):
        return (isinstance(other, SparseMatrix) and self.rows == other.rows
                and self.cols == other.cols and self.entries == other.entries)

    def __hash__(self):
        return hash((self.rows, self.cols, frozenset(self.entries.items())))

    def is_zero(self) -> bool:
        return not self.entries

    def row_dicts(self) -> list[dict]:
        out = [dict() for _ in range(self.rows)]
        for (r, c), v in self.entries.items():
            out[r][c] = v
        return out


def rank(m: SparseMatrix) -> int:
    """Exact rank by fraction-free sparse elimination.

    Rows are scaled to primitive integer vectors; each step takes the
    pivot with the smallest Markowitz count (row weight - 1) * (column
    weight - 1) and updates rows as ``p*row - c*pivot_row``.
    """
    rows = []
    for r in m.row_dicts():
        if r:
            rows.append(_primitive(r))
    return _rank_rows(rows)


def _primitive(row: dict) -> dict:
    den = 1
    for v in row.values():
        if type(v) is Fraction:
            den = den * v.denominator // gcd(den, v.denominator)
    ints = {k: int(v * den) for k, v in row.items()}
    g = 0
    for v in ints.values():
        g = gcd(g, v)
    if g > 1:
        ints = {k: v // g for k, v in ints.items()}
    return ints


def _rank_rows(rows: list[dict]) -> int:
    live = {i: r for i, r in enumerate(rows) if r}
    cols: dict[int, set] = defaultdict(set)
    for i, r in live.items():
        for c in r:
            cols[c].add(i)
    heap = []
    for i, r in live.items():
        for c in r:
            heap.append(((len(r) - 1) * (len(cols[c]) - 1), i, c))
    heapq.heapify(heap)
    rk = 0
    while heap:
        cost, i, c = heapq.heappop(heap)
        r = live.get(i)
        if r is None or c not in r:
            continue
        now = (len(r) - 1) * (len(cols[c]) - 1)
        if now != cost:
            heapq.heappush(heap, (now, i, c))
            continue
        rk += 1
        p = r[c]
        del live[i]
        for cc in r:
            cols[cc].discard(i)
        for k in list(cols[c]):
            rk_row = live[k]
            q = rk_row[c]
            new = {}
            for cc, v in rk_row.items():
                new[cc] = p * v
            for cc, v in r.items():
                new[cc] = new.get(cc, 0) - q * v
            new = {cc: v for cc, v in new.items() if v}
            for cc in rk_row:
                if cc not in new:
                    cols[cc].discard(k)
            if new:
                new = _primitive(new)
                live[k] = new
                for cc in new:
                    cols[cc].add(k)
                for cc in new:
                    heapq.heappush(heap, ((len(new) - 1) * (len(cols[cc]) - 1), k, cc))
            else:
                del live[k]
    return rk


# -- small dense subspace helpers (used for spectral sequence pages) -------

def row_reduce(vectors: Iterable[Mapping]) -> list[dict]:
    """Echelon basis (as sparse dicts) of the span of ``vectors``."""
    basis: dict = {}  # pivot index -> row with leading 1 at pivot
    for v in vectors:
        w = {k: Fraction(x) for k, x in v.items() if x}
        while w:
            piv = min(w)
            if piv in basis:
                f = w[piv]
                for k, x in basis[piv].items():
                    y = w.get(k, 0) - f * x
                    if y:
                        w[k] = y
                    else:
                        w.pop(k, None)
            else:
                f = w[piv]
                w = {k: x / f for k, x in w.items()}
                # keep basis fully reduced at this pivot
                for q, row in basis.items():
                    if piv in row:
                        g = row[piv]
                        for k, x in w.items():
                            y = row.get(k, 0) - g * x
                            if y:
                                row[k] = y
                            else:
                                row.pop(k, None)
                basis[piv] = w
                break
    return [basis[k] for k in sorted(basis)]


def span_dim(vectors: Iterable[Mapping]) -> int:
    return len(row_reduce(vectors))


def kernel_basis(columns: Mapping[object, Mapping], domain: list) -> list[dict]:
    """Basis of the kernel of the linear map sending domain element ``g``
    to the sparse vector ``columns[g]``.  Vectors are dicts over ``domain``."""
    # Gaussian elimination on augmented rows [image | identity]
    idx = {g: n for n, g in enumerate(domain)}
    tag = object()
    rows = []
    for g in domain:
        img = {("i", k): Fraction(v) for k, v in columns.get(g, {}).items() if v}
        img[("z", idx[g])] = Fraction(1)
        rows.append(img)
    order_key = lambda k: (0 if k[0] == "i" else 1, repr(k[1]) if k[0] == "i" else k[1])
    pivots: dict = {}
    kernel = []
    for w in rows:
        w = dict(w)
        while True:
            img_keys = [k for k in w if k[0] == "i"]
            if not img_keys:
                kernel.append({domain[k[1]]: v for k, v in w.items()})
                break
            piv = min(img_keys, key=order_key)
            if piv in pivots:
                prow = pivots[piv]
                f = w[piv]
                for k, x in prow.items():
                    y = w.get(k, 0) - f * x
                    if y:
                        w[k] = y
                    else:
                        w.pop(k, None)
            else:
                f = w[piv]
                pivots[piv] = {k: x / f for k, x in w.items()}
                break
    del tag
    return kernel


# -- bigraded dimensions ------------------------------------------------------

class BigradedDims(Mapping):
    """Finitely supported map (i, j) -> positive dimension."""

    def __init__(self, data: Mapping[tuple[int, int], int] | Iterable = ()):
        d: dict[tuple[int, int], int] = {}
        items = data.items() if isinstance(data, Mapping) else data
        for key, v in items:
            i, j = key
            v = int(v)
            if v < 0:
                raise ValueError(f"negative dimension at {(i, j)}")
            if v:
                d[(int(i), int(j))] = d.get((int(i), int(j)), 0) + v
        self._d = dict(sorted(d.items()))

    def __getitem__(self, key):
        return self._d.get(tuple(key), 0)

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self._d)

    def __len__(self) -> int:
        return len(self._d)

    def __contains__(self, key):
        return tuple(key) in self._d

    def __eq__(self, other):
        if isinstance(other, BigradedDims):
            return self._d == other._d
        if isinstance(other, Mapping):
            return self._d == BigradedDims(other)._d
        return NotImplemented

    def __hash__(self):
        return hash(tuple(self._d.items()))

    def __repr__(self):
        inner = ", ".join(f"({i},{j}): {v}" for (i, j), v in self._d.items())
        return f"BigradedDims({{{inner}}})"

    @property
    def total(self) -> int:
        return sum(self._d.values())

    def support(self) -> list[tuple[int, int]]:
        return list(self._d)

    def mirror(self) -> "BigradedDims":
        return BigradedDims({(-i, -j): v for (i, j), v in self._d.items()})

    def shift(self, di: int, dj: int) -> "BigradedDims":
        return BigradedDims({(i + di, j + dj): v for (i, j), v in self._d.items()})

    def by_delta(self) -> dict[tuple[int, int], int]:
        """Same data keyed by (i, j - i), the coordinates of the usual grid plot."""
        return {(i, j - i): v for (i, j), v in self._d.items()}

    def poincare(self) -> dict[int, int]:
        """Graded Euler characteristic sum (-1)^i q^j dim, as {j: coeff}."""
        out: dict[int, int] = defaultdict(int)
        for (i, j), v in self._d.items():
            out[j] += (-1) ** (i % 2) * v
        return {j: c for j, c in sorted(out.items()) if c}

    def to_json_obj(self) -> list[dict]:
        return [{"i": i, "j": j, "dim": v} for (i, j), v in self._d.items()]

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True)

    @classmethod
    def from_json_obj(cls, obj) -> "BigradedDims":
        return cls({(e["i"], e["j"]): e["dim"] for e in obj})


# -- chain complexes ------------------------------------------------------------

class ComplexError(ValueError):
    pass


class ChainComplex:
    """Bigraded rational chain complex, differential of homological degree +1.

    ``d[g]`` is the sparse image of generator ``g``.  Generators carry an
    homological grading ``igr[g]`` and a quantum grading ``jgr[g]``; the
    differential may raise ``j`` (filtered complexes) but never lowers it.
    """

    def __init__(self, igr: list[int], jgr: list[int], d: list[dict],
                 labels: list | None = None):
        if not (len(igr) == len(jgr) == len(d)):
            raise ComplexError("grading and differential lengths differ")
        self.igr = list(igr)
        self.jgr = list(jgr)
        self.d = d
        self.labels = labels

    def __len__(self) -> int:
        return len(self.igr)

    @property
    def size(self) -> int:
        return len(self.igr)

    def generators(self, i: int, j: int | None = None) -> list[int]:
        return [g for g in range(len(self.igr))
                if self.igr[g] == i and (j is None or self.jgr[g] == j)]

    def generator_dims(self) -> BigradedDims:
        return BigradedDims(((self.igr[g], self.jgr[g]), 1) for g in range(len(self.igr)))

    def j_degrees(self) -> set[int]:
        return {self.jgr[t] - self.jgr[s] for s in range(len(self.d)) for t in self.d[s]}

    def is_homogeneous(self) -> bool:
        return all(self.jgr[t] == self.jgr[s] for s in range(len(self.d)) for t in self.d[s])

    def matrix(self, i: int, j: int | None = None) -> tuple[SparseMatrix, list[int], list[int]]:
        """Differential from degree ``i`` to ``i+1`` (restricted to one
        j-block when ``j`` is given), with row and column generator lists."""
        src = self.generators(i, j)
        tgt = self.generators(i + 1, j)
        ti = {g: n for n, g in enumerate(tgt)}
        ent = {}
        for n, s in enumerate(src):
            for t, v in self.d[s].items():
                if t in ti:
                    ent[(ti[t], n)] = v
        return SparseMatrix(len(tgt), len(src), ent), src, tgt

    def apply(self, vec: Mapping) -> dict:
        out: dict = {}
        for g, c in vec.items():
            for t, v in self.d[g].items():
                w = out.get(t, 0) + c * v
                if w:
                    out[t] = _norm(w)
                else:
                    out.pop(t, None)
        return out

    def check(self) -> None:
        """Verify gradings and d o d = 0; report the first failing (i, j)."""
        for s, row in enumerate(self.d):
            for t in row:
                if self.igr[t] != self.igr[s] + 1:
                    raise ComplexError(
                        f"differential entry {s}->{t} has homological degree "
                        f"{self.igr[t] - self.igr[s]}")
                if self.jgr[t] < self.jgr[s]:
                    raise ComplexError(f"differential entry {s}->{t} lowers j")
        for s in sorted(range(len(self.d)), key=lambda g: (self.igr[g], self.jgr[g])):
            if self.apply(self.d[s]):
                raise ComplexError(
                    f"d o d != 0 at bigrading ({self.igr[s]}, {self.jgr[s]})")

    def filtration_part(self, k: int) -> "ChainComplex":
        """Keep only the entries raising j by exactly ``k``."""
        d = [{t: v for t, v in row.items() if self.jgr[t] - self.jgr[s] == k}
             for s, row in enumerate(self.d)]
        return ChainComplex(self.igr, self.jgr, d, self.labels)


def homology_dims(c: ChainComplex) -> BigradedDims:
    """Exact bigraded homology of a complex with j-preserving differential."""
    for s, row in enumerate(c.d):
        for t in row:
            if c.jgr[t] != c.jgr[s]:
                raise ComplexError(
                    "homology_dims needs a j-preserving differential; "
                    "use total_homology_dims for filtered complexes")
    blocks: dict = defaultdict(list)
    for g in range(c.size):
        blocks[(c.igr[g], c.jgr[g])].append(g)
    ranks: dict = {}
    for (i, j), gens in blocks.items():
        tgt = blocks.get((i + 1, j), [])
        if not tgt:
            ranks[(i, j)] = 0
            continue
        ti = {g: n for n, g in enumerate(tgt)}
        ent = {}
        for n, s in enumerate(gens):
            for t, v in c.d[s].items():
                ent[(ti[t], n)] = v
        ranks[(i, j)] = rank(SparseMatrix(len(tgt), len(gens), ent))
    # d o d check on each block composite
    out = {}
    for (i, j), gens in blocks.items():
        dim = len(gens) - ranks[(i, j)] - ranks.get((i - 1, j), 0)
        if dim < 0:
            raise ComplexError(f"d o d != 0 at bigrading ({i}, {j})")
        out[(i, j)] = dim
    return BigradedDims(out)


def total_homology_dims(c: ChainComplex) -> dict[int, int]:
    """Homology by homological degree only (any j-behaviour)."""
    by_i: dict = defaultdict(list)
    for g in range(c.size):
        by_i[c.igr[g]].append(g)
    ranks = {}
    for i, gens in by_i.items():
        tgt = by_i.get(i + 1, [])
        ti = {g: n for n, g in enumerate(tgt)}
        ent = {}
        for n, s in enumerate(gens):
            for t, v in c.d[s].items():
                ent[(ti[t], n)] = v
        ranks[i] = rank(SparseMatrix(len(tgt), len(gens), ent)) if tgt else 0
    out = {}
    for i, gens in sorted(by_i.items()):
        dim = len(gens) - ranks[i] - ranks.get(i - 1, 0)
        if dim:
            out[i] = dim
    return out


# -- Gaussian elimination -----------------------------------------------------

@dataclass
class Reduction:
    """Result of :func:`simplify`: a smaller homotopy-equivalent complex and
    the maps relating it to the original.

    ``survivors[k]`` is the original generator behind reduced generator
    ``k``.  When steps were recorded, :meth:`project` is the chain map
    original -> reduced and :meth:`include` the chain map reduced ->
    original; ``project(include(v)) == v``.
    """

    complex: ChainComplex
    survivors: list[int]
    original_size: int
    steps: list | None = None
    _pos: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._pos = {g: k for k, g in enumerate(self.survivors)}

    @property
    def recorded(self) -> bool:
        return self.steps is not None

    def project(self, vec: Mapping) -> dict:
        if self.steps is None:
            raise ComplexError("simplify was run without record=True")
        v = {g: c for g, c in vec.items() if c}
        for a, b, lam, row, _col in self.steps:
            v.pop(a, None)
            c = v.pop(b, 0)
            if c:
                f = -_div(c, lam)
                for y, dy in row:
                    w = v.get(y, 0) + f * dy
                    if w:
                        v[y] = _norm(w)
                    else:
                        v.pop(y, None)
        pos = self._pos
        out = {}
        for g, c in v.items():
            if g not in pos:
                raise ComplexError(f"projection left non-surviving generator {g}")
            out[pos[g]] = c
        return out

    def include(self, vec: Mapping) -> dict:
        if self.steps is None:
            raise ComplexError("simplify was run without record=True")
        v = {self.survivors[k]: c for k, c in vec.items() if c}
        for a, b, lam, _row, col in reversed(self.steps):
            g = 0
            for x, gx in col:
                cx = v.get(x)
                if cx:
                    g += cx * gx
            if g:
                v[a] = _norm(-_div(g, lam))
        return v


def _cancel(R: list, C: list, a: int, b: int, steps: list | None) -> list[int]:
    """Cancel the invertible entry a -> b in place; return the rows changed.

    ``R[x]`` is the sparse image of ``x`` and ``C[y]`` the sparse column of
    ``y``; both are kept in sync.  The new differential is
    ``d - d(.)_b * lam^-1 * (d(a) - lam b)``.
    """
    ra = R[a]
    cb = C[b]
    lam = ra[b]
    if steps is not None:
        steps.append((a, b, lam,
                      tuple((y, v) for y, v in ra.items() if y != b),
                      tuple((x, v) for x, v in cb.items() if x != a)))
    touched = []
    for x, gx in cb.items():
        if x == a:
            continue
        f = -_div(gx, lam)
        rx = R[x]
        for y, dy in ra.items():
            if y == b:
                continue
            w = rx.get(y, 0) + f * dy
            if w:
                if type(w) is not int:
                    w = _norm(w)
                rx[y] = w
                C[y][x] = w
            else:
                del rx[y]
                del C[y][x]
        del rx[b]
        touched.append(x)
    for y in ra:
        if y != b:
            del C[y][a]
    for y in R[b]:
        del C[y][b]
    for x in C[a]:
        del R[x][a]
    R[a] = {}
    R[b] = {}
    C[a] = {}
    C[b] = {}
    return touched


def _reduction(c: ChainComplex, R: list, alive, steps) -> Reduction:
    survivors = [g for g in range(c.size) if alive[g]]
    pos = {g: k for k, g in enumerate(survivors)}
    d = [{pos[t]: v for t, v in R[g].items()} for g in survivors]
    labels = [c.labels[g] for g in survivors] if c.labels is not None else None
    small = ChainComplex([c.igr[g] for g in survivors], [c.jgr[g] for g in survivors],
                         d, labels)
    return Reduction(small, survivors, c.size, steps)


def _rows_cols(c: ChainComplex) -> tuple[list, list]:
    R = [dict(row) for row in c.d]
    C: list[dict] = [dict() for _ in range(c.size)]
    for s, row in enumerate(R):
        for t, v in row.items():
            C[t][s] = v
    return R, C


def simplify(c: ChainComplex, record: bool = False) -> Reduction:
    """Cancel invertible differential entries between generators of equal
    quantum grading (Gaussian elimination).

    Works for both j-preserving and filtered complexes: only entries of
    j-degree 0 are used as pivots, so the result is filtered homotopy
    equivalent and the cancelled pairs never change the spectral sequence
    from the Khovanov page on.  Blocks are processed from the top quantum
    grading down; within a block the pivot minimises the Markowitz count.
    """
    n = c.size
    jg = c.jgr
    R, C = _rows_cols(c)
    alive = bytearray(b"\x01") * n
    steps: list | None = [] if record else None
    blocks: dict = defaultdict(list)
    for g in range(n):
        blocks[jg[g]].append(g)
    heappush, heappop = heapq.heappush, heapq.heappop
    for J in sorted(blocks, reverse=True):
        heap = []
        for a in blocks[J]:
            ra = R[a]
            la = len(ra) - 1
            for b in ra:
                if jg[b] == J:
                    heap.append((la * (len(C[b]) - 1), a, b))
        heapq.heapify(heap)
        while heap:
            cost, a, b = heappop(heap)
            if not alive[a] or not alive[b]:
                continue
            ra = R[a]
            if b not in ra:
                continue
            now = (len(ra) - 1) * (len(C[b]) - 1)
            if now != cost:
                heappush(heap, (now, a, b))
                continue
            touched = _cancel(R, C, a, b, steps)
            alive[a] = 0
            alive[b] = 0
            for x in touched:
                if jg[x] == J:
                    rx = R[x]
                    lx = len(rx) - 1
                    for y in rx:
                        if jg[y] == J:
                            heappush(heap, (lx * (len(C[y]) - 1), x, y))
    return _reduction(c, R, alive, steps)


def eliminate_pairs(c: ChainComplex, pairs, record: bool = True) -> Reduction:
    """Cancel the prescribed pairs ``(a, b)`` in order.

    Each entry ``a -> b`` must still be nonzero when its turn comes;
    otherwise :class:`ComplexError` is raised.
    """
    R, C = _rows_cols(c)
    alive = bytearray(b"\x01") * c.size
    steps: list | None = [] if record else None
    for a, b in pairs:
        if not (alive[a] and alive[b]) or b not in R[a]:
            raise ComplexError(f"pair {a} -> {b} is not an invertible entry")
        _cancel(R, C, a, b, steps)
        alive[a] = 0
        alive[b] = 0
    return _reduction(c, R, alive, steps)
