"""
Movies of elementary cobordisms and the maps they induce.

A movie is a start diagram plus a list of moves.  Every move keeps the
basepoint on a named arc, so each slice is a basepointed diagram and the
reduced complexes of consecutive slices are linked by explicit chain maps:

* ``BIRTH l``: add a crossing-free circle labelled ``l``; ``v -> v (x) v_plus``.
* ``DEATH l``: remove the loop ``l``; the counit on that circle.
* ``SADDLE p q``: a band between arcs ``p`` and ``q``.  Both crossing arcs:
  the heads of the two arcs are exchanged.  ``q`` an existing loop: the loop
  is absorbed into ``p``.  ``q`` an unused label: a loop ``q`` splits off
  ``p``.  The map is multiplication or comultiplication vertex by vertex.
* ``R1``, ``R2`` and their inverses: chain homotopy equivalences obtained
  by cancelling the new crossings' directions of the cube, then matching
  the survivors with the smaller complex and checking the differentials
  agree exactly.
* ``R3``: the diagram move; no chain map is provided.

Arguments are resolved on construction (fresh labels, variants and
positions become explicit), so a movie's text form is unambiguous and
``reverse`` is an involution.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Mapping

import numpy as np

from .diagram import Crossing, DiagramError, PlanarDiagram, faces, parse_pd
from .exactalg import ChainComplex, Reduction, SparseMatrix, eliminate_pairs, rank
from .khovanov import (DEFAULT_BUDGET, KHOVANOV, Cube, FrobeniusSpec, _popcount,
                       kh_reduction, saddle_terms)

KINDS = ("BIRTH", "DEATH", "SADDLE", "R1", "R1INV", "R2", "R2INV", "R3")
R_KINDS = ("R1", "R1INV", "R2", "R2INV", "R3")


class MoveError(ValueError):
    """A move does not apply to the slice it is applied to."""

    def __init__(self, message: str, index: int | None = None):
        where = f"move {index + 1}: " if index is not None else ""
        super().__init__(where + message)
        self.index = index


@dataclass(frozen=True)
class ElementaryMove:
    kind: str
    args: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise MoveError(f"unknown move {self.kind!r}")
        object.__setattr__(self, "args", tuple(self.args))

    def to_text(self) -> str:
        parts = [self.kind]
        for v in self.args:
            if self.kind == "R1" and isinstance(v, str):
                parts.append(v)
            elif self.kind == "R1" and v in (1, -1) and len(parts) == 2:
                parts.append("+" if v > 0 else "-")
            else:
                parts.append(str(v))
        return " ".join(parts)

    def __str__(self) -> str:
        return self.to_text()

    @property
    def is_reidemeister(self) -> bool:
        return self.kind in R_KINDS


def parse_move(line: str) -> ElementaryMove:
    parts = line.split()
    if not parts:
        raise MoveError("empty move line")
    kind = parts[0].upper()
    rest = parts[1:]
    try:
        if kind == "R1":
            args: list = []
            for k, tok in enumerate(rest):
                if k == 1 and tok in "+-":
                    args.append(1 if tok == "+" else -1)
                elif k == 2 and tok in ("under", "over"):
                    args.append(tok)
                else:
                    args.append(int(tok))
            return ElementaryMove(kind, tuple(args))
        return ElementaryMove(kind, tuple(int(t) for t in rest))
    except ValueError as e:
        if isinstance(e, MoveError):
            raise
        raise MoveError(f"bad arguments in {line.strip()!r}") from None


# -- diagram surgery -----------------------------------------------------------

def _tuple_for(u_in, u_out, o_in, o_out, sign):
    if sign > 0:
        return (u_in, o_out, u_out, o_in)
    return (u_in, o_in, u_out, o_out)


def _rebuild(rows: list, loops: Iterable[int], basepoint: int) -> PlanarDiagram:
    crossings = tuple(Crossing(*r[:4], sign=r[4]) for r in rows)
    return PlanarDiagram(crossings, tuple(loops), basepoint)


def _rows(d: PlanarDiagram) -> list:
    return [[c.a, c.b, c.c, c.d, c.sign] for c in d.crossings]


def _fresh(d: PlanarDiagram, k: int) -> list[int]:
    top = max(d.arcs)
    return list(range(top + 1, top + 1 + k))


def _crossing_index(d: PlanarDiagram, c) -> int:
    c = int(c)
    if not 1 <= c <= len(d.crossings):
        raise MoveError(f"no crossing {c}")
    return c - 1


def _planar_or_fail(d: PlanarDiagram, what: str) -> PlanarDiagram:
    if not d.is_planar:
        raise MoveError(what)
    return d


def _birth(d, args):
    (lab,) = args if args else (_fresh(d, 1)[0],)
    if lab in d.arcs or lab <= 0:
        raise MoveError(f"birth label {lab} is not fresh")
    return d.with_loops(d.loops + (lab,)), ElementaryMove("BIRTH", (lab,))


def _death(d, args):
    if len(args) != 1:
        raise MoveError("DEATH takes one circle label")
    (lab,) = args
    if lab not in d.loops:
        raise MoveError(f"circle {lab} is not a crossing-free loop")
    if lab == d.basepoint:
        raise MoveError(f"circle {lab} carries the basepoint")
    loops = tuple(v for v in d.loops if v != lab)
    if not loops and not d.crossings:
        raise MoveError("cannot remove the last component")
    return PlanarDiagram(d.crossings, loops, d.basepoint), ElementaryMove("DEATH", (lab,))


def saddle_kind(d: PlanarDiagram, p: int, q: int) -> str:
    if p not in d.arcs:
        raise MoveError(f"arc {p} is not in the diagram")
    if p == q:
        raise MoveError("a saddle needs two different arcs")
    if q not in d.arcs:
        return "split"
    if q in d.loops:
        return "merge"
    if p in d.loops:
        raise MoveError(f"the absorbed loop must be the second argument, got arc {q}")
    return "swap"


def _saddle(d, args):
    if len(args) != 2:
        raise MoveError("SADDLE takes two arc labels")
    p, q = args
    kind = saddle_kind(d, p, q)
    if kind == "split":
        if q <= 0:
            raise MoveError("labels must be positive")
        new = d.with_loops(d.loops + (q,))
    elif kind == "merge":
        bp = p if d.basepoint == q else d.basepoint
        new = PlanarDiagram(d.crossings, tuple(v for v in d.loops if v != q), bp)
    else:
        rows = _rows(d)
        (xp, pp), (xq, pq) = d.head(p), d.head(q)
        rows[xp][pp] = q
        rows[xq][pq] = p
        try:
            new = _rebuild(rows, d.loops, d.basepoint)
        except DiagramError as e:
            raise MoveError(f"saddle {p} {q}: {e}") from None
        _planar_or_fail(new, f"arcs {p} and {q} do not bound a common face "
                             "with opposite orientations")
    return new, ElementaryMove("SADDLE", (p, q))


_R1_VARIANTS = {  # (sign, first) -> tuple pattern over (x, x2, k)
    (1, "under"): lambda x, x2, k: (x, x2, k, k),
    (-1, "under"): lambda x, x2, k: (x, k, k, x2),
    (1, "over"): lambda x, x2, k: (k, k, x2, x),
    (-1, "over"): lambda x, x2, k: (k, x, x2, k),
}


def _r1(d, args):
    if not args:
        raise MoveError("R1 needs an arc")
    x = args[0]
    sign = args[1] if len(args) > 1 else 1
    first = args[2] if len(args) > 2 else "under"
    pos = args[3] if len(args) > 3 else len(d.crossings) + 1
    if x not in d.arcs:
        raise MoveError(f"arc {x} is not in the diagram")
    if (sign, first) not in _R1_VARIANTS:
        raise MoveError(f"bad R1 variant {sign} {first}")
    if not 1 <= pos <= len(d.crossings) + 1:
        raise MoveError(f"bad crossing position {pos}")
    is_loop = x in d.loops
    if len(args) > 5:
        k, x2 = args[4], args[5]
    else:
        k, x2 = _fresh(d, 2)
        if is_loop:
            x2 = x
    if is_loop:
        x2 = x
    for lab in {k, x2} - {x}:
        if lab in d.arcs:
            raise MoveError(f"label {lab} is already used")
    rows = _rows(d)
    loops = list(d.loops)
    if is_loop:
        loops.remove(x)
    else:
        xh, ph = d.head(x)
        rows[xh][ph] = x2
    t = _R1_VARIANTS[(sign, first)](x, x2, k)
    rows.insert(pos - 1, [*t, sign])
    bp = d.basepoint
    # optional last argument: put the basepoint on the arc after the kink
    if len(args) > 6 and args[6] != bp:
        if args[6] != x2 or bp != x:
            raise MoveError(f"R1 can only move the basepoint from arc {x} to arc {x2}")
        bp = x2
    new = _rebuild(rows, loops, bp)
    _planar_or_fail(new, f"R1 on arc {x} gave a non-planar diagram")
    explicit = (x, sign, first, pos, k, x2) + ((bp,) if bp != d.basepoint else ())
    return new, ElementaryMove("R1", explicit)


def _r1inv(d, args):
    if len(args) != 1:
        raise MoveError("R1INV takes one crossing")
    c = _crossing_index(d, args[0])
    cr = d.crossings[c]
    L = cr.labels
    found = []
    if cr.sign > 0 and L[2] == L[3]:
        found.append((1, "under", L[0], L[1], L[2]))
    if cr.sign < 0 and L[1] == L[2]:
        found.append((-1, "under", L[0], L[3], L[1]))
    if cr.sign > 0 and L[0] == L[1]:
        found.append((1, "over", L[3], L[2], L[0]))
    if cr.sign < 0 and L[0] == L[3]:
        found.append((-1, "over", L[1], L[2], L[0]))
    if not found:
        raise MoveError(f"crossing {c + 1} is not a kink")
    # a one-crossing loop reads as a kink both ways; keep the basepoint outside
    found = [f for f in found if f[4] != d.basepoint] or found
    sign, first, x, x2, k = found[0]
    if d.basepoint == k:
        raise MoveError("the basepoint sits on the kink loop; move it first")
    rows = _rows(d)
    del rows[c]
    loops = list(d.loops)
    if x == x2:
        loops.append(x)
    else:
        for r in rows:
            for p in range(4):
                if r[p] == x2:
                    r[p] = x
    inverse = (x, sign, first, c + 1, k, x2)
    bp = d.basepoint
    if bp == x2 and x != x2:
        bp = x
        inverse += (x2,)
    new = _rebuild(rows, loops, bp)
    return new, ElementaryMove("R1INV", (c + 1,)), ("R1", inverse)


def _r2_rows(d, x, y, variant, p1, p2, x2, x3, y2, y3):
    rows = _rows(d)
    loops = list(d.loops)
    for arc, new in ((x, x3), (y, y3)):
        if arc in d.loops:
            loops.remove(arc)
        else:
            h, p = d.head(arc)
            rows[h][p] = new
    yfirst = variant & 1 == 0
    sig = 1 if variant < 2 else -1
    if yfirst:
        u1, u2 = (y, y2), (y2, y3)
    else:
        u1, u2 = (y2, y3), (y, y2)
    c1 = [*_tuple_for(u1[0], u1[1], x, x2, sig), sig]
    c2 = [*_tuple_for(u2[0], u2[1], x2, x3, -sig), -sig]
    for pos, row in sorted(((p1, c1), (p2, c2))):
        rows.insert(pos - 1, row)
    return rows, loops


def _r2(d, args):
    if len(args) < 2:
        raise MoveError("R2 needs two arcs")
    x, y = args[0], args[1]
    for a in (x, y):
        if a not in d.arcs:
            raise MoveError(f"arc {a} is not in the diagram")
    if x == y:
        raise MoveError("R2 needs two different arcs")
    n = len(d.crossings)
    p1 = args[3] if len(args) > 3 else n + 1
    p2 = args[4] if len(args) > 4 else n + 2
    if sorted((p1, p2)) != sorted(set((p1, p2))) or not (1 <= min(p1, p2) and max(p1, p2) <= n + 2):
        raise MoveError("bad crossing positions")
    if len(args) > 8:
        x2, x3, y2, y3 = args[5:9]
    else:
        x2, x3, y2, y3 = _fresh(d, 4)
    if x in d.loops:
        x3 = x
    if y in d.loops:
        y3 = y
    variants = [args[2]] if len(args) > 2 else [0, 1, 2, 3]
    last = None
    for v in variants:
        if v not in (0, 1, 2, 3):
            raise MoveError(f"bad R2 variant {v}")
        rows, loops = _r2_rows(d, x, y, v, p1, p2, x2, x3, y2, y3)
        try:
            new = _rebuild(rows, loops, d.basepoint)
        except DiagramError as e:
            last = str(e)
            continue
        if new.is_planar:
            return new, ElementaryMove("R2", (x, y, v, p1, p2, x2, x3, y2, y3))
        last = "non-planar"
    raise MoveError(f"arcs {x} and {y} do not share a face ({last})")


def _r2inv(d, args):
    if len(args) != 2:
        raise MoveError("R2INV takes two crossings")
    ca, cb = (_crossing_index(d, v) for v in args)
    if ca == cb:
        raise MoveError("R2INV needs two different crossings")
    A, B = d.crossings[ca], d.crossings[cb]
    # C1 is where the over-strand enters the bigon
    if A.over_out == B.over_in:
        i1, i2, C1, C2 = ca, cb, A, B
    elif B.over_out == A.over_in:
        i1, i2, C1, C2 = cb, ca, B, A
    else:
        raise MoveError(f"crossings {ca + 1} and {cb + 1} do not share an over-strand bigon")
    x, x2, x3 = C1.over_in, C1.over_out, C2.over_out
    if C1.c == C2.a:
        yfirst, y, y2, y3 = True, C1.a, C1.c, C2.c
    elif C2.c == C1.a:
        yfirst, y, y2, y3 = False, C2.a, C2.c, C1.c
    else:
        raise MoveError(f"crossings {ca + 1} and {cb + 1} do not share an under-strand bigon")
    if C1.sign == C2.sign:
        raise MoveError("bigon crossings have equal signs")
    if d.basepoint in (x2, y2):
        raise MoveError("the basepoint sits inside the bigon; move it first")
    variant = (0 if yfirst else 1) + (0 if C1.sign > 0 else 2)
    rows = _rows(d)
    for i in sorted((i1, i2), reverse=True):
        del rows[i]
    loops = list(d.loops)
    for keep, drop in ((x, x3), (y, y3)):
        if keep == drop:
            loops.append(keep)
        else:
            for r in rows:
                for p in range(4):
                    if r[p] == drop:
                        r[p] = keep
    bp = {x3: x, y3: y}.get(d.basepoint, d.basepoint)
    new = _rebuild(rows, loops, bp)
    inv = ("R2", (x, y, variant, i1 + 1, i2 + 1, x2, x3, y2, y3))
    return new, ElementaryMove("R2INV", (args[0], args[1])), inv


def _r3(d, args):
    if len(args) != 3 or len(set(args)) != 3:
        raise MoveError("R3 takes three different crossings")
    idx = [_crossing_index(d, v) for v in args]
    cr = [d.crossings[i] for i in idx]
    # each strand pass: (crossing slot, in label, out label, over?)
    passes = []
    for s, c in enumerate(cr):
        passes.append((s, c.a, c.c, False))
        passes.append((s, c.over_in, c.over_out, True))
    # the triangle must be a face; its sides join the strand passes
    tuples = [c.labels for c in d.crossings]
    sides = None
    for face in faces(tuples):
        if len(face) == 3 and {x for x, _ in face} == set(idx):
            sides = [tuples[x][p] for x, p in face]
            break
    if sides is None:
        raise MoveError("crossings do not bound a triangular face")
    strands = []
    for lab in sides:
        i = [k for k, ps in enumerate(passes) if ps[2] == lab]
        j = [k for k, ps in enumerate(passes) if ps[1] == lab]
        if len(i) != 1 or len(j) != 1:
            raise MoveError("triangle side is not a strand segment")
        strands.append((i[0], j[0]))
    heights = [passes[i][3] + passes[j][3] for i, j in strands]
    if sorted(heights) != [0, 1, 2]:
        raise MoveError("triangle is not an R3 configuration")
    rows = _rows(d)
    newpass = {}
    for i, j in strands:
        s, pin, side, _ = passes[i]
        t, _, pout, _ = passes[j]
        # the strand now meets slot t first and slot s second
        newpass[j] = (pin, side)
        newpass[i] = (side, pout)
    for s in range(3):
        under = newpass[2 * s]
        over = newpass[2 * s + 1]
        sign = cr[s].sign
        rows[idx[s]] = [*_tuple_for(under[0], under[1], over[0], over[1], sign), sign]
    try:
        new = _rebuild(rows, d.loops, d.basepoint)
    except DiagramError as e:
        raise MoveError(f"R3: {e}") from None
    _planar_or_fail(new, "R3 triangle is not a face of the diagram")
    return new, ElementaryMove("R3", tuple(args))


_APPLY = {"BIRTH": _birth, "DEATH": _death, "SADDLE": _saddle, "R1": _r1,
          "R1INV": _r1inv, "R2": _r2, "R2INV": _r2inv, "R3": _r3}


def apply_move(d: PlanarDiagram, move: ElementaryMove):
    """Apply one move; returns (new diagram, move with explicit arguments)."""
    out = _APPLY[move.kind](d, move.args)
    return out[0], out[1]


def _inverse_of(d_before: PlanarDiagram, move: ElementaryMove) -> ElementaryMove:
    """The move undoing ``move`` (which was applied to ``d_before``)."""
    k, a = move.kind, move.args
    if k == "BIRTH":
        return ElementaryMove("DEATH", a)
    if k == "DEATH":
        return ElementaryMove("BIRTH", a)
    if k in ("SADDLE", "R3"):
        return move
    if k == "R1":
        return ElementaryMove("R1INV", (a[3],))
    if k == "R2":
        return ElementaryMove("R2INV", (a[3], a[4]))
    if k == "R1INV":
        return ElementaryMove("R1", _r1inv(d_before, a)[2][1])
    if k == "R2INV":
        return ElementaryMove("R2", _r2inv(d_before, a)[2][1])
    raise MoveError(f"no inverse for {k}")


# -- movies ---------------------------------------------------------------------

@dataclass(frozen=True)
class Movie:
    start: PlanarDiagram
    moves: tuple = ()
    slices: tuple = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        moves = tuple(m if isinstance(m, ElementaryMove) else parse_move(m)
                      for m in self.moves)
        slices = [self.start]
        resolved = []
        for n, mv in enumerate(moves):
            try:
                d, explicit = apply_move(slices[-1], mv)
            except (MoveError, DiagramError) as e:
                raise MoveError(str(e), n) from None
            if d.basepoint not in d.arcs:
                raise MoveError("basepoint lost", n)
            slices.append(d)
            resolved.append(explicit)
        object.__setattr__(self, "moves", tuple(resolved))
        object.__setattr__(self, "slices", tuple(slices))

    @property
    def end(self) -> PlanarDiagram:
        return self.slices[-1]

    def __len__(self) -> int:
        return len(self.moves)

    def count(self, kind: str) -> int:
        return sum(1 for m in self.moves if m.kind == kind)

    def to_text(self, start_ref: str | None = None) -> str:
        head = f"START {start_ref}" if start_ref else f"START_PD {self.start.to_text()}"
        return "\n".join([head] + [m.to_text() for m in self.moves]) + "\n"


def apply_moves(m: Movie) -> PlanarDiagram:
    return m.end


def reverse(m: Movie) -> Movie:
    inv = [_inverse_of(m.slices[n], mv) for n, mv in enumerate(m.moves)]
    return Movie(m.end, tuple(reversed(inv)))


def compose(m1: Movie, m2: Movie) -> Movie:
    if m1.end.key() != m2.start.key():
        raise MoveError(f"splice mismatch: {m1.end.to_text()} vs {m2.start.to_text()}")
    return Movie(m1.start, m1.moves + m2.moves)


class NormalFormError(MoveError):
    pass


@dataclass(frozen=True)
class NormalForm:
    k: int
    l: int
    stages: tuple  # births, R-moves, saddles, R-moves, deaths


def normal_form(m: Movie) -> NormalForm:
    """Split a movie into births, R-moves, saddles, R-moves, deaths."""
    stage_of = {"BIRTH": 0, "SADDLE": 2, "DEATH": 4}
    stages: list[list] = [[] for _ in range(5)]
    cur = 0
    for n, mv in enumerate(m.moves):
        if mv.is_reidemeister:
            want = 1 if cur <= 1 else 3
            if cur == 4:
                raise NormalFormError("Reidemeister move after a death", n)
        else:
            want = stage_of[mv.kind]
        if want < cur:
            raise NormalFormError(f"{mv.kind} out of order", n)
        cur = want
        stages[want].append(mv)
    k, l, s = len(stages[0]), len(stages[4]), len(stages[2])
    if s != k + l:
        raise NormalFormError(
            f"Euler characteristic {k + l - s} != 0: {k} births, {s} saddles, {l} deaths")
    for name, d in (("start", m.start), ("end", m.end)):
        if not d.is_knot:
            raise NormalFormError(f"{name} diagram is not a knot")
    return NormalForm(k, l, tuple(tuple(st) for st in stages))


# -- movie text ------------------------------------------------------------------

def parse_movie(text: str, resolver: Callable[[str], PlanarDiagram] | None = None,
                base_dir: Path | None = None) -> Movie:
    """``START <pd-file>`` (or ``START_PD <pd text>``) then one move per line."""
    start = None
    moves = []
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        if head.upper() == "START":
            start = _resolve_start(rest.strip(), resolver, base_dir)
        elif head.upper() == "START_PD":
            start = parse_pd(rest)
        else:
            if start is None:
                raise MoveError(f"line {ln}: moves before START")
            moves.append(parse_move(line))
    if start is None:
        raise MoveError("missing START line")
    return Movie(start, tuple(moves))


def _resolve_start(ref, resolver, base_dir):
    path = Path(ref)
    if base_dir is not None and not path.is_absolute():
        path = base_dir / path
    if path.is_file():
        return parse_pd(path.read_text(encoding="utf-8"))
    if resolver is not None:
        return resolver(ref)
    raise MoveError(f"cannot find start diagram {ref!r}")


def load_movie(path, resolver=None) -> Movie:
    path = Path(path)
    return parse_movie(path.read_text(encoding="utf-8"), resolver, path.parent)


# -- chain maps --------------------------------------------------------------------

_CUBES: dict = {}


def _cube(d: PlanarDiagram, order=None) -> Cube:
    key = (d.key(), order)
    c = _CUBES.get(key)
    if c is None:
        c = Cube(d, True, order=order)
        _CUBES[key] = c
    return c


def _arrays(vec: Mapping) -> tuple[np.ndarray, np.ndarray]:
    g = np.fromiter(vec.keys(), dtype=np.int64, count=len(vec))
    c = np.empty(len(vec), dtype=object)
    c[:] = list(vec.values())
    return g, c


def _collect(pieces) -> dict:
    out: dict = {}
    for gids, coefs in pieces:
        for g, c in zip(gids.tolist(), coefs.tolist()):
            w = out.get(g, 0) + c
            if w:
                out[g] = w
            else:
                out.pop(g, None)
    return {g: (c.numerator if type(c) is Fraction and c.denominator == 1 else c)
            for g, c in out.items()}


def _decode(cube: Cube, gids: np.ndarray):
    v = cube.vertex_of(gids)
    return v, gids - cube.offset[v]


def _transport(c1: Cube, c2: Cube, v1, v2, s, skip=(), only=None) -> np.ndarray:
    """Copy circle labels from vertex ``v1`` of ``c1`` to ``v2`` of ``c2``
    through shared arc labels.  Circles of ``c1`` listed in ``skip`` (free
    indices, per entry) are left out; ``only`` restricts the arcs used."""
    out = np.zeros(len(s), dtype=np.int64)
    labels = c1.labels if only is None else [v for v in c1.labels if v in only]
    for lab in labels:
        i2 = c2.index.get(lab)
        if i2 is None:
            continue
        f1 = c1.fidx[v1, c1.index[lab]]
        f2 = c2.fidx[v2, i2]
        ok = (f1 >= 0) & (f2 >= 0)
        for sk in skip:
            ok &= f1 != sk
        ok &= ((s >> np.maximum(f1, 0)) & 1) == 1
        out[ok] |= np.left_shift(np.int64(1), f2[ok])
    return out


class _Step:
    """One move's chain map between the cubes of two slices."""

    bidegree = (0, 0)

    def __call__(self, vec: dict) -> dict:
        raise NotImplementedError


class _Birth(_Step):
    bidegree = (0, 1)

    def __init__(self, d1, d2, spec):
        self.c1, self.c2 = _cube(d1), _cube(d2)

    def __call__(self, vec):
        if not vec:
            return {}
        g, c = _arrays(vec)
        v, s = _decode(self.c1, g)
        t = _transport(self.c1, self.c2, v, v, s)
        return _collect([(self.c2.offset[v] + t, c)])


class _Death(_Step):
    bidegree = (0, 1)

    def __init__(self, d1, d2, spec, label):
        self.c1, self.c2 = _cube(d1), _cube(d2)
        self.label = label
        self.spec = spec

    def __call__(self, vec):
        if not vec:
            return {}
        g, c = _arrays(vec)
        v, s = _decode(self.c1, g)
        f = self.c1.fidx[v, self.c1.index[self.label]]
        keep = ((s >> f) & 1) == 1  # counit: v_minus -> 1, v_plus -> 0
        v, s, c = v[keep], s[keep], c[keep]
        t = _transport(self.c1, self.c2, v, v, s)
        return _collect([(self.c2.offset[v] + t, c)])


class _Saddle(_Step):
    bidegree = (0, -1)

    def __init__(self, d1, d2, spec, p, q):
        self.c1, self.c2 = _cube(d1), _cube(d2)
        self.kind = saddle_kind(d1, p, q)
        self.p, self.q = p, q
        self.spec = spec

    def __call__(self, vec):
        if not vec:
            return {}
        c1, c2 = self.c1, self.c2
        g, c = _arrays(vec)
        v, s = _decode(c1, g)
        ip = c1.index[self.p]
        FA = c1.fidx[v, ip]
        none = np.full(len(v), -1, dtype=np.int64)
        if self.kind == "split":
            merge = np.zeros(len(v), dtype=bool)
            FC = none
        else:
            iq = c1.index[self.q]
            FC = c1.fidx[v, iq]
            if self.kind == "merge":
                merge = np.ones(len(v), dtype=bool)
            else:
                merge = c1.circ[v, ip] != c1.circ[v, iq]
        FC = np.where(merge, FC, none)
        FM = c2.fidx[v, c2.index[self.p]]
        GA = FM
        GB = c2.fidx[v, c2.index[self.q]] if self.q in c2.index else none
        base = _transport(c1, c2, v, v, s, skip=(FA, FC))
        off = c2.offset[v]
        pieces = []
        for mask, tgt, k in saddle_terms(self.spec, s, base, FA, FC, FM, GA, GB, merge):
            pieces.append((off[mask] + tgt[mask], c[mask] * k))
        return _collect(pieces)


def _perm_vertices(order, n):
    """Standard vertex numbers of the vertices of a cube with bit order ``order``."""
    V = 1 << n
    v = np.arange(V, dtype=np.int64)
    out = np.zeros(V, dtype=np.int64)
    for pos, x in enumerate(order):
        out |= ((v >> pos) & 1) << x
    return out


def _twist_signs(order, n) -> np.ndarray:
    """eps(v) with eps * (signs of the reordered cube) = (standard signs) * eps."""
    V = 1 << n
    std = _perm_vertices(order, n)
    eps = np.ones(V, dtype=np.int64)
    for v in range(1, V):
        pos = (v & -v).bit_length() - 1
        u = v ^ (1 << pos)
        sp = -1 if bin(u & ((1 << pos) - 1)).count("1") & 1 else 1
        x = order[pos]
        ss = -1 if bin(int(std[u]) & ((1 << x) - 1)).count("1") & 1 else 1
        eps[v] = eps[u] * sp * ss
    return eps


class RMoveData:
    """Homotopy equivalence C(small) <-> C(big) for an R1 or R2 move.

    ``big`` is ``small`` plus the crossings at ``new`` (0-based positions
    in ``big``); ``internal`` are the arc labels created inside the move
    (kink loop arc, or the two bigon arcs).
    """

    def __init__(self, small: PlanarDiagram, big: PlanarDiagram, new: tuple,
                 internal: tuple, spec: FrobeniusSpec = KHOVANOV):
        self.small, self.big, self.spec = small, big, spec
        n = len(big.crossings)
        order = tuple([i for i in range(n) if i not in new] + list(new))
        self.order = order
        cb = Cube(big, True, order=order)
        cs = _cube(small)
        self.cb, self.cs = cb, cs
        self.cstd = _cube(big)
        cx = cb.complex(spec)
        small_cx = cs.complex(spec)
        m = len(small.crossings)
        pairs = self._pairs(cb, m, len(new), internal, big, order)
        red = eliminate_pairs(cx, pairs, record=True)
        self.red = red
        # survivors -> small generators
        sv = np.array(red.survivors, dtype=np.int64)
        if len(sv) != cs.size:
            raise MoveError(f"R-move reduction left {len(sv)} generators, expected {cs.size}")
        v, s = _decode(cb, sv)
        u = v & ((1 << m) - 1)
        t = _transport(cb, cs, v, u, s, only=set(small.arcs))
        img = cs.offset[u] + t
        if len(set(img.tolist())) != cs.size:
            raise MoveError("R-move survivors do not match the smaller diagram")
        self.phi = img.tolist()
        self.phi_inv = {g: k for k, g in enumerate(self.phi)}
        small_red = red.complex
        for k, g in enumerate(self.phi):
            if (small_red.igr[k], small_red.jgr[k]) != (small_cx.igr[g], small_cx.jgr[g]):
                raise MoveError("R-move survivor gradings do not match")
        self.scale = self._solve_scale(small_red, small_cx)
        self.eps = _twist_signs(order, n)
        self.std_vertex = _perm_vertices(order, n)
        inv = np.empty_like(self.std_vertex)
        inv[self.std_vertex] = np.arange(len(inv))
        self.perm_vertex = inv

    @staticmethod
    def _pairs(cb: Cube, m: int, k: int, internal, big, order):
        V = cb.V
        low = 1 << m
        top = [1 << (m + j) for j in range(k)]
        lab_index = cb.index
        if k == 1:
            (kk,) = internal
            ik = lab_index[kk]

            def has_o(v):
                f = cb.circ[v, ik]
                return int(np.sum(cb.circ[v] == f)) == 1
            o_bit = 1 if has_o(top[0]) else 0
            if has_o(0) == has_o(top[0]):
                raise MoveError("R1 kink circle not found")
            states_o = [top[0] * o_bit]
            e_from = top[0] * (1 - o_bit)
            if o_bit == 1:
                plan = [("split", 0, top[0])]
            else:
                plan = [("merge", 0, top[0])]
        else:
            x2, y2 = internal
            ix2, iy2 = lab_index[x2], lab_index[y2]
            kinds = {}
            for ls in range(4):
                v = ls * low
                f = cb.circ[v, ix2]
                arcs = set(np.nonzero(cb.circ[v] == f)[0].tolist())
                kinds[ls] = "O" if arcs == {ix2, iy2} else None
            # the local picture: O state is the middle vertex with the bigon circle
            o_states = [ls for ls, kd in kinds.items() if kd == "O"]
            if len(o_states) != 1 or o_states[0] not in (1, 2):
                raise MoveError("R2 bigon circle not found in a middle state")
            o = o_states[0] * low
            plan = [("split", 0, o), ("merge", o, 3 * low)]
        pairs = []
        counts = (cb.offset[1:] - cb.offset[:-1])
        for kind, lsrc, ltgt in plan:
            us = np.arange(low, dtype=np.int64)
            vsrc = us | lsrc
            vtgt = us | ltgt
            if kind == "split":
                # every generator at vsrc pairs with its image carrying X on O
                rep = counts[vsrc]
                pi = np.repeat(np.arange(low), rep)
                s = np.arange(int(rep.sum()), dtype=np.int64) - np.repeat(
                    np.concatenate([[0], np.cumsum(rep)[:-1]]), rep)
                a_v, b_v = vsrc[pi], vtgt[pi]
                t = _transport(cb, cb, a_v, b_v, s, skip=(), only=_non_internal(cb, internal))
                oi = cb.fidx[b_v, _o_arc(cb, internal)]
                t |= np.left_shift(np.int64(1), oi)
                a = cb.offset[a_v] + s
                b = cb.offset[b_v] + t
            else:
                # every generator at vtgt is hit by the one with 1 on O
                rep = counts[vtgt]
                pi = np.repeat(np.arange(low), rep)
                s = np.arange(int(rep.sum()), dtype=np.int64) - np.repeat(
                    np.concatenate([[0], np.cumsum(rep)[:-1]]), rep)
                a_v, b_v = vsrc[pi], vtgt[pi]
                t = _transport(cb, cb, b_v, a_v, s, skip=(), only=_non_internal(cb, internal))
                a = cb.offset[a_v] + t
                b = cb.offset[b_v] + s
            pairs.extend(zip(a.tolist(), b.tolist()))
        return pairs

    def _solve_scale(self, red_cx: ChainComplex, small_cx: ChainComplex) -> list:
        """Scalars c with phi(c_s s) a chain isomorphism; checks every entry."""
        n = red_cx.size
        phi = self.phi
        adj: list[list] = [[] for _ in range(n)]
        for s in range(n):
            mine = {self.phi_inv[t]: v for t, v in small_cx.d[phi[s]].items()}
            theirs = red_cx.d[s]
            if set(mine) != set(theirs):
                raise MoveError("R-move reduced differential differs from the smaller diagram's")
            for t, lam in theirs.items():
                r = Fraction(mine[t]) / Fraction(lam)  # c_t / c_s
                adj[s].append((t, r))
                adj[t].append((s, 1 / r))
        scale: list = [None] * n
        for root in range(n):
            if scale[root] is not None:
                continue
            scale[root] = Fraction(1)
            stack = [root]
            while stack:
                s = stack.pop()
                for t, r in adj[s]:
                    want = scale[s] * r
                    if scale[t] is None:
                        scale[t] = want
                        stack.append(t)
                    elif scale[t] != want:
                        raise MoveError("R-move reduced complex is not diagonally isomorphic")
        return scale

    # vectors on the big diagram use its standard cube numbering
    def _to_perm(self, vec: dict) -> dict:
        if not vec:
            return {}
        g, c = _arrays(vec)
        v, s = _decode(self.cstd, g)
        pv = self.perm_vertex[v]
        return _collect([(self.cb.offset[pv] + s, c * self.eps[pv])])

    def _from_perm(self, vec: dict) -> dict:
        if not vec:
            return {}
        g, c = _arrays(vec)
        pv, s = _decode(self.cb, g)
        return _collect([(self.cstd.offset[self.std_vertex[pv]] + s, c * self.eps[pv])])

    def up(self, vec: dict) -> dict:
        """C(small) -> C(big)."""
        surv = {}
        for g, c in vec.items():
            k = self.phi_inv[g]
            surv[k] = Fraction(c) / self.scale[k]
        return self._from_perm(self.red.include(surv))

    def down(self, vec: dict) -> dict:
        """C(big) -> C(small)."""
        out = {}
        for k, c in self.red.project(self._to_perm(vec)).items():
            w = Fraction(c) * self.scale[k]
            if w:
                out[self.phi[k]] = w.numerator if w.denominator == 1 else w
        return out


def _non_internal(cb: Cube, internal) -> set:
    return set(cb.labels) - set(internal)


def _o_arc(cb: Cube, internal) -> int:
    return cb.index[internal[0]]


_RDATA: dict = {}


def _rdata(small, big, new, internal, spec) -> RMoveData:
    key = (small.key(), big.key(), new, internal, spec.name)
    r = _RDATA.get(key)
    if r is None:
        r = RMoveData(small, big, new, internal, spec)
        _RDATA[key] = r
    return r


class _RUp(_Step):
    def __init__(self, data):
        self.data = data

    def __call__(self, vec):
        return self.data.up(vec)


class _RDown(_Step):
    def __init__(self, data):
        self.data = data

    def __call__(self, vec):
        return self.data.down(vec)


def _r_step(d1: PlanarDiagram, d2: PlanarDiagram, mv: ElementaryMove, spec) -> _Step:
    if mv.kind == "R1":
        x, sign, first, pos, k, x2 = mv.args[:6]
        return _RUp(_rdata(d1, d2, (pos - 1,), (k,), spec))
    if mv.kind == "R2":
        x, y, var, p1, p2, x2, x3, y2, y3 = mv.args
        return _RUp(_rdata(d1, d2, tuple(sorted((p1 - 1, p2 - 1))), (x2, y2), spec))
    if mv.kind == "R1INV":
        x, sign, first, pos, k, x2 = _r1inv(d1, mv.args)[2][1][:6]
        return _RDown(_rdata(d2, d1, (pos - 1,), (k,), spec))
    if mv.kind == "R2INV":
        x, y, var, p1, p2, x2, x3, y2, y3 = _r2inv(d1, mv.args)[2][1]
        return _RDown(_rdata(d2, d1, tuple(sorted((p1 - 1, p2 - 1))), (x2, y2), spec))
    raise MoveError("chain maps for R3 moves are not implemented")


class ChainMap:
    """Composite chain map C(start) -> C(end) of a movie, on sparse vectors
    indexed by cube generator numbers."""

    def __init__(self, movie: Movie, steps: list, bidegree: tuple[int, int]):
        self.movie = movie
        self.steps = steps
        self.bidegree = bidegree

    def __call__(self, vec: Mapping) -> dict:
        out = {g: c for g, c in vec.items() if c}
        for st in self.steps:
            out = st(out)
        return out


def induced_chain_map(m: Movie, spec: FrobeniusSpec = KHOVANOV) -> ChainMap:
    steps = []
    dj = 0
    for n, mv in enumerate(m.moves):
        d1, d2 = m.slices[n], m.slices[n + 1]
        try:
            if mv.kind == "BIRTH":
                st = _Birth(d1, d2, spec)
            elif mv.kind == "DEATH":
                st = _Death(d1, d2, spec, mv.args[0])
            elif mv.kind == "SADDLE":
                st = _Saddle(d1, d2, spec, *mv.args)
            else:
                st = _r_step(d1, d2, mv, spec)
        except MoveError as e:
            raise MoveError(str(e), n) from None
        steps.append(st)
        dj += st.bidegree[1]
    return ChainMap(m, steps, (0, dj))


# -- maps on homology -------------------------------------------------------------

@dataclass
class KhMap:
    """Induced map on reduced Khovanov homology, in the bases of surviving
    generators of the simplified start and end complexes."""

    source: list  # (i, j) per source basis vector
    target: list
    columns: list  # sparse column per source basis vector
    bidegree: tuple

    def matrix(self) -> SparseMatrix:
        ent = {(t, s): v for s, col in enumerate(self.columns) for t, v in col.items()}
        return SparseMatrix(len(self.target), len(self.source), ent)

    def ranks(self) -> dict[tuple[int, int], int]:
        """Rank of the map restricted to each source bigrading."""
        blocks: dict = {}
        for s, ij in enumerate(self.source):
            blocks.setdefault(ij, []).append(s)
        out = {}
        for ij, cols in sorted(blocks.items()):
            ent = {}
            tgt_index = {}
            for n, s in enumerate(cols):
                for t, v in self.columns[s].items():
                    r = tgt_index.setdefault(t, len(tgt_index))
                    ent[(r, n)] = v
            out[ij] = rank(SparseMatrix(len(tgt_index), len(cols), ent))
        return out

    @property
    def total_rank(self) -> int:
        return rank(self.matrix())

    def to_json_obj(self) -> dict:
        return {"bidegree": list(self.bidegree),
                "ranks": [{"i": i, "j": j, "rank": r} for (i, j), r in self.ranks().items()],
                "total_rank": self.total_rank}

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True)


def _kh_basis(red: Reduction) -> list:
    c = red.complex
    if any(c.d):
        raise MoveError("simplified Khovanov complex still has a differential")
    return list(zip(c.igr, c.jgr))


def induced_kh_map(m: Movie, budget: int = DEFAULT_BUDGET) -> KhMap:
    """Map on reduced Khovanov homology: include, push through the movie,
    project."""
    for name, d in (("start", m.start), ("end", m.end)):
        if not d.is_knot:
            raise MoveError(f"{name} diagram is not a knot")
    r0 = kh_reduction(m.start, budget, record=True)
    r1 = kh_reduction(m.end, budget, record=True)
    f = induced_chain_map(m, KHOVANOV)
    cols = []
    for k in range(r0.complex.size):
        cols.append(r1.project(f(r0.include({k: 1}))))
    return KhMap(_kh_basis(r0), _kh_basis(r1), cols, f.bidegree)


def kh_map_of_matrix(source, target, columns, bidegree=(0, 0)) -> KhMap:
    """Wrap explicit map data (for synthetic checks)."""
    return KhMap(list(source), list(target), [dict(c) for c in columns], tuple(bidegree))
