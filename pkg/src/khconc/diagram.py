"""
Oriented, basepointed planar diagrams of knots and links.

A diagram is a list of crossings in PD notation ``X[a,b,c,d]``: the four
arc labels around the crossing listed counterclockwise, starting from the
incoming under-strand.  The under-strand therefore runs ``a -> c``; the
over-strand runs ``d -> b`` at a positive crossing and ``b -> d`` at a
negative one.  Crossing-free unknotted circles cannot be written in PD
notation and are carried separately as ``loops`` (one arc label each).
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from math import gcd
from typing import Iterable, Sequence


class DiagramError(ValueError):
    """A diagram violates one of its structural invariants."""


class PDSyntaxError(ValueError):
    """Malformed planar-diagram text."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


@dataclass(frozen=True)
class Crossing:
    a: int
    b: int
    c: int
    d: int
    sign: int

    @property
    def labels(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    @property
    def over_in(self) -> int:
        return self.d if self.sign > 0 else self.b

    @property
    def over_out(self) -> int:
        return self.b if self.sign > 0 else self.d

    def __str__(self) -> str:
        return f"X[{self.a},{self.b},{self.c},{self.d}]"


def _orient(tuples: Sequence[Sequence[int]],
            signs: Sequence[int] | None = None) -> list[int]:
    """Deduce crossing signs from the under-strand convention.

    Each arc must leave one crossing and enter another.  Under-strand
    positions fix the direction of their arcs; the rest propagates along
    over-strands.  A component that never passes under anything has no
    forced direction: it follows ``signs`` at its first crossing when
    given, else the positive choice.
    """
    occ: dict[int, list[tuple[int, int]]] = {}
    for x, t in enumerate(tuples):
        for p, lab in enumerate(t):
            occ.setdefault(lab, []).append((x, p))
    # role[(x, p)] is True when the arc enters crossing x at position p
    role: dict[tuple[int, int], bool] = {}
    stack: list[tuple[int, int]] = []

    def assign(x: int, p: int, entering: bool) -> None:
        old = role.get((x, p))
        if old is None:
            role[(x, p)] = entering
            stack.append((x, p))
        elif old != entering:
            raise DiagramError(
                f"inconsistent orientation at crossing {x + 1} "
                f"(arc {tuples[x][p]})")

    for x in range(len(tuples)):
        assign(x, 0, True)
        assign(x, 2, False)
    n = len(tuples)
    nxt = 0
    while True:
        while stack:
            x, p = stack.pop()
            entering = role[(x, p)]
            lab = tuples[x][p]
            for y, q in occ[lab]:
                if (y, q) != (x, p):
                    assign(y, q, not entering)
            # the opposite position on the same strand
            assign(x, (p + 2) % 4, not entering)
        while nxt < n and (nxt, 1) in role:
            nxt += 1
        if nxt == n:
            break
        assign(nxt, 3, True if signs is None else signs[nxt] > 0)
    return [1 if role[(x, 3)] else -1 for x in range(n)]


@dataclass(frozen=True)
class PlanarDiagram:
    """An oriented link diagram with a basepoint.

    Immutable; every constructor runs :meth:`validate`.
    """

    crossings: tuple[Crossing, ...]
    loops: tuple[int, ...] = ()
    basepoint: int = 1

    def __post_init__(self):
        object.__setattr__(self, "crossings", tuple(self.crossings))
        object.__setattr__(self, "loops", tuple(self.loops))
        self.validate()

    # -- construction -----------------------------------------------------

    @classmethod
    def from_pd(cls, tuples: Iterable[Sequence[int]], loops: Iterable[int] = (),
                basepoint: int | None = None) -> "PlanarDiagram":
        tuples = [tuple(int(v) for v in t) for t in tuples]
        for t in tuples:
            if len(t) != 4:
                raise DiagramError(f"crossing {t} does not have four arcs")
        _check_counts(tuples, loops)
        signs = _orient(tuples)
        crossings = tuple(Crossing(*t, sign=s) for t, s in zip(tuples, signs))
        loops = tuple(loops)
        if basepoint is None:
            labels = sorted({v for t in tuples for v in t} | set(loops))
            basepoint = 1 if 1 in labels else labels[0]
        return cls(crossings, loops, basepoint)

    @classmethod
    def unknot(cls) -> "PlanarDiagram":
        return cls((), (1,), 1)

    # -- invariants -------------------------------------------------------

    def validate(self) -> None:
        tuples = [c.labels for c in self.crossings]
        _check_counts(tuples, self.loops)
        if not tuples and not self.loops:
            raise DiagramError("empty diagram")
        signs = _orient(tuples, [c.sign for c in self.crossings])
        for x, (c, s) in enumerate(zip(self.crossings, signs)):
            if c.sign != s:
                raise DiagramError(
                    f"crossing {x + 1} {c} has sign {c.sign:+d} but the "
                    f"orientation forces {s:+d}")
        if self.basepoint not in self.arcs:
            raise DiagramError(f"basepoint {self.basepoint} is not an arc")

    @property
    def is_planar(self) -> bool:
        """False for virtual (non-planar) crossing data."""
        return _is_planar([c.labels for c in self.crossings])

    # -- basic data -------------------------------------------------------

    @property
    def arcs(self) -> frozenset[int]:
        return frozenset(v for c in self.crossings for v in c.labels) | set(self.loops)

    @property
    def n_plus(self) -> int:
        return sum(1 for c in self.crossings if c.sign > 0)

    @property
    def n_minus(self) -> int:
        return sum(1 for c in self.crossings if c.sign < 0)

    @property
    def writhe(self) -> int:
        return self.n_plus - self.n_minus

    def __len__(self) -> int:
        return len(self.crossings)

    def occurrences(self, arc: int) -> list[tuple[int, int]]:
        """(crossing index, position) pairs where ``arc`` appears."""
        return [(x, p) for x, c in enumerate(self.crossings)
                for p, v in enumerate(c.labels) if v == arc]

    def head(self, arc: int) -> tuple[int, int]:
        """Where ``arc`` enters a crossing."""
        for x, p in self.occurrences(arc):
            if _entering(self.crossings[x], p):
                return x, p
        raise DiagramError(f"arc {arc} has no head")

    def tail(self, arc: int) -> tuple[int, int]:
        """Where ``arc`` leaves a crossing."""
        for x, p in self.occurrences(arc):
            if not _entering(self.crossings[x], p):
                return x, p
        raise DiagramError(f"arc {arc} has no tail")

    def components(self) -> list[list[int]]:
        """Arc labels of each component, in traversal order.

        The component carrying the basepoint comes first and starts at it.
        """
        seen: set[int] = set()
        comps: list[list[int]] = []
        order = sorted(self.arcs)
        order.remove(self.basepoint)
        order.insert(0, self.basepoint)
        for start in order:
            if start in seen:
                continue
            if start in self.loops:
                seen.add(start)
                comps.append([start])
                continue
            comp = []
            arc = start
            while arc not in seen:
                seen.add(arc)
                comp.append(arc)
                x, p = self.head(arc)
                arc = self.crossings[x].labels[(p + 2) % 4]
            comps.append(comp)
        return comps

    @property
    def n_components(self) -> int:
        return len(self.components())

    @property
    def is_knot(self) -> bool:
        return self.n_components == 1

    def key(self) -> tuple:
        """Hashable identity: PD data plus loops plus basepoint."""
        return (tuple(c.labels for c in self.crossings), tuple(sorted(self.loops)),
                self.basepoint)

    # -- transformations ----------------------------------------------------

    def mirror(self) -> "PlanarDiagram":
        """Flip every crossing; the basepoint stays on its arc."""
        out = []
        for c in self.crossings:
            if c.sign > 0:
                out.append(Crossing(c.d, c.a, c.b, c.c, -1))
            else:
                out.append(Crossing(c.b, c.c, c.d, c.a, 1))
        return PlanarDiagram(tuple(out), self.loops, self.basepoint)

    def relabel(self) -> "PlanarDiagram":
        """Renumber arcs 1, 2, ... along components, basepoint becoming 1."""
        mapping: dict[int, int] = {}
        for comp in self.components():
            for arc in comp:
                mapping[arc] = len(mapping) + 1
        return self.rename(mapping)

    def rename(self, mapping: dict[int, int]) -> "PlanarDiagram":
        m = lambda v: mapping.get(v, v)
        cr = tuple(Crossing(m(c.a), m(c.b), m(c.c), m(c.d), c.sign)
                   for c in self.crossings)
        return PlanarDiagram(cr, tuple(m(v) for v in self.loops), m(self.basepoint))

    def with_loops(self, loops: Iterable[int]) -> "PlanarDiagram":
        return PlanarDiagram(self.crossings, tuple(loops), self.basepoint)

    def to_text(self) -> str:
        parts = [str(c) for c in self.crossings]
        parts += [f"U[{v}]" for v in self.loops]
        parts.append(f"base={self.basepoint}")
        return " ".join(parts)

    def __str__(self) -> str:
        return self.to_text()


def _entering(c: Crossing, p: int) -> bool:
    if p == 0:
        return True
    if p == 2:
        return False
    return (p == 3) == (c.sign > 0)


def _check_counts(tuples, loops) -> None:
    counts = Counter(v for t in tuples for v in t)
    bad_label = [v for v in counts if v <= 0]
    if bad_label:
        raise DiagramError(f"arc labels must be positive, got {sorted(bad_label)}")
    once = sorted(v for v, k in counts.items() if k == 1)
    many = sorted(v for v, k in counts.items() if k > 2)
    if once or many:
        msg = []
        if once:
            msg.append(f"arcs {', '.join(map(str, once))} each appear once")
        if many:
            msg.append(f"arcs {', '.join(map(str, many))} appear more than twice")
        raise DiagramError("; ".join(msg))
    loops = list(loops)
    if len(set(loops)) != len(loops):
        raise DiagramError("duplicate loop labels")
    clash = sorted(set(loops) & set(counts))
    if clash:
        raise DiagramError(f"loop labels {clash} also label crossing arcs")


def faces(tuples) -> list[list[tuple[int, int]]]:
    """Faces of the crossing graph, each as the (crossing, slot) corners it
    leaves from, walking with the face on the left of the slot order."""
    ends: dict[int, list[tuple[int, int]]] = {}
    for x, t in enumerate(tuples):
        for p, v in enumerate(t):
            ends.setdefault(v, []).append((x, p))
    other = {}
    for v, (h1, h2) in ends.items():
        other[h1] = h2
        other[h2] = h1
    seen = set()
    out = []
    for x in range(len(tuples)):
        for p in range(4):
            if (x, p) in seen:
                continue
            face = []
            h = (x, p)
            while h not in seen:
                seen.add(h)
                face.append(h)
                y, q = other[h]
                h = (y, (q + 1) % 4)
            out.append(face)
    return out


def _is_planar(tuples) -> bool:
    """Euler characteristic test on the 4-valent crossing graph."""
    n = len(tuples)
    if n == 0:
        return True
    ends: dict[int, list[tuple[int, int]]] = {}
    for x, t in enumerate(tuples):
        for p, v in enumerate(t):
            ends.setdefault(v, []).append((x, p))
    nfaces = len(faces(tuples))
    # connected components of the crossing graph
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for (x, _), (y, _) in (tuple(v) for v in ends.values()):
        parent[find(x)] = find(y)
    k = len({find(i) for i in range(n)})
    return n - 2 * n + nfaces == 2 * k


# -- braids ----------------------------------------------------------------

@dataclass(frozen=True)
class BraidWord:
    strands: int
    letters: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(int(v) for v in self.letters))
        if self.strands < 1:
            raise DiagramError("a braid needs at least one strand")
        for v in self.letters:
            if v == 0 or abs(v) >= self.strands:
                raise DiagramError(
                    f"generator {v} out of range for {self.strands} strands")

    def permutation(self) -> list[int]:
        """Image position of each starting strand position (0-based)."""
        pos = list(range(self.strands))
        where = list(range(self.strands))  # where[strand] = position
        at = list(range(self.strands))      # at[position] = strand
        for g in self.letters:
            i = abs(g) - 1
            s, t = at[i], at[i + 1]
            at[i], at[i + 1] = t, s
            where[s], where[t] = i + 1, i
        del pos
        return where

    def cycle_count(self) -> int:
        perm = self.permutation()
        seen = [False] * self.strands
        count = 0
        for s in range(self.strands):
            if not seen[s]:
                count += 1
                while not seen[s]:
                    seen[s] = True
                    s = perm[s]
        return count


def torus_braid(p: int, q: int) -> BraidWord:
    """The word (s_1 s_2 ... s_{p-1})^q on p strands."""
    if p < 2 or q < 2:
        raise DiagramError(f"torus braid needs p, q >= 2, got ({p}, {q})")
    return BraidWord(p, tuple(range(1, p)) * q)


def braid_closure(w: BraidWord) -> PlanarDiagram:
    """Standard closure of a braid, strands oriented upward.

    Arcs are renumbered along components starting from the strand at
    position 1, which carries the basepoint.  Strands never touched by a
    letter become crossing-free loops.
    """
    n = w.strands
    next_label = n + 1
    cur = list(range(1, n + 1))  # arc label currently at each position
    tuples = []
    for g in w.letters:
        i = abs(g) - 1
        lin, rin = cur[i], cur[i + 1]
        lout, rout = next_label, next_label + 1
        next_label += 2
        if g > 0:
            tuples.append([rin, rout, lout, lin])
        else:
            tuples.append([lin, rin, rout, lout])
        cur[i], cur[i + 1] = lout, rout
    # close up: the top arc at each position is the bottom arc there
    alias = {cur[k]: k + 1 for k in range(n)}
    tuples = [[alias.get(v, v) for v in t] for t in tuples]
    used = {v for t in tuples for v in t}
    loops = [k + 1 for k in range(n) if (k + 1) not in used]
    if not tuples:
        return PlanarDiagram((), tuple(loops), 1)
    basepoint = 1
    d = PlanarDiagram.from_pd(tuples, loops, basepoint)
    return d.relabel()


# -- text format -----------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<x>X\[\s*(?P<xa>[^\]]*)\])"
    r"|(?P<b>B\[\s*(?P<bs>[^;\]]*);(?P<bl>[^\]]*)\])"
    r"|(?P<base>base\s*=\s*(?P<bv>-?\d+))"
    r"|(?P<ul>U\[\s*(?P<uv>\d+)\s*\])"
    r"|(?P<u>U)(?![\w\[])"
    r"|(?P<pd>PD\[)|(?P<close>\])|(?P<comma>,)"
    r")")


def _ints(text: str, pos: int) -> list[int]:
    items = [s.strip() for s in text.split(",")] if text.strip() else []
    out = []
    for s in items:
        if not re.fullmatch(r"-?\d+", s):
            raise PDSyntaxError(f"expected an integer, got {s!r}", pos)
        out.append(int(s))
    return out


def parse_pd(text: str) -> PlanarDiagram:
    """Parse PD text: ``X[a,b,c,d]`` terms, ``U`` loops, ``B[s; ...]``
    braid words and an optional ``base=<arc>`` annotation."""
    pos = 0
    tuples: list[list[int]] = []
    loops: list[int] = []
    extra_unknots = 0
    braid = None
    base = None
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise PDSyntaxError(f"unexpected input {text[pos:pos + 12]!r}", pos)
        start = m.start() + (len(m.group(0)) - len(m.group(0).lstrip()))
        if m.group("x"):
            vals = _ints(m.group("xa"), start)
            if len(vals) != 4:
                raise PDSyntaxError(f"crossing needs 4 arcs, got {len(vals)}", start)
            if any(v <= 0 for v in vals):
                raise PDSyntaxError("arc labels must be positive", start)
            tuples.append(vals)
        elif m.group("b"):
            if braid is not None:
                raise PDSyntaxError("only one braid word allowed", start)
            s = m.group("bs").strip()
            if not s.isdigit():
                raise PDSyntaxError(f"bad strand count {s!r}", start)
            braid = BraidWord(int(s), tuple(_ints(m.group("bl"), start)))
        elif m.group("base"):
            base = int(m.group("bv"))
        elif m.group("ul"):
            loops.append(int(m.group("uv")))
        elif m.group("u"):
            extra_unknots += 1
        pos = m.end()
    if braid is not None:
        if tuples or loops:
            raise PDSyntaxError("cannot mix a braid word with crossings", 0)
        d = braid_closure(braid)
        if extra_unknots:
            d = add_unknots(d, extra_unknots)
        if base is not None:
            d = PlanarDiagram(d.crossings, d.loops, base)
        return d
    labels = {v for t in tuples for v in t} | set(loops)
    nxt = max(labels, default=0) + 1
    for _ in range(extra_unknots):
        loops.append(nxt)
        nxt += 1
    if not tuples and not loops:
        raise PDSyntaxError("no crossings or unknot components", 0)
    return PlanarDiagram.from_pd(tuples, loops, base)


def add_unknots(d: PlanarDiagram, k: int) -> PlanarDiagram:
    nxt = max(d.arcs) + 1
    return d.with_loops(d.loops + tuple(range(nxt, nxt + k)))


def parse_braid(text: str, strands: int | None = None) -> BraidWord:
    """Parse ``[1,1,1]`` (strand count inferred) or ``B[s; ...]``."""
    text = text.strip()
    m = re.fullmatch(r"B\[\s*(\d+)\s*;([^\]]*)\]", text)
    if m:
        return BraidWord(int(m.group(1)), tuple(_ints(m.group(2), 0)))
    m = re.fullmatch(r"\[?([^\]]*)\]?", text)
    letters = _ints(m.group(1), 0) if m else []
    if strands is None:
        strands = max((abs(v) for v in letters), default=0) + 1
    return BraidWord(max(strands, 1), tuple(letters))


def torus_knot_components(p: int, q: int) -> int:
    return gcd(p, q)
