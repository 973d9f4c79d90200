"""Built-in knots with regression data.

Each entry records where its expected values come from: ``"published"`` for
values read off the published tables, ``"oracle"`` for values computed once
with the unsimplified cube complex and the Kauffman state sum, then frozen.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

from .diagram import BraidWord, PlanarDiagram, braid_closure, parse_braid, parse_pd, torus_braid
from .exactalg import BigradedDims


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    source: str  # braid word "B[n; ...]" or "unknot"
    expected: BigradedDims | None = None
    s: int | None = None
    provenance: str = ""
    aliases: tuple = ()

    def diagram(self) -> PlanarDiagram:
        if self.source == "unknot":
            return PlanarDiagram.unknot()
        return braid_closure(parse_braid(self.source))

    @property
    def crossings(self) -> int:
        if self.source == "unknot":
            return 0
        return len(parse_braid(self.source).letters)


def _ones(*pairs) -> BigradedDims:
    return BigradedDims({p: 1 for p in pairs})


def _torus(p, q, table, s, prov) -> CatalogEntry:
    w = torus_braid(p, q)
    src = f"B[{w.strands};{','.join(map(str, w.letters))}]"
    return CatalogEntry(f"T({p},{q})", src, _ones(*table), s, prov, (f"T{p}{q}", f"T{p}_{q}"))


_TREFOIL = ((0, 2), (2, 6), (3, 8))
_FIG8 = ((-2, -4), (-1, -2), (0, 0), (1, 2), (2, 4))
# reduced Khovanov homology of T(4,5), read as (i, j - i) and stored as (i, j)
T45_DELTA = ((0, 12), (2, 14), (3, 15), (4, 14), (5, 17), (6, 14), (7, 17), (8, 16), (9, 17))
T45_TABLE = BigradedDims({(i, i + dl): 1 for i, dl in T45_DELTA})
T45_S = 12

ENTRIES: tuple[CatalogEntry, ...] = (
    CatalogEntry("unknot", "unknot", _ones((0, 0)), 0, "published: unknot normalization",
                 ("0_1", "U")),
    CatalogEntry("trefoil", "B[2;1,1,1]", _ones(*_TREFOIL), 2, "oracle: naive cube",
                 ("3_1", "right-trefoil", "T(2,3)", "T23")),
    CatalogEntry("left-trefoil", "B[2;-1,-1,-1]", _ones(*_TREFOIL).mirror(), -2,
                 "oracle: naive cube", ("3_1m", "mirror-trefoil", "T(2,-3)")),
    CatalogEntry("figure-eight", "B[3;1,-2,1,-2]", _ones(*_FIG8), 0, "oracle: naive cube",
                 ("4_1", "figure8")),
    _torus(2, 5, ((0, 4), (2, 8), (3, 10), (4, 12), (5, 14)), 4, "oracle: naive cube"),
    _torus(2, 7, ((0, 6), (2, 10), (3, 12), (4, 14), (5, 16), (6, 18), (7, 20)), 6,
           "oracle: naive cube"),
    _torus(3, 4, ((0, 6), (2, 10), (3, 12), (4, 12), (5, 16)), 6, "oracle: naive cube"),
    _torus(3, 5, ((0, 8), (2, 12), (3, 14), (4, 14), (5, 18), (6, 18), (7, 20)), 8,
           "oracle: naive cube"),
    CatalogEntry("T(4,5)", "B[4;" + ",".join(map(str, torus_braid(4, 5).letters)) + "]",
                 T45_TABLE, T45_S, "published: T(4,5) grids and Lee survivor", ("T45", "T4_5")),
)

_BY_NAME = {}
for _e in ENTRIES:
    for _n in (_e.name,) + _e.aliases:
        _BY_NAME[_n.lower()] = _e


def names() -> list[str]:
    return [e.name for e in ENTRIES]


def get(name: str) -> CatalogEntry:
    e = _BY_NAME.get(name.strip().lower())
    if e is None:
        raise KeyError(f"unknown knot {name!r}; known: {', '.join(names())}")
    return e


def lookup(name: str) -> PlanarDiagram:
    """Catalog entry by name, or any torus knot written ``T(p,q)``."""
    try:
        return get(name).diagram()
    except KeyError:
        m = re.fullmatch(r"\s*T\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)\s*", name)
        if not m:
            raise
        p, q = int(m.group(1)), int(m.group(2))
        if math.gcd(abs(p), abs(q)) != 1 or abs(p) < 2 or abs(q) < 2:
            raise KeyError(f"T({p},{q}) is not a nontrivial torus knot") from None
        d = braid_closure(torus_braid(abs(p), abs(q)))
        return d.mirror() if (p < 0) != (q < 0) else d


def resolve(ref: str, base_dir: Path | None = None) -> PlanarDiagram:
    """A diagram from a catalog name, a braid word or a PD file."""
    path = Path(ref)
    if base_dir is not None and not path.is_absolute():
        path = base_dir / path
    if path.is_file():
        return parse_pd(path.read_text(encoding="utf-8"))
    try:
        return lookup(ref)
    except KeyError:
        if ref.strip().startswith(("B[", "[")):
            return braid_closure(parse_braid(ref))
        raise
