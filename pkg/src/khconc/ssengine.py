"""
Bookkeeping for bigraded spectral sequences.

* :func:`enumerate_collapses` lists every way a given number of page
  differentials could cut an E_2 table down to a prescribed E_infinity size.
* :func:`squeeze_check` runs the naturality argument: a page morphism known to
  be an isomorphism on most bigradings is forced to be one on a bigrading
  joined to a known one by a rank-1 differential between 1-dimensional
  spaces.
* :func:`ss_morphism_ranks` computes the maps a filtered chain map induces on
  every page of the quantum-filtration spectral sequence.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .exactalg import BigradedDims, ChainComplex, span_dim
from .lee import STEP, _Pages

Bigrading = tuple[int, int]


class SpectralSequenceError(ValueError):
    """Malformed spectral-sequence data."""


def _bg(x) -> Bigrading:
    i, j = x
    return (int(i), int(j))


# -- collapse patterns --------------------------------------------------------

@dataclass(frozen=True)
class CollapsePattern:
    differentials: tuple  # ((i, j), (i, j), rank)
    einf: BigradedDims

    def to_json_obj(self) -> dict:
        return {"differentials": [{"from": list(s), "to": list(t), "rank": r}
                                  for s, t, r in self.differentials],
                "einf": self.einf.to_json_obj()}


@dataclass
class CollapseConstraints:
    count: int
    rank: int = 1
    candidates: list | None = None  # [(source, target)] or None for all
    einf_total: int | None = None
    allowed_bidegrees: list | None = None  # [(di, dj)] or None

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "CollapseConstraints":
        cands = obj.get("candidates")
        if cands is not None:
            cands = [(_bg(s), _bg(t)) for s, t in cands]
        allowed = obj.get("allowed_bidegrees")
        if allowed is not None:
            allowed = [_bg(x) for x in allowed]
        return cls(int(obj["count"]), int(obj.get("rank", 1)), cands,
                   obj.get("einf_total"), allowed)

    @classmethod
    def from_json(cls, text: str) -> "CollapseConstraints":
        return cls.from_json_obj(json.loads(text))


def candidate_pairs(e2: Mapping, candidates=None,
                    predicate: Callable[[Bigrading, Bigrading], bool] | None = None) -> list:
    """Possible (source, target) arrows, sorted by source then target.

    Without an explicit candidate list every pair with strictly larger
    homological degree at the target is allowed.
    """
    support = sorted(k for k, v in e2.items() if v > 0)
    if candidates is None:
        pairs = [(s, t) for s in support for t in support if t[0] > s[0]]
    else:
        pairs = sorted({(_bg(s), _bg(t)) for s, t in candidates})
        missing = [p for p in pairs if p[0] not in support or p[1] not in support]
        if missing:
            raise SpectralSequenceError(f"candidate arrows leave the E_2 support: {missing}")
    if predicate is not None:
        pairs = [p for p in pairs if predicate(*p)]
    return pairs


def enumerate_collapses(e2: Mapping, count: int, rank: int = 1, candidates=None,
                        predicate: Callable | None = None,
                        einf_total: int | None = None,
                        allowed_bidegrees: Iterable | None = None) -> list[CollapsePattern]:
    """All sets of ``count`` differentials of the given rank that fit ``e2``.

    Differentials may not use up more of a bigrading than its dimension.
    ``einf_total`` filters on the total dimension left over.
    """
    if count < 0 or rank < 1:
        raise SpectralSequenceError("need count >= 0 and rank >= 1")
    if allowed_bidegrees is not None:
        allowed = {_bg(x) for x in allowed_bidegrees}
        inner = predicate

        def predicate(s, t, _inner=inner):
            ok = (t[0] - s[0], t[1] - s[1]) in allowed
            return ok and (_inner is None or _inner(s, t))
    e2 = {_bg(k): int(v) for k, v in e2.items()}
    pairs = candidate_pairs(e2, candidates, predicate)
    out = []
    for combo in itertools.combinations(pairs, count):
        used: dict = {}
        for s, t in combo:
            used[s] = used.get(s, 0) + rank
            used[t] = used.get(t, 0) + rank
        if any(n > e2[k] for k, n in used.items()):
            continue
        left = {k: v - used.get(k, 0) for k, v in e2.items()}
        einf = BigradedDims({k: v for k, v in left.items() if v})
        if einf_total is not None and einf.total != einf_total:
            continue
        out.append(CollapsePattern(tuple((s, t, rank) for s, t in combo), einf))
    return out


def enumerate_from_constraints(e2: Mapping, c: CollapseConstraints) -> list[CollapsePattern]:
    return enumerate_collapses(e2, c.count, c.rank, c.candidates, None,
                               c.einf_total, c.allowed_bidegrees)


# -- the squeeze -----------------------------------------------------------------

@dataclass
class SqueezeInstance:
    """Data for the naturality squeeze on a self-map f of a bigraded space.

    ``iso_locus`` holds the bigradings where outside information makes f an
    isomorphism; ``pairings`` are the differentials (source, target, rank)
    of a spectral sequence f is a morphism of.  ``survivor`` is where that
    spectral sequence's E_infinity lives, if known, and ``einf_total`` its
    dimension.
    """

    source: BigradedDims
    target: BigradedDims
    iso_locus: set
    pairings: list
    ranks: Mapping | None = None
    einf_total: int = 1
    survivor: Bigrading | None = None

    def __post_init__(self):
        self.source = BigradedDims(self.source)
        self.target = BigradedDims(self.target)
        self.iso_locus = {_bg(b) for b in self.iso_locus}
        self.pairings = [(_bg(s), _bg(t), int(r)) for s, t, r in self.pairings]
        if self.survivor is not None:
            self.survivor = _bg(self.survivor)

    def validate(self) -> None:
        if self.source != self.target:
            raise SpectralSequenceError("squeeze needs a self-map: source and target dims differ")
        support = set(self.source.support())
        extra = self.iso_locus - support
        if extra:
            raise SpectralSequenceError(f"iso locus outside the support: {sorted(extra)}")
        touched: dict = {}
        for s, t, r in self.pairings:
            if t[0] != s[0] + 1:
                raise SpectralSequenceError(f"pairing {s}->{t} does not raise i by 1")
            if s not in support or t not in support:
                raise SpectralSequenceError(f"pairing {s}->{t} leaves the support")
            if r < 1:
                raise SpectralSequenceError(f"pairing {s}->{t} has rank {r}")
            for b in (s, t):
                touched[b] = touched.get(b, 0) + r
        over = sorted(b for b, n in touched.items() if n > self.source[b])
        if over:
            raise SpectralSequenceError(f"pairings use up more than the dimension at {over}")


@dataclass
class SqueezeVerdict:
    verdict: str  # "isomorphism" | "undetermined"
    justification: dict = field(default_factory=dict)  # bigrading -> reason
    stuck: list = field(default_factory=list)
    consistent: bool | None = None  # against the supplied ranks, if any

    def to_json_obj(self) -> dict:
        return {"verdict": self.verdict,
                "justification": [{"i": i, "j": j, "reason": why}
                                  for (i, j), why in sorted(self.justification.items())],
                "stuck": [list(b) for b in self.stuck],
                "consistent": self.consistent}


def squeeze_check(s: SqueezeInstance) -> SqueezeVerdict:
    """Propagate isomorphism along rank-1 differentials between 1-dim spaces.

    A bigrading outside the iso locus is settled when a rank-1 differential
    joins it to a settled bigrading and both are 1-dimensional; f commutes
    with the differential, so the square of 1-dimensional spaces forces f to
    be nonzero at the other end.  The argument needs the pages in between,
    so the pairings must account for every bigrading except E_infinity;
    otherwise nothing is concluded unless the outside data already covers
    the whole support.
    """
    s.validate()
    dims = s.source
    support = dims.support()
    why: dict = {b: "isomorphism by outside data" for b in s.iso_locus}
    todo = [b for b in support if b not in why]
    changed = True
    while changed:
        changed = False
        for b in list(todo):
            for src, tgt, r in s.pairings:
                if b not in (src, tgt):
                    continue
                other = tgt if b == src else src
                if r == 1 and dims[b] == 1 and dims[other] == 1 and other in why:
                    why[b] = f"rank-1 differential {src}->{tgt} to settled {other}"
                    todo.remove(b)
                    changed = True
                    break
    stuck = sorted(todo)
    if not stuck and set(support) - s.iso_locus:
        paired = {b for src, tgt, _ in s.pairings for b in (src, tgt)}
        left = dims.total - 2 * sum(r for _, _, r in s.pairings)
        if left != s.einf_total:
            stuck = sorted(b for b in support if b not in paired and b != s.survivor)
            for b in stuck:
                why[b] = (f"no differential accounts for it; pairings leave {left} "
                          f"dimensions, E_infinity has {s.einf_total}")
    verdict = "undetermined" if stuck else "isomorphism"
    for b in todo:
        why[b] = "no rank-1 differential to a settled 1-dimensional bigrading"
    consistent = None
    if s.ranks is not None:
        full = all(int(s.ranks.get(b, 0)) == dims[b] for b in support)
        consistent = full if verdict == "isomorphism" else True
    return SqueezeVerdict(verdict, why, stuck, consistent)


# -- page morphisms ------------------------------------------------------------------

@dataclass
class PageMorphism:
    r: int  # reported page number (Khovanov page is 2)
    ranks: dict  # (i, j) of the source -> rank

    @property
    def total(self) -> int:
        return sum(self.ranks.values())

    def to_json_obj(self) -> dict:
        return {"r": self.r, "total": self.total,
                "ranks": [{"i": i, "j": j, "rank": k} for (i, j), k in sorted(self.ranks.items())]}


def _apply_map(f: Mapping, vec: Mapping) -> dict:
    out: dict = {}
    for g, c in vec.items():
        for t, v in f.get(g, {}).items():
            w = out.get(t, 0) + c * v
            if w:
                out[t] = w
            else:
                out.pop(t, None)
    return out


def check_filtered_chain_map(f: Mapping, source: ChainComplex, target: ChainComplex,
                             shift: int = 0) -> None:
    """Raise unless ``f`` commutes with the differentials and raises j by >= shift."""
    for g in range(source.size):
        col = f.get(g, {})
        for t in col:
            if target.igr[t] != source.igr[g]:
                raise SpectralSequenceError(f"f moves generator {g} off its homological degree")
            if target.jgr[t] < source.jgr[g] + shift:
                raise SpectralSequenceError(f"f lowers the filtration on generator {g}")
        lhs = _apply_map(f, source.d[g])
        rhs = target.apply(col)
        if any(lhs.get(k, 0) != rhs.get(k, 0) for k in set(lhs) | set(rhs)):
            raise SpectralSequenceError(f"f does not commute with d on generator {g}")


def ss_morphism_ranks(f: Mapping, source: ChainComplex, target: ChainComplex,
                      shift: int = 0) -> list[PageMorphism]:
    """Ranks of the maps induced by ``f`` on every page.

    ``f`` maps source generators to sparse target vectors and must be a
    filtered chain map (checked).  The last entry is the stable page.
    """
    check_filtered_chain_map(f, source, target, shift)
    P, Q = _Pages(source), _Pages(target)
    spans = [c.jgr and (max(c.jgr) - min(c.jgr)) for c in (source, target)]
    rmax = max(spans) // STEP + 1
    pages = []
    for r in range(1, rmax + 2):
        ranks = {}
        for i in sorted(P.by_i):
            for p in P.levels(i):
                if not P.dim(i, p, r):
                    continue
                q = p + shift
                image = [_apply_map(f, z) for z in P.Z(i, p, r)]
                bnd = Q.boundary_part(i, q, r)
                base = span_dim(bnd)
                k = span_dim(bnd + image) - base
                ranks[(i, p)] = k
        pages.append(PageMorphism(r + 1, ranks))
    while len(pages) > 2 and pages[-1].ranks == pages[-2].ranks:
        pages.pop()
    return pages


def identity_map(c: ChainComplex) -> dict:
    return {g: {g: 1} for g in range(c.size)}


def zero_map(c: ChainComplex) -> dict:
    return {}


def lee_morphism(movie) -> tuple[dict, ChainComplex, ChainComplex, int]:
    """The filtered map a movie induces between simplified Lee complexes."""
    from .cobordism import induced_chain_map
    from .khovanov import LEE
    from .lee import lee_reduction
    r0 = lee_reduction(movie.start, record=True)
    r1 = lee_reduction(movie.end, record=True)
    F = induced_chain_map(movie, LEE)
    f = {k: r1.project(F(r0.include({k: 1}))) for k in range(r0.complex.size)}
    return f, r0.complex, r1.complex, F.bidegree[1]
