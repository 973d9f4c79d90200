"""
Concordance obstructions from reduced Khovanov homology and the s-invariant,
and a step-by-step replay of the isomorphism argument for self-concordances
of T(4,5).

Over a field, a bigraded map includes its source as a summand exactly when
it is injective in every bigrading, so comparing dimensions is the
computable necessary condition.  Passing a check never proves that a ribbon
concordance exists.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .cobordism import KhMap, Movie, MoveError, induced_kh_map, normal_form
from .diagram import PlanarDiagram
from .exactalg import BigradedDims
from .khovanov import DEFAULT_BUDGET, kh_dims
from .lee import lee_pages, s_invariant
from .ssengine import (SqueezeInstance, enumerate_collapses, squeeze_check)

OBSTRUCTED = "obstructed"
NOT_OBSTRUCTED = "not-obstructed"
CERTIFIED = "isomorphism-certified"
UNDETERMINED = "undetermined"


class ReplayError(ValueError):
    """The replay's preconditions fail."""


@dataclass
class ObstructionReport:
    verdict: str
    witnesses: list = field(default_factory=list)
    narrative: list = field(default_factory=list)

    def __post_init__(self):
        if self.verdict == OBSTRUCTED and not self.witnesses:
            raise ValueError("an obstruction needs a witness")
        if not self.narrative:
            raise ValueError("empty narrative")

    def to_json_obj(self) -> dict:
        return {"verdict": self.verdict, "witnesses": self.witnesses,
                "narrative": self.narrative}

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True)

    @property
    def exit_code(self) -> int:
        return 0 if self.verdict in (NOT_OBSTRUCTED, CERTIFIED) else 3


def dominance_check(k0: PlanarDiagram, k1: PlanarDiagram,
                    budget: int = DEFAULT_BUDGET) -> ObstructionReport:
    """Necessary conditions for a ribbon concordance from ``k1`` down to ``k0``.

    Obstructed when Kh(k0) is larger than Kh(k1) in some bigrading or when
    the s-invariants differ.
    """
    h0, h1 = kh_dims(k0, budget=budget), kh_dims(k1, budget=budget)
    witnesses = []
    for ij in sorted(set(h0) | set(h1)):
        if h0.get(ij, 0) > h1.get(ij, 0):
            witnesses.append({"i": ij[0], "j": ij[1], "dim0": h0.get(ij, 0),
                              "dim1": h1.get(ij, 0)})
    narrative = [f"Kh dimensions: {h0.total} vs {h1.total}"]
    if witnesses:
        narrative.append(f"Kh(k0) exceeds Kh(k1) in {len(witnesses)} bigradings")
    else:
        narrative.append("Kh(k0) fits inside Kh(k1) in every bigrading")
    s0, s1 = s_invariant(k0, budget), s_invariant(k1, budget)
    if s0 != s1:
        witnesses.append({"invariant": "s", "s0": s0, "s1": s1})
        narrative.append(f"s-invariants differ ({s0} vs {s1}); the knots are not concordant")
    else:
        narrative.append(f"s-invariants agree ({s0})")
    if witnesses:
        return ObstructionReport(OBSTRUCTED, witnesses, narrative)
    narrative.append("no obstruction found; this does not prove a ribbon concordance exists")
    return ObstructionReport(NOT_OBSTRUCTED, [], narrative)


def iso_report(kmap: KhMap, dims: BigradedDims | None = None) -> ObstructionReport:
    """Verdict on a map of a bigraded space to itself: isomorphism or not."""
    if dims is None:
        dims = BigradedDims({})
        counts: dict = {}
        for ij in kmap.source:
            counts[ij] = counts.get(ij, 0) + 1
        dims = BigradedDims(counts)
    ranks = kmap.ranks()
    tgt: dict = {}
    for ij in kmap.target:
        tgt[ij] = tgt.get(ij, 0) + 1
    rows = []
    bad = []
    for ij in sorted(set(dims) | set(tgt)):
        r = ranks.get(ij, 0)
        row = {"i": ij[0], "j": ij[1], "dim": dims.get(ij, 0), "rank": r}
        rows.append(row)
        if r != dims.get(ij, 0) or r != tgt.get(ij, 0):
            bad.append(row)
    narrative = [f"induced map of bidegree {tuple(kmap.bidegree)}, total rank {kmap.total_rank}"]
    if tuple(kmap.bidegree) != (0, 0):
        bad = bad or rows
        narrative.append("the map is not bigrading-preserving")
    if bad:
        narrative.append(f"rank deficit in {len(bad)} bigradings")
        return ObstructionReport(UNDETERMINED, bad, narrative)
    narrative.append("rank equals dimension in every bigrading")
    return ObstructionReport(CERTIFIED, rows, narrative)


def self_concordance_iso(m: Movie, budget: int = DEFAULT_BUDGET) -> ObstructionReport:
    """Does a movie from K to K induce an isomorphism on Kh(K)?"""
    if m.start.key() != m.end.key():
        raise MoveError("movie does not return to its start diagram")
    kmap = induced_kh_map(m, budget)
    return iso_report(kmap, kh_dims(m.start, budget=budget))


# -- replay for T(4,5) ----------------------------------------------------------

@dataclass
class KMData:
    version: int
    e2: BigradedDims
    count: int
    rank: int
    candidates: list
    einf_total: int
    einf_iso: bool
    published: list  # exceptional bigradings as printed
    published_grading: str

    @classmethod
    def from_json_obj(cls, obj: dict) -> "KMData":
        c = obj["constraints"]
        pub = obj.get("exceptional_published", {})
        return cls(int(obj["version"]), BigradedDims.from_json_obj(obj["e2"]),
                   int(c["count"]), int(c.get("rank", 1)),
                   [(tuple(s), tuple(t)) for s, t in c["candidates"]],
                   int(c["einf_total"]), bool(obj["einf_map_is_isomorphism"]),
                   [tuple(b) for b in pub.get("bigradings", [])],
                   pub.get("grading", "(i, j)"))

    @classmethod
    def load(cls, path: str | Path | None = None) -> "KMData":
        if path is None:
            text = resources.files("khconc").joinpath("data/km_t45.json").read_text("utf-8")
        else:
            text = Path(path).read_text(encoding="utf-8")
        return cls.from_json_obj(json.loads(text))


def _delta(ij):
    return (ij[0], ij[1] - ij[0])


def _split_stages(m: Movie, nf) -> list[Movie]:
    out = []
    start = m.start
    pos = 0
    for st in nf.stages:
        moves = m.moves[pos:pos + len(st)]
        sub = Movie(start, moves)
        out.append(sub)
        start = sub.end
        pos += len(st)
    return out


def t45_replay(m: Movie, km: KMData | None = None,
               budget: int = DEFAULT_BUDGET) -> ObstructionReport:
    """Run the isomorphism argument on a normal-form self-concordance.

    1. the induced Khovanov map, through the five stages;
    2. the instanton data: E_infinity is an isomorphism, so the Khovanov
       map is one wherever no candidate differential can act;
    3. the squeeze along the Lee differentials.
    The verdict is compared with the direct rank computation.
    """
    km = km or KMData.load()
    nf = normal_form(m)  # raises before any homology is computed
    narrative = [f"normal form: {nf.k} births, {len(nf.stages[1])} + {len(nf.stages[3])} "
                 f"Reidemeister moves, {nf.k + nf.l} saddles, {nf.l} deaths"]
    for name, d in (("start", m.start), ("end", m.end)):
        dims = kh_dims(d, budget=budget)
        if dims != km.e2:
            raise ReplayError(f"{name} diagram has Kh {dict(dims)}, not the T(4,5) table")
    narrative.append("both ends carry the T(4,5) table (9 generators)")

    # (1) the Khovanov map
    stages = _split_stages(m, nf)
    kmap = induced_kh_map(m, budget)
    ranks = kmap.ranks()
    narrative.append(
        "stage maps: births include v -> v (x) v+, Reidemeister stages are homotopy "
        "equivalences checked at chain level, saddles multiply or comultiply, deaths project; "
        f"stage lengths {[len(s) for s in stages]}")
    narrative.append("composite ranks: " + ", ".join(
        f"{ij}:{r}" for ij, r in sorted(ranks.items())))

    # (2) instanton constraints
    patterns = enumerate_collapses(km.e2, km.count, km.rank, km.candidates,
                                   einf_total=km.einf_total)
    exceptional = sorted({b for p in patterns for s, t, _ in p.differentials for b in (s, t)})
    narrative.append(f"{len(patterns)} admissible instanton differentials; they touch "
                     + ", ".join(f"{b} = {_delta(b)} in (i, j-i)" for b in exceptional))
    if km.published:
        as_delta = sorted(_delta(b) for b in exceptional)
        if sorted(km.published) == as_delta and km.published_grading == "(i, j-i)":
            narrative.append("these match the published exceptional list read in (i, j-i)")
        else:
            narrative.append(f"published exceptional list {km.published} in "
                             f"{km.published_grading} differs from the derived one")
    if not km.einf_iso:
        return ObstructionReport(UNDETERMINED, [], narrative + [
            "instanton data does not assert an isomorphism on E_infinity"])
    support = km.e2.support()
    iso_locus = set(support) - set(exceptional)
    narrative.append(f"Kh map is an isomorphism on the {len(iso_locus)} bigradings "
                     "no candidate differential touches")
    contra = [{"i": i, "j": j, "dim": km.e2[(i, j)], "rank": ranks.get((i, j), 0)}
              for i, j in sorted(iso_locus) if ranks.get((i, j), 0) != km.e2[(i, j)]]
    if contra:
        narrative.append("direct ranks contradict the instanton step")
        return ObstructionReport(UNDETERMINED, contra, narrative)

    # (3) squeeze along the Lee differentials
    pages = lee_pages(m.end, budget)
    pairings = [(s, t, r) for pg in pages for s, t, r in pg.differentials]
    s_val = s_invariant(m.end, budget)
    narrative.append("Lee differentials: " + ", ".join(f"{s}->{t}" for s, t, _ in pairings)
                     + f"; E_infinity at (0, {s_val})")
    verdict = squeeze_check(SqueezeInstance(km.e2, km.e2, iso_locus, pairings,
                                            ranks=ranks, survivor=(0, s_val)))
    for b in exceptional:
        narrative.append(f"{b}: {verdict.justification.get(b, 'unsettled')}")
    if verdict.verdict != "isomorphism":
        narrative.append("squeeze undetermined")
        return ObstructionReport(UNDETERMINED,
                                 [{"i": i, "j": j} for i, j in verdict.stuck], narrative)
    rows = [{"i": i, "j": j, "dim": km.e2[(i, j)], "rank": ranks.get((i, j), 0)}
            for i, j in support]
    if not verdict.consistent:
        narrative.append("squeeze contradicts the direct ranks")
        return ObstructionReport(UNDETERMINED, [r for r in rows if r["rank"] != r["dim"]],
                                 narrative)
    narrative.append("squeeze forces an isomorphism in every bigrading, "
                     "in agreement with the direct ranks")
    return ObstructionReport(CERTIFIED, rows, narrative)
