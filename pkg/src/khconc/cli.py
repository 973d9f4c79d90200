"""Command-line front end.

Exit codes: 0 success (or certified / not obstructed), 1 bad input,
2 budget exceeded, 3 obstructed or undetermined.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import catalog
from .cobordism import MoveError, induced_kh_map, load_movie
from .concordance import KMData, ReplayError, dominance_check, self_concordance_iso, t45_replay
from .diagram import DiagramError, PDSyntaxError, braid_closure, parse_braid, parse_pd
from .exactalg import BigradedDims
from .grid import render
from .khovanov import DEFAULT_BUDGET, BudgetError, kh_dims
from .lee import LeeError, lee_pages, s_invariant
from .ssengine import (CollapseConstraints, SpectralSequenceError, SqueezeInstance,
                       enumerate_from_constraints, squeeze_check)


class UsageError(ValueError):
    pass


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True)


def _emit(args, obj) -> None:
    text = _dump(obj)
    print(text)
    if getattr(args, "json", None):
        Path(args.json).write_text(text + "\n", encoding="utf-8")


def _diagram(args):
    given = [v for v in (args.knot_pos, args.knot, args.pd, args.braid) if v]
    if len(given) != 1:
        raise UsageError("give exactly one of KNOT, --knot, --pd, --braid")
    if args.pd:
        return parse_pd(Path(args.pd).read_text(encoding="utf-8"))
    if args.braid:
        return braid_closure(parse_braid(args.braid))
    return catalog.resolve(args.knot_pos or args.knot)


def _add_input(p) -> None:
    p.add_argument("knot_pos", nargs="?", metavar="KNOT",
                   help="catalog name, braid word or PD file")
    p.add_argument("--knot", help="catalog name, e.g. T(4,5)")
    p.add_argument("--pd", help="file with a PD code")
    p.add_argument("--braid", help='braid word, e.g. "[1,1,1]" or "B[3;1,-2,1,-2]"')


def cmd_kh(args) -> int:
    d = _diagram(args)
    dims = kh_dims(d, route=args.route, budget=args.budget)
    _emit(args, dims.to_json_obj())
    if args.grid:
        sys.stdout.write(render(dims, args.grid))
    return 0


def cmd_lee(args) -> int:
    d = _diagram(args)
    pages = lee_pages(d, args.budget)
    _emit(args, [p.to_json_obj() for p in pages])
    if args.grid:
        arrows = [a for p in pages for a in p.differentials]
        sys.stdout.write(render(pages[0].dims, args.grid, arrows))
    return 0


def cmd_s(args) -> int:
    print(s_invariant(_diagram(args), args.budget))
    return 0


def _resolver(ref):
    return catalog.resolve(ref)


def cmd_movie(args) -> int:
    m = load_movie(args.movie, _resolver)
    _emit(args, induced_kh_map(m, args.budget).to_json_obj())
    return 0


def cmd_obstruct(args) -> int:
    rep = dominance_check(catalog.resolve(args.k0), catalog.resolve(args.k1), args.budget)
    _emit(args, rep.to_json_obj())
    return rep.exit_code


def cmd_selfiso(args) -> int:
    rep = self_concordance_iso(load_movie(args.movie, _resolver), args.budget)
    _emit(args, rep.to_json_obj())
    return rep.exit_code


def cmd_replay(args) -> int:
    m = load_movie(args.movie, _resolver)
    rep = t45_replay(m, KMData.load(args.km), args.budget)
    _emit(args, rep.to_json_obj())
    return rep.exit_code


def _e2_from(args):
    if args.e2:
        return BigradedDims.from_json_obj(json.loads(Path(args.e2).read_text(encoding="utf-8")))
    return kh_dims(_diagram(args), budget=args.budget)


def cmd_collapses(args) -> int:
    c = CollapseConstraints.from_json(Path(args.constraints).read_text(encoding="utf-8"))
    if args.e2 is None and not any((args.knot_pos, args.knot, args.pd, args.braid)):
        raise UsageError("give E_2 dims (--e2) or a knot")
    pats = enumerate_from_constraints(_e2_from(args), c)
    _emit(args, {"count": len(pats), "patterns": [p.to_json_obj() for p in pats]})
    return 0


def cmd_squeeze(args) -> int:
    obj = json.loads(Path(args.instance).read_text(encoding="utf-8"))
    dims = BigradedDims.from_json_obj(obj["dims"])
    inst = SqueezeInstance(dims, dims, [tuple(b) for b in obj["iso_locus"]],
                           [(tuple(s), tuple(t), r) for s, t, r in obj["pairings"]],
                           einf_total=obj.get("einf_total", 1),
                           survivor=obj.get("survivor"))
    v = squeeze_check(inst)
    _emit(args, v.to_json_obj())
    return 0 if v.verdict == "isomorphism" else 3


def cmd_catalog(args) -> int:
    rows = [{"name": e.name, "source": e.source, "crossings": e.crossings, "s": e.s,
             "provenance": e.provenance, "aliases": list(e.aliases)} for e in catalog.ENTRIES]
    _emit(args, rows)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="khconc", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", metavar="FILE", help="also write the JSON output here")
        p.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                       help="largest cube (vertices or generators) to build")
        p.add_argument("--jobs", type=int, default=1,
                       help="worker processes (accepted; computations run in one process)")

    p = sub.add_parser("kh", help="reduced Khovanov homology")
    _add_input(p)
    common(p)
    p.add_argument("--grid", choices=("text", "svg"))
    p.add_argument("--route", choices=("simplify", "naive"), default="simplify")
    p.set_defaults(func=cmd_kh)

    p = sub.add_parser("lee", help="pages of the Lee spectral sequence")
    _add_input(p)
    common(p)
    p.add_argument("--grid", choices=("text", "svg"))
    p.set_defaults(func=cmd_lee)

    p = sub.add_parser("s", help="Rasmussen s-invariant")
    _add_input(p)
    common(p)
    p.set_defaults(func=cmd_s)

    p = sub.add_parser("movie", help="map induced by a movie on reduced Khovanov homology")
    p.add_argument("movie")
    common(p)
    p.set_defaults(func=cmd_movie)

    p = sub.add_parser("selfiso", help="is a self-movie an isomorphism on Kh?")
    p.add_argument("movie")
    common(p)
    p.set_defaults(func=cmd_selfiso)

    p = sub.add_parser("obstruct", help="dimension and s-invariant obstructions")
    p.add_argument("k0")
    p.add_argument("k1")
    common(p)
    p.set_defaults(func=cmd_obstruct)

    p = sub.add_parser("replay", help="isomorphism argument for a T(4,5) self-concordance")
    p.add_argument("movie")
    p.add_argument("km", nargs="?", help="instanton constraint data (default: bundled)")
    common(p)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("collapses", help="enumerate spectral-sequence collapse patterns")
    _add_input(p)
    p.add_argument("--constraints", required=True, help="constraint JSON file")
    p.add_argument("--e2", help="E_2 dims JSON file instead of a knot")
    common(p)
    p.set_defaults(func=cmd_collapses)

    p = sub.add_parser("squeeze", help="run the squeeze on an instance JSON file")
    p.add_argument("instance")
    common(p)
    p.set_defaults(func=cmd_squeeze)

    p = sub.add_parser("catalog", help="list built-in knots")
    common(p)
    p.set_defaults(func=cmd_catalog)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BudgetError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (UsageError, DiagramError, PDSyntaxError, MoveError, ReplayError, LeeError,
            SpectralSequenceError, KeyError, OSError, ValueError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
