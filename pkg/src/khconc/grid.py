"""Grid plots of bigraded dimensions: i across, j - i up.

Text and SVG output share :func:`layout`, so they always place the same
marks in the same cells.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

BULLET = "•"


@dataclass(frozen=True)
class Layout:
    columns: tuple  # i values, left to right
    rows: tuple  # j - i values, top to bottom
    cells: dict  # (col, row) -> dim
    arrows: tuple  # ((col, row), (col, row))


def layout(dims: Mapping, arrows: Sequence = ()) -> Layout:
    """Cell positions for ``dims`` keyed by (i, j); ``arrows`` are (i, j) pairs."""
    pts = {(i, j - i): v for (i, j), v in dims.items() if v}
    ends = [(s[0], s[1] - s[0]) for a in arrows for s in a[:2]]
    allp = list(pts) + ends
    if not allp:
        return Layout((0,), (0,), {}, ())
    cols = tuple(range(min(p[0] for p in allp), max(p[0] for p in allp) + 1))
    rows = tuple(range(max(p[1] for p in allp), min(p[1] for p in allp) - 1, -1))
    ci = {c: k for k, c in enumerate(cols)}
    ri = {r: k for k, r in enumerate(rows)}
    cells = {(ci[i], ri[dl]): v for (i, dl), v in pts.items()}
    arr = tuple(((ci[s[0]], ri[s[1] - s[0]]), (ci[t[0]], ri[t[1] - t[0]]))
                for s, t, *_ in arrows)
    return Layout(cols, rows, cells, arr)


def _mark(v: int) -> str:
    return BULLET if v == 1 else str(v)


def render_text(dims: Mapping, arrows: Sequence = ()) -> str:
    """Text grid; arrows are listed under the plot."""
    L = layout(dims, arrows)
    width = max(3, max(len(str(c)) for c in L.columns) + 1)
    lab = max(len(str(r)) for r in L.rows)
    lines = []
    for y, r in enumerate(L.rows):
        cells = "".join(_mark(L.cells[(x, y)]).rjust(width) if (x, y) in L.cells
                        else ".".rjust(width) for x in range(len(L.columns)))
        lines.append(f"{str(r).rjust(lab)} |{cells}")
    lines.append(" " * lab + " +" + "-" * (width * len(L.columns)))
    lines.append(" " * (lab + 2) + "".join(str(c).rjust(width) for c in L.columns))
    lines.append(" " * (lab + 2) + "i".rjust(width * len(L.columns) // 2 + 1)
                 + "    (vertical: j - i)")
    for (x0, y0), (x1, y1) in L.arrows:
        lines.append(f"  d: ({L.columns[x0]},{L.rows[y0]}) -> ({L.columns[x1]},{L.rows[y1]})")
    return "\n".join(lines) + "\n"


def render_svg(dims: Mapping, arrows: Sequence = (), cell: int = 28) -> str:
    L = layout(dims, arrows)
    pad = 36
    w = pad + cell * len(L.columns) + 12
    h = 12 + cell * len(L.rows) + pad

    def cx(x):
        return pad + cell * x + cell // 2

    def cy(y):
        return 12 + cell * y + cell // 2

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
           f'viewBox="0 0 {w} {h}" font-family="monospace" font-size="11">',
           '<defs><marker id="ah" markerWidth="8" markerHeight="8" refX="7" refY="4" '
           'orient="auto"><path d="M0,0 L8,4 L0,8 z"/></marker></defs>']
    for x, c in enumerate(L.columns):
        out.append(f'<text x="{cx(x)}" y="{h - 12}" text-anchor="middle">{c}</text>')
        out.append(f'<line x1="{cx(x)}" y1="12" x2="{cx(x)}" y2="{12 + cell * len(L.rows)}" '
                   'stroke="#ddd"/>')
    for y, r in enumerate(L.rows):
        out.append(f'<text x="{pad - 8}" y="{cy(y) + 4}" text-anchor="end">{r}</text>')
        out.append(f'<line x1="{pad}" y1="{cy(y)}" x2="{w - 12}" y2="{cy(y)}" stroke="#ddd"/>')
    for (x, y), v in sorted(L.cells.items()):
        out.append(f'<circle cx="{cx(x)}" cy="{cy(y)}" r="4"/>')
        if v != 1:
            out.append(f'<text x="{cx(x) + 6}" y="{cy(y) - 6}">{v}</text>')
    for (x0, y0), (x1, y1) in L.arrows:
        out.append(f'<line x1="{cx(x0)}" y1="{cy(y0)}" x2="{cx(x1)}" y2="{cy(y1)}" '
                   'stroke="black" marker-end="url(#ah)"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render(dims: Mapping, kind: str = "text", arrows: Sequence = ()) -> str:
    if kind == "text":
        return render_text(dims, arrows)
    if kind == "svg":
        return render_svg(dims, arrows)
    raise ValueError(f"unknown grid format {kind!r}")
