"""Static tile-grid map of per-state name shares (one SVG per name-year)."""
from __future__ import annotations

import csv
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

from .adjacency import STATES

# (row, col) of each state on an 8 x 11 tile grid
TILES = {
    "AK": (0, 0), "ME": (0, 10),
    "VT": (1, 9), "NH": (1, 10),
    "WA": (2, 0), "ID": (2, 1), "MT": (2, 2), "ND": (2, 3), "MN": (2, 4), "IL": (2, 5),
    "WI": (2, 6), "MI": (2, 7), "NY": (2, 8), "RI": (2, 9), "MA": (2, 10),
    "OR": (3, 0), "NV": (3, 1), "WY": (3, 2), "SD": (3, 3), "IA": (3, 4), "IN": (3, 5),
    "OH": (3, 6), "PA": (3, 7), "NJ": (3, 8), "CT": (3, 9),
    "CA": (4, 0), "UT": (4, 1), "CO": (4, 2), "NE": (4, 3), "MO": (4, 4), "KY": (4, 5),
    "WV": (4, 6), "VA": (4, 7), "MD": (4, 8), "DE": (4, 9),
    "AZ": (5, 1), "NM": (5, 2), "KS": (5, 3), "AR": (5, 4), "TN": (5, 5), "NC": (5, 6),
    "SC": (5, 7), "DC": (5, 8),
    "OK": (6, 3), "LA": (6, 4), "MS": (6, 5), "AL": (6, 6), "GA": (6, 7),
    "HI": (7, 0), "TX": (7, 3), "FL": (7, 8),
}

# upper share bound (inclusive) -> fill; zero share is drawn in ABSENT
RAMP = (
    (0.001, "#deebf7"),
    (0.0025, "#9ecae1"),
    (0.005, "#6baed6"),
    (0.01, "#3182bd"),
    (1.0, "#08519c"),
)
ABSENT = "#f0f0f0"
TILE = 48
GAP = 4


def shade(share: float) -> str:
    if share <= 0:
        return ABSENT
    for bound, color in RAMP:
        if share <= bound:
            return color
    return RAMP[-1][1]


def ramp_description() -> str:
    parts = [f"0 -> {ABSENT}"]
    lo = 0.0
    for bound, color in RAMP:
        parts.append(f"({lo:.2%}, {bound:.2%}] -> {color}")
        lo = bound
    return "; ".join(parts)


def render_svg(shares: Mapping[str, float], title: str, header: Sequence[str] = (),
               warning: str | None = None) -> str:
    """Deterministic SVG text for a 51-tile state map."""
    width = 11 * (TILE + GAP) + GAP
    height = 8 * (TILE + GAP) + GAP + 60
    out = ['<?xml version="1.0" encoding="UTF-8"?>', "<!--"]
    out += [f"  {escape(h).replace('--', '- -')}" for h in header]
    out += [f"  shade ramp (share of state births): {ramp_description()}", "-->"]
    out.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
               f'viewBox="0 0 {width} {height}" font-family="sans-serif">')
    out.append(f'<text x="{GAP}" y="20" font-size="16">{escape(title)}</text>')
    for st in STATES:
        row, col = TILES[st]
        x = GAP + col * (TILE + GAP)
        y = 30 + GAP + row * (TILE + GAP)
        share = shares.get(st, 0.0)
        out.append(f'<g><title>{st}: {share:.4%}</title>'
                   f'<rect x="{x}" y="{y}" width="{TILE}" height="{TILE}" fill="{shade(share)}" stroke="#ffffff"/>'
                   f'<text x="{x + TILE // 2}" y="{y + TILE // 2 + 5}" font-size="13" text-anchor="middle">{st}</text></g>')
    if warning:
        out.append(f'<text x="{GAP}" y="{height - 10}" font-size="14" fill="#b00000">{escape(warning)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_shares_csv(shares: Mapping[str, float], path, header: Sequence[str] = ()) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("state", "share"))
        for st in STATES:
            w.writerow((st, repr(float(shares.get(st, 0.0)))))
