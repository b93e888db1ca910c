"""U.S. state bordering relation (50 states + DC)."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping

STATES = (
    "AK", "AL", "AR", "AZ", "CA", "CO", "CT", "DC", "DE", "FL", "GA", "HI", "IA",
    "ID", "IL", "IN", "KS", "KY", "LA", "MA", "MD", "ME", "MI", "MN", "MO", "MS",
    "MT", "NC", "ND", "NE", "NH", "NJ", "NM", "NV", "NY", "OH", "OK", "OR", "PA",
    "RI", "SC", "SD", "TN", "TX", "UT", "VA", "VT", "WA", "WI", "WV", "WY",
)
STATE_SET = frozenset(STATES)

# Shared land or river boundary segments, 107 undirected pairs. Water-only
# contacts (MI-MN, MI-IL, NY-RI) and the Four Corners point contacts are not listed.
_BORDERS = """
AL: FL GA MS TN
AR: LA MO MS OK TN TX
AZ: CA NM NV UT
CA: NV OR
CO: KS NE NM OK UT WY
CT: MA NY RI
DC: MD VA
DE: MD NJ PA
FL: GA
GA: NC SC TN
IA: IL MN MO NE SD WI
ID: MT NV OR UT WA WY
IL: IN KY MO WI
IN: KY MI OH
KS: MO NE OK
KY: MO OH TN VA WV
LA: MS TX
MA: NH NY RI VT
MD: PA VA WV
ME: NH
MI: OH WI
MN: ND SD WI
MO: NE OK TN
MS: TN
MT: ND SD WY
NC: SC TN VA
ND: SD
NE: SD WY
NH: VT
NJ: NY PA
NM: OK TX
NV: OR UT
NY: PA VT
OH: PA WV
OK: TX
OR: WA
PA: WV
SD: WY
TN: VA
UT: WY
VA: WV
"""

CORNER_PAIRS = (("AZ", "CO"), ("NM", "UT"))


def builtin_pairs() -> list[tuple[str, str]]:
    pairs = []
    for line in _BORDERS.strip().splitlines():
        head, rest = line.split(":")
        pairs.extend((head.strip(), other) for other in rest.split())
    return pairs


class AdjacencyError(ValueError):
    pass


@dataclass(frozen=True)
class AdjacencyGraph:
    neighbors: Mapping[str, frozenset]
    corner_pairs_included: bool = False

    def __post_init__(self):
        for a, nbrs in self.neighbors.items():
            if a in nbrs:
                raise AdjacencyError(f"{a} listed as its own neighbor")
            for b in nbrs:
                if a not in self.neighbors.get(b, ()):
                    raise AdjacencyError(f"asymmetric border {a}-{b}")

    def __getitem__(self, state: str) -> frozenset:
        return self.neighbors[state]

    def edges(self) -> list[tuple[str, str]]:
        return sorted((a, b) for a, nbrs in self.neighbors.items() for b in nbrs if a < b)


def _graph_from_pairs(pairs: Iterable[tuple[str, str]], corner: bool) -> AdjacencyGraph:
    nbrs: dict[str, set] = {s: set() for s in STATES}
    for a, b in pairs:
        for s in (a, b):
            if s not in STATE_SET:
                raise AdjacencyError(f"unknown state code {s!r}")
        if a == b:
            raise AdjacencyError(f"self-loop on {a}")
        nbrs[a].add(b)
        nbrs[b].add(a)
    return AdjacencyGraph(MappingProxyType({s: frozenset(v) for s, v in nbrs.items()}), corner)


def load_adjacency(path=None, include_corner_pairs: bool = False) -> AdjacencyGraph:
    """Builtin border table, or pairs from an "ST1,ST2" override file.

    The override file replaces the builtin table entirely; pairs are
    undirected and a header line is optional.
    """
    if path is None:
        pairs = builtin_pairs()
    else:
        pairs = []
        with open(path, newline="", encoding="utf-8") as fh:
            for i, row in enumerate(csv.reader(fh)):
                if not row or not "".join(row).strip():
                    continue
                if len(row) != 2:
                    raise AdjacencyError(f"{path}:{i + 1}: expected two state codes")
                a, b = (c.strip().upper() for c in row)
                if i == 0 and (a not in STATE_SET and b not in STATE_SET):
                    continue  # header
                pairs.append((a, b))
    if include_corner_pairs:
        pairs = list(pairs) + list(CORNER_PAIRS)
    return _graph_from_pairs(pairs, include_corner_pairs)


def expand(states: Iterable[str], graph: AdjacencyGraph) -> frozenset:
    """The given states plus every state bordering one of them."""
    out = set()
    for s in states:
        if s not in graph.neighbors:
            raise AdjacencyError(f"unknown state code {s!r}")
        out.add(s)
        out |= graph.neighbors[s]
    return frozenset(out)
