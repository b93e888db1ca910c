"""
Proximity-Effect Index (PEI) of new baby names.

For a name i in year t, Group A is every state where i was listed in some
earlier year plus the states bordering them; Group B is the rest. With no
proximity effect, Group A should receive its population share of the babies
named i:

    expected_A = tot_A / (tot_A + tot_B) * N_i
    PEI        = n_iA / expected_A - 1

so PEI > 0 means the name is over-represented near where it has already
been seen.
"""
from __future__ import annotations

import csv
import math
import statistics
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import stats

from .adjacency import STATES, AdjacencyGraph, expand
from .babynames import NamePanel

COHORT_RULES = {
    "new": "names first listed strictly after the window's first year",
    "seeded": "all names with a nonempty Group A",
    "after": "names first listed after a given year",
}
COUNT_SOURCES = ("state", "national")


class PeiError(ValueError):
    pass


@dataclass(frozen=True)
class PeiPoint:
    name: str
    sex: str
    year: int
    pei: float
    group_a: frozenset
    n_i_a: int
    n_i_b: int
    tot_a: int
    tot_b: int

    @property
    def n_i(self) -> int:
        return self.n_i_a + self.n_i_b

    @property
    def expected_a(self) -> float:
        return self.tot_a / (self.tot_a + self.tot_b) * self.n_i


def pei_value(n_i_a: int, n_i_b: int, tot_a: int, tot_b: int) -> float:
    return n_i_a / (tot_a / (tot_a + tot_b) * (n_i_a + n_i_b)) - 1


def group_a_states(name: str, sex: str, year: int, panel: NamePanel, graph: AdjacencyGraph) -> frozenset:
    return expand(panel.states_before(name, sex, year), graph)


def _point(name, sex, year, group_a, counts, totals, panel, count_source):
    if not group_a:
        raise PeiError(f"{name}/{sex} not yet seeded before {year}: Group A is empty")
    n_i_a = sum(counts.get(s, 0) for s in group_a)
    if count_source == "state":
        n_i = sum(counts.values())
    elif count_source == "national":
        n_i = panel.national_count(name, sex, year) or 0
        if n_i < n_i_a:
            raise PeiError(f"{name}/{sex}/{year}: national count {n_i} below Group A count {n_i_a}")
    else:
        raise ValueError(f"unknown count source {count_source!r}")
    if n_i == 0:
        raise PeiError(f"{name}/{sex} has zero count in {year}")
    tot_a = sum(totals.get(s, 0) for s in group_a)
    tot_b = sum(v for s, v in totals.items() if s not in group_a)
    if tot_a == 0:
        raise PeiError(f"{name}/{sex}/{year}: Group A states have no births")
    return PeiPoint(name, sex, year, pei_value(n_i_a, n_i - n_i_a, tot_a, tot_b),
                    group_a, n_i_a, n_i - n_i_a, tot_a, tot_b)


def _year_totals(panel: NamePanel, year: int) -> dict[str, int]:
    return {s: panel.total(s, year) for s in STATES}


def compute_pei(name: str, sex: str, year: int, panel: NamePanel, graph: AdjacencyGraph,
                count_source: str = "state") -> PeiPoint:
    name = name.lower()
    group_a = group_a_states(name, sex, year, panel, graph)
    return _point(name, sex, year, group_a, panel.state_counts(name, sex, year),
                  _year_totals(panel, year), panel, count_source)


def eligible_names(panel: NamePanel, window: tuple[int, int], rule: str = "new",
                   after_year: int | None = None) -> list[tuple[str, str, int]]:
    """(name, sex, first_year) triples selected by a cohort rule.

    "new" keeps names whose first listed year lies inside the window but
    after its first year (names already present then are left-censored).
    "after" keeps names first listed after `after_year`. "seeded" keeps
    every name first listed no later than the window's last year.
    """
    lo, hi = window
    if rule == "new":
        ok = lambda f: lo < f <= hi
    elif rule == "after":
        if after_year is None:
            raise ValueError('rule "after" needs after_year')
        ok = lambda f: after_year < f <= hi
    elif rule == "seeded":
        ok = lambda f: f <= hi
    else:
        raise ValueError(f"unknown cohort rule {rule!r}")
    return sorted((k[0], k[1], f) for k, f in panel.first_year.items() if ok(f))


@dataclass(frozen=True)
class YearAggregate:
    year: int
    median: float
    percentiles: Mapping[float, float]
    count: int


def yearly_aggregate(points: Iterable[PeiPoint] | Iterable[float], year: int | None = None,
                     percentiles: Sequence[float] = (25, 75)) -> YearAggregate:
    """Median (mean of the two middle values for even counts) and linear-interpolated percentiles.

    `points` may be PeiPoints, in which case only those in `year` are used,
    or bare PEI values.
    """
    vals = []
    for p in points:
        if isinstance(p, PeiPoint):
            if year is None or p.year == year:
                vals.append(p.pei)
        else:
            vals.append(float(p))
    if not vals:
        raise PeiError(f"no PEI values for year {year}")
    pct = {float(q): float(np.percentile(vals, q)) for q in percentiles}
    return YearAggregate(year, float(statistics.median(vals)), pct, len(vals))


@dataclass
class PeiSeries:
    points: list[PeiPoint]
    aggregates: dict[int, YearAggregate]
    window: tuple[int, int]
    rule: str
    rule_detail: str
    count_source: str
    totals_policy: str
    skipped: int = 0
    meta: dict = field(default_factory=dict)

    def medians(self) -> dict[int, float]:
        return {y: a.median for y, a in sorted(self.aggregates.items())}

    def points_by_year(self) -> dict[int, list[float]]:
        out: dict[int, list[float]] = {}
        for p in self.points:
            out.setdefault(p.year, []).append(p.pei)
        return out


def compute_series(panel: NamePanel, graph: AdjacencyGraph, window: tuple[int, int],
                   rule: str = "new", after_year: int | None = None,
                   count_source: str = "state", percentiles: Sequence[float] = (25, 75)) -> PeiSeries:
    """PEI for every eligible name in every window year after its first listing.

    Name-years with no count anywhere produce no point; name-years where
    the index is undefined are dropped and tallied in ``skipped``.
    """
    lo, hi = window
    names = eligible_names(panel, window, rule, after_year)
    years = [y for y in panel.years if y <= hi]
    totals = {y: _year_totals(panel, y) for y in years}
    points = []
    skipped = 0
    for name, sex, first in names:
        by_year = panel.series[(name, sex)]
        seeded: set = set()
        for y in years:
            if y > first and y >= lo:
                counts = by_year.get(y, {})
                has_count = bool(counts) if count_source == "state" else bool(panel.national_count(name, sex, y))
                if has_count:
                    try:
                        points.append(_point(name, sex, y, expand(seeded, graph), counts,
                                             totals[y], panel, count_source))
                    except PeiError:
                        skipped += 1
            seeded.update(by_year.get(y, ()))
    points.sort(key=lambda p: (p.year, p.name, p.sex))
    aggregates = {y: yearly_aggregate(points, y, percentiles) for y in sorted({p.year for p in points})}
    detail = COHORT_RULES[rule] + (f" ({after_year})" if rule == "after" else "")
    return PeiSeries(points, aggregates, window, rule, detail, count_source, panel.totals_policy, skipped)


@dataclass(frozen=True)
class BreakpointResult:
    mean_pre: float
    mean_post: float
    t: float
    dof: float
    p_value: float
    n_pre: int
    n_post: int
    breakpoint: int
    unit: str


def welch_t(pre: Sequence[float], post: Sequence[float]) -> tuple[float, float, float]:
    """Welch two-sample t for mean(pre) - mean(post): returns (t, dof, two-sided p)."""
    a = np.asarray(pre, dtype=float)
    b = np.asarray(post, dtype=float)
    if a.size < 2 or b.size < 2:
        raise PeiError("each side needs at least 2 observations")
    va = a.var(ddof=1) / a.size
    vb = b.var(ddof=1) / b.size
    if va == 0 and vb == 0:
        raise PeiError("zero variance on both sides")
    t = (a.mean() - b.mean()) / math.sqrt(va + vb)
    dof = (va + vb) ** 2 / (va ** 2 / (a.size - 1) + vb ** 2 / (b.size - 1))
    p = 2 * stats.t.sf(abs(t), dof)
    return float(t), float(dof), float(p)


def breakpoint_test(series: PeiSeries | Mapping[int, float], breakpoint_year: int = 1995,
                    unit: str = "medians") -> BreakpointResult:
    """Compare PEI before `breakpoint_year` with PEI from it onward.

    ``unit="medians"`` uses one value per year (the yearly median);
    ``unit="points"`` pools every individual PEI. A mapping year -> value
    is treated as yearly values. t is negative when the later period is higher.
    """
    if isinstance(series, PeiSeries):
        if unit == "medians":
            pairs = [(y, v) for y, v in series.medians().items()]
        elif unit == "points":
            pairs = [(p.year, p.pei) for p in series.points]
        else:
            raise ValueError(f"unknown unit {unit!r}")
    else:
        pairs = sorted(series.items())
    pre = [v for y, v in pairs if y < breakpoint_year]
    post = [v for y, v in pairs if y >= breakpoint_year]
    t, dof, p = welch_t(pre, post)
    return BreakpointResult(float(np.mean(pre)), float(np.mean(post)), t, dof, p,
                            len(pre), len(post), breakpoint_year, unit)


def name_share_by_state(name: str, sex: str, year: int, panel: NamePanel) -> dict[str, float]:
    """Share of each state's births given this name in `year`; 0.0 where it is not listed."""
    counts = panel.state_counts(name, sex, year)
    out = {}
    for s in STATES:
        c = counts.get(s, 0)
        tot = panel.total(s, year)
        out[s] = c / tot if c and tot else 0.0
    return out


# writers

POINT_COLUMNS = ("name", "sex", "year", "pei", "n_i_a", "n_i_b", "tot_a", "tot_b", "group_a_size")


def write_points_csv(series: PeiSeries, path, header: Sequence[str] = ()) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(POINT_COLUMNS)
        for p in series.points:
            w.writerow((p.name, p.sex, p.year, repr(p.pei), p.n_i_a, p.n_i_b, p.tot_a, p.tot_b, len(p.group_a)))


def write_yearly_csv(series: PeiSeries, path, header: Sequence[str] = ()) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("year", "median", "p25", "p75", "count"))
        for y, a in sorted(series.aggregates.items()):
            w.writerow((y, repr(a.median), repr(a.percentiles.get(25.0, math.nan)),
                        repr(a.percentiles.get(75.0, math.nan)), a.count))


def format_breakpoint_report(series: PeiSeries, results: Sequence[BreakpointResult],
                             header: Sequence[str] = ()) -> str:
    lines = [f"# {h}" for h in header]
    lines += [
        f"window: {series.window[0]}-{series.window[1]}",
        f"cohort rule: {series.rule} - {series.rule_detail}",
        f"name count source: {series.count_source}",
        f"state totals: {series.totals_policy}",
        f"PEI points: {len(series.points)} (skipped {series.skipped})",
    ]
    if series.points:
        pos = sum(p.pei > 0 for p in series.points) / len(series.points)
        lines.append(f"share of PEI points > 0: {pos:.4f}")
    lines.append("")
    for r in results:
        lines += [
            f"[{r.unit}] breakpoint {r.breakpoint}",
            f"  mean before: {r.mean_pre:.6f} (n={r.n_pre})",
            f"  mean after:  {r.mean_post:.6f} (n={r.n_post})",
            f"  Welch t: {r.t:.4f}  dof: {r.dof:.2f}  p: {r.p_value:.3g}",
        ]
    return "\n".join(lines) + "\n"
