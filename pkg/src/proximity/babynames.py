"""
Readers for the SSA baby-name files and an indexed (name, sex, state, year) panel.

Two published layouts are supported, each as a directory or a .zip archive:

    national   yobYYYY.txt      Name,Sex,Count
    by state   ST.TXT           ST,Sex,Year,Name,Count

Names are lower-cased; (name, sex) pairs are separate series.
"""
from __future__ import annotations

import csv
import io
import logging
import os
import re
import zipfile
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple

from .adjacency import STATE_SET

log = logging.getLogger(__name__)

NATIONAL = "NATIONAL"
SEXES = ("F", "M")
_YOB = re.compile(r"^yob(\d{4})\.txt$", re.IGNORECASE)


class DataError(ValueError):
    pass


class NameRecord(NamedTuple):
    name: str
    sex: str
    state: str
    year: int
    count: int


@dataclass
class ParseResult:
    records: list[NameRecord]
    malformed: list[tuple[str, int, str, str]] = field(default_factory=list)  # file, line no, text, reason

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)


def _members(path) -> Iterator[tuple[str, Iterable[str]]]:
    """Yield (basename, lines) for every regular file in a directory or zip archive, sorted by name."""
    if os.path.isdir(path):
        for fn in sorted(os.listdir(path)):
            full = os.path.join(path, fn)
            if os.path.isfile(full):
                with open(full, encoding="utf-8-sig", newline="") as fh:
                    yield fn, fh
    elif zipfile.is_zipfile(path):
        with zipfile.ZipFile(path) as zf:
            for info in sorted(zf.infolist(), key=lambda i: i.filename):
                if info.is_dir():
                    continue
                with zf.open(info) as raw:
                    yield os.path.basename(info.filename), io.TextIOWrapper(raw, encoding="utf-8-sig", newline="")
    else:
        raise FileNotFoundError(path)


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise ValueError("count must be a positive integer")
    return v


def parse_national(path, strict: bool = False) -> ParseResult:
    """Parse a directory (or zip) of yobYYYY.txt files.

    Malformed lines are skipped and listed in the result, or raise DataError
    when `strict`. A .txt file whose name carries no year, or a (name, sex)
    repeated within one file, always raises.
    """
    out = ParseResult([])
    for fn, lines in _members(path):
        if not fn.lower().endswith(".txt"):
            continue
        m = _YOB.match(fn)
        if not m:
            raise DataError(f"{fn}: cannot read a year from the file name")
        year = int(m.group(1))
        seen = set()
        for lineno, row in enumerate(csv.reader(lines), start=1):
            if not row:
                continue
            try:
                if len(row) != 3:
                    raise ValueError(f"expected 3 fields, got {len(row)}")
                name, sex, count = (c.strip() for c in row)
                if not name:
                    raise ValueError("empty name")
                if sex not in SEXES:
                    raise ValueError(f"bad sex {sex!r}")
                rec = NameRecord(name.lower(), sex, NATIONAL, year, _positive_int(count))
            except ValueError as exc:
                if strict:
                    raise DataError(f"{fn}:{lineno}: {exc}") from None
                out.malformed.append((fn, lineno, ",".join(row), str(exc)))
                continue
            key = (rec.name, rec.sex)
            if key in seen:
                raise DataError(f"{fn}:{lineno}: duplicate key {key}")
            seen.add(key)
            out.records.append(rec)
    if out.malformed:
        log.warning("%s: %d malformed national lines", path, len(out.malformed))
    return out


def parse_state(path, strict: bool = False, years: tuple[int, int] | None = None) -> ParseResult:
    """Parse per-state files (ST,Sex,Year,Name,Count lines).

    `years` (inclusive) drops records outside the range while reading.
    Unknown state codes and unreadable years are malformed lines; a
    repeated (state, sex, year, name) raises DataError.
    """
    out = ParseResult([])
    seen = set()
    for fn, lines in _members(path):
        if not fn.lower().endswith(".txt"):
            continue
        for lineno, row in enumerate(csv.reader(lines), start=1):
            if not row:
                continue
            try:
                if len(row) != 5:
                    raise ValueError(f"expected 5 fields, got {len(row)}")
                st, sex, yr, name, count = (c.strip() for c in row)
                if st not in STATE_SET:
                    raise ValueError(f"unknown state code {st!r}")
                if sex not in SEXES:
                    raise ValueError(f"bad sex {sex!r}")
                if not (len(yr) == 4 and yr.isdigit()):
                    raise ValueError(f"malformed year {yr!r}")
                if not name:
                    raise ValueError("empty name")
                rec = NameRecord(name.lower(), sex, st, int(yr), _positive_int(count))
            except ValueError as exc:
                if strict:
                    raise DataError(f"{fn}:{lineno}: {exc}") from None
                out.malformed.append((fn, lineno, ",".join(row), str(exc)))
                continue
            if years is not None and not (years[0] <= rec.year <= years[1]):
                continue
            key = (rec.state, rec.sex, rec.year, rec.name)
            if key in seen:
                raise DataError(f"{fn}:{lineno}: duplicate key {key}")
            seen.add(key)
            out.records.append(rec)
    if out.malformed:
        log.warning("%s: %d malformed state lines", path, len(out.malformed))
    return out


def load_totals(path) -> dict[tuple[str, int], int]:
    """Births by state and year from a CSV with header state,year,births."""
    totals = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"state", "year", "births"} <= set(reader.fieldnames):
            raise DataError(f"{path}: expected header state,year,births")
        for lineno, row in enumerate(reader, start=2):
            st = row["state"].strip().upper()
            if st not in STATE_SET:
                raise DataError(f"{path}:{lineno}: unknown state code {st!r}")
            try:
                key = (st, int(row["year"]))
                births = _positive_int(row["births"])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
            if key in totals:
                raise DataError(f"{path}:{lineno}: duplicate key {key}")
            totals[key] = births
    return totals


def top_n_records(records: Iterable[NameRecord], n: int) -> list[NameRecord]:
    """Keep the `n` most frequent names per (state, sex, year); ties broken alphabetically."""
    groups = defaultdict(list)
    for r in records:
        groups[(r.state, r.sex, r.year)].append(r)
    kept = []
    for key in sorted(groups):
        g = sorted(groups[key], key=lambda r: (-r.count, r.name))
        kept.extend(g[:n])
    return kept


class NamePanel:
    """Read-only index over state (and optional national) name counts.

    ``series[(name, sex)][year][state]`` holds state counts; state totals are
    the sum of listed counts per (state, year) unless an external totals table
    was supplied, in which case that table is used by `total`.
    """

    def __init__(self, series, national, state_totals, first_year, years, top_n, totals_override=None):
        self.series = series
        self.national = national
        self.state_totals = state_totals
        self.first_year = first_year
        self.years = years
        self.top_n = top_n
        self.totals_override = totals_override

    @property
    def totals_policy(self) -> str:
        if self.totals_override is not None:
            return "external births-by-state-year table"
        return "sum of listed state counts (proxy for all births)"

    def keys(self):
        return sorted(self.series)

    def state_counts(self, name: str, sex: str, year: int) -> dict[str, int]:
        return self.series.get((name.lower(), sex), {}).get(year, {})

    def state_sum(self, name: str, sex: str, year: int) -> int:
        return sum(self.state_counts(name, sex, year).values())

    def national_count(self, name: str, sex: str, year: int) -> int | None:
        return self.national.get((name.lower(), sex), {}).get(year)

    def total(self, state: str, year: int) -> int:
        if self.totals_override is not None:
            return self.totals_override.get((state, year), 0)
        return self.state_totals.get((state, year), 0)

    def states_before(self, name: str, sex: str, year: int) -> set[str]:
        """States where (name, sex) has a record in any panel year before `year`."""
        out = set()
        for y, by_state in self.series.get((name.lower(), sex), {}).items():
            if y < year:
                out.update(by_state)
        return out


def build_panel(records: Iterable[NameRecord], year_range: tuple[int, int] | None = None,
                top_n: int | None = 100, totals: dict | None = None) -> NamePanel:
    """Index state and national records.

    Records outside `year_range` (inclusive) are dropped. State records are
    cut to the `top_n` names per (state, sex, year) before indexing, so a
    "listed" name means a top-n name; ``top_n=None`` keeps everything.
    """
    lo, hi = year_range if year_range is not None else (-10 ** 9, 10 ** 9)
    state_recs, nat_recs = [], []
    for r in records:
        if not lo <= r.year <= hi:
            continue
        (nat_recs if r.state == NATIONAL else state_recs).append(r)
    if not state_recs:
        raise DataError("no state records left after year filtering")
    if top_n is not None:
        state_recs = top_n_records(state_recs, top_n)

    series: dict = {}
    state_totals: dict = defaultdict(int)
    first_year: dict = {}
    for r in state_recs:
        key = (r.name, r.sex)
        series.setdefault(key, {}).setdefault(r.year, {})[r.state] = r.count
        state_totals[(r.state, r.year)] += r.count
        if r.year < first_year.get(key, 10 ** 9):
            first_year[key] = r.year
    national: dict = {}
    for r in nat_recs:
        national.setdefault((r.name, r.sex), {})[r.year] = r.count
    years = tuple(sorted({r.year for r in state_recs}))
    return NamePanel(series, national, dict(state_totals), first_year, years, top_n, totals)


def accounting_anomalies(panel: NamePanel) -> list[tuple[str, str, int, int, int]]:
    """(name, sex, year, state sum, national count) where the state sum exceeds the national count."""
    out = []
    for key, by_year in panel.national.items():
        for year, nat in by_year.items():
            s = panel.state_sum(key[0], key[1], year)
            if s > nat:
                out.append((key[0], key[1], year, s, nat))
    if out:
        log.info("%d (name, sex, year) keys with state sum above national count", len(out))
    return sorted(out)
