"""Zip-code centroids and great-circle distances."""
from __future__ import annotations

import csv
import logging
import math
import os
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping

from .powerlaw import DistanceSample

log = logging.getLogger(__name__)

EARTH_RADIUS_KM = 6371.0088


class GazetteerError(ValueError):
    pass


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float

    def __post_init__(self):
        if not (math.isfinite(self.lat) and -90.0 <= self.lat <= 90.0):
            raise ValueError(f"latitude out of range: {self.lat!r}")
        if not (math.isfinite(self.lon) and -180.0 <= self.lon <= 180.0):
            raise ValueError(f"longitude out of range: {self.lon!r}")


def normalize_zip(raw: str) -> str:
    """Return the 5-digit zip for `raw`, dropping any ZIP+4 suffix.

    Raises ValueError if what remains is not exactly five digits.
    """
    z = raw.strip().split("-", 1)[0]
    if len(z) != 5 or not z.isdigit():
        raise ValueError(f"not a 5-digit zip code: {raw!r}")
    return z


@dataclass(frozen=True)
class ZipGazetteer:
    entries: Mapping[str, GeoPoint]
    source: str = "<memory>"
    malformed: int = 0

    def __post_init__(self):
        for key in self.entries:
            if len(key) != 5 or not key.isdigit():
                raise GazetteerError(f"bad gazetteer key {key!r}")
        object.__setattr__(self, "entries", MappingProxyType(dict(self.entries)))

    def __len__(self):
        return len(self.entries)

    def __contains__(self, zipcode):
        return zipcode in self.entries

    def lookup(self, zipcode: str) -> GeoPoint:
        return self.entries[normalize_zip(zipcode)]

    def get(self, zipcode: str) -> GeoPoint | None:
        try:
            return self.lookup(zipcode)
        except (KeyError, ValueError):
            return None


def load_gazetteer(path, zip_col="zip", lat_col="lat", lon_col="lon") -> ZipGazetteer:
    """Read a zip,lat,lon CSV (header required) into a ZipGazetteer.

    Malformed rows are skipped, counted and logged. Files with no usable row,
    or with the same zip listed at two different coordinates, are rejected.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    entries: dict[str, GeoPoint] = {}
    bad = 0
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise GazetteerError(f"{path}: zero valid rows")
        missing = {zip_col, lat_col, lon_col} - set(reader.fieldnames)
        if missing:
            raise GazetteerError(f"{path}: missing columns {sorted(missing)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                z = normalize_zip(row[zip_col] or "")
                pt = GeoPoint(float(row[lat_col]), float(row[lon_col]))
            except (TypeError, ValueError):
                bad += 1
                log.warning("%s:%d: malformed gazetteer row %r", path, lineno, row)
                continue
            prev = entries.get(z)
            if prev is not None and prev != pt:
                raise GazetteerError(f"{path}:{lineno}: zip {z} has conflicting coordinates")
            entries[z] = pt
    if not entries:
        raise GazetteerError(f"{path}: zero valid rows")
    if bad:
        log.warning("%s: %d malformed rows skipped", path, bad)
    return ZipGazetteer(entries, source=str(path), malformed=bad)


def haversine_km(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in km on a sphere of mean Earth radius."""
    if a == b:
        return 0.0
    phi1, phi2 = math.radians(a.lat), math.radians(b.lat)
    dphi = phi2 - phi1
    dlam = math.radians(b.lon - a.lon)
    h = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


@dataclass
class PairDistances:
    sample: DistanceSample
    excluded: int
    unresolved: list = field(default_factory=list)


def pair_distances(pairs: Iterable[tuple[str, str]], gaz: ZipGazetteer, label="pairs") -> PairDistances:
    values = []
    unresolved = []
    for za, zb in pairs:
        pa, pb = gaz.get(za), gaz.get(zb)
        if pa is None or pb is None:
            unresolved.append((za, zb))
            continue
        values.append(haversine_km(pa, pb))
    if not values:
        raise GazetteerError(f"all {len(unresolved)} pairs unresolvable")
    if unresolved:
        log.info("%d of %d pairs had unknown zip codes", len(unresolved), len(values) + len(unresolved))
    return PairDistances(DistanceSample(values, label=label), len(unresolved), unresolved)
