"""
Gravity-model link simulation on a plane.

M individuals are placed uniformly in a region and each unordered pair at
distance r >= r_floor is linked independently with probability
min(1, G m_i m_j / r**2). Because the number of partners at distance r grows
like 2 pi r, link distances should follow f(r) ~ 1/r wherever the
probability is not clamped at 1.

Every pair (i, j), i < j, draws its uniform from a stream keyed on
(seed, i), at offset j - i - 1, so results do not depend on how the pair
loop is chunked.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .powerlaw import DistanceSample

REGIONS = ("torus", "disc")
MASS_MODELS = ("identical", "lognormal")

_POSITIONS, _MASSES, _PAIRS = 0, 1, 2


class SimulationError(ValueError):
    pass


@dataclass(frozen=True)
class GravityConfig:
    population: int
    G: float
    region: str = "torus"
    size: float = 1000.0  # torus side or disc radius, km
    mass_model: str = "identical"
    mass: float = 1.0
    mu: float = 0.0
    sigma: float = 0.5
    r_floor: float = 1.0
    seed: int = 0
    max_links: int = 5_000_000

    def __post_init__(self):
        if self.population < 2:
            raise SimulationError("population must be at least 2")
        if self.region not in REGIONS:
            raise SimulationError(f"region must be one of {REGIONS}")
        if self.mass_model not in MASS_MODELS:
            raise SimulationError(f"mass_model must be one of {MASS_MODELS}")
        if not self.size > 0:
            raise SimulationError("region size must be positive")
        if not self.r_floor > 0:
            raise SimulationError("r_floor must be positive")
        if self.G < 0:
            raise SimulationError("G must be nonnegative")
        if self.mass_model == "identical" and not self.mass > 0:
            raise SimulationError("mass must be positive")

    @property
    def area(self) -> float:
        return self.size ** 2 if self.region == "torus" else math.pi * self.size ** 2

    @property
    def max_distance(self) -> float:
        return self.size * math.sqrt(2) / 2 if self.region == "torus" else 2 * self.size

    @classmethod
    def from_dict(cls, d: dict) -> "GravityConfig":
        d = dict(d)
        region = d.pop("region", "torus")
        if isinstance(region, dict):
            region = dict(region)
            kind = region.pop("kind")
            d["size"] = region.pop("side" if kind == "torus" else "radius")
            if region:
                raise SimulationError(f"unexpected region keys {sorted(region)}")
            region = kind
        d["region"] = region
        for alias in ("side", "radius"):
            if alias in d:
                d["size"] = d.pop(alias)
        mm = d.pop("mass_model", "identical")
        if isinstance(mm, dict):
            mm = dict(mm)
            kind = mm.pop("kind")
            d.update(mm)
            mm = kind
        d["mass_model"] = mm
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise SimulationError(f"unknown config keys {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "GravityConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return asdict(self)


def _rng(config: GravityConfig, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(config.seed, spawn_key=key)))


def sample_positions(config: GravityConfig) -> np.ndarray:
    rng = _rng(config, _POSITIONS)
    M = config.population
    if config.region == "torus":
        return rng.random((M, 2)) * config.size
    rad = config.size * np.sqrt(rng.random(M))
    theta = 2 * np.pi * rng.random(M)
    return np.column_stack((rad * np.cos(theta), rad * np.sin(theta)))


def sample_masses(config: GravityConfig) -> np.ndarray:
    if config.mass_model == "identical":
        return np.full(config.population, float(config.mass))
    return _rng(config, _MASSES).lognormal(config.mu, config.sigma, config.population)


def torus_distance(a: np.ndarray, b: np.ndarray, side: float) -> np.ndarray:
    """Shortest distance between points on a square torus of the given side."""
    d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)) % side
    d = np.minimum(d, side - d)
    return np.hypot(d[..., 0], d[..., 1])


def _distances(config, origin, others):
    if config.region == "torus":
        return torus_distance(others, origin, config.size)
    diff = others - origin
    return np.hypot(diff[:, 0], diff[:, 1])


def expected_links_estimate(config: GravityConfig, mean_mass: float | None = None) -> float:
    """Rough link count from the continuum pair density 2 pi r / area.

    Overestimates on the torus beyond side/2; used only as a memory guard.
    """
    m = config.mass if mean_mass is None else mean_mass
    pairs = config.population * (config.population - 1) / 2
    k = config.G * m * m
    r_star = math.sqrt(k)
    lo, hi = config.r_floor, config.max_distance
    if hi <= lo:
        return 0.0
    clamped_hi = min(max(r_star, lo), hi)
    total = math.pi * (clamped_hi ** 2 - lo ** 2)
    if hi > clamped_hi:
        total += 2 * math.pi * k * math.log(hi / clamped_hi)
    return pairs * total / config.area


@dataclass
class LinkSample:
    i: np.ndarray
    j: np.ndarray
    distance: np.ndarray
    label: str = ""

    @property
    def realized_count(self) -> int:
        return int(self.distance.size)

    @property
    def links(self) -> list[tuple[int, int, float]]:
        return list(zip(self.i.tolist(), self.j.tolist(), self.distance.tolist()))

    @property
    def distances(self) -> DistanceSample:
        return DistanceSample(self.distance, label=self.label)

    def degrees(self, population: int) -> np.ndarray:
        return np.bincount(self.i, minlength=population) + np.bincount(self.j, minlength=population)


def link_probabilities(config: GravityConfig, positions: np.ndarray, masses: np.ndarray, i: int):
    """Distances and link probabilities from node i to nodes i+1..M-1."""
    d = _distances(config, positions[i], positions[i + 1:])
    with np.errstate(divide="ignore"):
        p = np.minimum(1.0, config.G * masses[i] * masses[i + 1:] / (d * d))
    p[d < config.r_floor] = 0.0
    return d, p


def simulate(config: GravityConfig, positions: np.ndarray | None = None,
             masses: np.ndarray | None = None) -> LinkSample:
    """Realize one link set; `positions`/`masses` may be supplied to freeze them."""
    M = config.population
    pos = sample_positions(config) if positions is None else np.asarray(positions, dtype=float)
    m = sample_masses(config) if masses is None else np.asarray(masses, dtype=float)
    if pos.shape != (M, 2) or m.shape != (M,):
        raise SimulationError("positions/masses do not match the population size")
    est = expected_links_estimate(config, float(m.mean()))
    if est > config.max_links:
        raise SimulationError(f"about {est:.3g} links expected, above the cap of {config.max_links}")
    ii, jj, dd = [], [], []
    for i in range(M - 1):
        d, p = link_probabilities(config, pos, m, i)
        u = _rng(config, _PAIRS, i).random(M - 1 - i)
        hit = np.flatnonzero(u < p)
        if hit.size:
            ii.append(np.full(hit.size, i))
            jj.append(hit + i + 1)
            dd.append(d[hit])
    cat = lambda parts, dt: np.concatenate(parts).astype(dt) if parts else np.empty(0, dt)
    label = f"gravity({config.region},M={M},G={config.G},seed={config.seed})"
    return LinkSample(cat(ii, np.int64), cat(jj, np.int64), cat(dd, float), label)


def clamp_radius(config: GravityConfig, masses: np.ndarray | None = None) -> float:
    """Distance below which some link probability is clamped at 1."""
    m = sample_masses(config) if masses is None else np.asarray(masses, dtype=float)
    top2 = np.sort(m)[-2:]
    return math.sqrt(config.G * top2[0] * top2[1])


def fit_window(config: GravityConfig) -> tuple[float, float]:
    """Distance window free of clamping and (on the torus) of wrap-around: (r_lo, r_hi)."""
    lo = max(config.r_floor, clamp_radius(config))
    hi = config.size / 4 if config.region == "torus" else config.size / 2
    if hi <= lo:
        raise SimulationError(f"empty fit window [{lo}, {hi}]")
    return lo, hi


def analytic_f(config: GravityConfig, r: float) -> float:
    """Expected links per unit distance at r for identical masses on the torus."""
    if config.region != "torus" or config.mass_model != "identical":
        raise SimulationError("analytic_f needs identical masses on a torus")
    if not config.r_floor < r < config.size / 2:
        raise SimulationError(f"r={r} outside ({config.r_floor}, {config.size / 2})")
    pairs = config.population * (config.population - 1) / 2
    p = min(1.0, config.G * config.mass ** 2 / (r * r))
    return pairs * 2 * math.pi * r / config.area * p
