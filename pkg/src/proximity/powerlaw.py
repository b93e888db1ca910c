"""
Power-law / truncated-Zipf estimation for link-distance samples.

Four estimators are provided:

    fit_density     least squares on a log-binned histogram (log-log)
    fit_cumulative  least squares of the empirical CDF against log r
    fit_rank        least squares of log r(n) against rank n, largest first
    fit_mle         maximum likelihood, optionally on a truncated window

All of them report the exponent as a positive magnitude, so a 1/r density
gives exponent 1. Zero distances cannot enter a log-based fit; they are
dropped and their count is carried on the fit (``n_zero``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import optimize

METHODS = ("density", "cumulative", "rank", "mle")


class FitError(ValueError):
    pass


class DistanceSample:
    """An immutable bag of nonnegative distances (km) with a provenance label."""

    __slots__ = ("_values", "label", "malformed")

    def __init__(self, values: Iterable[float], label: str = "", malformed: int = 0):
        arr = np.array(list(values) if not isinstance(values, np.ndarray) else values, dtype=float)
        if arr.ndim != 1:
            arr = arr.ravel()
        if not np.all(np.isfinite(arr)):
            raise ValueError("distances must be finite")
        if np.any(arr < 0):
            raise ValueError("distances must be nonnegative")
        arr.setflags(write=False)
        self._values = arr
        self.label = label
        self.malformed = malformed

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def n(self) -> int:
        return self._values.size

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"DistanceSample(n={self.n}, label={self.label!r})"

    def nonzero(self) -> np.ndarray:
        return self._values[self._values > 0]

    @property
    def n_zero(self) -> int:
        return int(np.count_nonzero(self._values == 0))

    @property
    def zero_fraction(self) -> float:
        return self.n_zero / self.n if self.n else 0.0


def write_sample(sample: DistanceSample, path, header: Sequence[str] = ()) -> None:
    """One distance per line; `header` lines are written as ``#`` comments."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        fh.write(f"# label: {sample.label}\n")
        for v in sample.values:
            fh.write(f"{float(v)!r}\n")


def read_sample(path, label: str | None = None) -> DistanceSample:
    """Read the plain-text distance format written by `write_sample`.

    Unparseable or negative lines are skipped and counted; a file with no
    usable line raises FitError("zero valid rows").
    """
    values = []
    bad = 0
    file_label = None
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.lower().startswith("label:"):
                    file_label = body[6:].strip()
                continue
            try:
                v = float(line)
            except ValueError:
                bad += 1
                continue
            if not math.isfinite(v) or v < 0:
                bad += 1
                continue
            values.append(v)
    if not values:
        raise FitError(f"{path}: zero valid rows")
    return DistanceSample(values, label=label or file_label or str(path), malformed=bad)


@dataclass(frozen=True)
class PowerLawFit:
    method: str
    exponent: float
    stderr: float
    correlation: float | None
    r_min: float
    r_max: float
    n_used: int
    n_zero: int = 0
    intercept: float | None = None
    slope: float | None = None
    flags: tuple[str, ...] = ()
    series: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False, compare=False)

    @property
    def A(self) -> float:
        """Rank-fit intercept of log r(n) = A - B n."""
        if self.method != "rank":
            raise AttributeError("A is defined for rank fits only")
        return self.intercept

    @property
    def B(self) -> float:
        if self.method != "rank":
            raise AttributeError("B is defined for rank fits only")
        return -self.slope


def _ols(x: np.ndarray, y: np.ndarray):
    """Slope, intercept, slope standard error and Pearson r of y on x."""
    n = x.size
    xm, ym = x.mean(), y.mean()
    dx, dy = x - xm, y - ym
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    sxy = float(dx @ dy)
    if sxx == 0:
        raise FitError("regressor has zero variance")
    slope = sxy / sxx
    intercept = ym - slope * xm
    if syy == 0:
        r = None
    else:
        r = max(-1.0, min(1.0, sxy / math.sqrt(sxx * syy)))
    if n > 2:
        resid = dy - slope * dx
        s2 = float(resid @ resid) / (n - 2)
        se = math.sqrt(s2 / sxx)
    else:
        se = math.inf
    return slope, intercept, se, r


# Box-Cox style transform: g(y, t) = (y**t - 1) / t, with g(y, 0) = log(y).
# A truncated density r**-alpha has a CDF linear in g(r, 1 - alpha).

def _g(y, t):
    ly = np.log(y)
    if abs(t) < 1e-12:
        return ly
    return np.expm1(t * ly) / t


def _g_inv(z, t):
    if abs(t) < 1e-12:
        return np.exp(z)
    return np.exp(np.log1p(t * z) / t)


def _linearizing_exponent(r: np.ndarray, y: np.ndarray, bound: float = 4.0):
    """Exponent alpha whose transform g(r, 1-alpha) is most linear in y.

    Maximizes R^2 over t = 1 - alpha and returns (alpha, stderr), the
    stderr from the curvature of -n/2 log(1 - R^2) at the optimum.
    """
    scaled = r / r.min()
    n = r.size

    def loss(t):
        gx = _g(scaled, t)
        c = np.corrcoef(gx, y)[0, 1]
        return 0.5 * n * math.log(max(1.0 - c * c, 1e-300))

    res = optimize.minimize_scalar(loss, bounds=(-bound, bound), method="bounded",
                                   options={"xatol": 1e-10})
    t = float(res.x)
    h = 1e-3
    curv = (loss(t + h) - 2 * loss(t) + loss(t - h)) / (h * h)
    se = 1.0 / math.sqrt(curv) if curv > 0 else math.inf
    return 1.0 - t, se


def _positive(sample: DistanceSample) -> np.ndarray:
    return np.sort(sample.nonzero())


def fit_loglog(centers, densities) -> tuple[float, float, float, float | None]:
    """Straight-line fit of log density on log r; returns (exponent, intercept, stderr, r)."""
    x = np.log(np.asarray(centers, dtype=float))
    y = np.log(np.asarray(densities, dtype=float))
    slope, intercept, se, r = _ols(x, y)
    return -slope, intercept, se, r


def log_bins(r_lo: float, r_hi: float, bins: int | Sequence[float]) -> np.ndarray:
    if np.ndim(bins) == 0:
        k = int(bins)
        if k < 1:
            raise FitError("need at least one bin")
        return np.geomspace(r_lo, r_hi, k + 1)
    edges = np.asarray(bins, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0) or edges[0] <= 0:
        raise FitError("bin edges must be positive and increasing")
    return edges


def fit_density(sample: DistanceSample, bins: int | Sequence[float] = 20) -> PowerLawFit:
    """Histogram fit on logarithmic bins.

    `bins` is either a bin count spread geometrically over the range of the
    positive values, or explicit edges. Densities are count / (n * width),
    plotted at the geometric bin center; empty bins are dropped.
    """
    x = _positive(sample)
    if x.size == 0:
        raise FitError("all values are zero")
    if x.size < 2 or x[0] == x[-1]:
        raise FitError("fewer than 3 nonempty bins")
    edges = log_bins(x[0], x[-1], bins)
    counts, _ = np.histogram(x, bins=edges)
    keep = counts > 0
    if keep.sum() < 3:
        raise FitError("fewer than 3 nonempty bins")
    widths = np.diff(edges)
    centers = np.sqrt(edges[:-1] * edges[1:])
    dens = counts / (counts.sum() * widths)
    expo, intercept, se, r = fit_loglog(centers[keep], dens[keep])
    return PowerLawFit("density", expo, se, r, float(edges[0]), float(edges[-1]), int(counts.sum()),
                       n_zero=sample.n_zero, intercept=float(intercept), slope=-expo,
                       series=(centers[keep], dens[keep]))


def empirical_cdf(x_sorted: np.ndarray) -> np.ndarray:
    return np.arange(1, x_sorted.size + 1) / x_sorted.size


def fit_cumulative(sample: DistanceSample) -> PowerLawFit:
    """Fit the empirical CDF against log r: F(r) = intercept + slope * log r.

    A truncated Zipf density has exactly this logarithmic CDF. The exponent
    is the value of alpha whose generalized CDF is most nearly linear.
    """
    x = _positive(sample)
    if np.unique(x).size < 3:
        raise FitError("fewer than 3 distinct nonzero values")
    F = empirical_cdf(x)
    slope, intercept, _, r = _ols(np.log(x), F)
    alpha, se = _linearizing_exponent(x, F)
    return PowerLawFit("cumulative", alpha, se, r, float(x[0]), float(x[-1]), x.size,
                       n_zero=sample.n_zero, intercept=float(intercept), slope=slope,
                       series=(x, F))


def fit_rank(sample: DistanceSample) -> PowerLawFit:
    """Rank-distance fit: log r(n) = A - B n with rank 1 the largest distance.

    B <= 0 is not an error; it is reported through the ``nonpositive_B`` flag.
    """
    x = _positive(sample)
    if x.size < 3:
        raise FitError("fewer than 3 nonzero values")
    # stable sort keeps input order among ties
    desc = x[::-1]
    ranks = np.arange(1, desc.size + 1, dtype=float)
    logr = np.log(desc)
    slope, intercept, _, r = _ols(ranks, logr)
    flags = ()
    if -slope <= 0:
        flags = ("nonpositive_B",)
    if x[0] == x[-1]:
        alpha, se = math.nan, math.nan
    else:
        alpha, se = _linearizing_exponent(desc, ranks)
    return PowerLawFit("rank", alpha, se, r, float(x[0]), float(x[-1]), x.size,
                       n_zero=sample.n_zero, intercept=float(intercept), slope=slope, flags=flags,
                       series=(ranks, desc))


@dataclass(frozen=True)
class RankDensity:
    """Density and CDF implied by a rank fit: f(r) = 1/(B N r)."""

    A: float
    B: float
    N: int

    @property
    def r_lo(self) -> float:
        # F(r_lo) = 0, i.e. n(r) = N
        return math.exp(self.A - self.B * self.N)

    @property
    def r_hi(self) -> float:
        # F(r_hi) = 1, i.e. n(r) = 0
        return math.exp(self.A)

    def pdf(self, r):
        return 1.0 / (self.B * self.N * np.asarray(r, dtype=float))

    def cdf(self, r):
        bn = self.B * self.N
        return 1.0 - self.A / bn + np.log(np.asarray(r, dtype=float)) / bn

    def links_beyond(self, r):
        """n(r) = A/B - log(r)/B, the expected count of links longer than r."""
        return (self.A - np.log(np.asarray(r, dtype=float))) / self.B


def density_from_rank(fit: PowerLawFit, n_total: int) -> RankDensity:
    if fit.method != "rank":
        raise FitError("density_from_rank needs a rank fit")
    B = fit.B
    if not B > 0:
        raise FitError(f"rank slope B must be positive, got {B}")
    return RankDensity(fit.A, B, int(n_total))


# maximum likelihood

def _h1(t: float, L: float) -> float:
    """Mean of log(x/r_min) under a density x**(t-1) on [r_min, r_min*e**L]."""
    x = t * L
    if abs(x) < 1e-4:
        return L * (0.5 + x / 12.0 - x ** 3 / 720.0)
    if x > 0:
        return L * (1.0 / (-math.expm1(-x)) - 1.0 / x)
    return L * (math.exp(x) / math.expm1(x) - 1.0 / x)


def _h2(t: float, L: float) -> float:
    """Variance of log(x/r_min) under the same density."""
    x = t * L
    if abs(x) < 0.05:
        return L * L * (1.0 / 12.0 - x * x / 240.0 + x ** 4 / 6048.0)
    if abs(x) > 700:
        return 1.0 / (t * t)
    return 1.0 / (t * t) - L * L / (4.0 * math.sinh(x / 2.0) ** 2)


def fit_mle(sample: DistanceSample, r_min: float | None = None, r_max: float | None = None) -> PowerLawFit:
    """Maximum-likelihood power-law exponent over values above `r_min`.

    Without `r_max` this is the closed-form continuous estimator
    alpha = 1 + n / sum(log(x / r_min)), stderr (alpha - 1)/sqrt(n).
    With `r_max` the density is normalized on (r_min, r_max] and alpha is
    found by solving the score equation; the stderr comes from the Fisher
    information. Only values strictly above r_min (and not above r_max)
    are used. r_min defaults to the smallest positive value.
    """
    x = sample.nonzero()
    if r_min is None:
        if x.size == 0:
            raise FitError("no values above r_min")
        r_min = float(x.min())
    if not r_min > 0:
        raise FitError("r_min must be positive")
    keep = x > r_min
    if r_max is not None:
        if not r_max > r_min:
            raise FitError("r_max must exceed r_min")
        keep &= x <= r_max
    x = x[keep]
    n = x.size
    if n == 0:
        raise FitError("no values above r_min")
    if n < 2:
        raise FitError("need at least 2 values above r_min")
    logs = np.log(x / r_min)
    s = float(logs.sum())
    if r_max is None:
        alpha = 1.0 + n / s
        se = (alpha - 1.0) / math.sqrt(n)
        hi = float(x.max())
    else:
        L = math.log(r_max / r_min)
        m = s / n
        lim = 50.0 / L
        while _h1(lim, L) < m and lim < 1e6:
            lim *= 4
        lo = -lim
        while _h1(lo, L) > m and lo > -1e6:
            lo *= 4
        t = optimize.brentq(lambda t: _h1(t, L) - m, lo, lim, xtol=1e-14, rtol=1e-14)
        alpha = 1.0 - t
        se = 1.0 / math.sqrt(n * _h2(t, L))
        hi = float(r_max)
    return PowerLawFit("mle", alpha, se, None, float(r_min), hi, n, n_zero=sample.n_zero)


def fit_all(sample: DistanceSample, methods: Sequence[str] = METHODS, bins=20,
            r_min: float | None = None, r_max: float | None = None) -> list[PowerLawFit]:
    fits = []
    for m in methods:
        if m == "density":
            fits.append(fit_density(sample, bins))
        elif m == "cumulative":
            fits.append(fit_cumulative(sample))
        elif m == "rank":
            fits.append(fit_rank(sample))
        elif m == "mle":
            fits.append(fit_mle(sample, r_min, r_max))
        else:
            raise ValueError(f"unknown method {m!r}")
    return fits


# sampling

def _check_bounds(r_min, r_max, n):
    if not (0 < r_min < r_max) or not math.isfinite(r_max):
        raise ValueError(f"need 0 < r_min < r_max, got {r_min}, {r_max}")
    if n < 1:
        raise ValueError("n must be at least 1")


def zipf_quantile(u, r_min: float, r_max: float):
    """Inverse CDF of the truncated Zipf density on [r_min, r_max]."""
    return r_min * (r_max / r_min) ** np.asarray(u, dtype=float)


def sample_truncated_zipf(n: int, r_min: float, r_max: float, seed: int, label: str | None = None) -> DistanceSample:
    _check_bounds(r_min, r_max, n)
    u = np.random.default_rng(seed).random(n)
    return DistanceSample(zipf_quantile(u, r_min, r_max),
                          label=label or f"truncated-zipf(n={n},r_min={r_min},r_max={r_max},seed={seed})")


def sample_truncated_power_law(n: int, alpha: float, r_min: float, r_max: float, seed: int) -> DistanceSample:
    """Draws from a density proportional to r**-alpha on [r_min, r_max]."""
    _check_bounds(r_min, r_max, n)
    t = 1.0 - alpha
    u = np.random.default_rng(seed).random(n)
    gmax = _g(r_max / r_min, t)
    r = r_min * _g_inv(u * gmax, t)
    return DistanceSample(np.clip(r, r_min, r_max),
                          label=f"truncated-power-law(alpha={alpha},n={n},seed={seed})")


def sample_pareto(n: int, alpha: float, r_min: float, seed: int) -> DistanceSample:
    """Untruncated continuous power law above r_min (alpha > 1)."""
    if alpha <= 1:
        raise ValueError("untruncated power law needs alpha > 1")
    if not r_min > 0 or n < 1:
        raise ValueError("need r_min > 0 and n >= 1")
    u = np.random.default_rng(seed).random(n)
    return DistanceSample(r_min * (1.0 - u) ** (-1.0 / (alpha - 1.0)),
                          label=f"pareto(alpha={alpha},n={n},seed={seed})")


def force_zeros(sample: DistanceSample, fraction: float, seed: int) -> DistanceSample:
    """Replace round(fraction * n) randomly chosen values with zero.

    Mimics coarse location data where same-city contacts read as distance 0.
    """
    if not 0 <= fraction <= 1:
        raise ValueError("fraction must lie in [0, 1]")
    k = int(round(fraction * sample.n))
    vals = sample.values.copy()
    idx = np.random.default_rng(seed).choice(sample.n, size=k, replace=False)
    vals[idx] = 0.0
    return DistanceSample(vals, label=f"{sample.label}+zeros({fraction})")

