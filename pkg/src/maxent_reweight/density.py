"""Sample-based estimates of the induced density P(f|q).

Two estimators share one evaluable type: a uniform-width histogram and a
Gaussian KDE tabulated on a uniform knot grid.  Both report densities below
``floor`` as zero and both are zero outside ``support``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels

MIN_SAMPLES = 100
MIN_BINS, MAX_BINS = 16, 512
KDE_KNOTS = 1024
FLOOR_FRACTION = 1e-12
_KERNEL_REACH = 6.0  # kernel truncated at this many bandwidths


class DensityError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DensityEstimate:
    kind: str                 # "histogram" or "kde"
    support: tuple[float, float]
    grid: np.ndarray          # bin edges (histogram) or knots (kde)
    values: np.ndarray        # bin densities or knot densities
    floor: float
    n_source: int
    bandwidth: float | None = None

    def __post_init__(self):
        # cumulative mass at each grid point
        if self.kind == "histogram":
            mass = self.values * np.diff(self.grid)
        else:
            mass = 0.5 * (self.values[1:] + self.values[:-1]) * np.diff(self.grid)
        cum = np.concatenate(([0.0], np.cumsum(mass)))
        cum /= cum[-1]
        cum.setflags(write=False)
        object.__setattr__(self, "_cum", cum)
        self.grid.setflags(write=False)
        self.values.setflags(write=False)

    @property
    def peak(self) -> float:
        return float(self.values.max())

    def pdf(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=np.float64)
        if self.kind == "histogram":
            idx = kernels.bin_index(np.atleast_1d(f).ravel(), self.grid)
            out = np.where(idx >= 0, self.values[np.maximum(idx, 0)], 0.0).reshape(f.shape)
        else:
            out = np.interp(f, self.grid, self.values, left=0.0, right=0.0)
        return np.where(out < self.floor, 0.0, out)

    def cdf(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=np.float64)
        if self.kind == "histogram":
            # the pdf is constant per bin, so the cdf is exactly piecewise linear
            return np.interp(f, self.grid, self._cum)
        g, p, cum = self.grid, self.values, self._cum
        j = np.clip(np.searchsorted(g, f, side="right") - 1, 0, len(g) - 2)
        t = f - g[j]
        step = g[j + 1] - g[j]
        # exact integral of the linear interpolant, scaled like _cum
        scale = 1.0 / self._total_trapezoid()
        part = (p[j] * t + 0.5 * (p[j + 1] - p[j]) * t * t / step) * scale
        out = np.minimum(cum[j] + part, 1.0)
        return np.where(f < g[0], 0.0, np.where(f >= g[-1], 1.0, out))

    def _total_trapezoid(self) -> float:
        return float(np.sum(0.5 * (self.values[1:] + self.values[:-1]) * np.diff(self.grid)))

    def integral(self) -> float:
        """Trapezoid (or exact, for a histogram) integral of the pdf over its grid."""
        if self.kind == "histogram":
            return float(np.sum(self.values * np.diff(self.grid)))
        return self._total_trapezoid()

    def summary(self) -> dict:
        out = {
            "kind": self.kind,
            "support": list(self.support),
            "n_source": self.n_source,
            "floor": self.floor,
        }
        if self.kind == "histogram":
            out["bins"] = len(self.grid) - 1
        else:
            out["knots"] = len(self.grid)
            out["bandwidth"] = self.bandwidth
        return out


def _validate(f_values) -> np.ndarray:
    f = np.asarray(f_values, dtype=np.float64).ravel()
    if f.size < MIN_SAMPLES:
        raise DensityError(f"need at least {MIN_SAMPLES} samples, got {f.size}")
    if not np.all(np.isfinite(f)):
        raise DensityError("f values must be finite")
    if f.min() == f.max():
        raise DensityError("degenerate support: all f values are equal")
    return f


def _iqr(f: np.ndarray) -> float:
    q75, q25 = np.percentile(f, [75, 25])
    return float(q75 - q25)


def freedman_diaconis_bins(f: np.ndarray) -> int:
    width = 2.0 * _iqr(f) * f.size ** (-1.0 / 3.0)
    if width <= 0:
        return MAX_BINS
    nbins = math.ceil((f.max() - f.min()) / width)
    return int(min(max(nbins, MIN_BINS), MAX_BINS))


def silverman_bandwidth(f: np.ndarray) -> float:
    sigma = float(np.std(f, ddof=1))
    spread = min(sigma, _iqr(f) / 1.34) or sigma
    return 0.9 * spread * f.size ** -0.2


def fit_histogram(f_values, bins: int | str | None = "auto") -> DensityEstimate:
    """Uniform-width histogram over ``[min f, max f]`` normalised to unit mass."""
    f = _validate(f_values)
    if bins is None or bins == "auto":
        nbins = freedman_diaconis_bins(f)
    else:
        if int(bins) != bins or bins < 1:
            raise DensityError("bins must be a positive integer or 'auto'")
        nbins = int(bins)
    lo, hi = float(f.min()), float(f.max())
    edges = np.linspace(lo, hi, nbins + 1)
    counts = kernels.bin_counts(f, edges)
    dens = counts / (f.size * np.diff(edges))
    return DensityEstimate("histogram", (lo, hi), edges, dens,
                           FLOOR_FRACTION * float(dens.max()), int(f.size))


def fit_kde(f_values, bandwidth: float | str | None = "auto") -> DensityEstimate:
    """Gaussian KDE on 1,024 uniform knots spanning [min - 3h, max + 3h].

    Samples are linearly binned onto the knots and convolved with the
    sampled kernel; between knots the density is linearly interpolated.
    """
    if bandwidth is not None and bandwidth != "auto":
        if not (isinstance(bandwidth, (int, float)) and bandwidth > 0 and math.isfinite(bandwidth)):
            raise DensityError("bandwidth must be positive")
    f = _validate(f_values)
    h = silverman_bandwidth(f) if bandwidth in (None, "auto") else float(bandwidth)
    lo, hi = float(f.min()) - 3 * h, float(f.max()) + 3 * h
    knots = np.linspace(lo, hi, KDE_KNOTS)
    delta = knots[1] - knots[0]
    counts = kernels.linear_bin(f, lo, delta, KDE_KNOTS)
    reach = int(math.ceil(_KERNEL_REACH * h / delta))
    u = np.arange(-reach, reach + 1) * delta / h
    kern = np.exp(-0.5 * u * u) / (h * math.sqrt(2 * math.pi))
    dens = np.convolve(counts, kern)[reach:reach + KDE_KNOTS] / f.size
    dens /= float(np.sum(0.5 * (dens[1:] + dens[:-1]) * np.diff(knots)))
    return DensityEstimate("kde", (lo, hi), knots, dens,
                           FLOOR_FRACTION * float(dens.max()), int(f.size), bandwidth=h)


def fit(f_values, kind: str = "histogram", bins="auto", bandwidth="auto") -> DensityEstimate:
    if kind == "histogram":
        return fit_histogram(f_values, bins)
    if kind == "kde":
        return fit_kde(f_values, bandwidth)
    raise DensityError(f"unknown estimator kind {kind!r}")


def eval_pdf(est: DensityEstimate, f: float) -> float:
    if not math.isfinite(f):
        raise DensityError("pdf evaluated at a non-finite value")
    return float(est.pdf(f))


def eval_cdf(est: DensityEstimate, f: float) -> float:
    if not math.isfinite(f):
        raise DensityError("cdf evaluated at a non-finite value")
    return float(est.cdf(f))
