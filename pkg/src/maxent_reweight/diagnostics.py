"""Checks on a weighted ensemble: constraint satisfaction, weighted tables,
analytic oracles for the two-uniforms example, and the entropy perturbation
test."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .expr import DerivedExpr, evaluate_batch
from .model import WeightedEnsemble
from .reweight import effective_sample_size, entropy_estimate, normalize_weights

log = logging.getLogger(__name__)

KS_CRITICAL = 1.63          # ~ alpha = 0.01 two-sided KS coefficient
KS_SAFETY = 3.0
LEVEL_SET_TOLERANCE = 0.05
ENTROPY_NOISE = 1e-3


class DiagnosticsError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DensityTable:
    """Histogram-style density over uniform bins."""

    edges: np.ndarray
    density: np.ndarray

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    def mass(self) -> float:
        return float(np.sum(self.density * self.widths))

    def rows(self) -> list[tuple[float, float]]:
        return list(zip(self.centers.tolist(), self.density.tolist()))


def ks_threshold(ess: float) -> float:
    return KS_SAFETY * KS_CRITICAL / math.sqrt(ess)


def weighted_ks(f_values, w_norm, target) -> float:
    """Sup distance between the weighted ECDF of f and ``target.cdf``.

    Both sides of every step are compared; tied f values form one step.
    """
    f = np.asarray(f_values, dtype=np.float64)
    w = np.asarray(w_norm, dtype=np.float64)
    if f.size == 0:
        raise DiagnosticsError("weighted KS needs at least one sample")
    if w.shape != f.shape:
        raise DiagnosticsError("f values and weights differ in length")
    order = np.argsort(f, kind="stable")
    fs = f[order]
    return float(kernels.weighted_ks_sorted(fs, w[order], np.asarray(target.cdf(fs))))


def weighted_ecdf(f_values, w_norm) -> tuple[np.ndarray, np.ndarray]:
    """Sorted f and the weight-cumulative step heights at each sorted point."""
    f = np.asarray(f_values, dtype=np.float64)
    order = np.argsort(f, kind="stable")
    return f[order], np.cumsum(np.asarray(w_norm, dtype=np.float64)[order])


def weighted_histogram(f_values, w_norm, bins: int, range: tuple[float, float]) -> DensityTable:
    """Bin density = (weight in bin) / width; integrates to the in-range mass."""
    lo, hi = float(range[0]), float(range[1])
    if int(bins) != bins or bins < 2:
        raise DiagnosticsError("need at least 2 bins")
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise DiagnosticsError(f"invalid histogram range [{lo}, {hi}]")
    edges = np.linspace(lo, hi, int(bins) + 1)
    f = np.asarray(f_values, dtype=np.float64)
    w = np.asarray(w_norm, dtype=np.float64)
    idx = kernels.bin_index(f, edges)
    keep = idx >= 0
    mass = np.bincount(idx[keep], weights=w[keep], minlength=int(bins))
    return DensityTable(edges, mass / np.diff(edges))


def weighted_marginal(samples, w_norm, dimension_index: int, bins: int,
                      range: tuple[float, float]) -> DensityTable:
    """Weighted histogram of component ``x_k`` (``dimension_index`` is 1-based)."""
    samples = np.asarray(samples)
    d = samples.shape[1]
    if int(dimension_index) != dimension_index or not 1 <= dimension_index <= d:
        raise DiagnosticsError(f"dimension index {dimension_index} out of range 1..{d}")
    return weighted_histogram(samples[:, int(dimension_index) - 1], w_norm, bins, range)


@dataclass
class PerturbationResult:
    entropies: list[tuple[float, float]]
    ks: list[tuple[float, float, float]]   # (delta, ks statistic, threshold)
    level_set_max_mean: float
    warnings: list[str] = field(default_factory=list)

    @property
    def maximal(self) -> bool:
        """No perturbation raised the entropy beyond Monte Carlo noise."""
        base = dict(self.entropies).get(0.0)
        if base is None:
            return True
        return all(h <= base + ENTROPY_NOISE for d, h in self.entropies if d != 0.0)


def level_set_means(f_values, weights, s_values, bins: int = 20) -> np.ndarray:
    """Weighted mean of ``s`` in each of ``bins`` equal-width f bins (NaN if empty)."""
    f = np.asarray(f_values, dtype=np.float64)
    edges = np.linspace(f.min(), f.max(), bins + 1)
    idx = kernels.bin_index(f, edges)
    wsum = np.bincount(idx, weights=weights, minlength=bins)
    ssum = np.bincount(idx, weights=weights * s_values, minlength=bins)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(wsum > 0, ssum / wsum, np.nan)


def perturbation_entropy_test(ensemble: WeightedEnsemble, s: DerivedExpr, deltas,
                              target=None, f_bins: int = 20) -> PerturbationResult:
    """Entropy of the weights w_i (1 + delta s(x_i)) for each delta.

    ``s`` should average to zero on every level set of f, so the perturbation
    only moves mass within level sets and keeps the f-distribution fixed.
    """
    deltas = [float(d) for d in deltas]
    if any(not abs(d) < 1 for d in deltas):
        raise DiagnosticsError("perturbation deltas must satisfy |delta| < 1")
    s_vals = evaluate_batch(s, ensemble.samples)
    if np.any(np.abs(s_vals) > 1):
        raise DiagnosticsError("perturbation direction s must lie in [-1, 1] on every sample")
    means = level_set_means(ensemble.f_values, ensemble.w_norm, s_vals, f_bins)
    worst = float(np.nanmax(np.abs(means))) if np.any(np.isfinite(means)) else 0.0
    warnings = []
    if worst > LEVEL_SET_TOLERANCE:
        msg = (f"perturbation direction has level-set mean {worst:.3f} "
               f"> {LEVEL_SET_TOLERANCE} in some f bin; it may change the f-distribution")
        log.warning(msg)
        warnings.append(msg)

    entropies, ks = [], []
    for d in deltas:
        factor = 1.0 + d * s_vals
        if np.any(factor < 0):
            raise DiagnosticsError(f"perturbed weight negative at delta={d}")
        w = normalize_weights(ensemble.w_raw * factor)
        entropies.append((d, entropy_estimate(w)))
        if target is not None:
            ks.append((d, weighted_ks(ensemble.f_values, w, target),
                       ks_threshold(effective_sample_size(w))))
    return PerturbationResult(entropies, ks, worst, warnings)


# --- analytic oracles for a, b ~ U(0, 1), f = a + b ------------------------

def triangular_oracle_pdf(f: float) -> float:
    """Density of the sum of two independent U(0, 1) variables."""
    if 0.0 <= f <= 1.0:
        return float(f)
    if 1.0 < f <= 2.0:
        return 2.0 - f
    return 0.0


def triangular_oracle_cdf(f: float) -> float:
    if f <= 0:
        return 0.0
    if f <= 1:
        return 0.5 * f * f
    if f < 2:
        return 1.0 - 0.5 * (2.0 - f) ** 2
    return 1.0


def triangular_oracle_marginal(a: float) -> float:
    """Marginal of a after flattening a + b to U(0, 2): -log[a(1-a)]/2."""
    if not 0.0 < a < 1.0:
        raise DiagnosticsError("marginal diverges logarithmically at a = 0 and a = 1")
    return -math.log(a * (1.0 - a)) / 2.0


def triangular_marginal_bin_average(lo: float, hi: float) -> float:
    """Exact average of the flattened marginal over [lo, hi] inside (0, 1)."""
    def antideriv(a):
        # integral of -log(a)/2 - log(1-a)/2
        return 0.5 * ((a - a * math.log(a)) - ((1 - a) - (1 - a) * math.log(1 - a)))
    if not 0.0 < lo < hi < 1.0:
        raise DiagnosticsError("bin must lie strictly inside (0, 1)")
    return (antideriv(hi) - antideriv(lo)) / (hi - lo)


@dataclass
class DiagnosticReport:
    ks_statistic: float | None
    ks_threshold: float | None
    weighted_histogram: DensityTable
    induced_histogram: DensityTable
    marginal_tables: dict[int, DensityTable]
    perturbation: PerturbationResult | None
    passed: bool

    @property
    def perturbation_entropies(self) -> list[tuple[float, float]]:
        return [] if self.perturbation is None else self.perturbation.entropies

    def to_dict(self) -> dict:
        out = {
            "ks_statistic": self.ks_statistic,
            "ks_threshold": self.ks_threshold,
            "weighted_histogram": self.weighted_histogram.rows(),
            "marginal_tables": {f"x{k}": t.rows() for k, t in self.marginal_tables.items()},
            "perturbation_entropies": self.perturbation_entropies,
            "passed": self.passed,
        }
        if self.perturbation is not None:
            out["perturbation_ks"] = self.perturbation.ks
            out["perturbation_level_set_max_mean"] = self.perturbation.level_set_max_mean
            out["perturbation_warnings"] = self.perturbation.warnings
        return out


def histogram_range(f_values, target) -> tuple[float, float]:
    """Finite target support if there is one, else the sample range of f."""
    lo, hi = target.support
    if math.isfinite(lo) and math.isfinite(hi):
        return lo, hi
    f = np.asarray(f_values)
    return float(f.min()), float(f.max())


def run_diagnostics(ensemble: WeightedEnsemble, target, *, ks: bool = True,
                    bins: int = 40, marginals=(), marginal_bins: int = 50,
                    marginal_ranges=None, perturbation_s: DerivedExpr | None = None,
                    perturbation_deltas=()) -> DiagnosticReport:
    """All configured checks. ``passed`` needs the KS check (when enabled)
    under its threshold and, when a perturbation is configured, no entropy
    increase beyond noise."""
    rng = histogram_range(ensemble.f_values, target)
    whist = weighted_histogram(ensemble.f_values, ensemble.w_norm, bins, rng)
    uniform = np.full(ensemble.n, 1.0 / ensemble.n)
    ihist = weighted_histogram(ensemble.f_values, uniform, bins, rng)

    ks_stat = ks_thr = None
    passed = True
    if ks:
        ks_stat = weighted_ks(ensemble.f_values, ensemble.w_norm, target)
        ks_thr = ks_threshold(effective_sample_size(ensemble.w_norm))
        passed = ks_stat <= ks_thr

    tables = {}
    for k in marginals:
        if marginal_ranges and k in marginal_ranges:
            mr = marginal_ranges[k]
        else:
            col = ensemble.samples[:, int(k) - 1] if 1 <= int(k) <= ensemble.samples.shape[1] else None
            if col is None:
                raise DiagnosticsError(f"marginal index {k} out of range")
            mr = (float(col.min()), float(col.max()))
        tables[int(k)] = weighted_marginal(ensemble.samples, ensemble.w_norm, k, marginal_bins, mr)

    pert = None
    if perturbation_s is not None:
        pert = perturbation_entropy_test(ensemble, perturbation_s, perturbation_deltas, target)
        passed = passed and pert.maximal

    return DiagnosticReport(ks_stat, ks_thr, whist, ihist, tables, pert, passed)
