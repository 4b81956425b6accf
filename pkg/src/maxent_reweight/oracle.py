"""Deterministic grid-quadrature reference for low-dimensional cases.

Midpoint cells carry mass q(center) * volume; binning that mass by f gives the
induced density, and reweighting the cells by r(f)/P(f) gives the transformed
distribution and its entropy without any sampling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .diagnostics import DensityTable
from .expr import DerivedExpr, evaluate_batch
from .model import BaseDistributionSpec, BaseFamily

MAX_CELLS = 1 << 24
MIN_POINTS = 16
MAX_DIMENSION = 3
GAUSS_HALF_WIDTH = 4.0  # grid spans mean +/- this many std devs


class OracleError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    axes: tuple[tuple[float, float, int], ...]

    def __post_init__(self):
        axes = tuple((float(lo), float(hi), int(n)) for lo, hi, n in self.axes)
        if not axes:
            raise OracleError("grid needs at least one axis")
        for lo, hi, n in axes:
            if not lo < hi:
                raise OracleError(f"grid axis needs lo < hi, got [{lo}, {hi}]")
            if n < MIN_POINTS:
                raise OracleError(f"grid axis needs at least {MIN_POINTS} points, got {n}")
        if math.prod(n for _, _, n in axes) > MAX_CELLS:
            raise OracleError(f"grid exceeds the cap of 2**24 = {MAX_CELLS} cells")
        object.__setattr__(self, "axes", axes)

    @property
    def cells(self) -> int:
        return math.prod(n for _, _, n in self.axes)

    @classmethod
    def for_base(cls, spec: BaseDistributionSpec, points: int) -> "GridSpec":
        """Cover the base support: the box itself, or mean +/- 4 std devs."""
        if spec.family is BaseFamily.UNIFORM_BOX:
            return cls(tuple((lo, hi, points) for lo, hi in zip(spec.lo, spec.hi)))
        return cls(tuple((m - GAUSS_HALF_WIDTH * s, m + GAUSS_HALF_WIDTH * s, points)
                         for m, s in zip(spec.mean, spec.std)))


def _cells(spec: BaseDistributionSpec, grid: GridSpec):
    if spec.dimension > MAX_DIMENSION:
        raise OracleError(f"oracle supports dimension <= {MAX_DIMENSION}, got {spec.dimension}")
    if len(grid.axes) != spec.dimension:
        raise OracleError("grid dimension does not match the base distribution")
    centers = [lo + (np.arange(n) + 0.5) * (hi - lo) / n for lo, hi, n in grid.axes]
    mesh = np.meshgrid(*centers, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=1)
    mass = np.exp(spec.latent_log_density(points))
    total = math.fsum(mass.tolist())
    if total <= 0:
        raise OracleError("grid carries no probability mass")
    # truncated Gaussian tails: renormalise over the box
    return points, mass / total


def _table(f: np.ndarray, mass: np.ndarray, f_bins: int, f_range) -> DensityTable:
    if int(f_bins) != f_bins or f_bins < 2:
        raise OracleError("f_bins must be an integer >= 2")
    lo, hi = (float(f.min()), float(f.max())) if f_range is None else map(float, f_range)
    if not lo < hi:
        raise OracleError("degenerate f range on the grid")
    edges = np.linspace(lo, hi, int(f_bins) + 1)
    idx = kernels.bin_index(f, edges)
    keep = idx >= 0
    binned = np.bincount(idx[keep], weights=mass[keep], minlength=int(f_bins))
    return DensityTable(edges, binned / np.diff(edges))


def _grid_f(spec, e: DerivedExpr, grid: GridSpec):
    if e.dimension != spec.dimension:
        raise OracleError("expression dimension does not match the base distribution")
    points, mass = _cells(spec, grid)
    return evaluate_batch(e, points), mass


def induced_density_grid(spec: BaseDistributionSpec, e: DerivedExpr, grid: GridSpec,
                         f_bins: int = 64, f_range=None) -> DensityTable:
    """Induced density of f over ``f_bins`` uniform bins, normalised to unit mass."""
    f, mass = _grid_f(spec, e, grid)
    table = _table(f, mass, f_bins, f_range)
    total = table.mass()
    return DensityTable(table.edges, table.density / total)


@dataclass(frozen=True, eq=False)
class OracleTransform:
    induced: DensityTable
    transformed: DensityTable   # density of f under the transformed distribution
    entropy: float


def _lookup(table: DensityTable, f: np.ndarray) -> np.ndarray:
    idx = kernels.bin_index(f, table.edges)
    return np.where(idx >= 0, table.density[np.maximum(idx, 0)], 0.0)


def transform_grid(spec: BaseDistributionSpec, e: DerivedExpr, target, grid: GridSpec,
                   f_bins: int = 1024, f_range=None) -> OracleTransform:
    """Reweight grid cells by r(f)/P(f) using the grid's own induced density.

    ``target`` needs a vectorised ``pdf``; passing the induced table itself
    (see :class:`InducedTableTarget`) reproduces q exactly.
    """
    f, mass = _grid_f(spec, e, grid)
    raw = _table(f, mass, f_bins, f_range)
    induced = DensityTable(raw.edges, raw.density / raw.mass())
    p_f = _lookup(induced, f)
    r_f = np.asarray(target.pdf(f), dtype=np.float64)
    ok = (p_f > 0) & (r_f > 0) & (mass > 0)
    pmass = np.zeros_like(mass)
    pmass[ok] = mass[ok] * r_f[ok] / p_f[ok]
    z = math.fsum(pmass.tolist())
    if z <= 0:
        raise OracleError("infeasible: target support disjoint from the induced support")
    pmass /= z
    # q/p = P(f) z / r(f) on every cell that carries p-mass
    terms = pmass[ok] * np.log(p_f[ok] * z / r_f[ok])
    entropy = math.fsum(terms.tolist())
    transformed = _table(f, pmass, f_bins, (induced.edges[0], induced.edges[-1]))
    return OracleTransform(induced, transformed, entropy)


def transformed_entropy_quadrature(spec: BaseDistributionSpec, e: DerivedExpr, target,
                                   grid: GridSpec, f_bins: int = 1024, f_range=None) -> float:
    """H(p|q) in nats for the maximum-entropy transform, by grid quadrature."""
    return transform_grid(spec, e, target, grid, f_bins, f_range).entropy


class InducedTableTarget:
    """Adapter giving a DensityTable the ``pdf``/``cdf``/``support`` of a target."""

    def __init__(self, table: DensityTable):
        self.table = table
        cum = np.concatenate(([0.0], np.cumsum(table.density * table.widths)))
        self._cum = cum / cum[-1]
        self.support = (float(table.edges[0]), float(table.edges[-1]))

    def pdf(self, f):
        return _lookup(self.table, np.atleast_1d(np.asarray(f, dtype=np.float64)))

    def cdf(self, f):
        return np.interp(f, self.table.edges, self._cum)
