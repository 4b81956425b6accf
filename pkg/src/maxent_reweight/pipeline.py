"""End-to-end run: sample, derive, fit, reweight, diagnose, write artifacts."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .config import RunConfig
from .density import DensityEstimate, fit
from .diagnostics import DiagnosticReport, run_diagnostics
from .model import BaseFamily, WeightedEnsemble
from .oracle import GridSpec, induced_density_grid, transform_grid
from .reweight import ReweightReport, reweight
from .sampling import derived_values, sample_base

log = logging.getLogger(__name__)

MARGINAL_HALF_WIDTH = 4.0


@dataclass
class RunResult:
    config: RunConfig
    ensemble: WeightedEnsemble
    estimate: DensityEstimate
    reweight: ReweightReport
    diagnostics: DiagnosticReport

    @property
    def passed(self) -> bool:
        return self.diagnostics.passed

    def report(self) -> dict:
        rw = self.reweight
        diag = self.diagnostics
        return {
            "n": rw.n,
            "ess": rw.ess,
            "entropy": rw.entropy,
            "normalization_mc": rw.normalization_mc,
            "clipped_fraction": rw.clipped_fraction,
            "clipped_count": rw.clipped_count,
            "ks_statistic": diag.ks_statistic,
            "ks_threshold": diag.ks_threshold,
            "passed": diag.passed,
            "warnings": rw.warnings,
            "estimator": rw.estimator_summary,
            "diagnostics": diag.to_dict(),
            "latent_coordinates": ("natural log of each parameter"
                                   if self.config.base.is_log else "parameters"),
            "rng_algorithm": kernels.RNG_ALGORITHM,
            "resolved_config": self.config.resolved(),
        }


def _marginal_ranges(config: RunConfig) -> dict:
    base = config.base
    out = {}
    for k in config.diagnostics.marginals:
        if base.family is BaseFamily.UNIFORM_BOX:
            out[k] = (base.lo[k - 1], base.hi[k - 1])
        else:
            m, s = base.mean[k - 1], base.std[k - 1]
            out[k] = (m - MARGINAL_HALF_WIDTH * s, m + MARGINAL_HALF_WIDTH * s)
    return out


def run_transform(config: RunConfig, threads: int | None = None) -> RunResult:
    batch = sample_base(config.base, config.n_samples, config.seed, threads=threads)
    f = derived_values(batch, config.derived, threads=threads)
    est = fit(f, config.estimator.kind, bins=config.estimator.bins,
              bandwidth=config.estimator.bandwidth)
    ens, rep = reweight(batch.points, f, est, config.target, seed=config.seed, base=config.base)
    for w in rep.warnings:
        log.warning(w)
    d = config.diagnostics
    pert = d.perturbation
    diag = run_diagnostics(
        ens, config.target, ks=d.ks, bins=d.bins, marginals=d.marginals,
        marginal_bins=d.marginal_bins, marginal_ranges=_marginal_ranges(config),
        perturbation_s=None if pert is None else pert.s,
        perturbation_deltas=() if pert is None else pert.deltas,
    )
    return RunResult(config, ens, est, rep, diag)


def _csv(path: Path, header: list[str], table: np.ndarray):
    with open(path, "wb") as fh:
        fh.write((",".join(header) + "\n").encode("ascii"))
        fh.write(kernels.format_rows(table))


def density_table_rows(centers, induced, target_pdf, reweighted) -> np.ndarray:
    return np.column_stack([centers, induced, target_pdf, reweighted])


def write_artifacts(result: RunResult, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ens = result.ensemble
    d = ens.samples.shape[1]
    _csv(out / "weighted_samples.csv",
         [f"x{k}" for k in range(1, d + 1)] + ["f", "w_raw", "w_norm"],
         np.column_stack([ens.samples, ens.f_values, ens.w_raw, ens.w_norm]))

    diag = result.diagnostics
    centers = diag.weighted_histogram.centers
    _csv(out / "density_table.csv", ["f", "induced_pdf", "target_pdf", "reweighted_pdf"],
         density_table_rows(centers, diag.induced_histogram.density,
                            result.config.target.pdf(centers), diag.weighted_histogram.density))

    if diag.marginal_tables:
        rows = [np.column_stack([np.full(len(t.centers), float(k)), t.centers, t.density])
                for k, t in sorted(diag.marginal_tables.items())]
        _csv(out / "marginals.csv", ["dimension", "x", "density"], np.vstack(rows))

    with open(out / "report.json", "w") as fh:
        json.dump(result.report(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out


def run_oracle(config: RunConfig) -> np.ndarray:
    """Grid-quadrature density table for ``config`` (dimension <= 3).

    Columns are (f, induced, target_pdf, transformed density of f).  Without a
    target the transform is the identity, so the last two columns repeat the
    induced density.
    """
    opts = config.oracle
    points = opts.get("points", 512 if config.base.dimension <= 2 else 64)
    grid = GridSpec.for_base(config.base, points)
    f_bins = opts.get("f_bins", 64)
    f_range = opts.get("f_range")
    if config.target is None:
        table = induced_density_grid(config.base, config.derived, grid, f_bins, f_range)
        res_induced, target_pdf, transformed = table, table.density, table.density
    else:
        res = transform_grid(config.base, config.derived, config.target, grid, f_bins, f_range)
        res_induced = res.induced
        target_pdf = config.target.pdf(res.induced.centers)
        transformed = res.transformed.density
    return density_table_rows(res_induced.centers, res_induced.density, target_pdf, transformed)


def write_oracle(table: np.ndarray, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "density_table.csv"
    _csv(path, ["f", "induced_pdf", "target_pdf", "reweighted_pdf"], table)
    return path

