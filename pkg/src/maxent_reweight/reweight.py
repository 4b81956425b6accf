"""Maximum-entropy importance weights w = r(f) / P(f|q) and their diagnostics.

Samples are drawn from q, so the maximum-entropy density q r(f) / P(f|q)
becomes a weight that depends on a sample only through its f value.
Reductions use ``math.fsum`` so they are correctly rounded and independent
of how the weights were produced.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np

from .density import DensityEstimate
from .model import WeightedEnsemble

log = logging.getLogger(__name__)

CLIP_WARN_FRACTION = 0.01


class ReweightError(ValueError):
    pass


def _fsum(a: np.ndarray) -> float:
    return math.fsum(np.asarray(a, dtype=np.float64).tolist())


def compute_raw_weights(f_values, est: DensityEstimate, target) -> tuple[np.ndarray, int]:
    """Raw weights and the number of samples clipped by the density floor.

    ``target`` is anything with a vectorised ``pdf`` (a TargetSpec, or a
    DensityEstimate for identity reweighting).  A sample whose estimated
    induced density is below the floor gets weight 0 and is counted as
    clipped if the target puts density there.
    """
    f = np.asarray(f_values, dtype=np.float64)
    if not np.all(np.isfinite(f)):
        raise ReweightError("f values must be finite")
    induced = est.pdf(f)
    wanted = np.asarray(target.pdf(f), dtype=np.float64)
    ok = induced > 0
    clipped = int(np.count_nonzero(~ok & (wanted > 0)))
    w = np.zeros_like(f)
    np.divide(wanted, induced, out=w, where=ok)
    if f.size and not np.any(w > 0):
        raise ReweightError("target support disjoint from induced support")
    return w, clipped


def normalize_weights(w_raw) -> np.ndarray:
    w = np.asarray(w_raw, dtype=np.float64)
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ReweightError("raw weights must be finite and non-negative")
    total = _fsum(w)
    if total <= 0:
        raise ReweightError("cannot normalise: all weights are zero")
    return w / total


def effective_sample_size(w_norm) -> float:
    return 1.0 / _fsum(np.square(w_norm))


def entropy_estimate(w_norm) -> float:
    """Relative entropy H(p|q) in nats from normalised weights on q-samples.

    Uses p/q ~ N * w_i, so H = -sum_i w_i log(N w_i); zero weights drop out.
    """
    w = np.asarray(w_norm, dtype=np.float64)
    n = w.size
    pos = w[w > 0]
    if pos.size == 0:
        return 0.0
    if pos.size == n and np.all(pos == pos[0]):
        return 0.0
    # Gibbs' inequality makes this <= 0; clamp rounding noise at the equality case
    return min(0.0, -_fsum(pos * np.log(n * pos)))


def normalization_check(w_raw) -> float:
    """Sample mean of the raw weights; estimates the integral of p, i.e. 1."""
    w = np.asarray(w_raw, dtype=np.float64)
    if w.size == 0:
        return 0.0
    return _fsum(w) / w.size


@dataclass
class ReweightReport:
    n: int
    ess: float
    entropy: float
    normalization_mc: float
    clipped_fraction: float
    clipped_count: int
    estimator_summary: dict
    warnings: list

    def to_dict(self) -> dict:
        return asdict(self)


def reweight(samples: np.ndarray, f_values: np.ndarray, est: DensityEstimate, target,
             seed: int = 0, base=None) -> tuple[WeightedEnsemble, ReweightReport]:
    """Build the weighted ensemble and its summary report."""
    w_raw, clipped = compute_raw_weights(f_values, est, target)
    w_norm = normalize_weights(w_raw)
    n = int(w_raw.size)
    warnings = []
    clipped_fraction = clipped / n if n else 0.0
    if clipped_fraction > CLIP_WARN_FRACTION:
        msg = (f"WARNING: {clipped_fraction:.2%} of samples clipped; the target puts mass "
               f"where the induced density is below the floor")
        log.warning(msg)
        warnings.append(msg)
    norm = normalization_check(w_raw)
    if norm == 0.0:
        warnings.append("normalization check is zero: every weight was clipped")
    ens = WeightedEnsemble(np.asarray(samples), np.asarray(f_values, dtype=np.float64),
                           w_raw, w_norm, clipped, seed, base)
    report = ReweightReport(
        n=n,
        ess=effective_sample_size(w_norm),
        entropy=entropy_estimate(w_norm),
        normalization_mc=norm,
        clipped_fraction=clipped_fraction,
        clipped_count=clipped,
        estimator_summary=est.summary(),
        warnings=warnings,
    )
    return ens, report
