"""Reproducible i.i.d. draws from a base distribution.

Every coordinate of point i is a pure function of ``(seed, i)``, so the batch
is identical however the index range is split across worker threads.
"""
from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .expr import DerivedExpr, ExprDomainError, ExprError, evaluate_batch
from .model import BaseDistributionSpec, BaseFamily

CHUNK = 1 << 16
_MAX_SEED = 1 << 64


class SamplingError(ValueError):
    pass


def spec_hash(spec: BaseDistributionSpec) -> str:
    blob = json.dumps(spec.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class SampleBatch:
    points: np.ndarray  # (N, D), latent coordinates
    seed: int
    spec_hash: str

    def __len__(self):
        return self.points.shape[0]

    @property
    def dimension(self) -> int:
        return self.points.shape[1]


def _chunks(n: int):
    return [(s, min(CHUNK, n - s)) for s in range(0, n, CHUNK)]


def _map_chunks(func, n: int, threads: int | None):
    parts = _chunks(n)
    if threads is None or threads <= 1 or len(parts) <= 1:
        return [func(s, m) for s, m in parts]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda p: func(*p), parts))


def sample_base(spec: BaseDistributionSpec, n: int, seed: int,
                threads: int | None = None) -> SampleBatch:
    """Draw ``n`` points from ``spec`` with the counter-based stream ``seed``."""
    if int(n) != n or n < 0:
        raise SamplingError("n must be a non-negative integer")
    if int(seed) != seed or not 0 <= seed < _MAX_SEED:
        raise SamplingError("seed must be an integer in [0, 2**64)")
    n, seed, d = int(n), int(seed), spec.dimension

    if spec.family is BaseFamily.UNIFORM_BOX:
        lo = np.asarray(spec.lo)
        width = np.asarray(spec.hi) - lo

        def draw(start, m):
            return lo + width * kernels.counter_uniforms(seed, start, m, d)
    else:
        mu = np.asarray(spec.mean)
        sd = np.asarray(spec.std)

        def draw(start, m):
            return mu + sd * kernels.counter_normals(seed, start, m, d)

    parts = _map_chunks(draw, n, threads)
    points = np.concatenate(parts, axis=0) if parts else np.empty((0, d))
    points.setflags(write=False)
    return SampleBatch(points, seed, spec_hash(spec))


def derived_values(batch: SampleBatch, e: DerivedExpr,
                   threads: int | None = None) -> np.ndarray:
    """f(x_i) for every point, in batch order."""
    if e.dimension != batch.dimension:
        raise ExprError(
            f"expression dimension {e.dimension} does not match batch dimension {batch.dimension}")
    n = len(batch)
    if n == 0:
        return np.empty(0)

    def run(start, m):
        try:
            return evaluate_batch(e, batch.points[start:start + m])
        except ExprDomainError as err:
            raise ExprDomainError(err.reason, err.subexpression, start + err.index) from None

    return np.concatenate(_map_chunks(run, n, threads))
