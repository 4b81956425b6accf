"""Base and target distribution families and the shared ensemble type.

Coordinates: samples live in the *latent* space of the base family.  For
``UniformBox`` and ``IndependentGaussian`` that is the parameter itself; for
``GaussianOnLog`` it is the natural log of the parameter, ell = ln m, and the
base density is the Gaussian density of ell (no Jacobian).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import ndtr

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class ModelError(ValueError):
    """Invalid distribution specification or argument."""


class BaseFamily(str, enum.Enum):
    UNIFORM_BOX = "UniformBox"
    INDEPENDENT_GAUSSIAN = "IndependentGaussian"
    GAUSSIAN_ON_LOG = "GaussianOnLog"


class TargetFamily(str, enum.Enum):
    UNIFORM_INTERVAL = "UniformInterval"
    GAUSSIAN = "Gaussian"
    GAUSSIAN_ON_LOG = "GaussianOnLog"


def _as_floats(values, name: str) -> tuple[float, ...]:
    arr = np.atleast_1d(np.asarray(values, dtype=np.float64))
    if arr.ndim != 1:
        raise ModelError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise ModelError(f"{name} must be finite")
    return tuple(float(v) for v in arr)


def _broadcast(values, dimension: int, name: str) -> tuple[float, ...]:
    vals = _as_floats(values, name)
    if len(vals) == 1 and dimension > 1:
        vals = vals * dimension
    if len(vals) != dimension:
        raise ModelError(f"{name} has length {len(vals)}, expected {dimension}")
    return vals


def as_parameter_vector(values, dimension: int | None = None) -> np.ndarray:
    """Validate a single point x: 1-D, finite, and of the expected length."""
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1 or x.size < 1:
        raise ModelError("parameter vector must be a non-empty 1-D array")
    if dimension is not None and x.size != dimension:
        raise ModelError(f"parameter vector has length {x.size}, expected {dimension}")
    if not np.all(np.isfinite(x)):
        raise ModelError("parameter vector has non-finite entries")
    return x


@dataclass(frozen=True)
class BaseDistributionSpec:
    """Declarative description of the base distribution q(x).

    ``lo``/``hi`` are used by ``UniformBox``; ``mean``/``std`` by the Gaussian
    families.  Scalars are broadcast to ``dimension``.
    """

    family: BaseFamily
    dimension: int
    lo: tuple[float, ...] = ()
    hi: tuple[float, ...] = ()
    mean: tuple[float, ...] = ()
    std: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "family", BaseFamily(self.family))
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise ModelError("dimension must be an integer >= 1")
        object.__setattr__(self, "dimension", int(self.dimension))
        d = self.dimension
        if self.family is BaseFamily.UNIFORM_BOX:
            lo = _broadcast(self.lo, d, "lo")
            hi = _broadcast(self.hi, d, "hi")
            if any(a >= b for a, b in zip(lo, hi)):
                raise ModelError("UniformBox needs lo < hi in every component")
            object.__setattr__(self, "lo", lo)
            object.__setattr__(self, "hi", hi)
        else:
            mean = _broadcast(self.mean, d, "mean")
            std = _broadcast(self.std, d, "std")
            if any(s <= 0 for s in std):
                raise ModelError("Gaussian families need std > 0")
            object.__setattr__(self, "mean", mean)
            object.__setattr__(self, "std", std)

    @classmethod
    def uniform_box(cls, lo: Sequence[float] | float, hi: Sequence[float] | float,
                    dimension: int | None = None) -> "BaseDistributionSpec":
        if dimension is None:
            dimension = len(np.atleast_1d(lo))
        return cls(BaseFamily.UNIFORM_BOX, dimension, lo=lo, hi=hi)

    @classmethod
    def gaussian(cls, mean, std, dimension: int | None = None,
                 on_log: bool = False) -> "BaseDistributionSpec":
        if dimension is None:
            dimension = len(np.atleast_1d(mean))
        family = BaseFamily.GAUSSIAN_ON_LOG if on_log else BaseFamily.INDEPENDENT_GAUSSIAN
        return cls(family, dimension, mean=mean, std=std)

    @property
    def is_log(self) -> bool:
        return self.family is BaseFamily.GAUSSIAN_ON_LOG

    def to_dict(self) -> dict:
        out = {"family": self.family.value, "dimension": self.dimension}
        if self.family is BaseFamily.UNIFORM_BOX:
            out.update(lo=list(self.lo), hi=list(self.hi))
        else:
            out.update(mean=list(self.mean), std=list(self.std))
        return out

    def to_linear(self, latent: np.ndarray) -> np.ndarray:
        """Map latent coordinates to parameter space (exp for GaussianOnLog)."""
        return np.exp(latent) if self.is_log else latent

    def latent_log_density(self, z: np.ndarray) -> np.ndarray:
        """Log density of the latent coordinates, vectorised over rows of ``z``."""
        z = np.atleast_2d(np.asarray(z, dtype=np.float64))
        if self.family is BaseFamily.UNIFORM_BOX:
            lo = np.asarray(self.lo)
            hi = np.asarray(self.hi)
            inside = np.all((z >= lo) & (z <= hi), axis=1)
            logvol = float(np.sum(np.log(hi - lo)))
            return np.where(inside, -logvol, -np.inf)
        mu = np.asarray(self.mean)
        sd = np.asarray(self.std)
        t = (z - mu) / sd
        return np.sum(-0.5 * t * t - np.log(sd) - _LOG_SQRT_2PI, axis=1)


def base_log_density(spec: BaseDistributionSpec, x) -> float:
    """log q(x) at a parameter-space point, -inf outside the support.

    For ``GaussianOnLog`` the argument is the linear parameter m and the
    returned value is the Gaussian log density of ln m.
    """
    x = as_parameter_vector(x, spec.dimension)
    if spec.is_log:
        if np.any(x <= 0):
            return -math.inf
        x = np.log(x)
    return float(spec.latent_log_density(x)[0])


def _check_finite(f) -> np.ndarray:
    arr = np.asarray(f, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ModelError("target evaluated at a non-finite value")
    return arr


@dataclass(frozen=True)
class TargetSpec:
    """Desired distribution r(f) of the derived parameter.

    ``a``/``b`` are (lo, hi) for ``UniformInterval`` and (mean, std) for the
    Gaussian families; ``GaussianOnLog`` is the log-normal with ln f ~ N(a, b).
    """

    family: TargetFamily
    a: float
    b: float
    support: tuple[float, float] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "family", TargetFamily(self.family))
        a, b = float(self.a), float(self.b)
        if not (math.isfinite(a) and math.isfinite(b)):
            raise ModelError("target parameters must be finite")
        if self.family is TargetFamily.UNIFORM_INTERVAL:
            if a >= b:
                raise ModelError("UniformInterval needs lo < hi")
            support = (a, b)
        else:
            if b <= 0:
                raise ModelError("target std must be > 0")
            support = (-math.inf, math.inf) if self.family is TargetFamily.GAUSSIAN else (0.0, math.inf)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "support", support)

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "TargetSpec":
        return cls(TargetFamily.UNIFORM_INTERVAL, lo, hi)

    @classmethod
    def gaussian(cls, mean: float, std: float, on_log: bool = False) -> "TargetSpec":
        return cls(TargetFamily.GAUSSIAN_ON_LOG if on_log else TargetFamily.GAUSSIAN, mean, std)

    def to_dict(self) -> dict:
        if self.family is TargetFamily.UNIFORM_INTERVAL:
            return {"family": self.family.value, "lo": self.a, "hi": self.b}
        return {"family": self.family.value, "mean": self.a, "std": self.b}

    def describe(self) -> str:
        return ", ".join(f"{k}={v}" for k, v in self.to_dict().items())

    def pdf(self, f):
        """Vectorised r(f); zero outside the support."""
        f = _check_finite(f)
        if self.family is TargetFamily.UNIFORM_INTERVAL:
            inside = (f >= self.a) & (f <= self.b)
            return np.where(inside, 1.0 / (self.b - self.a), 0.0)
        if self.family is TargetFamily.GAUSSIAN:
            t = (f - self.a) / self.b
            return np.exp(-0.5 * t * t - _LOG_SQRT_2PI) / self.b
        pos = f > 0
        safe = np.where(pos, f, 1.0)
        t = (np.log(safe) - self.a) / self.b
        return np.where(pos, np.exp(-0.5 * t * t - _LOG_SQRT_2PI) / (self.b * safe), 0.0)

    def cdf(self, f):
        """Vectorised c(f), clipped to [0, 1]."""
        f = _check_finite(f)
        if self.family is TargetFamily.UNIFORM_INTERVAL:
            return np.clip((f - self.a) / (self.b - self.a), 0.0, 1.0)
        if self.family is TargetFamily.GAUSSIAN:
            return ndtr((f - self.a) / self.b)
        pos = f > 0
        safe = np.where(pos, f, 1.0)
        return np.where(pos, ndtr((np.log(safe) - self.a) / self.b), 0.0)


def target_pdf(t: TargetSpec, f: float) -> float:
    return float(t.pdf(f))


def target_cdf(t: TargetSpec, f: float) -> float:
    return float(t.cdf(f))


@dataclass(frozen=True, eq=False)
class WeightedEnsemble:
    """Samples from q (latent coordinates) with their maximum-entropy weights."""

    samples: np.ndarray
    f_values: np.ndarray
    w_raw: np.ndarray
    w_norm: np.ndarray
    clipped_count: int
    seed: int
    base: BaseDistributionSpec | None = None

    def __post_init__(self):
        n = len(self.f_values)
        if self.samples.shape[0] != n or len(self.w_raw) != n or len(self.w_norm) != n:
            raise ModelError("ensemble arrays have inconsistent lengths")
        for arr in (self.samples, self.f_values, self.w_raw, self.w_norm):
            arr.setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.f_values)

    @property
    def linear_samples(self) -> np.ndarray:
        """Samples in parameter space (m rather than ln m for GaussianOnLog)."""
        if self.base is None:
            return self.samples
        return self.base.to_linear(self.samples)
