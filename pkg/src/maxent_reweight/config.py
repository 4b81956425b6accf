"""Run configuration: JSON schema validation and the built-in demos."""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

from .expr import DerivedExpr, ExprError, parse
from .model import BaseDistributionSpec, ModelError, TargetSpec

MIN_SAMPLES = 1000


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


_TOP_KEYS = {"base", "derived", "target", "n_samples", "seed", "estimator",
             "output_dir", "diagnostics", "oracle"}
_BASE_KEYS = {"UniformBox": {"family", "dimension", "lo", "hi"},
              "IndependentGaussian": {"family", "dimension", "mean", "std"},
              "GaussianOnLog": {"family", "dimension", "mean", "std"}}
_TARGET_KEYS = {"UniformInterval": {"family", "lo", "hi"},
                "Gaussian": {"family", "mean", "std"},
                "GaussianOnLog": {"family", "mean", "std"}}
_ESTIMATOR_KEYS = {"kind", "bins", "bandwidth"}
_DIAG_KEYS = {"ks", "marginals", "bins", "marginal_bins", "perturbation"}
_PERT_KEYS = {"s", "deltas"}
_ORACLE_KEYS = {"points", "f_bins", "f_range"}


def _check_keys(obj, allowed: set, path: str):
    if not isinstance(obj, dict):
        raise ConfigError(path, "expected an object")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ConfigError(f"{path}.{unknown[0]}" if path else unknown[0], "unknown key")


def _require(obj: dict, key: str, path: str):
    if key not in obj:
        raise ConfigError(f"{path}.{key}" if path else key, "missing required key")
    return obj[key]


def _int(value, path: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, "expected an integer")
    if minimum is not None and value < minimum:
        raise ConfigError(path, f"must be >= {minimum}")
    return value


def parse_base(obj) -> BaseDistributionSpec:
    if not isinstance(obj, dict):
        raise ConfigError("base", "expected an object")
    family = _require(obj, "family", "base")
    if family not in _BASE_KEYS:
        raise ConfigError("base.family", f"unknown family {family!r}")
    _check_keys(obj, _BASE_KEYS[family], "base")
    dim = _int(_require(obj, "dimension", "base"), "base.dimension", 1)
    try:
        if family == "UniformBox":
            return BaseDistributionSpec(family, dim, lo=_require(obj, "lo", "base"),
                                        hi=_require(obj, "hi", "base"))
        return BaseDistributionSpec(family, dim, mean=_require(obj, "mean", "base"),
                                    std=_require(obj, "std", "base"))
    except (ModelError, TypeError) as err:
        raise ConfigError("base", str(err)) from None


def parse_target(obj) -> TargetSpec:
    if not isinstance(obj, dict):
        raise ConfigError("target", "expected an object")
    family = _require(obj, "family", "target")
    if family not in _TARGET_KEYS:
        raise ConfigError("target.family", f"unknown family {family!r}")
    _check_keys(obj, _TARGET_KEYS[family], "target")
    try:
        if family == "UniformInterval":
            return TargetSpec(family, _require(obj, "lo", "target"), _require(obj, "hi", "target"))
        return TargetSpec(family, _require(obj, "mean", "target"), _require(obj, "std", "target"))
    except (ModelError, TypeError) as err:
        raise ConfigError("target", str(err)) from None


def parse_expression(text, dimension: int, path: str) -> DerivedExpr:
    if not isinstance(text, str):
        raise ConfigError(path, "expected an expression string")
    try:
        return parse(text, dimension)
    except ExprError as err:
        raise ConfigError(path, str(err)) from None


@dataclass
class EstimatorConfig:
    kind: str = "histogram"
    bins: int | str = "auto"
    bandwidth: float | str = "auto"


@dataclass
class PerturbationConfig:
    s: DerivedExpr
    s_text: str
    deltas: list[float]


@dataclass
class DiagnosticsConfig:
    ks: bool = True
    marginals: list[int] = field(default_factory=list)
    bins: int = 40
    marginal_bins: int = 50
    perturbation: PerturbationConfig | None = None


@dataclass
class RunConfig:
    base: BaseDistributionSpec
    derived: DerivedExpr
    derived_text: str
    target: TargetSpec | None
    n_samples: int
    seed: int
    estimator: EstimatorConfig
    output_dir: str
    diagnostics: DiagnosticsConfig
    oracle: dict = field(default_factory=dict)

    def resolved(self) -> dict:
        """Fully explicit JSON form; parsing it back gives the same run."""
        diag = {
            "ks": self.diagnostics.ks,
            "marginals": list(self.diagnostics.marginals),
            "bins": self.diagnostics.bins,
            "marginal_bins": self.diagnostics.marginal_bins,
        }
        if self.diagnostics.perturbation is not None:
            diag["perturbation"] = {"s": self.diagnostics.perturbation.s_text,
                                    "deltas": list(self.diagnostics.perturbation.deltas)}
        out = {
            "base": self.base.to_dict(),
            "derived": self.derived_text,
            "target": None if self.target is None else self.target.to_dict(),
            "n_samples": self.n_samples,
            "seed": self.seed,
            "estimator": {"kind": self.estimator.kind, "bins": self.estimator.bins,
                          "bandwidth": self.estimator.bandwidth},
            "output_dir": self.output_dir,
            "diagnostics": diag,
        }
        if self.oracle:
            out["oracle"] = copy.deepcopy(self.oracle)
        return out


def _parse_estimator(obj) -> EstimatorConfig:
    if obj is None:
        return EstimatorConfig()
    _check_keys(obj, _ESTIMATOR_KEYS, "estimator")
    kind = obj.get("kind", "histogram")
    if kind not in ("histogram", "kde"):
        raise ConfigError("estimator.kind", "must be 'histogram' or 'kde'")
    bins = obj.get("bins", "auto")
    if bins != "auto":
        _int(bins, "estimator.bins", 1)
    bw = obj.get("bandwidth", "auto")
    if bw != "auto" and (isinstance(bw, bool) or not isinstance(bw, (int, float)) or bw <= 0):
        raise ConfigError("estimator.bandwidth", "must be a positive number or 'auto'")
    return EstimatorConfig(kind, bins, bw)


def _parse_diagnostics(obj, dimension: int) -> DiagnosticsConfig:
    if obj is None:
        return DiagnosticsConfig()
    _check_keys(obj, _DIAG_KEYS, "diagnostics")
    ks = obj.get("ks", True)
    if not isinstance(ks, bool):
        raise ConfigError("diagnostics.ks", "expected true or false")
    marginals = obj.get("marginals", [])
    if not isinstance(marginals, list):
        raise ConfigError("diagnostics.marginals", "expected a list of component indices")
    for i, k in enumerate(marginals):
        _int(k, f"diagnostics.marginals[{i}]", 1)
        if k > dimension:
            raise ConfigError(f"diagnostics.marginals[{i}]", f"index {k} exceeds dimension {dimension}")
    bins = _int(obj.get("bins", 40), "diagnostics.bins", 2)
    mbins = _int(obj.get("marginal_bins", 50), "diagnostics.marginal_bins", 2)
    pert = None
    if obj.get("perturbation") is not None:
        p = obj["perturbation"]
        _check_keys(p, _PERT_KEYS, "diagnostics.perturbation")
        text = _require(p, "s", "diagnostics.perturbation")
        s = parse_expression(text, dimension, "diagnostics.perturbation.s")
        deltas = _require(p, "deltas", "diagnostics.perturbation")
        if not isinstance(deltas, list) or not all(
                isinstance(d, (int, float)) and not isinstance(d, bool) and abs(d) < 1 for d in deltas):
            raise ConfigError("diagnostics.perturbation.deltas", "expected numbers with |delta| < 1")
        pert = PerturbationConfig(s, text, [float(d) for d in deltas])
    return DiagnosticsConfig(ks, list(marginals), bins, mbins, pert)


def _parse_oracle(obj) -> dict:
    if obj is None:
        return {}
    _check_keys(obj, _ORACLE_KEYS, "oracle")
    out = {}
    if "points" in obj:
        out["points"] = _int(obj["points"], "oracle.points", 16)
    if "f_bins" in obj:
        out["f_bins"] = _int(obj["f_bins"], "oracle.f_bins", 2)
    if "f_range" in obj:
        fr = obj["f_range"]
        if not (isinstance(fr, list) and len(fr) == 2 and all(isinstance(v, (int, float)) for v in fr)
                and fr[0] < fr[1]):
            raise ConfigError("oracle.f_range", "expected [lo, hi] with lo < hi")
        out["f_range"] = [float(fr[0]), float(fr[1])]
    return out


def parse_config(obj: dict, *, require_run: bool = True) -> RunConfig:
    """Validate a config mapping.  ``require_run=False`` accepts the subset the
    oracle needs (base, derived, optional target)."""
    _check_keys(obj, _TOP_KEYS, "")
    base = parse_base(_require(obj, "base", ""))
    text = _require(obj, "derived", "")
    derived = parse_expression(text, base.dimension, "derived")
    target = None
    if require_run or obj.get("target") is not None:
        target = parse_target(_require(obj, "target", ""))
    if require_run:
        n = _int(_require(obj, "n_samples", ""), "n_samples", MIN_SAMPLES)
        seed = _int(_require(obj, "seed", ""), "seed", 0)
        if seed >= 1 << 64:
            raise ConfigError("seed", "must be < 2**64")
    else:
        n = _int(obj.get("n_samples", MIN_SAMPLES), "n_samples", MIN_SAMPLES)
        seed = _int(obj.get("seed", 0), "seed", 0)
    out_dir = obj.get("output_dir", "out")
    if not isinstance(out_dir, str):
        raise ConfigError("output_dir", "expected a path string")
    return RunConfig(
        base=base, derived=derived, derived_text=text, target=target,
        n_samples=n, seed=seed,
        estimator=_parse_estimator(obj.get("estimator")),
        output_dir=out_dir,
        diagnostics=_parse_diagnostics(obj.get("diagnostics"), base.dimension),
        oracle=_parse_oracle(obj.get("oracle")),
    )


def load_config(path, *, require_run: bool = True) -> RunConfig:
    try:
        obj = json.loads(Path(path).read_text())
    except OSError as err:
        raise ConfigError("", f"cannot read config {path}: {err.strerror}") from None
    except json.JSONDecodeError as err:
        raise ConfigError("", f"invalid JSON in {path}: {err}") from None
    return parse_config(obj, require_run=require_run)


DEMOS = {
    "triangular": {
        "base": {"family": "UniformBox", "dimension": 2, "lo": [0.0, 0.0], "hi": [1.0, 1.0]},
        "derived": "x1+x2",
        "target": {"family": "UniformInterval", "lo": 0.0, "hi": 2.0},
        "n_samples": 1000000,
        "seed": 20190101,
        "estimator": {"kind": "histogram", "bins": "auto"},
        "output_dir": "out/triangular",
        "diagnostics": {
            "ks": True,
            "marginals": [1, 2],
            "bins": 40,
            "marginal_bins": 50,
            "perturbation": {"s": "sign(x1-x2)", "deltas": [0.0, 0.2, 0.5, 0.9]},
        },
        "oracle": {"points": 512, "f_bins": 64, "f_range": [0.0, 2.0]},
    },
    "neutrino": {
        "base": {"family": "GaussianOnLog", "dimension": 3,
                 "mean": [0.0, 0.0, 0.0], "std": [5.0, 5.0, 5.0]},
        "derived": "log(mean(exp(x)))",
        "target": {"family": "Gaussian", "mean": 0.0, "std": 5.0},
        "n_samples": 1000000,
        "seed": 20190102,
        "estimator": {"kind": "kde", "bandwidth": "auto"},
        "output_dir": "out/neutrino",
        "diagnostics": {"ks": True, "marginals": [1, 2, 3], "bins": 40, "marginal_bins": 50},
        "oracle": {"points": 64, "f_bins": 64},
    },
}


def demo_config(name: str) -> dict:
    if name not in DEMOS:
        raise ConfigError("", f"unknown demo {name!r}; choose from {sorted(DEMOS)}")
    return copy.deepcopy(DEMOS[name])
