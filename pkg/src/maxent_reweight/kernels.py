"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
numpy twins in ``_pykernels`` are used. Set ``MAXENT_REWEIGHT_PURE=1`` to
force the numpy path.
"""
import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("MAXENT_REWEIGHT_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build
        pass

counter_uniforms = _impl.counter_uniforms
counter_normals = _impl.counter_normals
bin_index = _impl.bin_index
bin_counts = _impl.bin_counts
linear_bin = _impl.linear_bin
weighted_ks_sorted = _impl.weighted_ks_sorted
format_rows = _impl.format_rows

RNG_ALGORITHM = "splitmix64-counter: u(seed, i*D+k), gaussian via inverse normal CDF"

__all__ = [
    "BACKEND", "RNG_ALGORITHM", "counter_uniforms", "counter_normals",
    "bin_index", "bin_counts", "linear_bin", "weighted_ks_sorted",
    "format_rows",
]
