"""Pure numpy implementations of the hot kernels.

Every function here has a twin in ``_ckernels.pyx`` with identical
semantics; the compiled one is preferred when it imports.
"""
import numpy as np
from scipy.special import ndtri

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SEED_SALT = np.uint64(0x5851F42D4C957F2D)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TWO_M53 = 2.0 ** -53


def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _stream_key(seed):
    return _mix64(np.array([seed], dtype=np.uint64) ^ _SEED_SALT)[0]


def counter_uniforms(seed, start, n, d):
    """Uniforms in (0, 1) for rows ``start .. start+n-1`` of a ``d``-wide table.

    Entry (i, k) depends only on ``(seed, i*d + k)``.
    """
    key = _stream_key(seed)
    counters = np.arange(start * d, (start + n) * d, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = _mix64(key + (counters + np.uint64(1)) * _GAMMA)
    u = ((z >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_M53
    return u.reshape(n, d)


def counter_normals(seed, start, n, d):
    return ndtri(counter_uniforms(seed, start, n, d))


def bin_index(values, edges):
    """Index of the half-open bin ``[e_i, e_{i+1})`` holding each value.

    Values equal to the last edge go to the last bin; anything outside
    ``[e_0, e_M]`` gets -1.
    """
    values = np.asarray(values, dtype=np.float64)
    nbins = len(edges) - 1
    idx = np.searchsorted(edges, values, side="right") - 1
    idx[values == edges[-1]] = nbins - 1
    idx[(values < edges[0]) | (values > edges[-1])] = -1
    return idx.astype(np.int64)


def bin_counts(values, edges):
    idx = bin_index(values, edges)
    idx = idx[idx >= 0]
    return np.bincount(idx, minlength=len(edges) - 1).astype(np.float64)


def linear_bin(values, lo, delta, m):
    """Linear binning of ``values`` onto ``m`` knots at ``lo + j*delta``."""
    values = np.asarray(values, dtype=np.float64)
    pos = (values - lo) / delta
    j = np.floor(pos).astype(np.int64)
    j = np.clip(j, 0, m - 2)
    frac = pos - j
    out = np.bincount(j, weights=1.0 - frac, minlength=m)
    out += np.bincount(j + 1, weights=frac, minlength=m)
    return out[:m]


def weighted_ks_sorted(f_sorted, w_sorted, cdf_values):
    """Two-sided sup distance between a weighted step ECDF and a CDF.

    Inputs are sorted by ``f``; tied ``f`` values form one step.
    """
    n = len(f_sorted)
    cum = np.cumsum(w_sorted)
    # last index of each run of equal f values
    last = np.ones(n, dtype=bool)
    last[:-1] = f_sorted[1:] != f_sorted[:-1]
    ends = np.flatnonzero(last)
    after = cum[ends]
    before = np.concatenate(([0.0], after[:-1]))
    c = cdf_values[ends]
    return float(max(np.max(np.abs(after - c)), np.max(np.abs(before - c))))


def format_rows(table):
    """CSV body for a 2-D float table, every value as ``%.17g``."""
    table = np.asarray(table, dtype=np.float64)
    if table.shape[0] == 0:
        return b""
    fmt = ",".join(["%.17g"] * table.shape[1]) + "\n"
    return "".join(fmt % tuple(row) for row in table.tolist()).encode("ascii")
