# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Semantics mirror ``_pykernels`` exactly."""
import numpy as np
cimport numpy as cnp
from libc.math cimport floor
from libc.stdio cimport snprintf
from libc.stdint cimport uint64_t, int64_t
from scipy.special.cython_special cimport ndtri

cnp.import_array()

cdef uint64_t _GAMMA = 0x9E3779B97F4A7C15ULL
cdef uint64_t _SEED_SALT = 0x5851F42D4C957F2DULL
cdef double _TWO_M53 = 1.0 / 9007199254740992.0


cdef inline uint64_t _mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double _uniform(uint64_t key, uint64_t counter) noexcept nogil:
    cdef uint64_t z = _mix64(key + (counter + 1) * _GAMMA)
    return (<double>(z >> 11) + 0.5) * _TWO_M53


def counter_uniforms(uint64_t seed, int64_t start, int64_t n, int64_t d):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n * d, dtype=np.float64)
    cdef double[::1] o = out
    cdef uint64_t key = _mix64(seed ^ _SEED_SALT)
    cdef uint64_t base = <uint64_t>(start * d)
    cdef int64_t j
    with nogil:
        for j in range(n * d):
            o[j] = _uniform(key, base + <uint64_t>j)
    return out.reshape(n, d)


def counter_normals(uint64_t seed, int64_t start, int64_t n, int64_t d):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n * d, dtype=np.float64)
    cdef double[::1] o = out
    cdef uint64_t key = _mix64(seed ^ _SEED_SALT)
    cdef uint64_t base = <uint64_t>(start * d)
    cdef int64_t j
    with nogil:
        for j in range(n * d):
            o[j] = ndtri(_uniform(key, base + <uint64_t>j))
    return out.reshape(n, d)


cdef inline int64_t _search_right(const double[::1] edges, double v) noexcept nogil:
    # number of edges <= v, minus one
    cdef int64_t lo = 0, hi = edges.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if edges[mid] <= v:
            lo = mid + 1
        else:
            hi = mid
    return lo - 1


def bin_index(values, edges):
    cdef const double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef const double[::1] e = np.ascontiguousarray(edges, dtype=np.float64)
    cdef int64_t n = v.shape[0], nb = e.shape[0] - 1, i, k
    cdef double lo = e[0], hi = e[nb], inv_w = nb / (e[nb] - e[0]), x
    out = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] o = out
    with nogil:
        for i in range(n):
            x = v[i]
            if x < lo or x > hi or x != x:
                o[i] = -1
            elif x == hi:
                o[i] = nb - 1
            else:
                k = <int64_t>floor((x - lo) * inv_w)
                if k < 0:
                    k = 0
                if k > nb - 1:
                    k = nb - 1
                # guess from uniform width, then fix against the stored edges
                if not (e[k] <= x and x < e[k + 1]):
                    k = _search_right(e, x)
                o[i] = k
    return out


def bin_counts(values, edges):
    cdef const int64_t[::1] idx = bin_index(values, edges)
    out = np.zeros(len(edges) - 1, dtype=np.float64)
    cdef double[::1] o = out
    cdef int64_t i
    with nogil:
        for i in range(idx.shape[0]):
            if idx[i] >= 0:
                o[idx[i]] += 1.0
    return out


def linear_bin(values, double lo, double delta, int64_t m):
    cdef const double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    out = np.zeros(m, dtype=np.float64)
    cdef double[::1] o = out
    cdef int64_t i, j
    cdef double pos, frac
    with nogil:
        # two passes keep the accumulation order identical to the numpy twin
        for i in range(v.shape[0]):
            pos = (v[i] - lo) / delta
            j = <int64_t>floor(pos)
            if j < 0:
                j = 0
            if j > m - 2:
                j = m - 2
            frac = pos - j
            o[j] += 1.0 - frac
    tail = np.zeros(m, dtype=np.float64)
    cdef double[::1] t = tail
    with nogil:
        for i in range(v.shape[0]):
            pos = (v[i] - lo) / delta
            j = <int64_t>floor(pos)
            if j < 0:
                j = 0
            if j > m - 2:
                j = m - 2
            frac = pos - j
            t[j + 1] += frac
    return out + tail


def weighted_ks_sorted(f_sorted, w_sorted, cdf_values):
    cdef const double[::1] f = np.ascontiguousarray(f_sorted, dtype=np.float64)
    cdef const double[::1] w = np.ascontiguousarray(w_sorted, dtype=np.float64)
    cdef const double[::1] c = np.ascontiguousarray(cdf_values, dtype=np.float64)
    cdef int64_t n = f.shape[0], i
    cdef double cum = 0.0, before = 0.0, best = 0.0, d
    with nogil:
        for i in range(n):
            cum += w[i]
            if i + 1 < n and f[i + 1] == f[i]:
                continue
            d = cum - c[i]
            if d < 0:
                d = -d
            if d > best:
                best = d
            d = before - c[i]
            if d < 0:
                d = -d
            if d > best:
                best = d
            before = cum
    return best


def format_rows(table):
    cdef const double[:, ::1] t = np.ascontiguousarray(table, dtype=np.float64)
    cdef Py_ssize_t nrow = t.shape[0], ncol = t.shape[1], i, j, pos = 0
    if nrow == 0:
        return b""
    # 24 chars bound one %.17g value plus its separator
    buf = bytearray(nrow * ncol * 26 + 1)
    cdef char* p = buf
    with nogil:
        for i in range(nrow):
            for j in range(ncol):
                pos += snprintf(p + pos, 26, "%.17g", t[i, j])
                p[pos] = b',' if j + 1 < ncol else b'\n'
                pos += 1
    return bytes(buf[:pos])
