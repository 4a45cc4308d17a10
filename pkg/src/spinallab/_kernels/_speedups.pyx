# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementation of the hot kernels.

Must stay bit-identical to _purepy for every integer quantity; see the
constants block there for the pinned mixing construction.
"""

import numpy as np

cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t

cnp.import_array()

BACKEND_NAME = "compiled"

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15UL
cdef uint64_t MIX_M1 = 0xBF58476D1CE4E5B9UL
cdef uint64_t MIX_M2 = 0x94D049BB133111EBUL
cdef uint64_t SEG_SPREAD = 0xD1B54A32D192ED03UL
cdef uint64_t STREAM_TAG = 0xA0761D6478BD642FUL


cdef inline uint64_t mix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * MIX_M1
    z = (z ^ (z >> 27)) * MIX_M2
    return z ^ (z >> 31)


cdef inline int popcount64(uint64_t x) nogil:
    cdef int n = 0
    while x:
        x &= x - 1
        n += 1
    return n


def symbols_for_spine(spine, count, c, salt):
    """First `count` c-bit outputs of the stream seeded by `spine`."""
    cdef uint64_t seed = mix64(<uint64_t> spine ^ mix64(<uint64_t> salt ^ STREAM_TAG))
    cdef int cc = c
    cdef int spw = 64 // cc
    cdef Py_ssize_t total = count
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] out = np.empty(total, dtype=np.uint64)
    cdef uint64_t word = 0
    cdef uint64_t cmask = (<uint64_t> 1 << cc) - 1
    cdef Py_ssize_t j
    cdef int p
    cdef uint64_t t = 0
    with nogil:
        for j in range(total):
            p = <int> (j % spw)
            if p == 0:
                t = j // spw
                word = mix64(seed + (t + 1) * GOLDEN)
            out[j] = (word >> (64 - cc * (p + 1))) & cmask
    return out


def children_spines(parent_spines, k, v, salt):
    """Spines of all 2^k children of each parent, parent-major order."""
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] parents = np.ascontiguousarray(
        parent_spines, dtype=np.uint64)
    cdef int kk = k
    cdef Py_ssize_t npar = parents.shape[0]
    cdef Py_ssize_t fan = (<Py_ssize_t> 1) << kk
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] out = np.empty(npar * fan, dtype=np.uint64)
    cdef uint64_t vmask = ((<uint64_t> 1) << v) - 1 if v < 64 else <uint64_t> 0xFFFFFFFFFFFFFFFFUL
    cdef uint64_t salted, z
    cdef uint64_t s64 = <uint64_t> salt
    cdef Py_ssize_t p, m
    with nogil:
        for p in range(npar):
            salted = mix64(parents[p] ^ s64)
            for m in range(fan):
                z = mix64(salted ^ ((<uint64_t> m) * SEG_SPREAD))
                out[p * fan + m] = z & vmask
    return out


def expand_layer_awgn(parent_spines, parent_costs, k, v, c, salt, received):
    """Expand one tree layer against real-valued received symbols."""
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] parents = np.ascontiguousarray(
        parent_spines, dtype=np.uint64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pcosts = np.ascontiguousarray(
        parent_costs, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y = np.ascontiguousarray(
        received, dtype=np.float64)
    cdef int kk = k, vv = v, cc = c
    cdef Py_ssize_t npar = parents.shape[0]
    cdef Py_ssize_t fan = (<Py_ssize_t> 1) << kk
    cdef Py_ssize_t nsym = y.shape[0]
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] spines = np.empty(npar * fan, dtype=np.uint64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] costs = np.empty(npar * fan, dtype=np.float64)
    cdef uint64_t vmask = ((<uint64_t> 1) << vv) - 1 if vv < 64 else <uint64_t> 0xFFFFFFFFFFFFFFFFUL
    cdef uint64_t cmask = ((<uint64_t> 1) << cc) - 1
    cdef uint64_t s64 = <uint64_t> salt
    cdef uint64_t tagged = mix64(s64 ^ STREAM_TAG)
    cdef int spw = 64 // cc
    cdef uint64_t salted, sp, seed, word
    cdef double acc, d
    cdef Py_ssize_t p, m, j
    cdef int pos
    cdef uint64_t t
    with nogil:
        for p in range(npar):
            salted = mix64(parents[p] ^ s64)
            for m in range(fan):
                sp = mix64(salted ^ ((<uint64_t> m) * SEG_SPREAD)) & vmask
                spines[p * fan + m] = sp
                seed = mix64(sp ^ tagged)
                acc = pcosts[p]
                word = 0
                for j in range(nsym):
                    pos = <int> (j % spw)
                    if pos == 0:
                        t = j // spw
                        word = mix64(seed + (t + 1) * GOLDEN)
                    d = y[j] - <double> ((word >> (64 - cc * (pos + 1))) & cmask)
                    acc += d * d
                costs[p * fan + m] = acc
    return spines, costs


def expand_layer_bsc(parent_spines, parent_costs, k, v, c, salt, received):
    """Expand one tree layer against hard-decision received symbols."""
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] parents = np.ascontiguousarray(
        parent_spines, dtype=np.uint64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pcosts = np.ascontiguousarray(
        parent_costs, dtype=np.float64)
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] y = np.ascontiguousarray(
        received, dtype=np.uint64)
    cdef int kk = k, vv = v, cc = c
    cdef Py_ssize_t npar = parents.shape[0]
    cdef Py_ssize_t fan = (<Py_ssize_t> 1) << kk
    cdef Py_ssize_t nsym = y.shape[0]
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] spines = np.empty(npar * fan, dtype=np.uint64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] costs = np.empty(npar * fan, dtype=np.float64)
    cdef uint64_t vmask = ((<uint64_t> 1) << vv) - 1 if vv < 64 else <uint64_t> 0xFFFFFFFFFFFFFFFFUL
    cdef uint64_t cmask = ((<uint64_t> 1) << cc) - 1
    cdef uint64_t s64 = <uint64_t> salt
    cdef uint64_t tagged = mix64(s64 ^ STREAM_TAG)
    cdef int spw = 64 // cc
    cdef uint64_t salted, sp, seed, word
    cdef int64_t ham
    cdef Py_ssize_t p, m, j
    cdef int pos
    cdef uint64_t t
    with nogil:
        for p in range(npar):
            salted = mix64(parents[p] ^ s64)
            for m in range(fan):
                sp = mix64(salted ^ ((<uint64_t> m) * SEG_SPREAD)) & vmask
                spines[p * fan + m] = sp
                seed = mix64(sp ^ tagged)
                ham = 0
                word = 0
                for j in range(nsym):
                    pos = <int> (j % spw)
                    if pos == 0:
                        t = j // spw
                        word = mix64(seed + (t + 1) * GOLDEN)
                    ham += popcount64(
                        ((word >> (64 - cc * (pos + 1))) & cmask) ^ y[j])
                costs[p * fan + m] = pcosts[p] + <double> ham
    return spines, costs
