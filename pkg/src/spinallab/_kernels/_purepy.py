"""Pure numpy implementation of the hot kernels.

This is the fallback backend used when the compiled extension is not
available.  The compiled backend must stay bit-identical for every integer
quantity produced here; floating-point costs may differ in the last ulp
because summation order is not pinned across backends.

Pinned mixing construction (shared by encoder, decoders and all tests):

    mix64(z): z ^= z >> 30; z *= 0xBF58476D1CE4E5B9
              z ^= z >> 27; z *= 0x94D049BB133111EB
              z ^= z >> 31                      (all mod 2^64)

    chain step   s_i = mix64(mix64(s_{i-1} ^ salt) ^ (m_i * 0xD1B54A32D192ED03)) mod 2^v
    stream seed  q   = mix64(s_i ^ mix64(salt ^ 0xA0761D6478BD642F))
    stream word  w_t = mix64(q + (t+1) * 0x9E3779B97F4A7C15)   t = 0, 1, ...

Each 64-bit word is chopped into floor(64/c) c-bit symbols, most significant
chunk first; any remainder bits are discarded.
"""

import numpy as np

BACKEND_NAME = "python"

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX_M1 = 0xBF58476D1CE4E5B9
MIX_M2 = 0x94D049BB133111EB
SEG_SPREAD = 0xD1B54A32D192ED03
STREAM_TAG = 0xA0761D6478BD642F

_U = np.uint64


def mix64_int(z):
    """Scalar finalizer on python ints (exact, no numpy dtype traps)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX_M1) & MASK64
    z = ((z ^ (z >> 27)) * MIX_M2) & MASK64
    return z ^ (z >> 31)


def spine_step_int(prev, seg, salt, v):
    z = mix64_int(prev ^ salt)
    z = mix64_int(z ^ ((seg * SEG_SPREAD) & MASK64))
    return z & ((1 << v) - 1)


def stream_seed_int(spine, salt):
    return mix64_int(spine ^ mix64_int(salt ^ STREAM_TAG))


def stream_word_int(seed, t):
    return mix64_int((seed + (t + 1) * GOLDEN) & MASK64)


def _mix64(z):
    """Vectorized finalizer on uint64 arrays."""
    z = (z ^ (z >> _U(30))) * _U(MIX_M1)
    z = (z ^ (z >> _U(27))) * _U(MIX_M2)
    return z ^ (z >> _U(31))


def symbols_for_spine(spine, count, c, salt):
    """First `count` c-bit outputs of the stream seeded by `spine`.

    Returns a uint64 array of values in [0, 2^c).
    """
    seed = _U(stream_seed_int(int(spine), salt))
    spw = 64 // c
    nwords = (count + spw - 1) // spw
    t = np.arange(1, nwords + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        words = _mix64(seed + t * _U(GOLDEN))
    shifts = (_U(64) - _U(c) * np.arange(1, spw + 1, dtype=np.uint64))
    cmask = _U((1 << c) - 1)
    syms = (words[:, None] >> shifts[None, :]) & cmask
    return syms.reshape(-1)[:count]


def children_spines(parent_spines, k, v, salt):
    """Spines of all 2^k children of each parent, parent-major order."""
    nseg = 1 << k
    segs = np.arange(nseg, dtype=np.uint64)
    vmask = _U((1 << v) - 1)
    with np.errstate(over="ignore"):
        z = _mix64(np.repeat(parent_spines, nseg) ^ _U(salt))
        z = _mix64(z ^ np.tile(segs * _U(SEG_SPREAD), len(parent_spines)))
    return z & vmask


def _child_symbols(child_spines, nsym, c, salt):
    """(n_children, nsym) uint64 symbol matrix for a layer expansion."""
    spw = 64 // c
    nwords = (nsym + spw - 1) // spw
    tagged = _U(mix64_int(salt ^ STREAM_TAG))
    with np.errstate(over="ignore"):
        seeds = _mix64(child_spines ^ tagged)
        t = np.arange(1, nwords + 1, dtype=np.uint64)
        words = _mix64(seeds[:, None] + t[None, :] * _U(GOLDEN))
    shifts = _U(64) - _U(c) * np.arange(1, spw + 1, dtype=np.uint64)
    cmask = _U((1 << c) - 1)
    syms = (words[:, :, None] >> shifts[None, None, :]) & cmask
    return syms.reshape(len(child_spines), -1)[:, :nsym]


def expand_layer_awgn(parent_spines, parent_costs, k, v, c, salt, received):
    """Expand one tree layer against real-valued received symbols.

    Child order is parent-major, segment-value-minor, which keeps layers
    sorted by candidate-prefix value.  Cost = parent cost + sum of squared
    distances over this layer's received symbols.
    """
    spines = children_spines(parent_spines, k, v, salt)
    nsym = len(received)
    base = np.repeat(parent_costs, 1 << k)
    if nsym == 0:
        return spines, base
    syms = _child_symbols(spines, nsym, c, salt).astype(np.float64)
    diffs = syms - np.asarray(received, dtype=np.float64)[None, :]
    return spines, base + np.einsum("ij,ij->i", diffs, diffs)


_POPCOUNT16 = None


def _popcount16():
    global _POPCOUNT16
    if _POPCOUNT16 is None:
        table = np.arange(1 << 16, dtype=np.uint16)
        counts = np.zeros(1 << 16, dtype=np.uint8)
        while table.any():
            counts += (table & 1).astype(np.uint8)
            table >>= 1
        _POPCOUNT16 = counts
    return _POPCOUNT16


def expand_layer_bsc(parent_spines, parent_costs, k, v, c, salt, received):
    """Expand one tree layer against hard-decision received symbols.

    Cost = parent cost + Hamming distance summed over this layer's symbols.
    """
    spines = children_spines(parent_spines, k, v, salt)
    nsym = len(received)
    base = np.repeat(parent_costs, 1 << k)
    if nsym == 0:
        return spines, base
    syms = _child_symbols(spines, nsym, c, salt)
    xored = (syms ^ np.asarray(received, dtype=np.uint64)[None, :]).astype(np.uint32)
    ham = _popcount16()[xored & 0xFFFF]
    return spines, base + ham.sum(axis=1, dtype=np.int64).astype(np.float64)
