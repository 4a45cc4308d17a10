"""Deterministic rateless encoding: segmentation, hash-chained state values,
seeded symbol streams and constellation mapping.

Bit order is MSB-first everywhere.  All types are immutable after
construction; encoding is pure, so everything here is safe to share across
threads.
"""

from dataclasses import dataclass

from . import _kernels as kern
from .errors import InvalidParams, LengthMismatch, OutOfRange, PlanMismatch

# Fractional hex digits of pi; an arbitrary fixed default for the shared salt.
DEFAULT_HASH_SALT = 0x243F6A8885A308D3


@dataclass(frozen=True)
class CodeParams:
    """Static description of one code.

    n: message length in bits, k: segment size in bits, c: bits per coded
    symbol, v: chain-state width in bits, hash_salt: 64-bit shared secret,
    B: beam width for beam-search decoding.
    """

    n: int
    k: int
    c: int = 8
    v: int = 32
    hash_salt: int = DEFAULT_HASH_SALT
    B: int = 16

    def __post_init__(self):
        if self.k < 1 or self.n < self.k:
            raise InvalidParams(f"need n >= k >= 1, got n={self.n}, k={self.k}")
        if self.n % self.k != 0:
            raise InvalidParams(f"n={self.n} not divisible by k={self.k}")
        if not 1 <= self.c <= 16:
            raise InvalidParams(f"c={self.c} outside [1, 16]")
        if not 16 <= self.v <= 64:
            raise InvalidParams(f"v={self.v} outside [16, 64]")
        if self.B < 1:
            raise InvalidParams(f"B={self.B} must be >= 1")
        if not 0 <= self.hash_salt <= kern.MASK64:
            raise InvalidParams("hash_salt must fit in 64 bits")

    @property
    def n_segments(self):
        return self.n // self.k


@dataclass(frozen=True)
class Message:
    """An n-bit message plus its k-bit segment values (MSB-first)."""

    bits: tuple
    segments: tuple

    def __eq__(self, other):
        if not isinstance(other, Message):
            return NotImplemented
        return self.segments == other.segments

    def __hash__(self):
        return hash(self.segments)


@dataclass(frozen=True)
class SpineChain:
    """Chain of v-bit state values, one per segment; spines[i] depends only
    on (spines[i-1], segment i), with the all-zero initial state."""

    spines: tuple


@dataclass(frozen=True)
class Symbol:
    """One coded symbol: c-bit raw value plus its mapped channel input."""

    segment: int
    pass_index: int
    raw: int
    mapped: float


def segment_message(bits, params):
    """Group an n-bit sequence into n/k segment values, first bit most
    significant within each segment."""
    bits = tuple(int(b) for b in bits)
    if len(bits) != params.n:
        raise LengthMismatch(f"expected {params.n} bits, got {len(bits)}")
    if any(b not in (0, 1) for b in bits):
        raise LengthMismatch("bits must be 0/1")
    k = params.k
    segments = []
    for i in range(params.n_segments):
        val = 0
        for b in bits[i * k : (i + 1) * k]:
            val = (val << 1) | b
        segments.append(val)
    return Message(bits=bits, segments=tuple(segments))


def message_from_segments(segments, params):
    """Inverse of segment_message (used by decoders)."""
    segments = tuple(int(s) for s in segments)
    if len(segments) != params.n_segments:
        raise LengthMismatch("wrong segment count")
    bits = []
    for s in segments:
        if not 0 <= s < (1 << params.k):
            raise OutOfRange(f"segment value {s} outside [0, 2^{params.k})")
        bits.extend((s >> (params.k - 1 - j)) & 1 for j in range(params.k))
    return Message(bits=tuple(bits), segments=segments)


def compute_spines(msg, params):
    """Iterate the keyed chain over the segments, starting from the all-zero
    state.  Deterministic given hash_salt."""
    state = 0
    spines = []
    for seg in msg.segments:
        state = kern.spine_step_int(state, seg, params.hash_salt, params.v)
        spines.append(state)
    return SpineChain(spines=tuple(spines))


def generate_symbols(spine, count, params):
    """First `count` c-bit outputs of the stream seeded by `spine`.

    Prefix-consistent: the first m outputs never change when count grows.
    """
    if count < 1:
        raise InvalidParams("count must be >= 1")
    return kern.symbols_for_spine(int(spine), int(count), params.c, params.hash_salt)


def map_to_channel(raw, params):
    """Map a c-bit value onto the uniform grid [0, 2^c - 1].

    No Gray mapping and no normalization; for c=1 the bit itself is the
    channel input.
    """
    raw = int(raw)
    if not 0 <= raw < (1 << params.c):
        raise OutOfRange(f"raw symbol {raw} outside [0, 2^{params.c})")
    return float(raw)


def encode_stream(msg, plan, params):
    """Emit the symbols a plan dictates, in its schedule order.

    The plan supplies per-segment counts l_i and an intra-pass order; pass j
    emits one symbol for every segment with l_i >= j, following the order
    vector.  Symbol (i, j) appears exactly when j <= l_i.
    """
    counts = list(plan.counts)
    if len(counts) != params.n_segments:
        raise PlanMismatch(
            f"plan has {len(counts)} segments, code has {params.n_segments}"
        )
    if any(c < 0 for c in counts):
        raise PlanMismatch("negative symbol count")
    order = list(plan.order)
    spines = compute_spines(msg, params).spines
    per_segment = {
        i: generate_symbols(spines[i - 1], counts[i - 1], params)
        if counts[i - 1] > 0
        else []
        for i in range(1, params.n_segments + 1)
    }
    out = []
    for j in range(1, max(counts, default=0) + 1):
        for idx in order:
            if counts[idx - 1] >= j:
                raw = int(per_segment[idx][j - 1])
                out.append(
                    Symbol(segment=idx, pass_index=j, raw=raw,
                           mapped=map_to_channel(raw, params))
                )
    return out


def random_message(params, rng):
    """Uniform random message drawn from an np.random.Generator."""
    bits = rng.integers(0, 2, size=params.n)
    return segment_message(bits.tolist(), params)
