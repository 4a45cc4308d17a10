"""Decoders: exhaustive minimum-distance, beam search, and beam search with
memory (partial tree refresh on incremental symbol arrivals), plus the
per-layer operation accounting used for complexity comparisons.

A DecodingTree is single-owner mutable state; everything else here is pure.
Tie-breaking is deterministic everywhere: nodes with equal cost are kept in
ascending candidate-prefix order, and the reported decode is the lowest
prefix among minimum-cost leaves.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as kern
from .codec import generate_symbols, message_from_segments
from .errors import (
    Infeasible,
    InvalidParams,
    MissingSymbols,
    OutOfOrderSymbol,
)

ML_MAX_BITS = 24

# Nominal symbols regenerated per node per layer in the unit-cost model
# f(x) = x * (1 + NOMINAL_SYMBOLS_PER_LAYER) + x * log2(x).  Fixed (not
# plan-dependent) so layer costs form a single monotone vector.
NOMINAL_SYMBOLS_PER_LAYER = 1


class ReceivedSet:
    """Per-segment received symbols, aligned with pass indices.

    Appending symbol (i, j) requires (i, j-1) to be present already.
    """

    def __init__(self, n_segments, kind):
        self.n_segments = n_segments
        self.kind = kind
        self._per_segment = [[] for _ in range(n_segments)]

    @property
    def counts(self):
        return tuple(len(s) for s in self._per_segment)

    @property
    def total(self):
        return sum(len(s) for s in self._per_segment)

    def add_symbol(self, segment, pass_index, value):
        if not 1 <= segment <= self.n_segments:
            raise OutOfOrderSymbol(f"segment {segment} out of range")
        have = len(self._per_segment[segment - 1])
        if pass_index != have + 1:
            raise OutOfOrderSymbol(
                f"segment {segment} has {have} symbols; got pass index {pass_index}"
            )
        self._per_segment[segment - 1].append(value)

    def segment_values(self, segment):
        return self._per_segment[segment - 1]

    def segment_array(self, segment):
        vals = self._per_segment[segment - 1]
        if self.kind == "awgn":
            return np.asarray(vals, dtype=np.float64)
        return np.asarray(vals, dtype=np.uint64)

    def copy(self):
        out = ReceivedSet(self.n_segments, self.kind)
        out._per_segment = [list(s) for s in self._per_segment]
        return out


def received_from_symbols(symbols, values, params, kind):
    """Build a ReceivedSet from encoder symbols and their channel outputs."""
    recv = ReceivedSet(params.n_segments, kind)
    for sym, val in zip(symbols, values):
        recv.add_symbol(sym.segment, sym.pass_index, val)
    return recv


def _distance(kind, received, symbol):
    if kind == "awgn":
        d = float(received) - float(symbol)
        return d * d
    return bin(int(received) ^ int(symbol)).count("1")


def path_cost(prefix, recv, params):
    """Accumulated decoding cost of a candidate segment prefix.

    AWGN: sum of squared distances; BSC: Hamming distance.  Sums over every
    received symbol of the covered layers.
    """
    prefix = list(prefix)
    if len(prefix) > params.n_segments:
        raise InvalidParams("prefix longer than segment count")
    state = 0
    cost = 0.0
    for i, seg in enumerate(prefix, start=1):
        vals = recv.segment_values(i)
        if not vals:
            raise MissingSymbols(f"no symbols received for segment {i}")
        state = kern.spine_step_int(state, int(seg), params.hash_salt, params.v)
        syms = generate_symbols(state, len(vals), params)
        for y, x in zip(vals, syms):
            cost += _distance(recv.kind, y, x)
    return cost


@dataclass
class _Layer:
    parent: np.ndarray  # index into previous retained layer
    seg: np.ndarray     # segment value appended at this layer
    spines: np.ndarray
    costs: np.ndarray

    def __len__(self):
        return len(self.costs)


def _expand(prev_spines, prev_costs, recv, segment, params):
    y = recv.segment_array(segment)
    if recv.kind == "awgn":
        return kern.expand_layer_awgn(
            prev_spines, prev_costs, params.k, params.v, params.c,
            params.hash_salt, y,
        )
    return kern.expand_layer_bsc(
        prev_spines, prev_costs, params.k, params.v, params.c,
        params.hash_salt, y,
    )


def _build_layers(recv, params, width, start_layer=1, layers=None):
    """(Re)build tree layers start_layer..n/k on top of retained ones.

    Survivors at each layer are the `width` lowest-cost children under a
    stable sort, so retained nodes stay in ascending prefix order.
    """
    nseg = params.n_segments
    out = list(layers[: start_layer - 1]) if layers else []
    if start_layer == 1:
        prev_spines = np.zeros(1, dtype=np.uint64)
        prev_costs = np.zeros(1, dtype=np.float64)
    else:
        prev = out[start_layer - 2]
        prev_spines, prev_costs = prev.spines, prev.costs
    fanout = 1 << params.k
    for i in range(start_layer, nseg + 1):
        if not recv.segment_values(i):
            raise MissingSymbols(f"no symbols received for segment {i}")
        spines, costs = _expand(prev_spines, prev_costs, recv, i, params)
        parent = np.repeat(np.arange(len(prev_costs), dtype=np.int64), fanout)
        seg = np.tile(np.arange(fanout, dtype=np.uint32), len(prev_costs))
        if len(costs) > width:
            keep = np.sort(np.argsort(costs, kind="stable")[:width])
            parent, seg = parent[keep], seg[keep]
            spines, costs = spines[keep], costs[keep]
        out.append(_Layer(parent=parent, seg=seg, spines=spines, costs=costs))
        prev_spines, prev_costs = spines, costs
    return out


def _best_leaf(layers, params):
    best = int(np.argmin(layers[-1].costs))  # first minimum = lowest prefix
    segs = []
    idx = best
    for layer in reversed(layers):
        segs.append(int(layer.seg[idx]))
        idx = int(layer.parent[idx])
    segs.reverse()
    return message_from_segments(segs, params), float(layers[-1].costs[best])


def bubble_decode(recv, params, width=None):
    """Layer-by-layer beam search keeping the B lowest-cost nodes; returns
    the minimum-cost candidate at the last layer."""
    width = params.B if width is None else width
    layers = _build_layers(recv, params, width)
    return _best_leaf(layers, params)[0]


def ml_decode(recv, params):
    """Minimum-distance decoding over all 2^n candidates.

    Implemented as a full-width tree search (width 2^{n-k} never prunes a
    live prefix); guarded to n <= 24 bits.
    """
    if params.n > ML_MAX_BITS:
        raise Infeasible(f"exhaustive decoding capped at n <= {ML_MAX_BITS}")
    width = 1 << (params.n - params.k)
    layers = _build_layers(recv, params, max(width, 1))
    return _best_leaf(layers, params)[0]


class DecodingTree:
    """Pruned beam-search tree retained across incremental symbol arrivals.

    One decode session per tree; layers before the refreshed one are reused
    untouched, which is what makes tail-symbol updates cheap.
    """

    def __init__(self, recv, params, width=None):
        self.params = params
        self.recv = recv
        self.width = params.B if width is None else width
        self.layers = _build_layers(recv, params, self.width)
        self.consumed = list(recv.counts)
        self.last_refresh_start = 1

    def current_decode(self):
        return _best_leaf(self.layers, self.params)[0]

    def ingest(self, segment, pass_index, value):
        self.recv.add_symbol(segment, pass_index, value)
        self.layers = _build_layers(
            self.recv, self.params, self.width, start_layer=segment,
            layers=self.layers,
        )
        self.consumed = list(self.recv.counts)
        self.last_refresh_start = segment
        return self.current_decode()


def bdm_ingest(tree, new_symbol, recv, params):
    """Feed one arriving symbol into a retained tree.

    Layers before the symbol's segment are preserved as-is; later layers are
    re-expanded and re-pruned.  Returns (tree, decoded message); the decode
    equals a from-scratch beam search on the augmented received set.
    """
    if recv is not tree.recv:
        raise InvalidParams("tree was not built from this received set")
    if params is not tree.params and params != tree.params:
        raise InvalidParams("tree was not built with these params")
    segment, pass_index, value = new_symbol
    msg = tree.ingest(segment, pass_index, value)
    return tree, msg


def layer_widths(params, width=None):
    """Node count of each expanded layer: min(2^{ik}, B * 2^k)."""
    width = params.B if width is None else width
    full = width << params.k
    return [min(1 << (i * params.k), full) for i in range(1, params.n_segments + 1)]


def _unit_cost(x):
    return x * (1 + NOMINAL_SYMBOLS_PER_LAYER) + x * math.log2(x)


@dataclass(frozen=True)
class OpLedger:
    """Per-layer accounting: node counts, per-layer unit costs, suffix sums
    o_i (work to refresh the tree from layer i), and a plan total."""

    widths: tuple
    unit_costs: tuple
    suffix_costs: tuple
    total: float


def ledger_account(plan_consumed, params, mode):
    """Total decode work for a consumed plan.

    'rebuild' charges a full tree reconstruction per received symbol
    (sum l_i * o_1); 'memory' charges only the refresh from the symbol's
    layer (sum l_i * o_i).
    """
    counts = list(plan_consumed)
    if len(counts) != params.n_segments:
        raise InvalidParams("consumed counts do not match segment count")
    if mode not in ("rebuild", "memory"):
        raise InvalidParams(f"unknown mode {mode!r}")
    widths = layer_widths(params)
    f = [_unit_cost(x) for x in widths]
    o = list(np.cumsum(f[::-1])[::-1])
    if mode == "rebuild":
        total = float(sum(l * o[0] for l in counts))
    else:
        total = float(sum(l * oi for l, oi in zip(counts, o)))
    return OpLedger(
        widths=tuple(widths), unit_costs=tuple(f), suffix_costs=tuple(o),
        total=total,
    )
