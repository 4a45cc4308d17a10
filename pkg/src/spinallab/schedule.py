"""Transmission planning: the greedy per-symbol plan optimizer, the derived
intra-pass order, and the pass-by-pass / uniform-puncturing / incremental-tail
/ improved emission schedules.

Emission schedules are infinite generators of (segment, pass_index) pairs;
the harness stops them on ACK.  Every emission prefix satisfies the
per-segment prefix rule required by the decoder's received set.
"""

import math
from dataclasses import dataclass, field

from .channel import AWGN, capacity
from .errors import (
    BadPermutation,
    DegenerateChannel,
    EmptyPlan,
    InvalidParams,
    NoConvergence,
)
from .bounds import bound_for_plan

SCHEME_PASS_BY_PASS = "pass_by_pass"
SCHEME_UNIFORM = "uniform_puncturing"
SCHEME_INCREMENTAL_TAIL = "incremental_tail"
SCHEME_IMPROVED = "improved"
SCHEMES = (SCHEME_PASS_BY_PASS, SCHEME_UNIFORM, SCHEME_INCREMENTAL_TAIL,
           SCHEME_IMPROVED)

# Intra-pass order of the reference uniform-puncturing layout for 8 segments.
UNIFORM_ORDER_8 = (8, 4, 6, 2, 5, 1, 7, 3)

DEFAULT_SYMBOL_CAP = 10_000


@dataclass(frozen=True)
class TransmissionPlan:
    """Per-segment symbol counts plus the intra-pass emission order."""

    counts: tuple
    order: tuple
    scheme: str = SCHEME_UNIFORM

    def __post_init__(self):
        object.__setattr__(self, "counts", tuple(int(x) for x in self.counts))
        object.__setattr__(self, "order", tuple(int(x) for x in self.order))
        n = len(self.counts)
        if sorted(self.order) != list(range(1, n + 1)):
            raise BadPermutation(f"order {self.order} is not a permutation of 1..{n}")
        if any(c < 1 for c in self.counts):
            raise InvalidParams("finalized plans need every count >= 1")

    @property
    def total_symbols(self):
        return sum(self.counts)


@dataclass
class OptimizerState:
    """Trace of one greedy optimizer run: committed indices and the bound
    after each commit.  N grows by exactly one per iteration."""

    counts: list
    total: int
    bound: float
    iterations: list = field(default_factory=list)  # (chosen index, bound after)


def code_rate(plan, params):
    """Code rate n / sum(l_i) of a (possibly truncated) plan."""
    total = sum(plan.counts)
    if total < 1:
        raise EmptyPlan("plan has no symbols")
    return params.n / total


def default_order(n_segments):
    """Spread-out intra-pass order: the reference layout for 8 segments,
    bit-reversal for other powers of two, descending otherwise."""
    if n_segments == 8:
        return UNIFORM_ORDER_8
    if n_segments & (n_segments - 1) == 0 and n_segments > 1:
        bits = n_segments.bit_length() - 1
        rev = [int(format(i, f"0{bits}b")[::-1], 2) for i in range(n_segments)]
        return tuple(r + 1 for r in rev)
    return tuple(range(n_segments, 0, -1))


def _argmin_largest(values):
    """Index of the minimum; ties resolved to the LARGEST index.

    Incrementing the tail count weakly dominates every other increment for
    the per-segment bounds (it grows every N_i), so this tie-break keeps the
    committed index at the tail through bound-saturated phases instead of
    pointlessly growing early segments.
    """
    best = 0
    for i in range(1, len(values)):
        if values[i] <= values[best]:
            best = i
    return best


def solve_min_fer(params, channel, r, delta, chernoff_eps=1e-3,
                  symbol_cap=DEFAULT_SYMBOL_CAP):
    """Greedy per-symbol plan search: grow the plan one symbol at a time,
    always committing the increment whose matching per-segment bound is
    smallest, until the bound reaches delta.

    Returns (TransmissionPlan, OptimizerState).
    """
    if r < 1:
        raise InvalidParams("initial pass count r must be >= 1")
    if not 0 < delta <= 1:
        raise InvalidParams("delta must be in (0, 1]")
    nseg = params.n_segments
    counts = [r] * nseg
    state = OptimizerState(
        counts=counts, total=r * nseg,
        bound=bound_for_plan(params, channel, counts, chernoff_eps).upper,
    )
    while state.bound > delta:
        if state.total + 1 > symbol_cap:
            raise NoConvergence(
                f"bound {state.bound:g} still above {delta:g} at cap {symbol_cap}"
            )
        candidates = []
        for i in range(nseg):
            counts[i] += 1
            candidates.append(
                bound_for_plan(params, channel, counts, chernoff_eps).upper
            )
            counts[i] -= 1
        d = _argmin_largest(candidates)
        counts[d] += 1
        state.total += 1
        state.bound = candidates[d]
        state.iterations.append((d + 1, candidates[d]))
    plan = TransmissionPlan(
        counts=tuple(counts), order=tuple(range(nseg, 0, -1)),
        scheme=SCHEME_INCREMENTAL_TAIL,
    )
    return plan, state


def derive_order(params, channel, r=1, chernoff_eps=1e-3):
    """Intra-pass order from one whole-pass-priority optimizer pass.

    Runs the greedy search constrained to finish a complete pass (each
    segment incremented exactly once) and records the committed indices;
    that sequence is the order, descending for the bounds implemented here.
    """
    nseg = params.n_segments
    counts = [r] * nseg
    order = []
    remaining = set(range(nseg))
    while remaining:
        candidates = {}
        for i in sorted(remaining):
            counts[i] += 1
            candidates[i] = bound_for_plan(params, channel, counts,
                                           chernoff_eps).upper
            counts[i] -= 1
        d = max(
            (i for i in candidates
             if candidates[i] == min(candidates.values()))
        )
        counts[d] += 1
        remaining.discard(d)
        order.append(d + 1)
    return tuple(order)


def schedule_pass_by_pass(params):
    """Whole passes in ascending segment order, forever."""
    j = 1
    while True:
        for i in range(1, params.n_segments + 1):
            yield (i, j)
        j += 1


def schedule_uniform_puncturing(params, g=None):
    """Sub-pass emission: within each pass, one symbol per sub-pass in the
    order given by g."""
    nseg = params.n_segments
    g = default_order(nseg) if g is None else tuple(g)
    if sorted(g) != list(range(1, nseg + 1)):
        raise BadPermutation(f"g={g} is not a permutation of 1..{nseg}")
    j = 1
    while True:
        for idx in g:
            yield (idx, j)
        j += 1


def schedule_incremental_tail(params):
    """One complete pass, then tail symbols only."""
    nseg = params.n_segments
    for i in range(1, nseg + 1):
        yield (i, 1)
    j = 2
    while True:
        yield (nseg, j)
        j += 1


def switch_over_threshold(params, channel):
    """Symbol count at which the improved schedule stops sending whole
    passes: floor(n/C - n/k) for AWGN, floor(n/C) for the BSC."""
    cap = capacity(channel, params)
    if cap <= 0:
        raise DegenerateChannel("channel capacity is zero")
    if channel.kind == AWGN:
        return math.floor(params.n / cap - params.n_segments)
    return math.floor(params.n / cap)


def schedule_improved(params, channel):
    """Two-stage emission: whole passes in descending segment order while
    the cumulative symbol count stays within the switch-over threshold, then
    tail symbols only (switching permanently, possibly mid-pass).

    Pass indices are the per-segment next-unsent counters, so every prefix
    obeys the per-segment prefix rule.
    """
    nseg = params.n_segments
    t_r = switch_over_threshold(params, channel)
    g = tuple(range(nseg, 0, -1))
    sent = [0] * nseg
    total = 0
    for idx in g:  # the integral first pass is always sent
        sent[idx - 1] += 1
        total += 1
        yield (idx, sent[idx - 1])
    staged = total < t_r
    while staged:
        for idx in g:
            if total + 1 > t_r:
                staged = False
                break
            sent[idx - 1] += 1
            total += 1
            yield (idx, sent[idx - 1])
    while True:
        sent[nseg - 1] += 1
        total += 1
        yield (nseg, sent[nseg - 1])


def make_schedule(scheme, params, channel=None, g=None):
    if scheme == SCHEME_PASS_BY_PASS:
        return schedule_pass_by_pass(params)
    if scheme == SCHEME_UNIFORM:
        return schedule_uniform_puncturing(params, g)
    if scheme == SCHEME_INCREMENTAL_TAIL:
        return schedule_incremental_tail(params)
    if scheme == SCHEME_IMPROVED:
        if channel is None:
            raise InvalidParams("improved schedule needs a channel")
        return schedule_improved(params, channel)
    raise InvalidParams(f"unknown scheme {scheme!r}")


def counts_after(schedule_prefix, n_segments):
    """Per-segment counts of a truncated emission sequence."""
    counts = [0] * n_segments
    for i, _ in schedule_prefix:
        counts[i - 1] += 1
    return counts


def plan_to_text(plan, params, channel=None):
    """Serialize a plan: one header line (n, k, c, scheme, channel), then
    whitespace-separated counts, then the order vector."""
    chan = channel.describe() if channel is not None else "none"
    lines = [
        f"n={params.n} k={params.k} c={params.c} scheme={plan.scheme} channel={chan}",
        " ".join(str(x) for x in plan.counts),
        " ".join(str(x) for x in plan.order),
    ]
    return "\n".join(lines) + "\n"


def plan_from_text(text):
    """Parse plan_to_text output; returns (header dict, TransmissionPlan)."""
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if len(lines) != 3:
        raise InvalidParams("plan text must have header, counts, order lines")
    header = {}
    for tok in lines[0].split():
        key, _, val = tok.partition("=")
        header[key] = val
    counts = tuple(int(x) for x in lines[1].split())
    order = tuple(int(x) for x in lines[2].split())
    plan = TransmissionPlan(counts=counts, order=order,
                            scheme=header.get("scheme", SCHEME_UNIFORM))
    return header, plan
