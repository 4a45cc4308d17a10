"""Monte-Carlo experiment engine behind the CLI: FER campaigns against
fixed plans, rateless rate campaigns, decode-cost campaigns, bound sweeps
and optimizer runs.

Trials are embarrassingly parallel; every trial derives a private generator
from (seed, channel index, trial index), so results are identical for any
worker count.  ACK is the genie kind: it fires exactly when the decode
equals the transmitted message.
"""

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bounds, schedule as sched
from .channel import AWGN, BSC
from .codec import compute_spines, generate_symbols, map_to_channel, random_message
from .decode import DecodingTree, ReceivedSet, bubble_decode, ledger_account, ml_decode
from .errors import ConfigError, Infeasible, TrialTimeout

DECODERS = ("ml", "bubble", "bdm")
Z95 = 1.959963984540054


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment campaign: code, channel sweep, scheme(s), decoder,
    trial count and the master seed."""

    params: object
    channels: tuple
    schemes: tuple = (sched.SCHEME_UNIFORM,)
    decoder: str = "bubble"
    trials: int = 100
    seed: int = 0
    passes: int = 8
    symbol_cap: int = sched.DEFAULT_SYMBOL_CAP
    chernoff_eps: float = 1e-3
    delta: float = 1e-5
    workers: int = 1
    # "raise": a trial past the cap aborts the run; "censor": it is counted
    # in `failures` and contributes no rate sample.  Tail-only emission
    # cannot repair an early-layer prune error, so beam decoding has a real
    # never-ACK probability under tail-heavy schemes; censoring keeps the
    # achieved-rate estimator (defined at ACK) meaningful.
    timeout_policy: str = "raise"

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.channels:
            raise ConfigError("channel sweep must be nonempty")
        if self.decoder not in DECODERS:
            raise ConfigError(f"unknown decoder {self.decoder!r}")
        if self.timeout_policy not in ("raise", "censor"):
            raise ConfigError(f"unknown timeout_policy {self.timeout_policy!r}")
        for s in self.schemes:
            if s not in sched.SCHEMES:
                raise ConfigError(f"unknown scheme {s!r}")


def _require_bsc_c1(spec):
    """Simulation over the BSC puts bits on the wire, so c must be 1.
    (Bound sweeps have no such restriction.)"""
    for ch in spec.channels:
        if ch.kind == BSC and spec.params.c != 1:
            raise ConfigError("BSC simulation needs c=1 (bits on the wire)")


@dataclass
class TrialRecord:
    """Aggregated outcome of one (channel point, scheme/decoder) cell."""

    channel: object
    scheme: str = None
    decoder: str = None
    trials: int = 0
    failures: int = 0
    rate_samples: list = field(default_factory=list)
    symbol_samples: list = field(default_factory=list)
    consumed_counts: list = field(default_factory=list)
    op_totals: list = field(default_factory=list)
    wall_samples: list = field(default_factory=list)
    # rate per trial index, None where the trial was censored at the cap;
    # keeps cross-scheme pairing available to analyses
    aligned_rates: list = field(default_factory=list)

    @property
    def fer(self):
        return self.failures / self.trials if self.trials else 0.0

    def wilson(self, z=Z95):
        return wilson_interval(self.failures, self.trials, z)

    @property
    def mean_rate(self):
        return float(np.mean(self.rate_samples)) if self.rate_samples else 0.0

    @property
    def mean_symbols(self):
        return float(np.mean(self.symbol_samples)) if self.symbol_samples else 0.0

    @property
    def mean_op_total(self):
        return float(np.mean(self.op_totals)) if self.op_totals else 0.0

    @property
    def mean_wall(self):
        return float(np.mean(self.wall_samples)) if self.wall_samples else 0.0


def wilson_interval(failures, trials, z=Z95):
    """95% score interval for a binomial proportion."""
    if trials == 0:
        return (0.0, 1.0)
    p = failures / trials
    denom = 1.0 + z * z / trials
    center = p + z * z / (2 * trials)
    rad = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials))
    return (max(0.0, (center - rad) / denom), min(1.0, (center + rad) / denom))


def _trial_rng(seed, channel_index, trial):
    return np.random.default_rng(
        np.random.SeedSequence([seed, channel_index, trial])
    )


class _NoiseTape(object):
    """Lazily extended per-trial noise sequence indexed by arrival position,
    so different schemes see identical randomness at equal positions."""

    _BLOCK = 256

    def __init__(self, rng, channel):
        self.rng = rng
        self.channel = channel
        self.values = np.empty(0)

    def get(self, idx):
        while idx >= len(self.values):
            if self.channel.kind == AWGN:
                block = self.rng.normal(
                    0.0, math.sqrt(self.channel.sigma2), size=self._BLOCK
                )
            else:
                block = (self.rng.random(self._BLOCK) < self.channel.f).astype(
                    np.int64
                )
            self.values = np.concatenate([self.values, block])
        return self.values[idx]


def _receive(symbol_value, noise, kind):
    if kind == AWGN:
        return float(symbol_value) + float(noise)
    return int(symbol_value) ^ int(noise)


def _fixed_plan_trial(spec, channel, channel_index, trial):
    """Encode the whole uniform plan, transmit it, decode once."""
    params = spec.params
    rng = _trial_rng(spec.seed, channel_index, trial)
    msg = random_message(params, rng)
    spines = compute_spines(msg, params).spines
    recv = ReceivedSet(params.n_segments, channel.kind)
    for i in range(1, params.n_segments + 1):
        syms = generate_symbols(spines[i - 1], spec.passes, params)
        if channel.kind == AWGN:
            ys = syms.astype(np.float64) + rng.normal(
                0.0, math.sqrt(channel.sigma2), size=len(syms)
            )
        else:
            ys = syms.astype(np.int64) ^ (
                rng.random(len(syms)) < channel.f
            ).astype(np.int64)
        for j, y in enumerate(ys, start=1):
            recv.add_symbol(i, j, y)
    if spec.decoder == "ml":
        out = ml_decode(recv, params)
    else:
        out = bubble_decode(recv, params)
    return out != msg


def _fer_chunk(spec, channel, channel_index, lo, hi):
    return sum(
        _fixed_plan_trial(spec, channel, channel_index, t) for t in range(lo, hi)
    )


def run_fer_experiment(spec):
    """Fixed-plan FER estimation per sweep point, with Wilson intervals."""
    if spec.decoder == "ml" and spec.params.n > 24:
        raise Infeasible("exhaustive decoding capped at n <= 24")
    _require_bsc_c1(spec)
    records = []
    for ci, ch in enumerate(spec.channels):
        rec = TrialRecord(channel=ch, decoder=spec.decoder, trials=spec.trials)
        if spec.workers > 1:
            bounds_ = np.linspace(0, spec.trials, spec.workers + 1, dtype=int)
            with ProcessPoolExecutor(max_workers=spec.workers) as pool:
                futs = [
                    pool.submit(_fer_chunk, spec, ch, ci, int(lo), int(hi))
                    for lo, hi in zip(bounds_[:-1], bounds_[1:])
                ]
                rec.failures = sum(f.result() for f in futs)
        else:
            rec.failures = _fer_chunk(spec, ch, ci, 0, spec.trials)
        records.append(rec)
    return records


class _RatelessSession(object):
    """One scheme's receiver state inside a rateless trial."""

    def __init__(self, scheme, spec, channel, msg):
        params = spec.params
        self.scheme = scheme
        self.params = params
        self.msg = msg
        self.emitter = sched.make_schedule(scheme, params, channel)
        self.recv = ReceivedSet(params.n_segments, channel.kind)
        self.spines = compute_spines(msg, params).spines
        self.cache = [[] for _ in range(params.n_segments)]
        self.tree = None
        self.sent = 0
        self.done_at = None
        self.wall = 0.0

    def _symbol_value(self, segment, pass_index):
        cache = self.cache[segment - 1]
        if pass_index > len(cache):
            fresh = generate_symbols(self.spines[segment - 1],
                                     pass_index, self.params)
            self.cache[segment - 1] = list(fresh)
            cache = self.cache[segment - 1]
        return int(cache[pass_index - 1])

    def step(self, tape, decoder):
        """Send one symbol; returns True when the genie ACK fires."""
        segment, pass_index = next(self.emitter)
        raw = self._symbol_value(segment, pass_index)
        if self.recv.kind == AWGN:
            y = _receive(map_to_channel(raw, self.params), tape.get(self.sent),
                         AWGN)
        else:
            y = _receive(raw, tape.get(self.sent), BSC)
        self.sent += 1
        nseg = self.params.n_segments
        attempt = (
            self.sent % nseg == 0
            if self.scheme == sched.SCHEME_PASS_BY_PASS
            else self.sent >= nseg
        )

        out = None
        if decoder == "bdm" and self.tree is not None:
            t0 = time.perf_counter()
            out = self.tree.ingest(segment, pass_index, y)
            self.wall += time.perf_counter() - t0
        else:
            self.recv.add_symbol(segment, pass_index, y)
            if self.sent < nseg:
                return False
            if decoder == "bdm":
                t0 = time.perf_counter()
                self.tree = DecodingTree(self.recv, self.params)
                out = self.tree.current_decode()
                self.wall += time.perf_counter() - t0
            elif attempt:
                t0 = time.perf_counter()
                out = bubble_decode(self.recv, self.params)
                self.wall += time.perf_counter() - t0

        if attempt and out == self.msg:
            self.done_at = self.sent
            return True
        return False


def _rate_trial(spec, channel, channel_index, trial, schemes, decoder):
    """Run every scheme on shared randomness; returns per-scheme results.

    A scheme that reaches the symbol cap yields None under the censor
    policy (an early-layer prune error is unrecoverable once emission goes
    tail-only, so waiting longer would not help).
    """
    params = spec.params
    rng = _trial_rng(spec.seed, channel_index, trial)
    msg = random_message(params, rng)
    tape = _NoiseTape(rng, channel)
    results = {}
    for scheme in schemes:
        session = _RatelessSession(scheme, spec, channel, msg)
        acked = False
        while session.sent < spec.symbol_cap:
            if session.step(tape, decoder):
                acked = True
                break
        if acked:
            results[scheme] = (
                session.done_at,
                tuple(session.recv.counts),
                session.wall,
            )
        elif spec.timeout_policy == "raise":
            raise TrialTimeout(
                f"{scheme}: no ACK within {spec.symbol_cap} symbols "
                f"(trial {trial}, {channel.describe()})"
            )
        else:
            results[scheme] = None
    return results


def _rate_chunk(spec, channel, channel_index, lo, hi, schemes, decoder):
    return [
        _rate_trial(spec, channel, channel_index, t, schemes, decoder)
        for t in range(lo, hi)
    ]


def run_rate_experiment(spec):
    """Rateless achieved-rate campaign: decode per schedule step, ACK on
    exact recovery; schemes share per-trial randomness so comparisons pair.

    Returns one record per (channel point, scheme); records also retain the
    consumed per-segment counts for plan analyses.
    """
    decoder = spec.decoder if spec.decoder in ("bubble", "bdm") else "bubble"
    _require_bsc_c1(spec)
    records = []
    for ci, ch in enumerate(spec.channels):
        cells = {
            s: TrialRecord(channel=ch, scheme=s, decoder=decoder,
                           trials=spec.trials)
            for s in spec.schemes
        }
        if spec.workers > 1:
            edges = np.linspace(0, spec.trials, spec.workers + 1, dtype=int)
            with ProcessPoolExecutor(max_workers=spec.workers) as pool:
                futs = [
                    pool.submit(_rate_chunk, spec, ch, ci, int(lo), int(hi),
                                spec.schemes, decoder)
                    for lo, hi in zip(edges[:-1], edges[1:])
                ]
                outcomes = [r for f in futs for r in f.result()]
        else:
            outcomes = _rate_chunk(spec, ch, ci, 0, spec.trials, spec.schemes,
                                   decoder)
        for per_scheme in outcomes:
            for scheme, outcome in per_scheme.items():
                rec = cells[scheme]
                if outcome is None:
                    rec.failures += 1
                    rec.aligned_rates.append(None)
                    continue
                done_at, counts, wall = outcome
                rate = spec.params.n / done_at
                rec.symbol_samples.append(done_at)
                rec.rate_samples.append(rate)
                rec.aligned_rates.append(rate)
                rec.consumed_counts.append(counts)
                rec.wall_samples.append(wall)
        records.extend(cells[s] for s in spec.schemes)
    return records


COST_MODES = ("rebuild", "memory")


def run_cost_experiment(spec):
    """Decode-cost campaign over scheme x tree-update-mode pairs.

    Reports unit-cost ledger totals for the consumed plans and measured
    wall-clock per trial, both raw and normalized to the
    (uniform_puncturing, rebuild) baseline.
    """
    _require_bsc_c1(spec)
    records = []
    for ci, ch in enumerate(spec.channels):
        cells = {}
        for mode in COST_MODES:
            decoder = "bdm" if mode == "memory" else "bubble"
            for scheme in spec.schemes:
                rec = TrialRecord(channel=ch, scheme=scheme, decoder=mode,
                                  trials=spec.trials)
                for t in range(spec.trials):
                    out = _rate_trial(spec, ch, ci, t, (scheme,), decoder)
                    if out[scheme] is None:
                        rec.failures += 1
                        continue
                    done_at, counts, wall = out[scheme]
                    rec.symbol_samples.append(done_at)
                    rec.op_totals.append(
                        ledger_account(counts, spec.params, mode).total
                    )
                    rec.wall_samples.append(wall)
                cells[(scheme, mode)] = rec
        records.extend(cells.values())
    return records


def run_bounds_sweep(spec, which):
    """(channel point, bound value) rows for one bound family."""
    rows = []
    for ch in spec.channels:
        cfg = bounds.BoundConfig(
            params=spec.params, channel=ch,
            counts=(spec.passes,) * spec.params.n_segments,
            passes=spec.passes, chernoff_eps=spec.chernoff_eps,
        )
        if which == "theorem1":
            val = bounds.fer_bound_awgn_original(cfg).upper
        elif which == "theorem2":
            val = bounds.fer_bound_bsc_original(cfg).upper
        elif which == "theorem3":
            val = bounds.fer_bound_awgn_new(cfg).upper
        elif which == "theorem4":
            val = bounds.fer_bound_bsc_new(cfg).upper
        else:
            raise ConfigError(f"unknown bound selector {which!r}")
        rows.append({"channel": ch, "bound": val})
    return rows


def run_optimizer(spec, r, delta):
    """Greedy plan search on the first sweep point; returns (plan, state)."""
    ch = spec.channels[0]
    return sched.solve_min_fer(
        spec.params, ch, r=r, delta=delta,
        chernoff_eps=spec.chernoff_eps, symbol_cap=spec.symbol_cap,
    )
