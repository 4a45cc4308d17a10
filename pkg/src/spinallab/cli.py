"""Command-line experiment runner.

Subcommands: bound, optimize, fer, rate, cost.  Every CSV row carries a
12-hex-digit hash of the resolved configuration so figures stay traceable
to their configs.  Exit codes: 0 success, 2 configuration error,
3 experiment error.
"""

import argparse
import csv
import hashlib
import sys

import numpy as np

from . import experiments as ex
from . import schedule as sched
from .channel import AWGN, BSC, ChannelModel, sigma2_from_snr_db, snr_db_from_sigma2
from .codec import CodeParams
from .errors import ConfigError, SpinalError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_EXPERIMENT = 3


def parse_channel_spec(text, seed=0):
    """Parse 'awgn:sigma2=X[,X...]' / 'awgn:snr_db=...' / 'bsc:f=...' into a
    list of (ChannelModel, point descriptor) sweep points."""
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()
    key, _, vals = rest.partition("=")
    key = key.strip()
    if not vals:
        raise ConfigError(f"channel spec {text!r} needs kind:param=value[,value...]")
    try:
        values = [float(v) for v in vals.split(",") if v != ""]
    except ValueError as e:
        raise ConfigError(f"bad channel value in {text!r}: {e}") from None
    if not values:
        raise ConfigError(f"channel spec {text!r} has no values")
    points = []
    if kind == AWGN:
        if key not in ("sigma2", "snr_db"):
            raise ConfigError("awgn takes sigma2=... or snr_db=...")
        points.append((kind, key, values))
    elif kind == BSC:
        if key != "f":
            raise ConfigError("bsc takes f=...")
        points.append((kind, key, values))
    else:
        raise ConfigError(f"unknown channel kind {kind!r}")
    return points


def build_channels(args):
    points = parse_channel_spec(args.channel)
    channels = []
    for kind, key, values in points:
        for val in values:
            if kind == AWGN:
                sigma2 = sigma2_from_snr_db(val, args.c) if key == "snr_db" else val
                channels.append(ChannelModel(AWGN, sigma2=sigma2, rng_seed=args.seed))
            else:
                channels.append(ChannelModel(BSC, f=val, rng_seed=args.seed))
    return channels


def channel_columns(ch, c_bits):
    if ch.kind == AWGN:
        return {
            "channel": AWGN,
            "snr_db": f"{snr_db_from_sigma2(ch.sigma2, c_bits):.6g}",
            "sigma2": repr(ch.sigma2),
            "f": "",
        }
    return {"channel": BSC, "snr_db": "", "sigma2": "", "f": repr(ch.f)}


def spec_hash(args, fields):
    blob = ";".join(f"{k}={getattr(args, k, None)!r}" for k in sorted(fields))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:12]


_HASH_FIELDS = (
    "command", "n", "k", "c", "v", "B", "channel", "scheme", "decoder",
    "trials", "seed", "eps", "delta", "passes", "which", "r", "symbol_cap",
)


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def add_common(parser):
    parser.add_argument("--config", help="key=value file; flags override it")
    parser.add_argument("--n", type=int, default=8)
    parser.add_argument("--k", type=int, default=2)
    parser.add_argument("--c", type=int, default=8)
    parser.add_argument("--v", type=int, default=32)
    parser.add_argument("--B", type=int, default=16)
    parser.add_argument("--channel", default="awgn:snr_db=8",
                        help="awgn:sigma2=...|awgn:snr_db=...|bsc:f=... "
                             "(comma-separated values sweep)")
    parser.add_argument("--trials", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--eps", type=float, default=1e-3,
                        help="slack of the ball-radius term in the AWGN bound")
    parser.add_argument("--delta", type=float, default=1e-5,
                        help="target FER for the optimizer")
    parser.add_argument("--passes", type=int, default=8,
                        help="uniform pass count for fixed-plan runs")
    parser.add_argument("--symbol-cap", type=int, default=sched.DEFAULT_SYMBOL_CAP)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", required=True, help="output CSV path")


def build_parser():
    p = argparse.ArgumentParser(
        prog="spinallab",
        description="Monte-Carlo experiments for rateless hash-chain codes",
    )
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bound", help="evaluate one FER bound over a channel sweep")
    add_common(b)
    b.add_argument("--which", required=True,
                   choices=("theorem1", "theorem2", "theorem3", "theorem4"),
                   help="theorem1/2: prior uniform-pass bounds (AWGN/BSC); "
                        "theorem3/4: per-segment plan bounds (AWGN/BSC)")

    o = sub.add_parser("optimize", help="greedy plan search; writes plan + iteration CSV")
    add_common(o)
    o.add_argument("--r", type=int, default=3, help="initial passes")
    o.add_argument("--plan-out", help="plan file path (default: <out>.plan.txt)")

    f = sub.add_parser("fer", help="fixed-plan frame error rate campaign")
    add_common(f)
    f.add_argument("--decoder", default="ml", choices=("ml", "bubble"))

    r = sub.add_parser("rate", help="rateless achieved-rate campaign")
    add_common(r)
    r.add_argument("--scheme", default=sched.SCHEME_UNIFORM,
                   help="comma list of: " + ",".join(sched.SCHEMES))
    r.add_argument("--decoder", default="bdm", choices=("bubble", "bdm"))
    r.add_argument("--timeout-policy", default="raise",
                   choices=("raise", "censor"),
                   help="what to do with trials that hit the symbol cap")

    c = sub.add_parser("cost", help="decode-cost campaign over scheme x update-mode pairs")
    add_common(c)
    c.add_argument("--scheme",
                   default=f"{sched.SCHEME_UNIFORM},{sched.SCHEME_IMPROVED}")
    c.add_argument("--decoder", default="bdm", choices=("bubble", "bdm"),
                   help="ignored; both update modes always run")
    c.add_argument("--timeout-policy", default="raise",
                   choices=("raise", "censor"))
    return p


def apply_config_file(argv, parser):
    """Pre-parse --config and inject file values as defaults."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    try:
        path = argv[idx + 1]
    except IndexError:
        raise ConfigError("--config needs a path") from None
    overrides = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise ConfigError(f"bad config line: {line!r}")
            overrides.extend([f"--{key.strip().replace('_', '-')}", val.strip()])
    # file values go first so explicit flags win
    return [argv[0]] + overrides + argv[1:]


def make_spec(args, schemes=None, decoder=None):
    params = CodeParams(n=args.n, k=args.k, c=args.c, v=args.v, B=args.B)
    channels = tuple(build_channels(args))
    return ex.ExperimentSpec(
        params=params,
        channels=channels,
        schemes=tuple(schemes) if schemes else (sched.SCHEME_UNIFORM,),
        decoder=decoder or "bubble",
        trials=args.trials,
        seed=args.seed,
        passes=args.passes,
        symbol_cap=args.symbol_cap,
        chernoff_eps=args.eps,
        delta=args.delta,
        workers=args.workers,
        timeout_policy=getattr(args, "timeout_policy", "raise"),
    )


def cmd_bound(args):
    spec = make_spec(args)
    h = spec_hash(args, _HASH_FIELDS)
    rows = []
    for row in ex.run_bounds_sweep(spec, args.which):
        cols = channel_columns(row["channel"], args.c)
        rows.append([h, args.which, cols["channel"], cols["snr_db"],
                     cols["sigma2"], cols["f"], repr(row["bound"])])
    write_csv(args.out, ["spec_hash", "which", "channel", "snr_db", "sigma2",
                         "f", "bound"], rows)


def cmd_optimize(args):
    spec = make_spec(args)
    h = spec_hash(args, _HASH_FIELDS)
    plan, state = ex.run_optimizer(spec, r=args.r, delta=args.delta)
    rows = []
    total = args.r * spec.params.n_segments
    for it, (chosen, bound_after) in enumerate(state.iterations, start=1):
        total += 1
        rows.append([h, it, chosen, total, repr(bound_after)])
    write_csv(args.out, ["spec_hash", "iteration", "chosen_index",
                         "total_symbols", "bound"], rows)
    plan_path = args.plan_out or (args.out + ".plan.txt")
    with open(plan_path, "w", encoding="utf-8") as fh:
        fh.write(sched.plan_to_text(plan, spec.params, spec.channels[0]))
    print(f"plan: L={list(plan.counts)} bound={state.bound:g} -> {plan_path}")


def cmd_fer(args):
    spec = make_spec(args, decoder=args.decoder)
    h = spec_hash(args, _HASH_FIELDS)
    rows = []
    for rec in ex.run_fer_experiment(spec):
        cols = channel_columns(rec.channel, args.c)
        lo, hi = rec.wilson()
        rows.append([h, cols["channel"], cols["snr_db"], cols["sigma2"],
                     cols["f"], args.decoder, args.passes, rec.trials,
                     rec.failures, repr(rec.fer), repr(lo), repr(hi)])
    write_csv(args.out, ["spec_hash", "channel", "snr_db", "sigma2", "f",
                         "decoder", "passes", "trials", "failures", "fer",
                         "wilson_low", "wilson_high"], rows)


def _parse_schemes(text):
    schemes = tuple(s.strip() for s in text.split(",") if s.strip())
    for s in schemes:
        if s not in sched.SCHEMES:
            raise ConfigError(f"unknown scheme {s!r}")
    return schemes


def cmd_rate(args):
    schemes = _parse_schemes(args.scheme)
    spec = make_spec(args, schemes=schemes, decoder=args.decoder)
    h = spec_hash(args, _HASH_FIELDS)
    rows = []
    for rec in ex.run_rate_experiment(spec):
        cols = channel_columns(rec.channel, args.c)
        samples = np.asarray(rec.rate_samples)
        std = float(samples.std(ddof=1)) if len(samples) > 1 else 0.0
        ci = ex.Z95 * std / (len(samples) ** 0.5) if len(samples) > 1 else 0.0
        rows.append([h, cols["channel"], cols["snr_db"], cols["sigma2"],
                     cols["f"], rec.scheme, rec.decoder, rec.trials,
                     rec.failures, repr(rec.mean_rate), repr(std), repr(ci),
                     repr(rec.mean_symbols)])
    write_csv(args.out, ["spec_hash", "channel", "snr_db", "sigma2", "f",
                         "scheme", "decoder", "trials", "censored",
                         "mean_rate", "std_rate", "ci95_half",
                         "mean_symbols"], rows)


def cmd_cost(args):
    schemes = _parse_schemes(args.scheme)
    spec = make_spec(args, schemes=schemes, decoder="bdm")
    h = spec_hash(args, _HASH_FIELDS)
    recs = ex.run_cost_experiment(spec)
    base = {}
    for rec in recs:
        if rec.scheme == sched.SCHEME_UNIFORM and rec.decoder == "rebuild":
            base[rec.channel] = (rec.mean_op_total, rec.mean_wall)
    rows = []
    for rec in recs:
        cols = channel_columns(rec.channel, args.c)
        op_base, wall_base = base.get(rec.channel, (0.0, 0.0))
        rows.append([
            h, cols["channel"], cols["snr_db"], cols["sigma2"], cols["f"],
            rec.scheme, rec.decoder, rec.trials,
            repr(rec.mean_op_total),
            repr(rec.mean_op_total / op_base) if op_base else "",
            repr(rec.mean_wall),
            repr(rec.mean_wall / wall_base) if wall_base else "",
        ])
    write_csv(args.out, ["spec_hash", "channel", "snr_db", "sigma2", "f",
                         "scheme", "update_mode", "trials", "mean_op_total",
                         "op_total_vs_baseline", "mean_wall_s",
                         "wall_vs_baseline"], rows)


_COMMANDS = {
    "bound": cmd_bound,
    "optimize": cmd_optimize,
    "fer": cmd_fer,
    "rate": cmd_rate,
    "cost": cmd_cost,
}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = apply_config_file(argv, parser)
    except (ConfigError, OSError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code not in (0, None) else EXIT_OK
    try:
        _COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except SpinalError as e:
        print(f"experiment error: {e}", file=sys.stderr)
        return EXIT_EXPERIMENT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
