#!/usr/bin/env python3
"""Benchmark: compiled kernels vs the numpy fallback.

Times the primitives that dominate Monte-Carlo runtime (layer expansion and
symbol generation) plus an end-to-end beam decode, on both backends, and
prints a speedup table.

Run:  python benchmarks/bench_kernel.py [--repeat 50]
"""

import argparse
import time

import numpy as np

from spinallab._kernels import get_backend


def until(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_primitives(backend, repeat):
    rng = np.random.default_rng(0)
    res = {}

    spines = rng.integers(0, 2**32, size=4096, dtype=np.uint64)
    costs = rng.random(4096)
    y = rng.normal(128, 25, size=8)
    res["expand_awgn (4096 parents, k=4, 8 syms)"] = until(
        lambda: backend.expand_layer_awgn(spines, costs, 4, 32, 8, 0x5EED, y),
        repeat,
    )

    yb = rng.integers(0, 2, size=12).astype(np.uint64)
    res["expand_bsc (4096 parents, k=4, 12 syms)"] = until(
        lambda: backend.expand_layer_bsc(spines, costs, 4, 32, 1, 0x5EED, yb),
        repeat,
    )

    res["symbols_for_spine (100k, c=8)"] = until(
        lambda: backend.symbols_for_spine(0xABCDEF, 100_000, 8, 0x5EED),
        repeat,
    )
    return res


def bench_decode(backend_name, repeat):
    import os
    import subprocess
    import sys

    # run in a fresh interpreter so the import-time backend choice applies
    code = (
        "import time, numpy as np\n"
        "from spinallab.codec import CodeParams, encode_stream, random_message\n"
        "from spinallab.decode import bubble_decode, received_from_symbols\n"
        "from spinallab.schedule import TransmissionPlan\n"
        "p = CodeParams(n=32, k=4, c=8, B=16)\n"
        "rng = np.random.default_rng(1)\n"
        "plan = TransmissionPlan(counts=(6,)*8, order=tuple(range(1,9)))\n"
        "cases = []\n"
        "for _ in range(20):\n"
        "    msg = random_message(p, rng)\n"
        "    syms = encode_stream(msg, plan, p)\n"
        "    ys = [s.mapped + rng.normal(0, 30) for s in syms]\n"
        "    cases.append(received_from_symbols(syms, ys, p, 'awgn'))\n"
        f"best = float('inf')\n"
        f"for _ in range({repeat}):\n"
        "    t0 = time.perf_counter()\n"
        "    for recv in cases:\n"
        "        bubble_decode(recv, p)\n"
        "    best = min(best, time.perf_counter() - t0)\n"
        "print(best / 20)\n"
    )
    env = dict(os.environ, SPINALLAB_BACKEND=backend_name)
    proc = subprocess.run([sys.executable, "-c", code], env=env,
                          capture_output=True, text=True, check=True)
    return float(proc.stdout.strip())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=30)
    args = ap.parse_args()

    backends = {"python": get_backend("python")}
    try:
        backends["compiled"] = get_backend("compiled")
    except ImportError:
        print("compiled extension not available; showing fallback only")

    rows = {}
    for name, mod in backends.items():
        for label, secs in bench_primitives(mod, args.repeat).items():
            rows.setdefault(label, {})[name] = secs
    for name in backends:
        rows.setdefault("bubble_decode (n=32, k=4, B=16, 6 passes)", {})[name] = \
            bench_decode(name, max(3, args.repeat // 10))

    width = max(len(k) for k in rows)
    print(f"{'kernel':<{width}}  {'python':>10}  {'compiled':>10}  {'speedup':>8}")
    for label, cols in rows.items():
        py = cols.get("python")
        cy = cols.get("compiled")
        speed = f"{py / cy:7.2f}x" if py and cy else "      --"
        cy_s = f"{cy*1e3:9.3f}ms" if cy else "        --"
        print(f"{label:<{width}}  {py*1e3:9.3f}ms  {cy_s}  {speed}")


if __name__ == "__main__":
    main()
