"""Kernel backend selection.

The compiled extension (`spinallab._kernels._speedups`, built from Cython) is
preferred; the numpy fallback in `_purepy` is used when the extension is
missing or when SPINALLAB_BACKEND=python is set.  Both backends expose the
same functions and produce bit-identical integer outputs (spines, symbols);
see benchmarks/bench_kernel.py for a throughput comparison.
"""

import os

from . import _purepy

# Scalar reference primitives are always the exact python-int versions.
mix64_int = _purepy.mix64_int
spine_step_int = _purepy.spine_step_int
stream_seed_int = _purepy.stream_seed_int
stream_word_int = _purepy.stream_word_int

MASK64 = _purepy.MASK64
GOLDEN = _purepy.GOLDEN
SEG_SPREAD = _purepy.SEG_SPREAD
STREAM_TAG = _purepy.STREAM_TAG

_forced = os.environ.get("SPINALLAB_BACKEND", "").strip().lower()

if _forced in ("", "compiled", "cython", "c"):
    try:
        from . import _speedups as _impl

        BACKEND = "compiled"
    except ImportError:
        if _forced:
            raise
        _impl = _purepy
        BACKEND = "python"
elif _forced in ("python", "py", "numpy"):
    _impl = _purepy
    BACKEND = "python"
else:
    raise ImportError(f"unknown SPINALLAB_BACKEND value: {_forced!r}")

symbols_for_spine = _impl.symbols_for_spine
children_spines = _impl.children_spines
expand_layer_awgn = _impl.expand_layer_awgn
expand_layer_bsc = _impl.expand_layer_bsc


def get_backend(name):
    """Return a specific backend module ('compiled' or 'python'), for benchmarks."""
    if name == "python":
        return _purepy
    from . import _speedups

    return _speedups
