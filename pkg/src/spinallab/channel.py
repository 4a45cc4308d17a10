"""Memoryless channel simulation (AWGN, BSC) and capacity values.

SNR convention for the uniform grid [0, 2^c - 1]: signal power is the grid
variance (2^{2c} - 1)/12, so SNR_linear = grid_variance(c) / sigma2.  The
mean of the grid carries no information and is excluded from the signal
power.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams, KindMismatch

AWGN = "awgn"
BSC = "bsc"


@dataclass(frozen=True)
class ChannelModel:
    """One memoryless channel point.

    kind: 'awgn' (sigma2 = noise variance) or 'bsc' (f = crossover
    probability).  rng_seed seeds the simulation noise streams; each trial
    derives a private stream from (rng_seed, stream index).
    """

    kind: str
    sigma2: float = None
    f: float = None
    rng_seed: int = 0

    def __post_init__(self):
        if self.kind == AWGN:
            if self.sigma2 is None or self.sigma2 <= 0:
                raise InvalidParams("AWGN needs sigma2 > 0")
        elif self.kind == BSC:
            if self.f is None or not 0 <= self.f <= 0.5:
                raise InvalidParams("BSC needs f in [0, 0.5]")
        else:
            raise InvalidParams(f"unknown channel kind {self.kind!r}")

    def stream(self, index=0):
        """Private noise stream for one Monte-Carlo trial."""
        return np.random.default_rng(np.random.SeedSequence([self.rng_seed, index]))

    def describe(self):
        if self.kind == AWGN:
            return f"awgn:sigma2={self.sigma2!r}"
        return f"bsc:f={self.f!r}"


def grid_variance(c):
    """Variance of the uniform constellation on [0, 2^c - 1]."""
    return ((1 << (2 * c)) - 1) / 12.0


def sigma2_from_snr_db(snr_db, c):
    return grid_variance(c) / (10.0 ** (snr_db / 10.0))


def snr_db_from_sigma2(sigma2, c):
    return 10.0 * math.log10(grid_variance(c) / sigma2)


def transmit(x, ch, rng=None):
    """Send one value (or an array) through the channel.

    AWGN adds Normal(0, sigma2) noise; the BSC flips each bit with
    probability f.  Draws come from `rng`; when omitted, a fresh stream
    seeded by the channel's rng_seed is used (fine for one-shot calls, pass
    an explicit stream for sequences).
    """
    if rng is None:
        rng = ch.stream(0)
    if ch.kind == AWGN:
        x = np.asarray(x, dtype=np.float64)
        noise = rng.normal(0.0, math.sqrt(ch.sigma2), size=x.shape)
        out = x + noise
        return float(out) if out.ndim == 0 else out
    x = np.asarray(x)
    if not np.isin(x, (0, 1)).all():
        raise KindMismatch("BSC input must be 0/1 bits")
    flips = rng.random(size=x.shape) < ch.f
    out = x.astype(np.int64) ^ flips.astype(np.int64)
    return int(out) if out.ndim == 0 else out


def binary_entropy(p):
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def capacity(ch, params):
    """Bits per symbol: 1 - H2(f) for the BSC; Shannon capacity clipped at c
    bits/symbol for AWGN, with SNR from the grid-variance convention."""
    if ch.kind == BSC:
        return 1.0 - binary_entropy(ch.f)
    snr = grid_variance(params.c) / ch.sigma2
    return min(float(params.c), 0.5 * math.log2(1.0 + snr))
