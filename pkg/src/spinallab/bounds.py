"""Finite-block-length FER upper bounds, log-domain throughout.

Four bound families are provided: the prior error-exponent and
union/tail-sum bounds stated for uniform passes (`fer_bound_awgn_original`,
`fer_bound_bsc_original`) and the per-segment bounds valid for arbitrary
symbol plans (`fer_bound_awgn_new`, `fer_bound_bsc_new`).  Everything is a
pure function of an immutable config, so evaluations parallelize freely.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln, logsumexp

from .channel import AWGN, BSC
from .errors import InvalidParams, NonConvergent

LN2 = math.log(2.0)

# Exact integer binomials below this block length, log-gamma above.
_EXACT_BINOM_LIMIT = 60

QUAD_EPSABS = 1e-9
QUAD_EPSREL = 1e-6


@dataclass(frozen=True)
class BoundConfig:
    """Inputs for one bound evaluation.

    Either `counts` (per-segment symbol counts, for the per-segment bounds)
    or `passes` (uniform pass count, for the prior bounds) must be given.
    chernoff_eps is the slack in the ball radius; delta is the target FER
    used by the plan optimizer.
    """

    params: object
    channel: object
    counts: tuple = None
    passes: int = None
    chernoff_eps: float = 1e-3
    delta: float = 1e-5

    def __post_init__(self):
        if self.chernoff_eps <= 0:
            raise InvalidParams("chernoff_eps must be > 0")
        if not 0 < self.delta < 1:
            raise InvalidParams("delta must be in (0, 1)")
        if self.counts is not None:
            object.__setattr__(self, "counts", tuple(int(l) for l in self.counts))
            if len(self.counts) != self.params.n_segments:
                raise InvalidParams("counts length != segment count")
            if any(l < 1 for l in self.counts):
                raise InvalidParams("all per-segment counts must be >= 1")
        if self.passes is not None and self.passes < 1:
            raise InvalidParams("passes must be >= 1")


@dataclass(frozen=True)
class BoundResult:
    """Per-segment error terms and the product-form FER upper bound."""

    epsilons: tuple
    upper: float


def _product_form(epsilons):
    """1 - prod(1 - eps_i) via summed log1p to dodge cancellation."""
    if any(e >= 1.0 for e in epsilons):
        return 1.0
    acc = sum(math.log1p(-e) for e in epsilons)
    return min(1.0, max(0.0, -math.expm1(acc)))


def _result(epsilons):
    eps = tuple(min(1.0, max(0.0, e)) for e in epsilons)
    return BoundResult(epsilons=eps, upper=_product_form(eps))


def gallager_e0(channel, params):
    """Error-exponent functional of the uniform grid input distribution
    over AWGN, by adaptive quadrature.

    Integrates (sum_x Q(x) exp(-(y-x)^2 / 4 sigma^2))^2 / sqrt(2 pi sigma^2)
    over y, on windows of +-8 sigma around the constellation (windows are
    merged when they overlap), then returns -log2 of the integral.
    """
    if channel.kind != AWGN:
        raise InvalidParams("error exponent implemented for AWGN only")
    sigma2 = channel.sigma2
    sigma = math.sqrt(sigma2)
    m = 1 << params.c
    grid = np.arange(m, dtype=np.float64)
    q = 1.0 / m

    def integrand(y):
        z = np.exp(-((y - grid) ** 2) / (4.0 * sigma2)).sum() * q
        return z * z / math.sqrt(2.0 * math.pi * sigma2)

    # Merge per-point windows [x - 8s, x + 8s] into disjoint intervals.
    windows = []
    lo, hi = grid[0] - 8 * sigma, grid[0] + 8 * sigma
    for x in grid[1:]:
        if x - 8 * sigma <= hi:
            hi = x + 8 * sigma
        else:
            windows.append((lo, hi))
            lo, hi = x - 8 * sigma, x + 8 * sigma
    windows.append((lo, hi))

    total = 0.0
    err = 0.0
    for lo, hi in windows:
        val, abserr = quad(integrand, lo, hi, epsabs=QUAD_EPSABS,
                           epsrel=QUAD_EPSREL, limit=400)
        total += val
        err += abserr
    if total <= 0.0 or not math.isfinite(total):
        raise NonConvergent("quadrature returned a non-positive integral")
    if err > max(QUAD_EPSABS * 10, abs(total) * QUAD_EPSREL * 10):
        raise NonConvergent(f"quadrature error {err:g} above tolerance")
    return -math.log2(total)


def fer_bound_awgn_original(cfg):
    """Prior AWGN bound for L uniform passes.

    eps_i = 2^{-T_i (E0 - log2(T_i) / U_i)} with T_i = L(n/k - i + 1) and
    U_i = 2^{k(n/k - i + 1)}, clamped to [0, 1].
    """
    if cfg.passes is None:
        raise InvalidParams("this bound is stated for a uniform pass count")
    params, L = cfg.params, cfg.passes
    nseg = params.n_segments
    e0 = gallager_e0(cfg.channel, params)
    eps = []
    for i in range(1, nseg + 1):
        rem = nseg - i + 1
        t_i = L * rem
        rate_term = math.log2(t_i) * 2.0 ** (-params.k * rem)
        exponent = -t_i * (e0 - rate_term)
        eps.append(1.0 if exponent >= 0 else 2.0 ** exponent)
    return _result(eps)


def _log2_pow2_minus_1(bits):
    """log2(2^bits - 1), safe for large bit counts."""
    if bits <= 0:
        return float("-inf")
    if bits <= 50:
        return math.log2((1 << bits) - 1)
    return bits + math.log2(1.0 - 2.0 ** (-bits))


def _bsc_segment_eps(n_sym, f, ones_bits, shift_bits):
    """Shared kernel for the BSC bounds.

    Evaluates sum_a pmf(a; n_sym, f) * min(1, mult * P(Binom(n_sym, 1/2) <= a))
    with mult = (2^ones_bits - 1) * 2^shift_bits.  The multiplier is kept as
    an exact integer so saturated segments return exactly 1.0 and optimizer
    tie comparisons stay exact.
    """
    mult = ((1 << ones_bits) - 1) << shift_bits
    if mult >= (1 << n_sym):
        # min(1, .) saturates already at a = 0, hence for every a.
        return 1.0
    log2_mult = _log2_pow2_minus_1(ones_bits) + shift_bits
    if f == 0.0:
        if mult.bit_length() < 970 and n_sym - mult.bit_length() < 970:
            return math.ldexp(float(mult), -n_sym)
        return 2.0 ** (log2_mult - n_sym)
    if n_sym <= _EXACT_BINOM_LIMIT:
        pmf_scale = [math.comb(n_sym, a) for a in range(n_sym + 1)]
        cdf_half = 0
        denom = 1 << n_sym
        total = 0.0
        for a in range(n_sym + 1):
            cdf_half += pmf_scale[a]
            pmf = pmf_scale[a] * f**a * (1.0 - f) ** (n_sym - a)
            num = mult * cdf_half
            r = 1.0 if num >= denom else num / denom
            total += pmf * r
        return min(1.0, total)
    a = np.arange(n_sym + 1)
    log_comb = gammaln(n_sym + 1) - gammaln(a + 1) - gammaln(n_sym + 1 - a)
    log_pmf = log_comb + a * math.log(f) + (n_sym - a) * math.log1p(-f)
    log_cdf_half = np.logaddexp.accumulate(log_comb - n_sym * LN2)
    log_r = log2_mult * LN2 + log_cdf_half
    terms = log_pmf + np.minimum(0.0, log_r)
    return min(1.0, float(math.exp(logsumexp(terms))))


def fer_bound_bsc_original(cfg):
    """Prior BSC bound for L uniform passes (union/tail-sum kernel with the
    full wrong-candidate count U_i - 1)."""
    if cfg.passes is None:
        raise InvalidParams("this bound is stated for a uniform pass count")
    if cfg.channel.kind != BSC:
        raise InvalidParams("BSC bound needs a BSC channel")
    params, L, f = cfg.params, cfg.passes, cfg.channel.f
    nseg = params.n_segments
    eps = []
    for i in range(1, nseg + 1):
        rem = nseg - i + 1
        t_i = L * rem
        eps.append(_bsc_segment_eps(t_i, f, params.k * rem, 0))
    return _result(eps)


def ball_cube_log_ratio(n_sym, sigma2, eps, c):
    """log2 of the N-ball / N-cube volume ratio driving the per-segment
    AWGN bound:

        log2 R = -log2 Gamma(1 + N/2) + (N/2) log2(pi (1+eps) sigma2 N / 2^{2c})
    """
    if n_sym < 1:
        raise InvalidParams("need n_sym >= 1")
    half = n_sym / 2.0
    log2_gamma = gammaln(1.0 + half) / LN2
    log2_arg = math.log2(math.pi * (1.0 + eps) * sigma2 * n_sym) - 2.0 * c
    return -log2_gamma + half * log2_arg


def _suffix_counts(counts):
    out = np.cumsum(np.asarray(counts, dtype=np.int64)[::-1])[::-1]
    return [int(x) for x in out]


def fer_bound_awgn_new(cfg):
    """Per-segment AWGN bound for an arbitrary symbol plan.

    eps_i = min{1, (2^k - 1) 2^{n-ik} min(1, R_i)} with N_i the number of
    symbols generated from chain states i..n/k.
    """
    if cfg.counts is None:
        raise InvalidParams("this bound needs per-segment counts")
    if cfg.channel.kind != AWGN:
        raise InvalidParams("AWGN bound needs an AWGN channel")
    params = cfg.params
    sigma2 = cfg.channel.sigma2
    nseg = params.n_segments
    suffix = _suffix_counts(cfg.counts)
    eps = []
    for i in range(1, nseg + 1):
        log2_r = ball_cube_log_ratio(suffix[i - 1], sigma2, cfg.chernoff_eps,
                                     params.c)
        log2_eps = (
            _log2_pow2_minus_1(params.k)
            + (params.n - i * params.k)
            + min(0.0, log2_r)
        )
        eps.append(1.0 if log2_eps >= 0 else 2.0 ** log2_eps)
    return _result(eps)


def fer_bound_bsc_new(cfg):
    """Per-segment BSC bound for an arbitrary symbol plan (binomial pmf
    against the half-rate binomial tail, all in log domain)."""
    if cfg.counts is None:
        raise InvalidParams("this bound needs per-segment counts")
    if cfg.channel.kind != BSC:
        raise InvalidParams("BSC bound needs a BSC channel")
    params, f = cfg.params, cfg.channel.f
    nseg = params.n_segments
    suffix = _suffix_counts(cfg.counts)
    eps = []
    for i in range(1, nseg + 1):
        eps.append(
            _bsc_segment_eps(suffix[i - 1], f, params.k, params.n - i * params.k)
        )
    return _result(eps)


def bound_for_plan(params, channel, counts, chernoff_eps=1e-3):
    """Per-segment bound matching the channel kind (used by the optimizer)."""
    cfg = BoundConfig(params=params, channel=channel, counts=tuple(counts),
                      chernoff_eps=chernoff_eps)
    if channel.kind == AWGN:
        return fer_bound_awgn_new(cfg)
    return fer_bound_bsc_new(cfg)
