"""Noise-robust moment-level jump test of Lee & Mykland (2012).

The observed log price is modeled as the efficient price plus i.i.d.
microstructure noise with standard deviation ``q``.  The test subsamples
every ``k``-th tick (``k`` picked from the return autocorrelation
structure), averages blocks of ``M`` subsamples into pre-averaged prices
``P_hat``, and studies the block-to-block increments

    ``P_bar(j) = P_hat(j+1) - P_hat(j)``,
    ``chi(j)  = sqrt(M) * P_bar(j) / sqrt(V_n)``,

where ``V_n`` is the limiting variance ``(2/3) sigma^2 C^2 T + 2 q^2``
of ``sqrt(M) P_bar``.  Standardized extremes

    ``xi(j) = (|chi(j)| - A_n) / B_n``

follow a standard Gumbel law under the no-jump null, so a block is
flagged when ``xi`` exceeds the Gumbel quantile at the chosen level
(optionally Bonferroni-divided across the day's blocks).

References:
    Lee & Mykland (2012), "Jumps in equilibrium prices and market
    microstructure noise".
    Jacod, Li, Mykland, Podolskij & Vetter (2009) for the pre-averaging
    background.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import asin, log, pi, sqrt

import numpy as np

from .errors import DayRejected

logger = logging.getLogger(__name__)

K_MIN = 3
K_MAX = 51


def gumbel_quantile(p: float) -> float:
    """Quantile of the standard Gumbel law, G^{-1}(p) = -ln(-ln p)."""
    if not 0 < p < 1:
        raise ValueError("p must be in (0, 1)")
    return -log(-log(p))


@dataclass
class LmParams:
    """Test tuning: subsampling lag k, block length M, block constant C, level alpha.

    ``M = round(C * floor(n/k)^(1/2))``, floored at 1.  With the default
    C = 0.05 a full one-second day (n = 86,400) and k in [3, 51] puts M
    in the 2..9 range.
    """

    k: int
    M: int
    C: float = 0.05
    alpha: float = 0.999
    bonferroni: bool = True
    family_multiplier: int = 1   # >1 spreads the correction over a multi-day family

    def __post_init__(self):
        if not K_MIN <= self.k <= K_MAX:
            raise ValueError(f"k={self.k} outside [{K_MIN}, {K_MAX}]")
        if self.M < 1:
            raise ValueError("M must be >= 1")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must be in (0, 1)")
        if self.family_multiplier < 1:
            raise ValueError("family_multiplier must be >= 1")

    @classmethod
    def for_series(cls, n: int, k: int, C: float = 0.05, alpha: float = 0.999,
                   bonferroni: bool = True, family_multiplier: int = 1) -> "LmParams":
        M = max(1, round(C * sqrt(n // k)))
        return cls(k=k, M=M, C=C, alpha=alpha, bonferroni=bonferroni,
                   family_multiplier=family_multiplier)


@dataclass
class NoiseEstimate:
    """Noise variance, jump-robust volatility, and the plug-in variance term."""

    q_hat_sq: float
    sigma_hat_sq: float
    v_n: float


@dataclass
class LmMomentResult:
    block_index: int
    block_start_ns: int | None
    pbar: float
    chi: float
    xi: float
    is_jump: bool

    @property
    def jump_size(self) -> float:
        return self.pbar if self.is_jump else 0.0


@dataclass
class LmDayResult:
    params: LmParams
    noise: NoiseEstimate
    n_blocks: int            # floor(n / (k M)), the family size in A_n/B_n
    a_n: float
    b_n: float
    threshold: float         # Gumbel quantile applied to each xi
    moments: list[LmMomentResult] = field(default_factory=list)

    @property
    def flagged(self) -> list[LmMomentResult]:
        return [m for m in self.moments if m.is_jump]


def select_k(log_prices: np.ndarray, k_min: int = K_MIN, k_max: int = K_MAX) -> int:
    """Subsampling lag from the return autocorrelation structure.

    k - 1 is the smallest lag at which the sample autocorrelation of the
    tick log returns falls inside the +-1.96/sqrt(n) band; the result is
    clamped to [k_min, k_max].  Dependent noise pushes k up, i.i.d.
    returns give the floor.
    """
    p = np.asarray(log_prices, dtype=float)
    if len(p) < 1000:
        raise DayRejected("lm_short", f"{len(p)} ticks < 1000")
    r = np.diff(p)
    r = r - r.mean()
    denom = float(np.dot(r, r))
    if denom == 0:
        return k_min
    n = len(r)
    band = 1.96 / sqrt(n)
    first_inside = None
    for lag in range(1, k_max + 2):
        rho = float(np.dot(r[:-lag], r[lag:])) / denom
        if abs(rho) <= band:
            first_inside = lag
            break
    if first_inside is None:
        return k_max
    return min(max(first_inside + 1, k_min), k_max)


def estimate_noise(log_prices: np.ndarray, k: int, C: float = 0.05,
                   T: float = 1.0) -> NoiseEstimate:
    """Estimate q^2, sigma^2 and the variance term V_n.

    q^2 is the k-lag difference estimator

        ``q_hat^2 = (1 / (2(n-k))) sum_m (P(m) - P(m+k))^2``

    whose expectation is ``q^2 + sigma^2 k T / (2n)``.  sigma^2 comes
    from bipower variation at a wider stride ``k_sigma`` (default 10k,
    capped so at least ~200 subsamples remain), corrected for two noise
    effects: the moment inflation caused by the MA(1) correlation of
    noisy adjacent returns (factor ``sqrt(1-rho^2) + rho*asin(rho)`` with
    ``rho = -q^2/Var(r)``), and the additive noise level.  Subtracting
    ``2 q_hat^2`` at the wider stride cancels the diffusion bias of
    q_hat^2 analytically:

        ``sigma_hat^2 = (BV_corr - 2 q_hat^2) * n / (k_sigma - k)``.

    A non-positive estimate is floored at zero (can happen when a large
    jump inflates q_hat^2; V_n is then conservative).
    """
    p = np.asarray(log_prices, dtype=float)
    n = len(p)
    if n <= k + 1:
        raise ValueError(f"need more than k+1={k + 1} observations, got {n}")
    d = p[: n - k] - p[k:]
    q2 = float(np.dot(d, d)) / (2 * (n - k))

    k_sigma = max(2 * k, min(10 * k, n // 200))
    sub = p[::k_sigma]
    r = np.diff(sub)
    sigma2 = 0.0
    if len(r) >= 3:
        v = float(np.mean(r * r))
        if v > 0:
            rho = min(0.0, max(-0.9999, -q2 / v))
            mu = sqrt(1.0 - rho * rho) + rho * asin(rho)
            n_pairs = len(r) - 1
            bv = (pi / 2) / mu * float(np.dot(np.abs(r[:-1]), np.abs(r[1:]))) / n_pairs
            sigma2 = max(0.0, (bv - 2.0 * q2) * n / (k_sigma - k))
    v_n = (2.0 / 3.0) * sigma2 * C * C * T + 2.0 * q2
    return NoiseEstimate(q_hat_sq=q2, sigma_hat_sq=sigma2, v_n=v_n)


def an_bn(n: int, k: int, M: int) -> tuple[float, float, int]:
    """Gumbel standardization constants for a day of n ticks.

    ``L = floor(n/(kM))`` block statistics enter the extreme-value limit:

        ``A_n = sqrt(2 ln L) - (ln pi + ln ln L) / (2 sqrt(2 ln L))``
        ``B_n = 1 / sqrt(2 ln L)``
    """
    L = n // (k * M)
    if L < 2:
        raise DayRejected("lm_blocks", f"only {L} complete blocks")
    t = 2.0 * log(L)
    a = sqrt(t) - (log(pi) + log(log(L))) / (2.0 * sqrt(t))
    return a, 1.0 / sqrt(t), L


def lm_scan(log_prices: np.ndarray, params: LmParams,
            timestamps_ns: np.ndarray | None = None,
            noise: NoiseEstimate | None = None) -> LmDayResult:
    """Scan one day of tick log prices for jump moments.

    Block means are differenced element-wise (mean of ``block[j+1][i] -
    block[j][i]``), which is algebraically ``P_hat(j+1) - P_hat(j)`` and
    keeps the statistic exactly invariant under a constant shift of the
    log-price level.
    """
    p = np.asarray(log_prices, dtype=float)
    n = len(p)
    k, M = params.k, params.M
    a_n, b_n, L = an_bn(n, k, M)
    if noise is None:
        noise = estimate_noise(p, k, C=params.C)
    if noise.v_n <= 0:
        raise DayRejected("lm_flat", "V_n is zero (flat day)")

    sub = p[::k]
    n_blocks = len(sub) // M
    if n_blocks < 2:
        raise DayRejected("lm_blocks", f"only {n_blocks} complete blocks")
    blocks = sub[: n_blocks * M].reshape(n_blocks, M)
    pbar = np.mean(blocks[1:] - blocks[:-1], axis=1)
    chi = pbar * (sqrt(M) / sqrt(noise.v_n))
    xi = (np.abs(chi) - a_n) / b_n

    if params.bonferroni:
        level = 1.0 - (1.0 - params.alpha) / (L * params.family_multiplier)
    else:
        level = params.alpha
    threshold = gumbel_quantile(level)

    moments = []
    for j in range(len(pbar)):
        start = None
        if timestamps_ns is not None:
            start = int(timestamps_ns[min(j * k * M, n - 1)])
        moments.append(LmMomentResult(
            block_index=j, block_start_ns=start, pbar=float(pbar[j]),
            chi=float(chi[j]), xi=float(xi[j]), is_jump=bool(xi[j] > threshold)))
    return LmDayResult(params=params, noise=noise, n_blocks=L,
                       a_n=a_n, b_n=b_n, threshold=threshold, moments=moments)


def dedup_consecutive(moments: list[LmMomentResult], window: int = 10) -> list[LmMomentResult]:
    """Collapse runs of consecutive detections into their first flag.

    After an accepted jump at block j, flags in (j, j + window] are
    continuations and are dropped; scanning resumes at the first flag
    past j + window.  The first flag of a run is always kept and no two
    accepted flags are within ``window`` blocks of each other.
    """
    accepted: list[LmMomentResult] = []
    last = None
    for m in moments:
        if not m.is_jump:
            continue
        if last is None or m.block_index > last + window:
            accepted.append(m)
            last = m.block_index
    return accepted
