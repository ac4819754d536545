"""Turn raw symbol-day slices into test-ready series.

The chain is: average simultaneous cross-exchange observations into one
log-price path, strip bounceback outliers and returns beyond a standard
deviation cutoff, pick the finest sampling frequency (1/5/10/15 s) with
at least 95% bin coverage, and build the gap-free equispaced series by
carrying the last observed price forward.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from datetime import date, datetime, timezone

import numpy as np

from .tickstore import SymbolDaySlice

log = logging.getLogger(__name__)

DAY_SECONDS = 86_400
FREQUENCIES = (1, 5, 10, 15)


@dataclass
class AggregatedSeries:
    """One symbol-day of cross-exchange mean log prices, strictly time-ordered."""

    symbol: str
    utc_date: date
    timestamps_ns: np.ndarray
    log_prices: np.ndarray

    def __len__(self) -> int:
        return len(self.timestamps_ns)

    def day_start_ns(self) -> int:
        dt = datetime(self.utc_date.year, self.utc_date.month, self.utc_date.day,
                      tzinfo=timezone.utc)
        return int(dt.timestamp()) * 10 ** 9


@dataclass
class EquispacedSeries:
    """Gap-free log-price grid covering the 24h day at ``frequency_s`` seconds."""

    symbol: str
    utc_date: date
    frequency_s: int
    log_prices: np.ndarray

    def __len__(self) -> int:
        return len(self.log_prices)


@dataclass(frozen=True)
class RemovalRecord:
    timestamp_ns: int
    rule: str          # "bounceback" | "sd_cutoff"
    value: float       # the offending log return


def aggregate_cross_exchange(day: SymbolDaySlice) -> AggregatedSeries:
    """Mean price over exchanges at identical timestamps, then log.

    Order-invariant: ticks are grouped purely by timestamp, so any
    permutation of the input produces the same series.
    """
    if day.empty:
        return AggregatedSeries(day.symbol, day.utc_date,
                                np.empty(0, dtype=np.int64), np.empty(0))
    ts, inverse = np.unique(day.timestamps_ns, return_inverse=True)
    sums = np.bincount(inverse, weights=day.prices)
    counts = np.bincount(inverse)
    return AggregatedSeries(day.symbol, day.utc_date, ts, np.log(sums / counts))


def _one_filter_pass(lp: np.ndarray, ts: np.ndarray, sd_cutoff: float,
                     reversal: float) -> tuple[np.ndarray, list[RemovalRecord]]:
    """Apply rule (a) then rule (b) once; returns surviving indices."""
    removed: list[RemovalRecord] = []
    n = len(lp)
    r = np.diff(lp)
    sd = float(np.std(r, ddof=1))
    if sd == 0 or not np.isfinite(sd):
        return np.arange(n), removed
    cutoff = sd_cutoff * sd
    if np.max(np.abs(r)) <= cutoff:
        return np.arange(n), removed

    # (a) bounceback: a >cutoff move undone (>= reversal fraction) by the
    # very next return is a data error, drop the spike point
    keep = np.ones(n, dtype=bool)
    prev = 0
    for i in range(1, n):
        move = lp[i] - lp[prev]
        if abs(move) > cutoff and i + 1 < n:
            nxt = lp[i + 1] - lp[i]
            if move != 0 and (-nxt / move) >= reversal:
                keep[i] = False
                removed.append(RemovalRecord(int(ts[i]), "bounceback", float(move)))
                continue
        prev = i

    idx = np.nonzero(keep)[0]
    lp2, ts2 = lp[idx], ts[idx]

    # (b) remaining oversized returns drop their right endpoint; the next
    # return is then measured from the last kept point, so a level shift
    # made of consecutive bad prints is consumed in this single pass
    keep2 = np.ones(len(lp2), dtype=bool)
    prev = 0
    for i in range(1, len(lp2)):
        move = lp2[i] - lp2[prev]
        if abs(move) > cutoff:
            keep2[i] = False
            removed.append(RemovalRecord(int(ts2[i]), "sd_cutoff", float(move)))
        else:
            prev = i
    return idx[keep2], removed


def filter_returns(series: AggregatedSeries, sd_cutoff: float = 10.0,
                   reversal: float = 0.75) -> tuple[AggregatedSeries, list[RemovalRecord]]:
    """Remove bounceback outliers and returns beyond ``sd_cutoff`` standard deviations.

    The pass is iterated to a fixed point, recomputing the same-day sample
    SD on the surviving points each round, so a second application of
    ``filter_returns`` never removes anything (idempotence).
    """
    if len(series) < 3:
        log.warning("filter_returns: %s %s has %d points, passing through",
                    series.symbol, series.utc_date, len(series))
        return series, []
    lp = series.log_prices
    ts = series.timestamps_ns
    removed: list[RemovalRecord] = []
    while len(lp) >= 3:
        kept, rem = _one_filter_pass(lp, ts, sd_cutoff, reversal)
        if not rem:
            break
        removed.extend(rem)
        lp, ts = lp[kept], ts[kept]
    out = AggregatedSeries(series.symbol, series.utc_date, ts, lp)
    if removed:
        log.info("filter_returns: %s %s removed %d points",
                 series.symbol, series.utc_date, len(removed))
    return out, removed


def populated_bins(series: AggregatedSeries, frequency_s: int) -> int:
    offs = series.timestamps_ns - series.day_start_ns()
    bins = offs // (frequency_s * 10 ** 9)
    return len(np.unique(bins))


def select_frequency(series: AggregatedSeries, frequencies=FREQUENCIES,
                     coverage: float = 0.95) -> int | None:
    """Finest frequency whose bin coverage reaches ``coverage``; None rejects the day.

    Coverage counts populated bins, not raw ticks: duplicate ticks inside
    one bin cannot support a finer grid.  The threshold is inclusive
    (exactly 95% qualifies).
    """
    if len(series) == 0:
        return None
    for f in sorted(frequencies):
        total = DAY_SECONDS // f
        # small epsilon so 0.95 * total compares exactly at the boundary
        if populated_bins(series, f) >= coverage * total - 1e-9:
            return f
    return None


def make_equispaced(series: AggregatedSeries, frequency_s: int) -> EquispacedSeries:
    """Last observation per bin, gaps carried forward (LOCF).

    Bins before the first observation are back-filled from it; that
    head fill is the only deviation from pure carry-forward and is
    logged per day.
    """
    n_bins = DAY_SECONDS // frequency_s
    offs = series.timestamps_ns - series.day_start_ns()
    bins = (offs // (frequency_s * 10 ** 9)).astype(np.int64)
    grid = np.full(n_bins, np.nan)
    # keep the last observation per bin: first occurrence in the reversed series
    uniq, pos = np.unique(bins[::-1], return_index=True)
    grid[uniq] = series.log_prices[::-1][pos]
    mask = ~np.isnan(grid)
    idx = np.where(mask, np.arange(n_bins), -1)
    np.maximum.accumulate(idx, out=idx)
    first = int(np.argmax(mask))
    if first > 0:
        log.info("make_equispaced: %s %s back-filled %d head bins",
                 series.symbol, series.utc_date, first)
    idx[idx < 0] = first
    return EquispacedSeries(series.symbol, series.utc_date, frequency_s, grid[idx])
