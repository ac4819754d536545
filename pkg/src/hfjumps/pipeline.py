"""Per-symbol-day orchestration and the jump catalog.

The moment-level test runs on the (irregular) aggregated tick series,
the day-level ratio test on the equispaced grid, and a moment-level
detection only enters the catalog when the day-level test also finds
jumps on that day.  Verdicts serialize to JSON lines; reruns with the
same inputs, config, and seeds are byte-identical.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from datetime import date

from . import ajl, lee_mykland as lm
from .config import RunConfig
from .errors import DayRejected
from .preprocess import (AggregatedSeries, RemovalRecord, aggregate_cross_exchange,
                         filter_returns, make_equispaced, select_frequency)
from .tickstore import TickStore

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1


@dataclass
class JumpEvent:
    symbol: str
    utc_timestamp_ns: int
    size: float
    direction: str           # "positive" | "negative"
    xi: float
    day_ajl_reject: bool = True

    def to_dict(self) -> dict:
        return {"utc_timestamp_ns": self.utc_timestamp_ns, "size": self.size,
                "direction": self.direction, "xi": self.xi}


@dataclass
class DayVerdict:
    symbol: str
    utc_date: date
    tested: bool
    reason: str = ""
    frequency_s: int | None = None
    lm_jump_count_raw: int = 0
    lm_jump_count_dedup: int = 0
    ajl_reject: bool = False
    accepted_jumps: list[JumpEvent] = field(default_factory=list)
    lm: dict | None = None
    ajl: dict | None = None
    n_points: int = 0
    n_removed: int = 0
    close_log_price: float | None = None
    removals: list[RemovalRecord] = field(default_factory=list)
    config_hash: str = ""

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "config_hash": self.config_hash,
            "symbol": self.symbol,
            "date": self.utc_date.isoformat(),
            "tested": self.tested,
            "reason": self.reason,
            "frequency_s": self.frequency_s,
            "n_points": self.n_points,
            "n_removed": self.n_removed,
            "close_log_price": self.close_log_price,
            "lm_jump_count_raw": self.lm_jump_count_raw,
            "lm_jump_count_dedup": self.lm_jump_count_dedup,
            "ajl_reject": self.ajl_reject,
            "lm": self.lm,
            "ajl": self.ajl,
            "accepted_jumps": [e.to_dict() for e in self.accepted_jumps],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _build_lm_params(cfg: RunConfig, n: int, k: int, family_multiplier: int) -> lm.LmParams:
    return lm.LmParams.for_series(
        n=n, k=k, C=cfg.lm_C, alpha=cfg.alpha,
        bonferroni=cfg.bonferroni != "off",
        family_multiplier=family_multiplier)


def _build_ajl_params(cfg: RunConfig) -> ajl.AjlParams:
    g_name, h_name = cfg.weight_names()
    return ajl.AjlParams(p=cfg.ajl_p, k_n=cfg.ajl_kn,
                         g=ajl.get_weight(g_name), h=ajl.get_weight(h_name),
                         alpha=cfg.alpha, sigma_rj_paths=cfg.sigma_rj_paths,
                         base_seed=cfg.seed)


def detect_day(series: AggregatedSeries, cfg: RunConfig,
               family_multiplier: int = 1) -> DayVerdict:
    """Full per-day chain on an aggregated series (pure given config).

    preprocess -> moment scan + dedup -> day-level test -> combination.
    Any stage rejection yields an untested verdict naming the stage.
    """
    verdict = DayVerdict(symbol=series.symbol, utc_date=series.utc_date,
                         tested=False, config_hash=cfg.hash())
    if len(series) == 0:
        verdict.reason = "no_data"
        return verdict

    filtered, removed = filter_returns(series, sd_cutoff=cfg.sd_cutoff,
                                       reversal=cfg.bounceback_reversal)
    verdict.removals = removed
    verdict.n_removed = len(removed)
    verdict.n_points = len(filtered)
    if len(filtered):
        verdict.close_log_price = float(filtered.log_prices[-1])

    freq = select_frequency(filtered, coverage=cfg.coverage)
    if freq is None:
        verdict.reason = "frequency"
        return verdict
    verdict.frequency_s = freq

    try:
        k = lm.select_k(filtered.log_prices)
        params = _build_lm_params(cfg, len(filtered), k, family_multiplier)
        scan = lm.lm_scan(filtered.log_prices, params,
                          timestamps_ns=filtered.timestamps_ns)
    except DayRejected as exc:
        verdict.reason = exc.reason
        return verdict

    deduped = lm.dedup_consecutive(scan.moments, window=cfg.dedup_window)

    try:
        grid = make_equispaced(filtered, freq)
        ajl_params = _build_ajl_params(cfg)
        day_ajl = ajl.ajl_test(grid.log_prices, ajl_params, frequency_s=freq)
    except DayRejected as exc:
        verdict.reason = exc.reason
        return verdict

    verdict.tested = True
    verdict.lm_jump_count_raw = len(scan.flagged)
    verdict.lm_jump_count_dedup = len(deduped)
    verdict.ajl_reject = day_ajl.reject_null
    verdict.lm = {
        "k": params.k, "M": params.M, "C": params.C,
        "n_blocks": scan.n_blocks,
        "q_hat_sq": scan.noise.q_hat_sq,
        "sigma_hat_sq": scan.noise.sigma_hat_sq,
        "v_n": scan.noise.v_n,
        "jumps": [{"time": m.block_start_ns, "size": m.pbar, "xi": m.xi}
                  for m in deduped],
    }
    verdict.ajl = {
        "frequency_s": freq, "p": ajl_params.p, "k_n": ajl_params.k_n,
        "weights": cfg.ajl_weights,
        "s_rj": day_ajl.s_rj, "gamma_dprime": day_ajl.gamma_dprime,
        "sigma_rj": day_ajl.sigma_rj, "critical_value": day_ajl.critical_value,
        "reject_null": day_ajl.reject_null, "mc_seed": day_ajl.mc_seed,
    }
    # the combination rule: moment detections count only on days where the
    # day-level test also rejects the no-jump null
    if day_ajl.reject_null:
        for m in deduped:
            verdict.accepted_jumps.append(JumpEvent(
                symbol=series.symbol,
                utc_timestamp_ns=m.block_start_ns if m.block_start_ns is not None else 0,
                size=m.pbar,
                direction="positive" if m.pbar > 0 else "negative",
                xi=m.xi))
    return verdict


def run_day(store: TickStore, symbol: str, utc_date: date, cfg: RunConfig,
            family_multiplier: int = 1) -> DayVerdict:
    day = store.slice(symbol, utc_date)
    series = aggregate_cross_exchange(day)
    return detect_day(series, cfg, family_multiplier=family_multiplier)


@dataclass
class SymbolSummary:
    symbol: str
    n_jumps: int = 0
    n_test_days: int = 0

    @property
    def pct_jumps(self) -> float:
        return 100.0 * self.n_jumps / self.n_test_days if self.n_test_days else 0.0


@dataclass
class RangeSummary:
    verdicts: list[DayVerdict]

    def per_symbol(self) -> list[SymbolSummary]:
        rows: dict[str, SymbolSummary] = {}
        for v in self.verdicts:
            row = rows.setdefault(v.symbol, SymbolSummary(v.symbol))
            if v.tested:
                row.n_test_days += 1
                row.n_jumps += len(v.accepted_jumps)
        return [rows[s] for s in sorted(rows)]

    def events(self) -> list[JumpEvent]:
        out = []
        for v in self.verdicts:
            out.extend(v.accepted_jumps)
        return out


def render_symbol_summary(rows: list[SymbolSummary]) -> str:
    """Fixed-width per-asset table: symbol, jump count, test days, % jumps."""
    lines = [f"{'Symbol':<8}{'N jumps':>9}{'N test days':>13}{'% jumps':>9}"]
    for r in rows:
        lines.append(f"{r.symbol:<8}{r.n_jumps:>9}{r.n_test_days:>13}"
                     f"{r.pct_jumps:>9.2f}")
    return "\n".join(lines) + "\n"


def run_range(store: TickStore, symbols: list[str], dates: list[date],
              cfg: RunConfig, catalog_path=None,
              removal_log_dir=None) -> RangeSummary:
    """Detect over a symbol-date grid; day failures never abort the run.

    With ``bonferroni="corpus"`` the correction family is all requested
    symbol-days rather than one day's blocks.  When ``catalog_path`` is
    given, verdicts stream to JSON lines as they complete and a
    completion manifest is written next to the catalog even on
    interruption.
    """
    family = max(1, len(symbols) * len(dates)) if cfg.bonferroni == "corpus" else 1
    verdicts: list[DayVerdict] = []
    sink = open(catalog_path, "w") if catalog_path else None
    total = len(symbols) * len(dates)
    try:
        for symbol in symbols:
            for day in dates:
                try:
                    v = run_day(store, symbol, day, cfg, family_multiplier=family)
                except DayRejected as exc:
                    v = DayVerdict(symbol=symbol, utc_date=day, tested=False,
                                   reason=exc.reason, config_hash=cfg.hash())
                except Exception as exc:   # report, keep going
                    log.error("day %s %s failed: %s", symbol, day, exc)
                    v = DayVerdict(symbol=symbol, utc_date=day, tested=False,
                                   reason=f"error:{type(exc).__name__}",
                                   config_hash=cfg.hash())
                verdicts.append(v)
                if sink:
                    sink.write(v.to_json() + "\n")
                if removal_log_dir and v.removals:
                    _write_removal_log(removal_log_dir, v)
    finally:
        if sink:
            sink.close()
            _write_manifest(catalog_path, cfg, len(verdicts), total)
    return RangeSummary(verdicts)


def _write_removal_log(dir_path, verdict: DayVerdict) -> None:
    import csv
    from pathlib import Path
    d = Path(dir_path)
    d.mkdir(parents=True, exist_ok=True)
    with open(d / f"removals_{verdict.symbol}_{verdict.utc_date.isoformat()}.csv",
              "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp_ns", "rule", "value"])
        for r in verdict.removals:
            w.writerow([r.timestamp_ns, r.rule, repr(r.value)])


def _write_manifest(catalog_path, cfg: RunConfig, completed: int, total: int) -> None:
    from pathlib import Path
    p = Path(catalog_path)
    manifest = {"schema_version": SCHEMA_VERSION, "config_hash": cfg.hash(),
                "completed_days": completed, "total_days": total,
                "complete": completed == total}
    p.with_suffix(p.suffix + ".manifest.json").write_text(
        json.dumps(manifest, indent=1, sort_keys=True))


def load_catalog(path) -> list[dict]:
    """Read a verdict JSONL catalog back into dictionaries."""
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out
