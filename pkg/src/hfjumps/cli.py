"""Command line entry point: ingest, simulate, detect, analyze, report.

Every artifact embeds the resolved config hash; identical inputs and
seeds reproduce identical bytes.  Exit codes: 0 success, 1 usage,
2 I/O error, 3 config error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import shutil
import sys
from datetime import date, datetime, timedelta, timezone
from importlib import resources
from pathlib import Path

import numpy as np

from . import analytics, pipeline
from .config import RunConfig
from .errors import ConfigError
from .preprocess import aggregate_cross_exchange, filter_returns
from .simulate import SimConfig, make_corpus
from .tickstore import CsvSchema, TickStore, parse_iso_ns

log = logging.getLogger("hfjumps")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_CONFIG = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _date(text: str) -> date:
    return date.fromisoformat(text)


def _date_range(start: date, end: date) -> list[date]:
    days = (end - start).days
    if days < 0:
        raise ConfigError("--to precedes --from")
    return [start + timedelta(days=i) for i in range(days + 1)]


def build_parser() -> _Parser:
    p = _Parser(prog="hfjumps",
                description="High-frequency jump detection pipeline")
    p.add_argument("--config", help="JSON config file (flags override it)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    pi = sub.add_parser("ingest", help="load tick CSVs into the store")
    pi.add_argument("--store", required=True)
    pi.add_argument("--csv", required=True, nargs="+")
    pi.add_argument("--col-time", default="time")
    pi.add_argument("--col-exchange", default="exchange")
    pi.add_argument("--col-symbol", default="symbol")
    pi.add_argument("--col-price", default="price")

    ps = sub.add_parser("simulate", help="emit a synthetic tick corpus")
    ps.add_argument("--out", required=True)
    ps.add_argument("--days", type=int, default=10)
    ps.add_argument("--symbol", default="SIM")
    ps.add_argument("--start-date", type=_date, default=date(2021, 1, 1))
    ps.add_argument("--ticks-per-day", type=int, default=17_280)
    ps.add_argument("--sigma", type=float, default=0.04)
    ps.add_argument("--noise-q", type=float, default=0.0005)
    ps.add_argument("--jumps", type=float, default=0.0,
                    help="expected jumps per day (Poisson intensity)")
    ps.add_argument("--jump-size", type=float, default=None,
                    help="fixed jump magnitude; default draws from a "
                         "two-sided heavy-tailed mixture")
    ps.add_argument("--jump-spread", type=int, default=40,
                    help="ticks over which each jump is spread")
    ps.add_argument("--exchanges", default="SIM",
                    help="comma-separated exchange ids")
    ps.add_argument("--exchange-noise-q", type=float, default=0.0)
    ps.add_argument("--seed", type=int, default=0)

    pd = sub.add_parser("detect", help="run jump detection over the store")
    pd.add_argument("--store", required=True)
    pd.add_argument("--out", required=True, help="catalog JSONL path")
    pd.add_argument("--symbols", help="comma separated; default: all in store")
    pd.add_argument("--from", dest="date_from", type=_date)
    pd.add_argument("--to", dest="date_to", type=_date)
    for flag, typ in (("--alpha", float), ("--coverage", float),
                      ("--sd-cutoff", float), ("--dedup-window", int),
                      ("--lm-C", float), ("--ajl-p", int), ("--ajl-kn", int),
                      ("--sigma-rj-paths", int), ("--seed", int)):
        pd.add_argument(flag, type=typ, default=None)
    pd.add_argument("--ajl-weights", default=None)
    pd.add_argument("--bonferroni", choices=("within-day", "corpus", "off"),
                    default=None)

    pa = sub.add_parser("analyze", help="tables from a catalog + store")
    pa.add_argument("--store", required=True)
    pa.add_argument("--catalog", required=True)
    pa.add_argument("--out", required=True, help="output directory")

    pr = sub.add_parser("report", help="bundle catalog, tables, timeline")
    pr.add_argument("--catalog", required=True)
    pr.add_argument("--tables", help="directory produced by analyze")
    pr.add_argument("--out", required=True)
    pr.add_argument("--events", help="events CSV (utc_instant,label); "
                                     "defaults to the packaged sample")
    return p


def _resolve_config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    overrides = {}
    for name in ("alpha", "coverage", "sd_cutoff", "dedup_window",
                 "ajl_p", "ajl_kn", "ajl_weights", "bonferroni",
                 "sigma_rj_paths", "seed"):
        if getattr(args, name, None) is not None:
            overrides[name] = getattr(args, name)
    if getattr(args, "lm_C", None) is not None:
        overrides["lm_C"] = args.lm_C
    return cfg.with_overrides(**overrides)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_ingest(args) -> int:
    store = TickStore(args.store)
    schema = CsvSchema(time=args.col_time, exchange=args.col_exchange,
                       symbol=args.col_symbol, price=args.col_price)
    total_acc = total_rej = 0
    for path in args.csv:
        rep = store.ingest_csv(path, schema)
        total_acc += rep.accepted
        total_rej += rep.rejected
        print(f"{path}: accepted={rep.accepted} rejected={rep.rejected}"
              f"{' (already ingested)' if rep.already_ingested else ''}")
    print(f"total: accepted={total_acc} rejected={total_rej}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    base = SimConfig(sigma=args.sigma, q=args.noise_q, n=args.ticks_per_day,
                     seed=args.seed, jump_intensity=args.jumps,
                     jump_fixed_size=args.jump_size,
                     jump_spread_ticks=args.jump_spread)
    exchanges = tuple(x.strip() for x in args.exchanges.split(",") if x.strip())
    records = make_corpus(args.out, args.symbol, args.start_date, args.days,
                          base, exchanges, args.exchange_noise_q)
    truth_path = Path(args.out) / "truth.jsonl"
    with open(truth_path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    print(f"wrote {len(records)} days to {args.out}")
    return EXIT_OK


def cmd_detect(args, cfg: RunConfig) -> int:
    store = TickStore(args.store)
    symbols = ([s.strip() for s in args.symbols.split(",") if s.strip()]
               if args.symbols else store.symbols())
    if not symbols:
        log.warning("store %s is empty; writing empty catalog", args.store)
        Path(args.out).write_text("")
        pipeline._write_manifest(args.out, cfg, 0, 0)
        return EXIT_OK
    all_days = sorted({d for s in symbols for d in store.days(s)})
    if not all_days:
        log.warning("no partitions for %s; writing empty catalog", symbols)
        Path(args.out).write_text("")
        pipeline._write_manifest(args.out, cfg, 0, 0)
        return EXIT_OK
    if args.date_from or args.date_to:
        lo = args.date_from or all_days[0]
        hi = args.date_to or all_days[-1]
        days = [d for d in all_days if lo <= d <= hi]
    else:
        days = all_days
    out_dir = Path(args.out).parent
    summary = pipeline.run_range(store, symbols, days, cfg,
                                 catalog_path=args.out,
                                 removal_log_dir=out_dir / "removals")
    print(pipeline.render_symbol_summary(summary.per_symbol()), end="")
    return EXIT_OK


def _daily_returns_by_symbol(records: list[dict]) -> dict[str, list[float]]:
    rows, _ = analytics.build_panel(records)
    out: dict[str, list[float]] = {}
    for r in rows:
        out.setdefault(r.symbol, []).append(r.daily_return)
    return out


def cmd_analyze(args, cfg: RunConfig) -> int:
    store = TickStore(args.store)
    records = pipeline.load_catalog(args.catalog)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    # high-frequency returns per symbol, re-derived from the store with the
    # same preprocessing the detector saw
    hf_stats: dict[str, analytics.SummaryStats] = {}
    hf_all: list[np.ndarray] = []
    for rec in records:
        if not rec.get("tested"):
            continue
        day = store.slice(rec["symbol"], date.fromisoformat(rec["date"]))
        series = aggregate_cross_exchange(day)
        filtered, _ = filter_returns(series, sd_cutoff=cfg.sd_cutoff,
                                     reversal=cfg.bounceback_reversal)
        if len(filtered) >= 2:
            hf_all.append((rec["symbol"], np.diff(filtered.log_prices)))
    by_symbol: dict[str, list[np.ndarray]] = {}
    for sym, r in hf_all:
        by_symbol.setdefault(sym, []).append(r)
    for sym, parts in sorted(by_symbol.items()):
        hf_stats[sym] = analytics.summarize_returns(np.concatenate(parts))

    _write_summary_csv(out / "returns_hf_summary.csv", hf_stats)
    (out / "returns_hf_summary.txt").write_text(
        analytics.render_summary_table(hf_stats) if hf_stats else "no tested days\n")
    pooled_hf = (np.concatenate([r for _, r in hf_all])
                 if hf_all else np.empty(0))
    _write_extremes_csv(out / "extremes_hf.csv", analytics.count_extremes(pooled_hf))
    (out / "extremes_hf.txt").write_text(
        analytics.render_extremes_table(analytics.count_extremes(pooled_hf)))

    # daily returns and the panel
    panel, dropped = analytics.build_panel(records)
    daily = _daily_returns_by_symbol(records)
    daily_stats = {s: analytics.summarize_returns(np.array(v))
                   for s, v in sorted(daily.items()) if len(v) >= 2}
    _write_summary_csv(out / "returns_daily_summary.csv", daily_stats)
    (out / "returns_daily_summary.txt").write_text(
        analytics.render_summary_table(daily_stats) if daily_stats
        else "insufficient daily history\n")
    pooled_daily = (np.concatenate([np.array(v) for v in daily.values()])
                    if daily else np.empty(0))
    _write_extremes_csv(out / "extremes_daily.csv",
                        analytics.count_extremes(pooled_daily))
    (out / "extremes_daily.txt").write_text(
        analytics.render_extremes_table(analytics.count_extremes(pooled_daily)))

    # jump size distribution and seasonality
    sizes, times = [], []
    for rec in records:
        for ev in rec.get("accepted_jumps") or []:
            sizes.append(ev["size"])
            times.append(ev["utc_timestamp_ns"])
    if len(sizes) >= 2:
        _write_summary_csv(out / "jump_size_summary.csv",
                           {"all": analytics.summarize_returns(np.array(sizes))})
    _write_extremes_csv(out / "extreme_jumps.csv",
                        analytics.count_extremes(np.array(sizes) if sizes else
                                                 np.empty(0),
                                                 thresholds=(0.025, 0.05, 0.1, 0.2)))
    weekday, hour = analytics.seasonality(times)
    with open(out / "seasonality_weekday.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["weekday", "count"])
        for i, name in enumerate(analytics.WEEKDAYS):
            w.writerow([name, int(weekday[i])])
    with open(out / "seasonality_hour.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["hour", "count"])
        for h in range(24):
            w.writerow([h, int(hour[h])])
    (out / "seasonality.txt").write_text(
        analytics.render_seasonality(weekday, hour))

    # panel regressions, one column per dummy
    with open(out / "panel.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["symbol", "date", "daily_return", "jump_dummy",
                    "lagged_jump_dummy", "pos_jump_dummy", "neg_jump_dummy"])
        for r in panel:
            w.writerow([r.symbol, r.utc_date.isoformat(), repr(r.daily_return),
                        r.jump_dummy, r.lagged_jump_dummy,
                        r.pos_jump_dummy, r.neg_jump_dummy])
    reg_txt = "insufficient panel variation for regression\n"
    columns = {}
    try:
        columns = {
            "Jumps (all)": analytics.fe_regression(panel, ("jump_dummy",)),
            "Lagged jumps (all)": analytics.fe_regression(panel, ("lagged_jump_dummy",)),
            "Jumps (pos.)": analytics.fe_regression(panel, ("pos_jump_dummy",)),
            "Jumps (neg.)": analytics.fe_regression(panel, ("neg_jump_dummy",)),
        }
        reg_txt = analytics.render_regression_table(columns)
    except Exception as exc:
        log.warning("regression skipped: %s", exc)
    (out / "regression.txt").write_text(reg_txt)
    with open(out / "regression.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["column", "regressor", "coef", "se", "t", "p", "stars",
                    "r2", "adj_r2", "nobs"])
        for col, res in columns.items():
            for i, name in enumerate(res.regressors):
                w.writerow([col, name, repr(float(res.coef[i])),
                            repr(float(res.se[i])), repr(float(res.t_stat[i])),
                            repr(float(res.p_value[i])), res.stars[i],
                            repr(res.r2), repr(res.adj_r2), res.nobs])
    if dropped:
        (out / "panel_dropped.log").write_text("\n".join(dropped) + "\n")

    meta = {"config_hash": cfg.hash(), "n_records": len(records),
            "schema_version": pipeline.SCHEMA_VERSION}
    (out / "tables_manifest.json").write_text(json.dumps(meta, indent=1, sort_keys=True))
    print(f"tables written to {out}")
    return EXIT_OK


def _write_summary_csv(path: Path, stats: dict[str, analytics.SummaryStats]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["name", "min", "q1", "median", "mean", "q3", "max",
                    "skewness", "kurtosis", "n"])
        for name in sorted(stats):
            s = stats[name]
            w.writerow([name, repr(s.min), repr(s.q1), repr(s.median), repr(s.mean),
                        repr(s.q3), repr(s.max),
                        "" if s.skewness is None else repr(s.skewness),
                        "" if s.kurtosis is None else repr(s.kurtosis), s.n])


def _write_extremes_csv(path: Path, counts) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["threshold", "n_below_minus", "n_above_plus"])
        for c in counts:
            w.writerow([c.threshold, c.n_below, c.n_above])


def _load_events(path: str | None) -> list[tuple[int, str]]:
    if path:
        text = Path(path).read_text()
    else:
        text = (resources.files("hfjumps") / "data" / "events_sample.csv").read_text()
    events = []
    for row in csv.DictReader(text.splitlines()):
        events.append((parse_iso_ns(row["utc_instant"]), row["label"]))
    return sorted(events)


def cmd_report(args, cfg: RunConfig) -> int:
    records = pipeline.load_catalog(args.catalog)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    shutil.copyfile(args.catalog, out / "catalog.jsonl")
    if args.tables:
        tdir = out / "tables"
        tdir.mkdir(exist_ok=True)
        for f in sorted(Path(args.tables).iterdir()):
            if f.is_file():
                shutil.copyfile(f, tdir / f.name)
    events = _load_events(args.events or cfg.events_file)

    # timeline: per (symbol-day) jump counts with event markers inline
    per_day: dict[str, int] = {}
    for rec in records:
        key = rec["date"]
        per_day[key] = per_day.get(key, 0) + len(rec.get("accepted_jumps") or [])
    event_days = {}
    for ts, label in events:
        day = datetime.fromtimestamp(ts / 1e9, tz=timezone.utc).date().isoformat()
        event_days.setdefault(day, []).append(label)
    with open(out / "timeline.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["date", "n_jumps", "event"])
        for day in sorted(set(per_day) | set(event_days)):
            w.writerow([day, per_day.get(day, 0),
                        "; ".join(event_days.get(day, []))])

    resolved = {"config": cfg.to_dict(), "config_hash": cfg.hash(),
                "schema_version": pipeline.SCHEMA_VERSION}
    (out / "config.json").write_text(json.dumps(resolved, indent=1, sort_keys=True))
    print(f"report bundle at {out}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _resolve_config(args)
        if args.command == "ingest":
            return cmd_ingest(args)
        if args.command == "simulate":
            return cmd_simulate(args)
        if args.command == "detect":
            return cmd_detect(args, cfg)
        if args.command == "analyze":
            return cmd_analyze(args, cfg)
        if args.command == "report":
            return cmd_report(args, cfg)
        raise AssertionError(args.command)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
