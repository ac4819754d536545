"""Tour of the downstream analytics on a synthetic two-symbol catalog.

Builds a 120-day, two-symbol corpus of daily records with jumps whose
signs push returns, then prints every table the analyze step produces:
return summaries, extreme counts, seasonality histograms, and the
four-column fixed-effects regression of returns on jump dummies.

Run:  python demos/analytics_tour.py
"""
from datetime import date, timedelta, timezone, datetime

import numpy as np

from hfjumps import analytics

rng = np.random.default_rng(7)
start = date(2021, 1, 1)

records = []
for symbol, level in (("BTC", 10.6), ("ETH", 7.2)):
    close = level
    for i in range(120):
        d = start + timedelta(days=i)
        jumps = []
        if rng.random() < 0.35:
            sign = -1.0 if rng.random() < 2 / 3 else 1.0
            size = float(sign * rng.lognormal(np.log(0.012), 0.6))
            hour = int(rng.integers(0, 24))
            ts = int(datetime(d.year, d.month, d.day, hour,
                              tzinfo=timezone.utc).timestamp() * 1e9)
            jumps.append({"size": size, "utc_timestamp_ns": ts, "xi": 25.0,
                          "direction": "positive" if size > 0 else "negative"})
        drift = 0.6 * sum(j["size"] for j in jumps)
        close += drift + 0.02 * rng.standard_normal()
        records.append({"symbol": symbol, "date": d.isoformat(), "tested": True,
                        "close_log_price": close, "accepted_jumps": jumps})

# --- return tables ----------------------------------------------------------
panel, dropped = analytics.build_panel(records)
daily = {}
for r in panel:
    daily.setdefault(r.symbol, []).append(r.daily_return)
stats = {s: analytics.summarize_returns(v) for s, v in daily.items()}
print("Daily returns per symbol")
print(analytics.render_summary_table(stats))

pooled = np.concatenate([np.array(v) for v in daily.values()])
print("Extreme daily returns (two-sided, strict)")
print(analytics.render_extremes_table(analytics.count_extremes(pooled)))

# --- jump size distribution and seasonality ---------------------------------
sizes = [j["size"] for rec in records for j in rec["accepted_jumps"]]
times = [j["utc_timestamp_ns"] for rec in records for j in rec["accepted_jumps"]]
print("Jump sizes")
print(analytics.render_summary_table({"all": analytics.summarize_returns(sizes)}))
weekday, hour = analytics.seasonality(times)
print(analytics.render_seasonality(weekday, hour))

# --- the four-column regression ----------------------------------------------
columns = {
    "Jumps (all)": analytics.fe_regression(panel, ("jump_dummy",)),
    "Lagged jumps (all)": analytics.fe_regression(panel, ("lagged_jump_dummy",)),
    "Jumps (pos.)": analytics.fe_regression(panel, ("pos_jump_dummy",)),
    "Jumps (neg.)": analytics.fe_regression(panel, ("neg_jump_dummy",)),
}
print("Fixed-effects regression of daily returns on jump dummies "
      "(White HC0 errors)")
print(analytics.render_regression_table(columns))
print(f"(panel rows: {len(panel)}, dropped for missing previous day: {len(dropped)})")
