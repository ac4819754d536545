"""Descriptive tables, jump seasonality, and the jump-dummy panel regression.

Covers the downstream analyses of the pipeline: return summary tables
(with raw, non-excess kurtosis), two-sided extreme-return counts, jump
counts by UTC weekday and hour, and a one-way fixed-effects regression
of daily returns on jump dummies with White (HC0) standard errors.
"""
from __future__ import annotations

from dataclasses import dataclass
from datetime import date, datetime, timezone

import numpy as np
from scipy import stats as sstats

from .errors import NoVariationError

WEEKDAYS = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")


# ---------------------------------------------------------------------------
# summary statistics
# ---------------------------------------------------------------------------

@dataclass
class SummaryStats:
    min: float
    q1: float
    median: float
    mean: float
    q3: float
    max: float
    skewness: float | None     # None when the sample is degenerate
    kurtosis: float | None     # raw (non-excess)
    n: int


def summarize_returns(returns) -> SummaryStats:
    """Five-number summary plus skewness m3/m2^1.5 and kurtosis m4/m2^2.

    Central moments use 1/n normalization; a zero-variance sample leaves
    the shape moments undefined (None).
    """
    x = np.asarray(returns, dtype=float)
    if len(x) < 2:
        raise ValueError("need at least 2 observations")
    q1, med, q3 = np.percentile(x, [25, 50, 75])
    c = x - x.mean()
    m2 = float(np.mean(c ** 2))
    if m2 == 0:
        skew = kurt = None
    else:
        skew = float(np.mean(c ** 3)) / m2 ** 1.5
        kurt = float(np.mean(c ** 4)) / m2 ** 2
    return SummaryStats(min=float(x.min()), q1=float(q1), median=float(med),
                        mean=float(x.mean()), q3=float(q3), max=float(x.max()),
                        skewness=skew, kurtosis=kurt, n=len(x))


@dataclass(frozen=True)
class ExtremeCount:
    threshold: float
    n_below: int    # returns < -threshold
    n_above: int    # returns > +threshold


def count_extremes(returns, thresholds=(0.05, 0.1, 0.2, 0.3)) -> list[ExtremeCount]:
    """Strict two-sided tail counts per threshold."""
    x = np.asarray(returns, dtype=float)
    out = []
    for tau in thresholds:
        out.append(ExtremeCount(threshold=tau,
                                n_below=int(np.sum(x < -tau)),
                                n_above=int(np.sum(x > tau))))
    return out


# ---------------------------------------------------------------------------
# seasonality
# ---------------------------------------------------------------------------

def seasonality(event_timestamps_ns) -> tuple[np.ndarray, np.ndarray]:
    """Jump counts by UTC weekday (Mon..Sun) and by UTC hour (0..23)."""
    weekday = np.zeros(7, dtype=np.int64)
    hour = np.zeros(24, dtype=np.int64)
    for ts in event_timestamps_ns:
        dt = datetime.fromtimestamp(int(ts) / 1e9, tz=timezone.utc)
        weekday[dt.weekday()] += 1
        hour[dt.hour] += 1
    return weekday, hour


# ---------------------------------------------------------------------------
# panel construction
# ---------------------------------------------------------------------------

@dataclass
class PanelRow:
    symbol: str
    utc_date: date
    daily_return: float
    jump_dummy: int
    lagged_jump_dummy: int
    pos_jump_dummy: int
    neg_jump_dummy: int


def build_panel(day_records: list[dict]) -> tuple[list[PanelRow], list[str]]:
    """Symbol-day rows of close-to-close returns and jump dummies.

    ``day_records`` are catalog entries (dicts with symbol, date, tested,
    close_log_price, accepted_jumps).  The daily return and the lag both
    reference the previous calendar day only; a row whose previous day
    was untested or absent is dropped and logged.  A day with jumps of
    both signs sets both sign dummies.
    """
    by_key: dict[tuple[str, date], dict] = {}
    for rec in day_records:
        d = rec["date"] if isinstance(rec["date"], date) else date.fromisoformat(rec["date"])
        by_key[(rec["symbol"], d)] = rec
    rows: list[PanelRow] = []
    dropped: list[str] = []
    for (symbol, d), rec in sorted(by_key.items()):
        if not rec.get("tested"):
            continue
        prev = by_key.get((symbol, date.fromordinal(d.toordinal() - 1)))
        if not prev or not prev.get("tested") or prev.get("close_log_price") is None:
            dropped.append(f"{symbol} {d.isoformat()}: previous day untested")
            continue
        jumps = rec.get("accepted_jumps") or []
        sizes = [j["size"] for j in jumps]
        prev_jumps = prev.get("accepted_jumps") or []
        rows.append(PanelRow(
            symbol=symbol, utc_date=d,
            daily_return=float(rec["close_log_price"]) - float(prev["close_log_price"]),
            jump_dummy=int(bool(sizes)),
            lagged_jump_dummy=int(bool(prev_jumps)),
            pos_jump_dummy=int(any(s > 0 for s in sizes)),
            neg_jump_dummy=int(any(s < 0 for s in sizes)),
        ))
    return rows, dropped


# ---------------------------------------------------------------------------
# fixed-effects regression
# ---------------------------------------------------------------------------

@dataclass
class RegressionResult:
    regressors: tuple[str, ...]
    coef: np.ndarray
    se: np.ndarray            # White HC0
    t_stat: np.ndarray
    p_value: np.ndarray
    stars: tuple[str, ...]
    r2: float
    adj_r2: float
    nobs: int
    n_groups: int


def significance_stars(p: float) -> str:
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


def _demean_by_group(values: np.ndarray, group_idx: np.ndarray, n_groups: int) -> np.ndarray:
    sums = np.zeros((n_groups,) + values.shape[1:])
    np.add.at(sums, group_idx, values)
    counts = np.bincount(group_idx, minlength=n_groups).astype(float)
    means = sums / counts.reshape(-1, *([1] * (values.ndim - 1)))
    return values - means[group_idx]


def fe_regression(rows: list[PanelRow], regressors=("jump_dummy",)) -> RegressionResult:
    """Within (entity-demeaned) OLS of daily returns on jump dummies.

    One column per regressor; the default single-regressor form matches
    the published table style, a multi-regressor call is the multivariate
    mode.  Standard errors are the heteroskedasticity-consistent White
    HC0 sandwich on the demeaned design:

        ``(X'X)^-1 X' diag(e^2) X (X'X)^-1``

    R^2 is computed on the demeaned totals and the adjustment charges
    the absorbed group means: ``1 - (1-R2)(N-1)/(N-K-G)``.
    """
    if isinstance(regressors, str):
        regressors = (regressors,)
    regressors = tuple(regressors)
    if len(rows) < 2:
        raise ValueError("need at least 2 panel rows")
    symbols = sorted({r.symbol for r in rows})
    if len(symbols) < 2:
        raise ValueError("need at least 2 symbols for the within estimator")
    sym_idx = {s: i for i, s in enumerate(symbols)}
    gi = np.array([sym_idx[r.symbol] for r in rows])
    y = np.array([r.daily_return for r in rows], dtype=float)
    X = np.column_stack([[float(getattr(r, name)) for r in rows] for name in regressors])

    yt = _demean_by_group(y, gi, len(symbols))
    Xt = _demean_by_group(X, gi, len(symbols))
    if np.allclose(Xt, 0.0):
        raise NoVariationError(
            f"regressor(s) {regressors} constant within every symbol")

    xtx = Xt.T @ Xt
    try:
        xtx_inv = np.linalg.inv(xtx)
    except np.linalg.LinAlgError as exc:
        raise NoVariationError(f"singular design for {regressors}") from exc
    beta = xtx_inv @ (Xt.T @ yt)
    resid = yt - Xt @ beta
    meat = (Xt * (resid ** 2)[:, None]).T @ Xt
    cov = xtx_inv @ meat @ xtx_inv
    se = np.sqrt(np.diag(cov))

    n, k = len(y), len(regressors)
    g = len(symbols)
    sst = float(np.dot(yt, yt))
    ssr = float(np.dot(resid, resid))
    r2 = 1.0 - ssr / sst if sst > 0 else 0.0
    df_resid = n - k - g
    adj = 1.0 - (1.0 - r2) * (n - 1) / df_resid if df_resid > 0 else float("nan")
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, beta / se, np.where(beta == 0, 0.0, np.inf * np.sign(beta)))
    p = np.where(np.isinf(t), 0.0,
                 2.0 * sstats.t.sf(np.abs(t), df=max(df_resid, 1)))
    return RegressionResult(
        regressors=regressors, coef=beta, se=se, t_stat=t, p_value=p,
        stars=tuple(significance_stars(float(pi)) for pi in p),
        r2=r2, adj_r2=adj, nobs=n, n_groups=g)


# ---------------------------------------------------------------------------
# renderers (text tables mirroring the published layouts)
# ---------------------------------------------------------------------------

def render_summary_table(stats_by_name: dict[str, SummaryStats]) -> str:
    hdr = (f"{'Currency':<10}{'Min.':>10}{'1st Qu.':>10}{'Median':>10}{'Mean':>10}"
           f"{'3rd Qu.':>10}{'Max.':>10}{'Skewness':>10}{'Kurtosis':>10}")
    lines = [hdr]
    for name in sorted(stats_by_name):
        s = stats_by_name[name]
        sk = f"{s.skewness:.2f}" if s.skewness is not None else "NA"
        ku = f"{s.kurtosis:.2f}" if s.kurtosis is not None else "NA"
        lines.append(f"{name:<10}{s.min:>10.4f}{s.q1:>10.4f}{s.median:>10.4f}"
                     f"{s.mean:>10.4f}{s.q3:>10.4f}{s.max:>10.4f}{sk:>10}{ku:>10}")
    return "\n".join(lines) + "\n"


def render_extremes_table(counts: list[ExtremeCount]) -> str:
    lines = [f"{'Negative':<12}{'Counts':>8}  {'Positive':<12}{'Counts':>8}"]
    for c in counts:
        lines.append(f"{'< -' + format(c.threshold, 'g'):<12}{c.n_below:>8}  "
                     f"{'> ' + format(c.threshold, 'g'):<12}{c.n_above:>8}")
    return "\n".join(lines) + "\n"


def render_seasonality(weekday: np.ndarray, hour: np.ndarray) -> str:
    lines = ["Jumps per weekday (UTC)"]
    for i, name in enumerate(WEEKDAYS):
        lines.append(f"  {name} {int(weekday[i]):>6}")
    lines.append("Jumps per hour (UTC)")
    for h in range(24):
        lines.append(f"  {h:02d}  {int(hour[h]):>6}")
    return "\n".join(lines) + "\n"


def render_regression_table(columns: dict[str, RegressionResult]) -> str:
    """Four-column layout: coefficient with stars, SE in parentheses below,
    then R^2, Adj. R^2, Num. obs., and the star legend."""
    col_names = list(columns)
    row_names: list[str] = []
    for res in columns.values():
        for rn in res.regressors:
            if rn not in row_names:
                row_names.append(rn)
    width = 22
    label_w = 18
    lines = ["".ljust(label_w) + "".join(f"{c:>{width}}" for c in col_names)]
    for rn in row_names:
        coefs, ses = [], []
        for res in columns.values():
            if rn in res.regressors:
                i = res.regressors.index(rn)
                coefs.append(f"{res.coef[i]:.3f}{res.stars[i]}")
                ses.append(f"({res.se[i]:.3f})")
            else:
                coefs.append("")
                ses.append("")
        lines.append(rn.ljust(label_w) + "".join(f"{c:>{width}}" for c in coefs))
        lines.append("".ljust(label_w) + "".join(f"{s:>{width}}" for s in ses))
    lines.append("R^2".ljust(label_w)
                 + "".join(f"{res.r2:>{width}.3f}" for res in columns.values()))
    lines.append("Adj. R^2".ljust(label_w)
                 + "".join(f"{res.adj_r2:>{width}.3f}" for res in columns.values()))
    lines.append("Num. obs.".ljust(label_w)
                 + "".join(f"{res.nobs:>{width}}" for res in columns.values()))
    lines.append("***p<0.001; **p<0.01; *p<0.05")
    return "\n".join(lines) + "\n"
