"""Parameter sweeps, dealer baseline comparisons, and quote-decay curves.

This is the orchestration layer under the command line. A sweep walks one
parameter axis, runs the market simulation several times per grid point,
and folds per-run statistics into a long-format table keyed by
(grid point, dealer kind, run, metric). Baseline comparisons run the three
dealer strategies on common random numbers so differences come from the
strategy, not the draws.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import stats
from .config import SimConfig
from .dealer import DEALER_KINDS, default_eta
from .market import RunOutput, run_seed, run_simulation

AXES = (
    "risk_aversion_2_over_gamma",
    "phi_max_symmetric",
    "phi_max_asymmetric",
    "inventory_skew_symmetric",
    "inventory_skew_asymmetric",
)
SKEW_AXES = ("inventory_skew_symmetric", "inventory_skew_asymmetric")
PAIR_AXES = ("phi_max_asymmetric", "inventory_skew_asymmetric")

# default grids; scalar axes list plain values, pair axes list (bid, ask)
DEFAULT_GRIDS = {
    "risk_aversion_2_over_gamma": (5.0, 10.0, 20.0, 40.0, 80.0),
    "phi_max_symmetric": (1000, 2500, 5000, 7500, 10000),
    "phi_max_asymmetric": ((10000, 1000), (5000, 5000), (1000, 10000)),
    "inventory_skew_symmetric": (0.25, 0.5, 1.0, 2.0, 4.0),
    "inventory_skew_asymmetric": ((2.0, 0.5), (1.0, 1.0), (0.5, 2.0)),
}

METRICS = (
    "dealer_total_return",
    "dealer_wealth_volatility",
    "dealer_wealth_skew",
    "dealer_wealth_kurtosis",
    "dealer_sharpe",
    "dealer_mean_abs_inventory",
    "dealer_mean_inventory",
    "wealth_price_correlation",
    "wealth_trade_correlation",
    "market_total_return",
    "market_volatility",
    "market_skew",
    "market_kurtosis",
    "fundamentalist_total_return",
    "chartist_total_return",
    "noise_total_return",
)


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: an axis, its grid, which dealers to run, and how often."""

    axis: str
    grid: tuple = ()
    kinds: tuple = ("as", "ir")
    runs: int = 20
    base_config: SimConfig = field(default_factory=SimConfig)
    master_seed: str = "sweep"

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"unknown sweep axis {self.axis!r}")
        if not self.grid:
            object.__setattr__(self, "grid", DEFAULT_GRIDS[self.axis])
        object.__setattr__(self, "grid", tuple(
            tuple(v) if isinstance(v, (tuple, list)) else v for v in self.grid))
        object.__setattr__(self, "kinds", tuple(self.kinds))
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        for kind in self.kinds:
            if kind not in DEALER_KINDS:
                raise ValueError(f"unknown dealer kind {kind!r}")
        if self.axis in SKEW_AXES and any(k != "ir" for k in self.kinds):
            raise ValueError("inventory skew sweeps apply to the ir dealer only")
        for value in self.grid:
            if self.axis in PAIR_AXES:
                if not (isinstance(value, tuple) and len(value) == 2):
                    raise ValueError(f"{self.axis} grid values must be "
                                     f"(bid, ask) pairs, got {value!r}")
            elif isinstance(value, tuple):
                raise ValueError(f"{self.axis} grid values must be scalars, "
                                 f"got {value!r}")


def point_label(value) -> str:
    """Canonical string for a grid value; pairs print as bid/ask."""
    if isinstance(value, tuple):
        return f"{value[0]:g}/{value[1]:g}"
    return f"{value:g}"


def point_config(spec: SweepSpec, value) -> SimConfig:
    """Base config specialised to one grid point.

    Maximum-size sweeps reset eta to None so the size-decay rate is
    re-derived from the new cap (unit size exactly at q = phi_max).
    Skew sweeps scale that derived rate by the grid multiplier.
    """
    base = spec.base_config
    axis = spec.axis
    if axis == "risk_aversion_2_over_gamma":
        if value <= 0:
            raise ValueError("2/gamma grid values must be positive")
        return replace(base, dealer_gamma=2.0 / value)
    if axis == "phi_max_symmetric":
        return replace(base, phi_max_bid=value, phi_max_ask=value,
                       eta_bid=None, eta_ask=None)
    if axis == "phi_max_asymmetric":
        bid, ask = value
        return replace(base, phi_max_bid=bid, phi_max_ask=ask,
                       eta_bid=None, eta_ask=None)
    if axis == "inventory_skew_symmetric":
        return replace(base,
                       eta_bid=value * default_eta(base.phi_max_bid),
                       eta_ask=value * default_eta(base.phi_max_ask))
    if axis == "inventory_skew_asymmetric":
        m_bid, m_ask = value
        return replace(base,
                       eta_bid=m_bid * default_eta(base.phi_max_bid),
                       eta_ask=m_ask * default_eta(base.phi_max_ask))
    raise ValueError(f"unknown sweep axis {axis!r}")


def axis_display_value(spec: SweepSpec, value) -> float:
    """Numeric x-axis position for a grid value.

    Skew axes report the bid-side decay magnitude scaled by 100 (shown on
    a log scale downstream); pair axes report the bid side.
    """
    if spec.axis == "inventory_skew_symmetric":
        return abs(value * default_eta(spec.base_config.phi_max_bid)) * 100.0
    if spec.axis == "inventory_skew_asymmetric":
        return abs(value[0] * default_eta(spec.base_config.phi_max_bid)) * 100.0
    if isinstance(value, tuple):
        return float(value[0])
    return float(value)


def axis_metadata(spec: SweepSpec) -> dict:
    meta = {"axis": spec.axis, "display_scale": 1.0, "log_scale": False}
    if spec.axis in SKEW_AXES:
        meta["display_scale"] = 100.0
        meta["log_scale"] = True
    return meta


# -- per-run statistics -------------------------------------------------------

def run_metrics(out: RunOutput) -> dict:
    """Flatten one run into named scalar metrics (None where undefined).

    Dealer wealth statistics use log returns on the wealth level, so a run
    whose wealth goes non-positive reports None for volatility-based
    metrics; the total return is measured against the cash endowment and
    stays defined even after a blow-up.
    """
    delta = out.config.delta
    w0 = out.dealer_initial_cash_ticks * delta
    wealth = out.dealer_wealth
    metrics = dict.fromkeys(METRICS)

    if out.n_steps:
        metrics["dealer_total_return"] = float(wealth[-1]) / w0 - 1.0
        metrics["dealer_mean_abs_inventory"] = float(np.mean(np.abs(out.dealer_q)))
        metrics["dealer_mean_inventory"] = float(np.mean(out.dealer_q))

    w_returns = stats.log_returns(wealth)
    if w_returns is not None:
        m = stats.moments(w_returns)
        metrics["dealer_wealth_volatility"] = m.std
        metrics["dealer_wealth_skew"] = m.skew
        metrics["dealer_wealth_kurtosis"] = m.kurtosis
        metrics["dealer_sharpe"] = m.sharpe

    p_returns = stats.log_returns(out.price)
    if p_returns is not None:
        m = stats.moments(p_returns)
        metrics["market_volatility"] = m.std
        metrics["market_skew"] = m.skew
        metrics["market_kurtosis"] = m.kurtosis
    metrics["market_total_return"] = stats.total_return(out.price)

    if w_returns is not None and p_returns is not None:
        metrics["wealth_price_correlation"] = stats.correlation(
            w_returns, p_returns)
    if out.n_steps >= 2:
        # signed net quantity the dealer traded each step, against the
        # arithmetic wealth change (defined even through a blow-up)
        net = np.zeros(out.n_steps)
        for t, side, _price, qty in out.dealer_trades:
            net[t] += qty if side == "buy" else -qty
        metrics["wealth_trade_correlation"] = stats.correlation(
            net[1:], np.diff(wealth))

    metrics["fundamentalist_total_return"] = stats.total_return(
        out.wealth_fundamentalist)
    metrics["chartist_total_return"] = stats.total_return(out.wealth_chartist)
    metrics["noise_total_return"] = stats.total_return(out.wealth_noise)
    return metrics


# -- sweep execution ----------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    axis: str
    point: str
    axis_value: float
    kind: str
    run: int
    metric: str
    value: float | None


@dataclass(frozen=True)
class SweepFailure:
    point: str
    kind: str
    run: int
    error: str


@dataclass
class SweepResult:
    spec: SweepSpec
    metadata: dict
    rows: list
    failures: list

    def mean_by_point(self, kind: str, metric: str) -> list:
        """(axis_value, mean over runs) per grid point, None-safe."""
        sums: dict = {}
        for row in self.rows:
            if row.kind != kind or row.metric != metric or row.value is None:
                continue
            total, count = sums.get(row.point, (0.0, 0))
            sums[row.point] = (total + row.value, count + 1)
        result = []
        for value in self.spec.grid:
            label = point_label(value)
            display = axis_display_value(self.spec, value)
            if label in sums:
                total, count = sums[label]
                result.append((display, total / count))
            else:
                result.append((display, None))
        return result


def _sweep_task(args):
    spec, value, kind, run_idx = args
    label = point_label(value)
    seed = run_seed(spec.master_seed, run_idx)
    try:
        cfg = replace(point_config(spec, value), dealer_kind=kind)
        cfg.validate()
        metrics = run_metrics(run_simulation(cfg, seed))
    except Exception as exc:
        return (label, kind, run_idx, None, f"{type(exc).__name__}: {exc}")
    return (label, kind, run_idx, metrics, None)


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Execute a sweep; per-run failures are recorded, not raised.

    Runs share seeds across grid points and dealer kinds (common random
    numbers), so within a run index the stylised-agent draws are identical
    until the first dealer-induced divergence. The result is a pure
    function of (spec, seed) regardless of worker count.
    """
    tasks = [(spec, value, kind, run_idx)
             for value in spec.grid
             for kind in spec.kinds
             for run_idx in range(spec.runs)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            raw = list(pool.map(_sweep_task, tasks, chunksize=4))
    else:
        raw = [_sweep_task(t) for t in tasks]

    display = {point_label(v): axis_display_value(spec, v) for v in spec.grid}
    rows = []
    failures = []
    for label, kind, run_idx, metrics, error in raw:
        if error is not None:
            failures.append(SweepFailure(label, kind, run_idx, error))
            continue
        for metric in METRICS:
            rows.append(SweepRow(spec.axis, label, display[label], kind,
                                 run_idx, metric, metrics[metric]))
    return SweepResult(spec, axis_metadata(spec), rows, failures)


def write_sweep_result(result: SweepResult, out_dir) -> None:
    """Persist a sweep as sweep.csv (long format) plus summary.json."""
    import json
    import os
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "sweep.csv"), "w") as fh:
        fh.write("axis,point,axis_value,kind,run,metric,value\n")
        for r in result.rows:
            value = "" if r.value is None else repr(r.value)
            fh.write(f"{r.axis},{r.point},{r.axis_value!r},{r.kind},"
                     f"{r.run},{r.metric},{value}\n")
    summary = {
        "axis": result.spec.axis,
        "metadata": result.metadata,
        "kinds": list(result.spec.kinds),
        "runs": result.spec.runs,
        "master_seed": result.spec.master_seed,
        "grid": [point_label(v) for v in result.spec.grid],
        "means": {
            kind: {metric: result.mean_by_point(kind, metric)
                   for metric in METRICS}
            for kind in result.spec.kinds
        },
        "failures": [
            {"point": f.point, "kind": f.kind, "run": f.run, "error": f.error}
            for f in result.failures
        ],
    }
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- baseline comparison ------------------------------------------------------

@dataclass(frozen=True)
class BaselineRow:
    kind: str
    mean_total_return: float | None
    mean_wealth_volatility: float | None
    mean_sharpe: float | None
    mean_wealth_price_corr: float | None
    mean_wealth_trade_corr: float | None
    mean_abs_inventory: float | None
    mean_inventory: float | None


@dataclass
class BaselineComparison:
    runs: int
    master_seed: str
    rows: list                       # one BaselineRow per dealer kind
    per_run: dict                    # kind -> list of run_metrics dicts

    def row(self, kind: str) -> BaselineRow:
        for r in self.rows:
            if r.kind == kind:
                return r
        raise KeyError(kind)


def _mean(values) -> float | None:
    kept = [v for v in values if v is not None]
    if not kept:
        return None
    return math.fsum(kept) / len(kept)


def compare_baselines(config: SimConfig, runs: int,
                      kinds=DEALER_KINDS) -> BaselineComparison:
    """Run each dealer kind over the same seed set and tabulate averages.

    Common random numbers: run i uses the same seed for every kind, so the
    endowments and the stylised draw sequences match across kinds until
    the dealer's own actions make the paths diverge.
    """
    if runs < 1:
        raise ValueError("runs must be at least 1")
    per_run = {}
    rows = []
    for kind in kinds:
        cfg = replace(config, dealer_kind=kind)
        cfg.validate()
        metrics = [run_metrics(run_simulation(cfg, run_seed(config.seed, i)))
                   for i in range(runs)]
        per_run[kind] = metrics
        rows.append(BaselineRow(
            kind=kind,
            mean_total_return=_mean(m["dealer_total_return"] for m in metrics),
            mean_wealth_volatility=_mean(
                m["dealer_wealth_volatility"] for m in metrics),
            mean_sharpe=_mean(m["dealer_sharpe"] for m in metrics),
            mean_wealth_price_corr=_mean(
                m["wealth_price_correlation"] for m in metrics),
            mean_wealth_trade_corr=_mean(
                m["wealth_trade_correlation"] for m in metrics),
            mean_abs_inventory=_mean(
                m["dealer_mean_abs_inventory"] for m in metrics),
            mean_inventory=_mean(m["dealer_mean_inventory"] for m in metrics),
        ))
    return BaselineComparison(runs, config.seed, rows, per_run)


def write_baselines(comparison: BaselineComparison, out_dir) -> None:
    """Persist a baseline comparison as baselines.csv plus baselines.json."""
    import json
    import os
    os.makedirs(out_dir, exist_ok=True)
    fields = ("mean_total_return", "mean_wealth_volatility", "mean_sharpe",
              "mean_wealth_price_corr", "mean_wealth_trade_corr",
              "mean_abs_inventory", "mean_inventory")
    with open(os.path.join(out_dir, "baselines.csv"), "w") as fh:
        fh.write("kind," + ",".join(fields) + "\n")
        for row in comparison.rows:
            cells = [row.kind]
            for name in fields:
                value = getattr(row, name)
                cells.append("" if value is None else repr(value))
            fh.write(",".join(cells) + "\n")
    payload = {
        "runs": comparison.runs,
        "master_seed": comparison.master_seed,
        "table": [
            {"kind": row.kind,
             **{name: getattr(row, name) for name in fields}}
            for row in comparison.rows
        ],
        "per_run": comparison.per_run,
    }
    with open(os.path.join(out_dir, "baselines.json"), "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- quote-decay curve --------------------------------------------------------

def emit_skew_curve(phi_max: float = 5000.0, skew_low: float = 0.001,
                    skew_high: float = 0.004, q_values=None) -> list:
    """Raw quote-size decay size = phi_max * exp(-skew * q) for two skews.

    Returns (q, size at skew_low, size at skew_high) rows: how quickly the
    quoted size on the heavy side shrinks as inventory builds, before
    integer rounding. The higher skew decays faster, so its curve sits at
    or below the lower one for every positive inventory.
    """
    if phi_max <= 0:
        raise ValueError("phi_max must be positive")
    if skew_low < 0 or skew_high < 0:
        raise ValueError("skew rates must be non-negative")
    if q_values is None:
        q_values = range(0, 5001, 25)
    return [(q, phi_max * math.exp(-skew_low * q),
             phi_max * math.exp(-skew_high * q)) for q in q_values]


def write_skew_curve(rows, fh) -> None:
    fh.write("q,size_low_skew,size_high_skew\n")
    for q, low, high in rows:
        fh.write(f"{q},{low!r},{high!r}\n")
