"""Simulation configuration: defaults, INI files, dotted overrides.

Defaults reproduce the headline parametrisation (full scale: 100 runs of
40,000 steps); the CLI swaps in desk-scale run counts for interactive use.
Config files are INI sections; any key can be overridden on the command
line as ``section.key=value``.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, fields


@dataclass
class SimConfig:
    # run
    steps: int = 40_000
    runs: int = 100
    seed: str = "1"
    workers: int = 1
    # market
    delta: float = 0.1
    tau: int = 50
    omega: float = 0.1
    ewma_alpha: float = 0.25
    # chance per timestamp that the dealer (rather than a stylised trader)
    # acts; None means 1/N with N the total agent count
    dealer_turn_prob: float | None = 0.5
    initial_price: float = 1000.0
    # fundamental
    fundamental_initial: float = 1000.0
    jump_size: float = 0.002
    jump_prob: float = 0.001
    # population
    n_fundamentalists: int = 450
    n_chartists: int = 450
    n_noise: int = 99
    # stylised traders
    stylised_gamma: float = 10.0
    sigma_f: float = 0.0005
    sigma_c: float = 0.001
    sigma_n: float = 0.0005
    sigma_eps: float = 0.0005
    lookback_max: int = 100
    # share endowments sized so initial stock value matches the cash range;
    # share-count ranges in the thousands make sell flow structurally
    # unbackable by cash and the price collapses regardless of dealer
    stock_min: int = -2
    stock_max: int = 2
    cash_min: float = 2000.0
    cash_max: float = 10000.0
    # dealer
    dealer_kind: str = "as"
    dealer_gamma: float = 0.1
    dealer_kappa: float = 0.6
    phi_max_bid: int = 5000
    phi_max_ask: int = 5000
    eta_bid: float | None = None       # None -> log(1/phi)/phi per side
    eta_ask: float | None = None
    variance_scale: float = 24.0 * 60.0
    dealer_cash: float = 5_000_000.0

    def validate(self) -> None:
        if self.steps < 0 or self.runs < 1 or self.workers < 1:
            raise ValueError("steps must be >= 0, runs and workers >= 1")
        if self.delta <= 0:
            raise ValueError("tick size must be positive")
        if self.tau < 0:
            raise ValueError("expiry batch size must be non-negative")
        for name in ("omega", "ewma_alpha", "jump_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.dealer_turn_prob is not None and not 0.0 <= self.dealer_turn_prob <= 1.0:
            raise ValueError("dealer_turn_prob must lie in [0, 1]")
        if min(self.n_fundamentalists, self.n_chartists, self.n_noise) < 0:
            raise ValueError("population counts must be non-negative")
        if self.n_fundamentalists + self.n_chartists + self.n_noise < 1:
            raise ValueError("at least one stylised trader is required")
        if self.initial_price <= 0 or self.fundamental_initial <= 0:
            raise ValueError("initial prices must be positive")
        if self.stock_min > self.stock_max or self.cash_min > self.cash_max:
            raise ValueError("endowment ranges must be ordered")
        if self.cash_min < 0:
            raise ValueError("initial cash must be non-negative")
        if self.dealer_kind not in ("as", "ir", "naive"):
            raise ValueError(f"unknown dealer kind {self.dealer_kind!r}")
        if self.dealer_gamma <= 0 or self.dealer_kappa <= 0:
            raise ValueError("dealer gamma and kappa must be positive")
        if self.phi_max_bid < 1 or self.phi_max_ask < 1:
            raise ValueError("max quote sizes must be at least 1")
        if self.lookback_max < 1:
            raise ValueError("chartist lookback bound must be at least 1")

    @property
    def n_agents(self) -> int:
        return 1 + self.n_fundamentalists + self.n_chartists + self.n_noise

    def effective_dealer_turn_prob(self) -> float:
        if self.dealer_turn_prob is None:
            return 1.0 / self.n_agents
        return self.dealer_turn_prob


# INI layout: (section, key) -> dataclass field
_LAYOUT = {
    ("run", "steps"): "steps",
    ("run", "runs"): "runs",
    ("run", "seed"): "seed",
    ("run", "workers"): "workers",
    ("market", "delta"): "delta",
    ("market", "tau"): "tau",
    ("market", "omega"): "omega",
    ("market", "ewma_alpha"): "ewma_alpha",
    ("market", "dealer_turn_prob"): "dealer_turn_prob",
    ("market", "initial_price"): "initial_price",
    ("fundamental", "initial"): "fundamental_initial",
    ("fundamental", "jump_size"): "jump_size",
    ("fundamental", "jump_prob"): "jump_prob",
    ("population", "fundamentalists"): "n_fundamentalists",
    ("population", "chartists"): "n_chartists",
    ("population", "noise"): "n_noise",
    ("stylised", "gamma"): "stylised_gamma",
    ("stylised", "sigma_f"): "sigma_f",
    ("stylised", "sigma_c"): "sigma_c",
    ("stylised", "sigma_n"): "sigma_n",
    ("stylised", "sigma_eps"): "sigma_eps",
    ("stylised", "lookback_max"): "lookback_max",
    ("stylised", "stock_min"): "stock_min",
    ("stylised", "stock_max"): "stock_max",
    ("stylised", "cash_min"): "cash_min",
    ("stylised", "cash_max"): "cash_max",
    ("dealer", "kind"): "dealer_kind",
    ("dealer", "gamma"): "dealer_gamma",
    ("dealer", "kappa"): "dealer_kappa",
    ("dealer", "phi_max_bid"): "phi_max_bid",
    ("dealer", "phi_max_ask"): "phi_max_ask",
    ("dealer", "eta_bid"): "eta_bid",
    ("dealer", "eta_ask"): "eta_ask",
    ("dealer", "variance_scale"): "variance_scale",
    ("dealer", "cash"): "dealer_cash",
}

_FIELD_TYPES = {f.name: f.type for f in fields(SimConfig)}
_OPTIONAL_FLOATS = {"dealer_turn_prob", "eta_bid", "eta_ask"}


def _parse_value(field_name: str, text: str):
    text = text.strip()
    if field_name in _OPTIONAL_FLOATS:
        return None if text in ("", "none", "auto") else float(text)
    ftype = _FIELD_TYPES[field_name]
    if ftype == "int":
        return int(text)
    if ftype == "float":
        return float(text)
    return text


def load_config(path: str, base: SimConfig | None = None) -> SimConfig:
    """Read an INI config file on top of defaults (or a given base)."""
    cfg = base if base is not None else SimConfig()
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    known = {}
    for (section, key), field_name in _LAYOUT.items():
        known.setdefault(section, set()).add(key)
        if parser.has_option(section, key):
            setattr(cfg, field_name, _parse_value(field_name, parser.get(section, key)))
    for section in parser.sections():
        for key in parser.options(section):
            if key not in known.get(section, set()):
                raise ValueError(f"unknown config key [{section}] {key}")
    return cfg


def apply_overrides(cfg: SimConfig, pairs) -> SimConfig:
    """Apply ``section.key=value`` strings in order."""
    by_dotted = {f"{s}.{k}": field for (s, k), field in _LAYOUT.items()}
    for pair in pairs:
        if "=" not in pair:
            raise ValueError(f"override {pair!r} is not of the form section.key=value")
        dotted, text = pair.split("=", 1)
        field_name = by_dotted.get(dotted.strip())
        if field_name is None:
            raise ValueError(f"unknown config key {dotted.strip()!r}")
        setattr(cfg, field_name, _parse_value(field_name, text))
    return cfg


def config_to_dict(cfg: SimConfig) -> dict:
    """Flat dotted-key mapping, stable order, for metadata echoes."""
    out = {}
    for (section, key), field_name in sorted(_LAYOUT.items()):
        out[f"{section}.{key}"] = getattr(cfg, field_name)
    return out
