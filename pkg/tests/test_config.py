import pytest

from dealersim.config import (
    SimConfig,
    apply_overrides,
    config_to_dict,
    load_config,
)


def test_defaults_validate():
    cfg = SimConfig()
    cfg.validate()
    assert cfg.n_agents == 1000
    assert cfg.effective_dealer_turn_prob() == 0.5


def test_turn_prob_none_means_uniform_draw():
    cfg = SimConfig(dealer_turn_prob=None)
    assert cfg.effective_dealer_turn_prob() == pytest.approx(1.0 / 1000.0)


def test_validate_rejects_bad_values():
    bad = [
        dict(steps=-1),
        dict(runs=0),
        dict(delta=0.0),
        dict(omega=1.5),
        dict(dealer_turn_prob=-0.1),
        dict(n_fundamentalists=0, n_chartists=0, n_noise=0),
        dict(stock_min=5, stock_max=-5),
        dict(dealer_kind="hft"),
        dict(phi_max_bid=0),
        dict(initial_price=0.0),
    ]
    for kwargs in bad:
        with pytest.raises(ValueError):
            SimConfig(**kwargs).validate()


def test_load_config_roundtrip(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text(
        "[run]\n"
        "steps = 500\n"
        "seed = abc\n"
        "[market]\n"
        "dealer_turn_prob = none\n"
        "[dealer]\n"
        "kind = ir\n"
        "phi_max_bid = 750\n"
        "[stylised]\n"
        "stock_max = 4\n"
    )
    cfg = load_config(str(path))
    assert cfg.steps == 500
    assert cfg.seed == "abc"
    assert cfg.dealer_turn_prob is None
    assert cfg.dealer_kind == "ir"
    assert cfg.phi_max_bid == 750
    assert cfg.stock_max == 4
    # untouched keys keep their defaults
    assert cfg.n_chartists == 450
    cfg.validate()


def test_load_config_rejects_unknown_key(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[market]\nslippage = 1\n")
    with pytest.raises(ValueError, match="slippage"):
        load_config(str(path))


def test_overrides_apply_in_order():
    cfg = apply_overrides(SimConfig(), [
        "dealer.kind=naive",
        "run.steps=42",
        "run.steps=43",
        "market.dealer_turn_prob=",
        "dealer.eta_bid=-0.002",
    ])
    assert cfg.dealer_kind == "naive"
    assert cfg.steps == 43
    assert cfg.dealer_turn_prob is None
    assert cfg.eta_bid == pytest.approx(-0.002)


def test_overrides_reject_malformed():
    with pytest.raises(ValueError):
        apply_overrides(SimConfig(), ["run.steps"])
    with pytest.raises(ValueError):
        apply_overrides(SimConfig(), ["exchange.fees=1"])


def test_config_to_dict_is_sorted_and_complete():
    d = config_to_dict(SimConfig())
    keys = list(d)
    assert keys == sorted(keys)
    assert d["dealer.kind"] == "as"
    assert d["stylised.stock_min"] == -2
    assert d["stylised.stock_max"] == 2
    assert d["market.dealer_turn_prob"] == 0.5
