"""Config schema, range expansion, table writers."""

import io as stringio

import numpy as np
import pytest

from margincascade import ConfigError, MarketParams, build_market, run_cascade
from margincascade.experiments import MarginTimesStats, PhaseGrid, SweepResult
from margincascade.io import (
    expand_values,
    fmt,
    parse_config,
    write_grid,
    write_timeseries,
)


def test_minimal_config_fills_defaults():
    cfg = parse_config("experiment: run\n")
    assert cfg.experiment == "run"
    assert cfg.params == MarketParams(seed=0)
    assert cfg.replicas == 20
    assert cfg.master_seed == 0
    assert cfg.output == "run.csv"


def test_full_sweep_config_round_trip():
    text = """
experiment: sweep
seed: 99
replicas: 7
output: tau_of_k.csv
market:
  n_investors: 5000
  n_shares: 500
  diversity_s: 10
  initial_margin_k: 0.45
  maintenance_r: 1.5
  volatility_v: 25
sweep:
  axis: k
  range: {start: 0.40, stop: 0.65, step: 0.005}
"""
    cfg = parse_config(text)
    assert cfg.params.n_investors == 5000
    assert cfg.params.maintenance_r == 1.5
    assert cfg.master_seed == 99
    assert cfg.replicas == 7
    assert cfg.axis == "k"
    assert len(cfg.values) == 51
    assert cfg.values[0] == pytest.approx(0.40)
    assert cfg.values[-1] == pytest.approx(0.65)
    assert cfg.output == "tau_of_k.csv"


def test_selector_rules():
    with pytest.raises(ConfigError, match="selector"):
        parse_config("market: {diversity_s: 5}\n")
    with pytest.raises(ConfigError, match="experiment"):
        parse_config("experiment: sweep\n", experiment="run")
    cfg = parse_config("", experiment="diversify")
    assert cfg.experiment == "diversify"
    assert cfg.values == [2, 5, 10, 20, 40]


def test_foreign_experiment_block_is_rejected():
    with pytest.raises(ConfigError, match="sweep"):
        parse_config("experiment: run\nsweep: {axis: k, values: [0.5]}\n")


def test_unknown_keys_are_reported_with_paths():
    with pytest.raises(ConfigError, match="config.outputs"):
        parse_config("experiment: run\noutputs: x.csv\n")
    with pytest.raises(ConfigError, match="market.n_invstors"):
        parse_config("experiment: run\nmarket: {n_invstors: 10}\n")
    with pytest.raises(ConfigError, match="sweep.stepp"):
        parse_config("experiment: sweep\nsweep: {axis: k, stepp: 1}\n")


def test_constraint_violations_name_the_field():
    with pytest.raises(ConfigError, match="initial_margin_k"):
        parse_config("experiment: run\nmarket: {initial_margin_k: 1.0}\n")
    with pytest.raises(ConfigError, match="diversity_s"):
        parse_config("experiment: run\nmarket: {diversity_s: 2000}\n")
    with pytest.raises(ConfigError, match="seed"):
        parse_config("experiment: run\nseed: -4\n")
    with pytest.raises(ConfigError, match="replicas"):
        parse_config("experiment: sweep\nreplicas: 0\nsweep: {axis: k, values: [0.5]}\n")


def test_malformed_yaml_is_a_config_error():
    with pytest.raises(ConfigError, match="YAML"):
        parse_config("experiment: [unclosed\n")
    with pytest.raises(ConfigError, match="mapping"):
        parse_config("- just\n- a list\n")


def test_range_expansion_rules():
    values = expand_values({"start": 0.40, "stop": 0.65, "step": 0.005}, "sweep", "k")
    assert len(values) == 51
    assert values[0] == 0.40
    assert values[-1] == pytest.approx(0.65)
    assert expand_values({"start": 2, "stop": 10, "step": 4}, "d", "s") == [2, 6, 10]
    assert expand_values([1, 2, 3], "d", "s") == [1, 2, 3]
    with pytest.raises(ConfigError, match="step"):
        expand_values({"start": 1, "stop": 2, "step": 0}, "sweep", "k")
    with pytest.raises(ConfigError, match="stop"):
        expand_values({"start": 2, "stop": 1, "step": 0.5}, "sweep", "k")
    with pytest.raises(ConfigError, match="integers"):
        expand_values([2.5], "diversify", "s")
    with pytest.raises(ConfigError, match="empty"):
        expand_values([], "sweep", "k")
    with pytest.raises(ConfigError, match="missing"):
        expand_values({"start": 1, "stop": 2}, "sweep", "k")


def test_phase_axis_blocks_must_differ():
    text = """
experiment: phase
phase:
  axis1: {name: r, values: [1.5]}
  axis2: {name: r, values: [1.6]}
"""
    with pytest.raises(ConfigError, match="differ"):
        parse_config(text)


def test_fmt_is_stable():
    assert fmt(3) == "3"
    assert fmt(np.int64(41)) == "41"
    assert fmt(0.5) == "0.5"
    assert fmt(1895.3333333) == "1895.33"
    assert fmt(np.float64(0.0051234567)) == "0.00512346"
    assert fmt(True) == "1"


def test_timeseries_has_one_row_per_step():
    params = MarketParams(n_investors=200, n_shares=40, diversity_s=5,
                          initial_margin_k=0.4, maintenance_r=1.8, seed=3)
    result = run_cascade(build_market(params), params)
    buffer = stringio.StringIO()
    rows = write_timeseries(buffer, result)
    lines = buffer.getvalue().splitlines()
    assert rows == result.tau + 1
    assert lines[0] == "step,market_index,active_investors,liquidations"
    assert len(lines) == result.tau + 2
    first = lines[1].split(",")
    assert first[0] == "0" and first[2] == "200" and first[3] == "0"
    assert buffer.getvalue().endswith("\n")


def test_stable_run_writes_exactly_two_rows():
    params = MarketParams(n_investors=50, n_shares=10, diversity_s=2,
                          maintenance_r=0.0, seed=3)
    result = run_cascade(build_market(params), params)
    assert result.tau == 1
    buffer = stringio.StringIO()
    assert write_timeseries(buffer, result) == 2


def test_sweep_table_layout():
    result = SweepResult(
        axis="k", values=[0.4, 0.45],
        tau=np.array([[3, 5], [1, 1]]),
        p_inf=np.array([[340.0, 350.0], [1890.0, 1900.0]]),
        n_inf=np.array([[0, 0], [400, 400]]),
        master_seed=0,
    )
    buffer = stringio.StringIO()
    rows = write_grid(buffer, result)
    lines = buffer.getvalue().splitlines()
    assert rows == 2
    assert lines[0] == "k,mean_tau,std_tau,mean_p_inf,std_p_inf,mean_n_inf,std_n_inf,replicas"
    assert lines[1] == "0.4,4,1,345,5,0,0,2"
    assert lines[2] == "0.45,1,0,1895,5,400,0,2"


def test_phase_table_layout():
    grid = PhaseGrid(
        axis1="r", values1=[1.5, 1.6], axis2="k", values2=[0.3],
        mean_tau=np.array([[2.5], [1.0]]),
        mean_p_inf=np.array([[1000.0], [1890.5]]),
        mean_n_inf=np.array([[10.0], [400.0]]),
        replicas=4, master_seed=0,
    )
    buffer = stringio.StringIO()
    rows = write_grid(buffer, grid)
    lines = buffer.getvalue().splitlines()
    assert rows == 2
    assert lines[0] == "r,k,mean_tau,mean_p_inf,mean_n_inf,replicas"
    assert lines[1] == "1.5,0.3,2.5,1000,10,4"
    assert lines[2] == "1.6,0.3,1,1890.5,400,4"


def test_margin_times_table_layout():
    stats = MarginTimesStats(
        degrees=np.array([3, 4, 6]),
        share_counts=np.array([5, 9, 2]),
        mean_decline=np.array([0.125, 0.25, 0.875]),
        replicas=4, master_seed=0,
    )
    buffer = stringio.StringIO()
    rows = write_grid(buffer, stats)
    lines = buffer.getvalue().splitlines()
    assert rows == 3
    assert lines[0] == "margin_times,share_count,mean_relative_decline,replicas"
    assert lines[1] == "3,5,0.125,4"


def test_rewriting_is_byte_identical(tmp_path):
    params = MarketParams(n_investors=150, n_shares=30, diversity_s=4,
                          initial_margin_k=0.42, seed=17)
    result = run_cascade(build_market(params), params)
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    write_timeseries(str(first), result)
    twin = run_cascade(build_market(params), params)
    write_timeseries(str(second), twin)
    assert first.read_bytes() == second.read_bytes()
