"""Config parsing and plot-ready output tables.

Configs are YAML documents with a fixed schema (see ``parse_config``).
Outputs are comma-separated tables with a header row, floats at six
significant digits, newline-terminated, written in a deterministic
order so identical runs give byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields, replace
from typing import Any, IO, Iterable

import numpy as np
import yaml

from .cascade import CascadeResult
from .experiments import AXES, MarginTimesStats, PhaseGrid, SweepResult
from .market import ConfigError, MarketParams

EXPERIMENTS = ("run", "sweep", "phase", "diversify", "margin-times")

_MARKET_FIELDS = {f.name: f for f in fields(MarketParams)}
_INT_MARKET_FIELDS = {"n_investors", "n_shares", "diversity_s", "seed"}

DEFAULT_SWEEP = {"axis": "k", "range": {"start": 0.40, "stop": 0.65, "step": 0.005}}
DEFAULT_PHASE = {
    "axis1": {"name": "r", "range": {"start": 1.2, "stop": 2.0, "step": 0.05}},
    "axis2": {"name": "k", "range": {"start": 0.3, "stop": 0.7, "step": 0.02}},
}
DEFAULT_PHASE_RV = {
    "axis1": {"name": "r", "range": {"start": 1.2, "stop": 2.0, "step": 0.1}},
    "axis2": {"name": "v", "range": {"start": 10.0, "stop": 50.0, "step": 5.0}},
}
DEFAULT_DIVERSIFY = {"values": [2, 5, 10, 20, 40], "initial_margin_k": 0.4, "maintenance_r": 1.7}
DEFAULT_MARGIN_TIMES = {
    "initial_margin_k": 0.5,
    "maintenance_r": 1.8,
    "volatility_v": 50.0,
}
DEFAULT_REPLICAS = 20


@dataclass
class RunConfig:
    """Parsed and validated description of one CLI invocation."""

    experiment: str
    params: MarketParams
    replicas: int
    master_seed: int
    output: str
    axis: str | None = None
    values: list[float] | None = None
    axis1: str | None = None
    values1: list[float] | None = None
    axis2: str | None = None
    values2: list[float] | None = None


def expand_values(block: Any, path: str, axis: str) -> list[float]:
    """Turn an explicit value list or a start/stop/step range into values.

    Ranges include both endpoints; the step must advance from start to
    within half a step of stop. Values on the s axis must be integers.
    """
    if isinstance(block, dict):
        unknown = set(block) - {"start", "stop", "step"}
        if unknown:
            raise ConfigError(f"{path}: unknown range key {sorted(unknown)[0]!r}")
        try:
            start, stop, step = (float(block[key]) for key in ("start", "stop", "step"))
        except KeyError as missing:
            raise ConfigError(f"{path}: range needs start, stop and step, missing {missing}")
        if step <= 0:
            raise ConfigError(f"{path}: range step must be > 0, got {step!r}")
        if stop < start:
            raise ConfigError(f"{path}: range stop must be >= start, got {start!r}..{stop!r}")
        count = int((stop - start) / step + 0.5) + 1
        values = [start + i * step for i in range(count)]
    elif isinstance(block, (list, tuple)):
        if not block:
            raise ConfigError(f"{path}: value list must not be empty")
        values = [float(v) for v in block]
    else:
        raise ConfigError(f"{path}: expected a value list or a start/stop/step range")
    if axis == "s":
        for v in values:
            if v != int(v):
                raise ConfigError(f"{path}: s values must be integers, got {v!r}")
        return [int(v) for v in values]
    return values


def _check_keys(block: dict, path: str, allowed: Iterable[str]) -> None:
    allowed = set(allowed)
    for key in block:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}: unknown key")


def _market_params(block: dict) -> MarketParams:
    _check_keys(block, "market", _MARKET_FIELDS)
    kwargs: dict[str, Any] = {}
    for name, value in block.items():
        if name in _INT_MARKET_FIELDS:
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"market.{name}: expected an integer, got {value!r}")
            kwargs[name] = value
        else:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"market.{name}: expected a number, got {value!r}")
            kwargs[name] = float(value)
    return MarketParams(**kwargs)


def _axis_name(raw: Any, path: str) -> str:
    if raw not in AXES:
        raise ConfigError(f"{path}: axis must be one of {', '.join(AXES)}, got {raw!r}")
    return raw


def parse_config(text: str, experiment: str | None = None) -> RunConfig:
    """Parse and validate a YAML config document.

    Schema (all keys optional unless noted):

    - ``experiment``: one of run, sweep, phase, diversify, margin-times.
      Required here unless the caller passes ``experiment`` (the CLI
      passes its subcommand); when both are present they must agree.
    - ``market``: MarketParams fields to override.
    - ``seed``: master seed (also the market seed for ``run``).
    - ``replicas``: replica count for averaged experiments.
    - ``output``: output file path.
    - ``sweep``: ``axis`` plus ``values`` or ``range {start, stop, step}``.
    - ``phase``: ``axis1`` and ``axis2`` blocks, each ``name`` plus
      ``values`` or ``range``.
    - ``diversify``: ``values`` or ``range`` over s.

    Experiment blocks other than the selected one are rejected rather
    than silently ignored.
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}")
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError(f"config root must be a mapping, got {type(doc).__name__}")
    _check_keys(doc, "config", ("experiment", "market", "seed", "replicas", "output",
                                "sweep", "phase", "diversify"))

    declared = doc.get("experiment")
    if declared is not None and declared not in EXPERIMENTS:
        raise ConfigError(
            f"experiment: must be one of {', '.join(EXPERIMENTS)}, got {declared!r}"
        )
    if experiment is None:
        experiment = declared
    elif declared is not None and declared != experiment:
        raise ConfigError(
            f"experiment: config says {declared!r} but {experiment!r} was requested"
        )
    if experiment is None:
        raise ConfigError("experiment: no selector given (set the key or pass a subcommand)")

    for block_name in ("sweep", "phase", "diversify"):
        if block_name in doc and block_name != experiment:
            raise ConfigError(f"{block_name}: block present but experiment is {experiment!r}")

    market_block = doc.get("market", {})
    if not isinstance(market_block, dict):
        raise ConfigError("market: expected a mapping of parameter names to values")

    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigError(f"seed: expected an integer in [0, 2**64), got {seed!r}")
    replicas = doc.get("replicas", DEFAULT_REPLICAS)
    if isinstance(replicas, bool) or not isinstance(replicas, int) or replicas < 1:
        raise ConfigError(f"replicas: expected an integer >= 1, got {replicas!r}")
    output = doc.get("output", f"{experiment}.csv")
    if not isinstance(output, str) or not output:
        raise ConfigError(f"output: expected a non-empty path, got {output!r}")

    cfg = RunConfig(
        experiment=experiment,
        params=_market_params(dict(market_block)),
        replicas=replicas,
        master_seed=seed,
        output=output,
    )

    if experiment == "run":
        cfg.params = replace(cfg.params, seed=seed)
    elif experiment == "sweep":
        block = doc.get("sweep", DEFAULT_SWEEP)
        if not isinstance(block, dict):
            raise ConfigError("sweep: expected a mapping")
        _check_keys(block, "sweep", ("axis", "values", "range"))
        if "values" in block and "range" in block:
            raise ConfigError("sweep: give either values or range, not both")
        cfg.axis = _axis_name(block.get("axis", "k"), "sweep.axis")
        spec = block.get("values", block.get("range"))
        if spec is None:
            raise ConfigError("sweep: needs values or range")
        cfg.values = expand_values(spec, "sweep", cfg.axis)
    elif experiment == "phase":
        block = doc.get("phase", DEFAULT_PHASE)
        if not isinstance(block, dict):
            raise ConfigError("phase: expected a mapping")
        _check_keys(block, "phase", ("axis1", "axis2"))
        for attr_axis, attr_values, key in (("axis1", "values1", "axis1"),
                                            ("axis2", "values2", "axis2")):
            sub = block.get(key)
            if not isinstance(sub, dict):
                raise ConfigError(f"phase.{key}: expected a mapping with name and values/range")
            _check_keys(sub, f"phase.{key}", ("name", "values", "range"))
            if "values" in sub and "range" in sub:
                raise ConfigError(f"phase.{key}: give either values or range, not both")
            name = _axis_name(sub.get("name"), f"phase.{key}.name")
            spec = sub.get("values", sub.get("range"))
            if spec is None:
                raise ConfigError(f"phase.{key}: needs values or range")
            setattr(cfg, attr_axis, name)
            setattr(cfg, attr_values, expand_values(spec, f"phase.{key}", name))
        if cfg.axis1 == cfg.axis2:
            raise ConfigError("phase: axis1 and axis2 must differ")
    elif experiment == "diversify":
        block = doc.get("diversify", {"values": DEFAULT_DIVERSIFY["values"]})
        if not isinstance(block, dict):
            raise ConfigError("diversify: expected a mapping")
        _check_keys(block, "diversify", ("values", "range"))
        if "values" in block and "range" in block:
            raise ConfigError("diversify: give either values or range, not both")
        spec = block.get("values", block.get("range"))
        if spec is None:
            raise ConfigError("diversify: needs values or range")
        cfg.axis = "s"
        cfg.values = expand_values(spec, "diversify", "s")
    return cfg


def load_config(path: str, experiment: str | None = None) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}")
    return parse_config(text, experiment)


def fmt(value: Any) -> str:
    """Deterministic cell format: ints plain, floats at 6 significant digits."""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return format(float(value), ".6g")


def _write_rows(target: str | IO[str], header: list[str], rows: Iterable[list[str]]) -> int:
    """Write a comma-separated table; returns the number of data rows."""
    count = 0
    if hasattr(target, "write"):
        fh = target
        close = False
    else:
        fh = open(target, "w", encoding="utf-8", newline="\n")
        close = True
    try:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
            count += 1
    finally:
        if close:
            fh.close()
    return count


def write_timeseries(target: str | IO[str], result: CascadeResult) -> int:
    """One row per recorded time step, from t=0 through t=tau."""
    rows = []
    for t in range(result.tau + 1):
        liquidations = 0 if t < 2 else int(result.steps[t - 2].liquidated.size)
        rows.append([
            str(t),
            fmt(result.index_trajectory[t]),
            str(int(result.active_trajectory[t])),
            str(liquidations),
        ])
    return _write_rows(target, ["step", "market_index", "active_investors", "liquidations"], rows)


def write_grid(target: str | IO[str], result: SweepResult | PhaseGrid | MarginTimesStats) -> int:
    """Long-format aggregate table for any averaged experiment."""
    if isinstance(result, SweepResult):
        header = [result.axis, "mean_tau", "std_tau", "mean_p_inf", "std_p_inf",
                  "mean_n_inf", "std_n_inf", "replicas"]
        stats = (result.mean_tau(), result.std_tau(), result.mean_p_inf(),
                 result.std_p_inf(), result.mean_n_inf(), result.std_n_inf())
        rows = []
        for i, value in enumerate(result.values):
            rows.append([fmt(value)] + [fmt(col[i]) for col in stats] + [str(result.replicas)])
        return _write_rows(target, header, rows)
    if isinstance(result, PhaseGrid):
        header = [result.axis1, result.axis2, "mean_tau", "mean_p_inf", "mean_n_inf", "replicas"]
        rows = []
        for i, v1 in enumerate(result.values1):
            for j, v2 in enumerate(result.values2):
                rows.append([
                    fmt(v1), fmt(v2),
                    fmt(result.mean_tau[i, j]), fmt(result.mean_p_inf[i, j]),
                    fmt(result.mean_n_inf[i, j]), str(result.replicas),
                ])
        return _write_rows(target, header, rows)
    if isinstance(result, MarginTimesStats):
        header = ["margin_times", "share_count", "mean_relative_decline", "replicas"]
        rows = []
        for i in range(result.degrees.size):
            rows.append([
                str(int(result.degrees[i])), str(int(result.share_counts[i])),
                fmt(result.mean_decline[i]), str(result.replicas),
            ])
        return _write_rows(target, header, rows)
    raise TypeError(f"no table writer for {type(result).__name__}")


def summarize(result: CascadeResult | SweepResult | PhaseGrid | MarginTimesStats) -> dict:
    """Machine-readable summary of any result, JSON-friendly types only."""
    if isinstance(result, CascadeResult):
        return {
            "kind": "cascade",
            "tau": int(result.tau),
            "p_inf": float(result.p_inf),
            "n_inf": int(result.n_inf),
            "clamped": bool(result.clamped),
        }
    if isinstance(result, SweepResult):
        return {
            "kind": "sweep",
            "axis": result.axis,
            "values": [float(v) for v in result.values],
            "mean_tau": [float(x) for x in result.mean_tau()],
            "std_tau": [float(x) for x in result.std_tau()],
            "mean_p_inf": [float(x) for x in result.mean_p_inf()],
            "std_p_inf": [float(x) for x in result.std_p_inf()],
            "mean_n_inf": [float(x) for x in result.mean_n_inf()],
            "std_n_inf": [float(x) for x in result.std_n_inf()],
            "replicas": result.replicas,
        }
    if isinstance(result, PhaseGrid):
        return {
            "kind": "phase",
            "axis1": result.axis1,
            "values1": [float(v) for v in result.values1],
            "axis2": result.axis2,
            "values2": [float(v) for v in result.values2],
            "mean_tau": [[float(x) for x in row] for row in result.mean_tau],
            "mean_p_inf": [[float(x) for x in row] for row in result.mean_p_inf],
            "mean_n_inf": [[float(x) for x in row] for row in result.mean_n_inf],
            "replicas": result.replicas,
        }
    if isinstance(result, MarginTimesStats):
        return {
            "kind": "margin-times",
            "margin_times": [int(d) for d in result.degrees],
            "share_counts": [int(c) for c in result.share_counts],
            "mean_relative_decline": [float(x) for x in result.mean_decline],
            "replicas": result.replicas,
        }
    raise TypeError(f"no summary for {type(result).__name__}")


def summary_json(result, **extra) -> str:
    payload = summarize(result)
    payload.update(extra)
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))
