"""Replica-averaged experiments over market parameters.

Seeding scheme: a cell's sub-seed is a pure function of (master_seed,
experiment tag, replica index), hashed through numpy's SeedSequence.
The tag names the swept axis (or axis pair) but never the value, so
along any swept axis every value sees the same replica seed set. That
shared-seed coupling is what makes per-seed monotonicity assertable:
raising the maintenance requirement r can only liquidate more on the
same realization, raising the initial margin k only less.

Cells are independent, so any one of them can be recomputed in
isolation and must reproduce its contribution to the aggregates
exactly. Aggregation is always in value index order.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .cascade import run_cascade
from .market import BipartiteMarket, ConfigError, MarketParams, build_market, margin_times

AXES = ("k", "r", "v", "s")

_AXIS_FIELDS = {
    "k": "initial_margin_k",
    "r": "maintenance_r",
    "v": "volatility_v",
    "s": "diversity_s",
}


def derive_seed(master_seed: int, tag: str, replica: int) -> int:
    """Deterministic 64-bit sub-seed for one replica of one experiment."""
    ss = np.random.SeedSequence((master_seed, zlib.crc32(tag.encode("ascii")), replica))
    return int(ss.generate_state(1, np.uint64)[0])


def params_for(base: MarketParams, assignments: dict[str, float], seed: int) -> MarketParams:
    """Base parameters with axis values substituted and the seed set.

    Raises ConfigError for an unknown axis, a non-integral diversity
    value, or any violated parameter constraint, before anything runs.
    """
    fields: dict[str, object] = {"seed": seed}
    for axis, value in assignments.items():
        if axis not in _AXIS_FIELDS:
            raise ConfigError(f"unknown sweep axis {axis!r}, expected one of {AXES}")
        if axis == "s":
            if float(value) != int(value):
                raise ConfigError(f"diversity_s values must be integers, got {value!r}")
            value = int(value)
        else:
            value = float(value)
        fields[_AXIS_FIELDS[axis]] = value
    return replace(base, **fields)


def run_point(
    base: MarketParams, assignments: dict[str, float], tag: str, master_seed: int, replica: int
) -> tuple[int, float, int]:
    """Build, shock and cascade one cell replica; return (tau, p_inf, n_inf)."""
    params = params_for(base, assignments, derive_seed(master_seed, tag, replica))
    result = run_cascade(build_market(params), params)
    return result.tau, result.p_inf, result.n_inf


@dataclass(frozen=True)
class SweepSpec:
    """One-axis sweep: every value runs the same replica seed set."""

    base: MarketParams
    axis: str
    values: Sequence[float]
    replicas: int = 20
    master_seed: int = 0


@dataclass
class SweepResult:
    """Raw per-replica outcomes of a sweep, one row per axis value."""

    axis: str
    values: list[float]
    tau: np.ndarray
    p_inf: np.ndarray
    n_inf: np.ndarray
    master_seed: int

    @property
    def replicas(self) -> int:
        return self.tau.shape[1]

    def mean_tau(self) -> np.ndarray:
        return self.tau.mean(axis=1)

    def std_tau(self) -> np.ndarray:
        return self.tau.std(axis=1)

    def mean_p_inf(self) -> np.ndarray:
        return self.p_inf.mean(axis=1)

    def std_p_inf(self) -> np.ndarray:
        return self.p_inf.std(axis=1)

    def mean_n_inf(self) -> np.ndarray:
        return self.n_inf.mean(axis=1)

    def std_n_inf(self) -> np.ndarray:
        return self.n_inf.std(axis=1)


def sweep_tag(axis: str) -> str:
    return f"axis:{axis}"


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Run a one-axis sweep with replica averaging.

    All (value, replica) parameter sets are validated up front so a bad
    value fails before any simulation has run.
    """
    if spec.replicas < 1:
        raise ConfigError(f"replicas must be >= 1, got {spec.replicas}")
    if len(spec.values) == 0:
        raise ConfigError("sweep needs at least one value")
    tag = sweep_tag(spec.axis)
    seeds = [derive_seed(spec.master_seed, tag, rep) for rep in range(spec.replicas)]
    for value in spec.values:
        for seed in seeds:
            params_for(spec.base, {spec.axis: value}, seed)
    shape = (len(spec.values), spec.replicas)
    tau = np.zeros(shape, dtype=np.int64)
    p_inf = np.zeros(shape)
    n_inf = np.zeros(shape, dtype=np.int64)
    for i, value in enumerate(spec.values):
        for rep in range(spec.replicas):
            tau[i, rep], p_inf[i, rep], n_inf[i, rep] = run_point(
                spec.base, {spec.axis: value}, tag, spec.master_seed, rep
            )
    return SweepResult(
        axis=spec.axis,
        values=list(spec.values),
        tau=tau,
        p_inf=p_inf,
        n_inf=n_inf,
        master_seed=spec.master_seed,
    )


@dataclass(frozen=True)
class CriticalPoint:
    """Location of the mean-tau maximum of a sweep."""

    axis: str
    value: float
    index: int
    mean_tau: float
    tied: bool


def detect_critical(result: SweepResult) -> CriticalPoint | None:
    """Axis value maximizing mean tau, or None when nothing cascaded.

    Mean tau == 1 everywhere means no replica ever liquidated, so there
    is no transition to locate. Exact ties are broken toward the stable
    side of the axis (largest k, smallest r/v/s) and flagged.
    """
    means = result.mean_tau()
    peak = means.max()
    if peak == 1.0:
        return None
    tied_idx = np.flatnonzero(means == peak)
    if result.axis == "k":
        pick = max(tied_idx, key=lambda i: result.values[i])
    else:
        pick = min(tied_idx, key=lambda i: result.values[i])
    return CriticalPoint(
        axis=result.axis,
        value=result.values[pick],
        index=int(pick),
        mean_tau=float(peak),
        tied=tied_idx.size > 1,
    )


@dataclass
class PhaseGrid:
    """Replica-averaged outcomes on a two-axis grid.

    Cell [i, j] corresponds to (values1[i], values2[j]); the whole grid
    shares one replica seed set.
    """

    axis1: str
    values1: list[float]
    axis2: str
    values2: list[float]
    mean_tau: np.ndarray
    mean_p_inf: np.ndarray
    mean_n_inf: np.ndarray
    replicas: int
    master_seed: int


def phase_tag(axis1: str, axis2: str) -> str:
    return f"axis:{axis1}+{axis2}"


def phase_diagram(
    base: MarketParams,
    axis1: str,
    values1: Sequence[float],
    axis2: str,
    values2: Sequence[float],
    replicas: int = 20,
    master_seed: int = 0,
) -> PhaseGrid:
    """Mean tau / p_inf / n_inf over a two-axis parameter grid."""
    if axis1 == axis2:
        raise ConfigError(f"phase diagram axes must differ, got {axis1!r} twice")
    if replicas < 1:
        raise ConfigError(f"replicas must be >= 1, got {replicas}")
    if len(values1) == 0 or len(values2) == 0:
        raise ConfigError("phase diagram needs at least one value on each axis")
    tag = phase_tag(axis1, axis2)
    seeds = [derive_seed(master_seed, tag, rep) for rep in range(replicas)]
    for v1 in values1:
        for v2 in values2:
            for seed in seeds:
                params_for(base, {axis1: v1, axis2: v2}, seed)
    shape = (len(values1), len(values2))
    mean_tau = np.zeros(shape)
    mean_p = np.zeros(shape)
    mean_n = np.zeros(shape)
    for i, v1 in enumerate(values1):
        for j, v2 in enumerate(values2):
            cell = np.zeros((replicas, 3))
            for rep in range(replicas):
                cell[rep] = run_point(base, {axis1: v1, axis2: v2}, tag, master_seed, rep)
            mean_tau[i, j] = cell[:, 0].mean()
            mean_p[i, j] = cell[:, 1].mean()
            mean_n[i, j] = cell[:, 2].mean()
    return PhaseGrid(
        axis1=axis1,
        values1=list(values1),
        axis2=axis2,
        values2=list(values2),
        mean_tau=mean_tau,
        mean_p_inf=mean_p,
        mean_n_inf=mean_n,
        replicas=replicas,
        master_seed=master_seed,
    )


def diversification_sweep(
    base: MarketParams,
    s_values: Sequence[int],
    replicas: int = 20,
    master_seed: int = 0,
) -> SweepResult:
    """Sweep the number of distinct shares per investor."""
    return run_sweep(
        SweepSpec(base=base, axis="s", values=s_values, replicas=replicas, master_seed=master_seed)
    )


@dataclass
class MarginTimesStats:
    """Relative price decline binned by how many investors hold a share.

    One integer bin per observed margin-times value; ``share_counts``
    is the histogram over (share, replica) observations and sums to
    n_shares * replicas. ``mean_decline`` is the average of
    (p0 - p_inf) / p0 within the bin.
    """

    degrees: np.ndarray
    share_counts: np.ndarray
    mean_decline: np.ndarray
    replicas: int
    master_seed: int


def margin_times_study(
    base: MarketParams, replicas: int = 20, master_seed: int = 0
) -> MarginTimesStats:
    """Relate each share's final relative decline to its margin-times count."""
    if replicas < 1:
        raise ConfigError(f"replicas must be >= 1, got {replicas}")
    tag = "margin-times"
    decline_sums = np.zeros(0)
    counts = np.zeros(0, dtype=np.int64)
    for rep in range(replicas):
        params = replace(base, seed=derive_seed(master_seed, tag, rep))
        market = build_market(params)
        degrees = margin_times(market)
        run_cascade(market, params)
        decline = (market.initial_prices - market.current_prices) / market.initial_prices
        width = degrees.max() + 1
        if width > decline_sums.size:
            decline_sums = np.concatenate([decline_sums, np.zeros(width - decline_sums.size)])
            counts = np.concatenate([counts, np.zeros(width - counts.size, dtype=np.int64)])
        decline_sums[:width] += np.bincount(degrees, weights=decline, minlength=width)
        counts[:width] += np.bincount(degrees, minlength=width)
    observed = np.flatnonzero(counts)
    return MarginTimesStats(
        degrees=observed,
        share_counts=counts[observed],
        mean_decline=decline_sums[observed] / counts[observed],
        replicas=replicas,
        master_seed=master_seed,
    )
