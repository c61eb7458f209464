"""Shock and forced-liquidation dynamics.

Time accounting: t=0 is the freshly built market, t=1 applies the
exogenous price shock, and margin checks start at t=2. Each step is
synchronous: every active account is tested against the prices left by
the previous step, every failing account is liquidated at once (selling
one unit of each of its holdings exactly once, then gone for good), and
only then do prices absorb the sell orders. The run stops at the first
step that liquidates nobody; that probe step is not counted, so

    tau = 1 + number of steps with at least one liquidation

and tau == 1 means the shock triggered nothing.

An account is liquidated when its maintenance ratio

    sum of current prices over holdings / loan      (loan = (1-k) * initial value)

drops strictly below the maintenance requirement r. Prices respond
linearly to selling, p <- max(0, p - eta * sell_orders), and the clamp
at zero is recorded so that exact bookkeeping checks can exclude
clamped runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .market import BipartiteMarket, MarketParams, market_index


class StateError(RuntimeError):
    """An operation was called in the wrong market lifecycle state."""


@dataclass
class StepReport:
    """Outcome of one synchronous cascade step (t >= 2)."""

    step_index: int
    liquidated: np.ndarray
    sell_orders: np.ndarray
    index_after: float
    clamped: bool


@dataclass
class CascadeResult:
    """Full record of one shock-and-cascade run.

    ``index_trajectory`` and ``active_trajectory`` have tau + 1 entries
    (t = 0 .. tau); their last entries equal ``p_inf`` and ``n_inf``.
    ``steps`` holds one report per counted (liquidating) step, so it is
    empty exactly when tau == 1. ``declines`` is the shock realization.
    """

    tau: int
    p_inf: float
    n_inf: int
    index_trajectory: np.ndarray
    active_trajectory: np.ndarray
    steps: list[StepReport] = field(repr=False)
    declines: np.ndarray = field(repr=False)
    clamped: bool = False


def apply_initial_shock(market: BipartiteMarket, params: MarketParams) -> np.ndarray:
    """Apply the t=1 exogenous shock and return the per-share declines.

    Declines are drawn share by share in index order, uniform on
    [0, v/100), from the market's own generator (continuing the build
    stream). Prices become initial * (1 - decline). A market can only
    be shocked once.
    """
    if market.shocked:
        raise StateError("market already shocked; build a fresh market to rerun")
    declines = market.rng.uniform(0.0, params.volatility_v / 100.0, market.n_shares)
    market.current_prices = market.initial_prices * (1.0 - declines)
    market.shocked = True
    return declines


def maintenance_margin(market: BipartiteMarket, investor: int) -> float:
    """Maintenance ratio of one active account under current prices."""
    if not market.active[investor]:
        raise ValueError(f"investor {investor} is liquidated; maintenance ratio undefined")
    collateral = market.current_prices[market.holdings[investor]].sum()
    return float(collateral / market.loan[investor])


def cascade_step(market: BipartiteMarket, params: MarketParams, step_index: int) -> StepReport:
    """Run one synchronous margin-check/liquidation/price-impact step.

    Reads all ratios from the prices as they stand, liquidates every
    active account strictly below ``maintenance_r``, then applies the
    aggregated price impact. With no failing account this is an exact
    no-op on the market.
    """
    if not market.shocked:
        raise StateError("cascade_step before the initial shock; apply_initial_shock first")
    active_idx = np.flatnonzero(market.active)
    collateral = market.current_prices[market.holdings[active_idx]].sum(axis=1)
    ratios = collateral / market.loan[active_idx]
    liquidated = active_idx[ratios < params.maintenance_r]
    if liquidated.size:
        sell_orders = np.bincount(
            market.holdings[liquidated].ravel(), minlength=market.n_shares
        )
        depressed = market.current_prices - params.price_impact_eta * sell_orders
        clamped = bool((depressed < 0.0).any())
        market.current_prices = np.maximum(0.0, depressed)
        market.active[liquidated] = False
    else:
        sell_orders = np.zeros(market.n_shares, dtype=np.int64)
        clamped = False
    return StepReport(
        step_index=step_index,
        liquidated=liquidated,
        sell_orders=sell_orders,
        index_after=market_index(market),
        clamped=clamped,
    )


def run_cascade(market: BipartiteMarket, params: MarketParams) -> CascadeResult:
    """Shock a freshly built market and iterate until liquidations stop."""
    index_trajectory = [market_index(market)]
    declines = apply_initial_shock(market, params)
    index_trajectory.append(market_index(market))
    n = market.n_investors
    active_trajectory = [n, n]
    steps: list[StepReport] = []
    clamped = False
    t = 2
    while True:
        report = cascade_step(market, params, t)
        if report.liquidated.size == 0:
            break
        steps.append(report)
        index_trajectory.append(report.index_after)
        active_trajectory.append(int(market.active.sum()))
        clamped = clamped or report.clamped
        t += 1
    return CascadeResult(
        tau=1 + len(steps),
        p_inf=index_trajectory[-1],
        n_inf=active_trajectory[-1],
        index_trajectory=np.asarray(index_trajectory),
        active_trajectory=np.asarray(active_trajectory, dtype=np.int64),
        steps=steps,
        declines=declines,
        clamped=clamped,
    )


def mean_field_onset(
    initial_margin_k: float,
    maintenance_r: float,
    volatility_v: float,
    mean_decline: float | None = None,
) -> tuple[bool, float]:
    """Homogeneous-market margin-call predictor.

    Treats every account as holding the average portfolio hit by the
    average decline d = v/200 (or ``mean_decline`` when given): a call
    is predicted when (1 - d) / (1 - k) < r. Also returns the onset
    margin k_mf = 1 - (1 - d)/r, the k below which the average account
    is called immediately. Undefined for r == 0, which is signalled
    instead of returning an arbitrary number.
    """
    if not 0.0 <= initial_margin_k < 1.0:
        raise ValueError(f"initial_margin_k must satisfy 0 <= k < 1, got {initial_margin_k!r}")
    if maintenance_r <= 0.0:
        raise ValueError(
            f"maintenance_r must be > 0 for the onset margin to be defined, got {maintenance_r!r}"
        )
    if mean_decline is None:
        if not 0.0 <= volatility_v <= 100.0:
            raise ValueError(f"volatility_v must satisfy 0 <= v <= 100, got {volatility_v!r}")
        mean_decline = volatility_v / 200.0
    predicted = (1.0 - mean_decline) / (1.0 - initial_margin_k) < maintenance_r
    k_onset = 1.0 - (1.0 - mean_decline) / maintenance_r
    return predicted, k_onset
