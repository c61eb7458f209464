"""Bipartite margin-market construction.

The market is a bipartite graph between N margin investors and M shares.
Each investor holds ``diversity_s`` distinct shares, one unit of volume
per holding, bought entirely on margin at time zero: the investor puts
up a fraction k of the purchase value and the broker finances the rest,
so the loan is frozen at (1 - k) times the initial portfolio value while
the collateral follows current prices.

Randomness is consumed from one numpy Generator per market, seeded from
``MarketParams.seed``, in a fixed documented order:

1. initial share prices, one log-normal draw per share
   (``rng.lognormal(log(price_median), price_sigma, n_shares)``),
2. holdings, one row of distinct share ids per investor in investor
   index order (see ``_sample_holdings`` for the exact draw sequence),
3. whatever comes later (the initial shock, drawn by the cascade module)
   continues the same stream.

Two builds from identical parameters are therefore identical bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class ConfigError(ValueError):
    """A parameter or configuration value violates a stated constraint."""


@dataclass(frozen=True)
class MarketParams:
    """Full parameter set for one market realization.

    Defaults correspond to the reference setup used throughout the
    experiment suite: 20000 investors on 1000 shares, 20 shares per
    investor, prices around 2000 and a price impact of 5 per unit sold.
    """

    n_investors: int = 20000
    n_shares: int = 1000
    diversity_s: int = 20
    initial_margin_k: float = 0.5
    maintenance_r: float = 1.6
    volatility_v: float = 30.0
    price_impact_eta: float = 5.0
    price_median: float = 2000.0
    price_sigma: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.n_investors, (int, np.integer)) or self.n_investors < 1:
            raise ConfigError(f"n_investors must be an integer >= 1, got {self.n_investors!r}")
        if not isinstance(self.n_shares, (int, np.integer)) or self.n_shares < 1:
            raise ConfigError(f"n_shares must be an integer >= 1, got {self.n_shares!r}")
        if not isinstance(self.diversity_s, (int, np.integer)) or self.diversity_s < 1:
            raise ConfigError(f"diversity_s must be an integer >= 1, got {self.diversity_s!r}")
        if self.diversity_s > self.n_shares:
            raise ConfigError(
                f"diversity_s must be <= n_shares, got {self.diversity_s} > {self.n_shares}"
            )
        if not 0.0 <= self.initial_margin_k < 1.0:
            raise ConfigError(
                f"initial_margin_k must satisfy 0 <= k < 1, got {self.initial_margin_k!r}"
            )
        if self.maintenance_r < 0.0:
            raise ConfigError(f"maintenance_r must be >= 0, got {self.maintenance_r!r}")
        if not 0.0 <= self.volatility_v <= 100.0:
            raise ConfigError(
                f"volatility_v must satisfy 0 <= v <= 100 (declines are v/100), "
                f"got {self.volatility_v!r}"
            )
        if self.price_impact_eta < 0.0:
            raise ConfigError(f"price_impact_eta must be >= 0, got {self.price_impact_eta!r}")
        if self.price_median <= 0.0:
            raise ConfigError(f"price_median must be > 0, got {self.price_median!r}")
        if self.price_sigma < 0.0:
            raise ConfigError(f"price_sigma must be >= 0, got {self.price_sigma!r}")
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an integer in [0, 2**64), got {self.seed!r}")


@dataclass
class BipartiteMarket:
    """Mutable market state.

    ``holdings`` has one row per investor with ``diversity_s`` distinct
    share ids (unsorted, in draw order). ``loan`` is the frozen broker
    credit per investor. ``active`` flips to False permanently when an
    account is liquidated. ``rng`` carries the generator forward so the
    shock continues the build's stream.
    """

    initial_prices: np.ndarray
    current_prices: np.ndarray
    holdings: np.ndarray
    loan: np.ndarray
    active: np.ndarray
    rng: np.random.Generator = field(repr=False)
    shocked: bool = False

    @property
    def n_investors(self) -> int:
        return self.holdings.shape[0]

    @property
    def n_shares(self) -> int:
        return self.initial_prices.shape[0]


def _rows_with_duplicates(draws: np.ndarray) -> np.ndarray:
    srt = np.sort(draws, axis=1)
    return (srt[:, 1:] == srt[:, :-1]).any(axis=1)


def _sample_holdings(rng: np.random.Generator, n_investors: int, n_shares: int, s: int) -> np.ndarray:
    """Draw s distinct shares uniformly for each investor.

    Draw sequence, chosen once and kept stable so tests can replay it:

    * s == n_shares: every investor holds every share; no draws consumed.
    * s * (s - 1) <= 4 * n_shares: one ``rng.integers(0, n_shares,
      (n_investors, s))`` matrix, then rows containing a duplicate are
      redrawn wholesale (``rng.integers(0, n_shares, (n_bad, s))``, rows
      in ascending row order) until none remain. Whole-row rejection
      keeps the accepted rows exactly uniform over distinct s-subsets.
    * otherwise: ``rng.random((n_investors, n_shares))`` keys, each row's
      s smallest keys selected via argpartition.
    """
    if s == n_shares:
        return np.tile(np.arange(n_shares, dtype=np.int64), (n_investors, 1))
    if s * (s - 1) <= 4 * n_shares:
        draws = rng.integers(0, n_shares, size=(n_investors, s))
        bad = np.flatnonzero(_rows_with_duplicates(draws))
        while bad.size:
            draws[bad] = rng.integers(0, n_shares, size=(bad.size, s))
            bad = bad[_rows_with_duplicates(draws[bad])]
        return draws
    keys = rng.random((n_investors, n_shares))
    return np.argpartition(keys, s - 1, axis=1)[:, :s].astype(np.int64)


def build_market(params: MarketParams) -> BipartiteMarket:
    """Construct a market at time zero.

    Prices are log-normal with median ``price_median`` and log-scale
    ``price_sigma``. Every investor's loan is (1 - k) times the initial
    value of its holdings and never changes afterwards.
    """
    rng = np.random.default_rng(params.seed)
    initial = rng.lognormal(math.log(params.price_median), params.price_sigma, params.n_shares)
    holdings = _sample_holdings(rng, params.n_investors, params.n_shares, params.diversity_s)
    loan = initial[holdings].sum(axis=1) * (1.0 - params.initial_margin_k)
    return BipartiteMarket(
        initial_prices=initial,
        current_prices=initial.copy(),
        holdings=holdings,
        loan=loan,
        active=np.ones(params.n_investors, dtype=bool),
        rng=rng,
    )


def market_index(market: BipartiteMarket) -> float:
    """Arithmetic mean of current share prices."""
    return float(market.current_prices.mean())


def margin_times(market: BipartiteMarket) -> np.ndarray:
    """Number of investors holding each share (the share's margin-times count).

    Computed from the time-zero adjacency, which liquidation never edits,
    so the result is the same at any point of a cascade. The counts sum
    to n_investors * diversity_s.
    """
    return np.bincount(market.holdings.ravel(), minlength=market.n_shares)
