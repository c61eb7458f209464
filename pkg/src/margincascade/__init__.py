"""Margin-call cascade simulator on a bipartite investor-share market."""

from .cascade import (
    CascadeResult,
    StateError,
    StepReport,
    apply_initial_shock,
    cascade_step,
    maintenance_margin,
    mean_field_onset,
    run_cascade,
)
from .experiments import (
    CriticalPoint,
    MarginTimesStats,
    PhaseGrid,
    SweepResult,
    SweepSpec,
    derive_seed,
    detect_critical,
    diversification_sweep,
    margin_times_study,
    phase_diagram,
    run_sweep,
)
from .market import (
    BipartiteMarket,
    ConfigError,
    MarketParams,
    build_market,
    margin_times,
    market_index,
)

__version__ = "0.1.0"

__all__ = [
    "BipartiteMarket",
    "CascadeResult",
    "ConfigError",
    "CriticalPoint",
    "MarginTimesStats",
    "MarketParams",
    "PhaseGrid",
    "StateError",
    "StepReport",
    "SweepResult",
    "SweepSpec",
    "apply_initial_shock",
    "build_market",
    "cascade_step",
    "derive_seed",
    "detect_critical",
    "diversification_sweep",
    "maintenance_margin",
    "margin_times",
    "margin_times_study",
    "market_index",
    "mean_field_onset",
    "phase_diagram",
    "run_cascade",
    "run_sweep",
    "__version__",
]
