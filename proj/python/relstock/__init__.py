"""Python access to the relstock core: synthetic markets, relation extraction,
window planning, metrics and the command-line pipeline."""

from ._core import (
    RelstockError,
    annualized_return,
    extract_relations,
    generate_market,
    plan_windows,
    run_cli,
    sharpe_ratio,
)

__all__ = [
    "RelstockError",
    "annualized_return",
    "extract_relations",
    "generate_market",
    "plan_windows",
    "run_cli",
    "sharpe_ratio",
]
