"""Two-way grouped fixed effects estimation for panel data."""

from ._pcluster import (
    PanelError,
    cluster,
    eigenvalue_ratio_factors,
    estimate,
    monte_carlo,
    pseudo_distance,
    read_panel_csv,
    simulate_panel,
)

ESTIMATORS = ("baseline", "crossfit", "blm1", "blm2", "twfe", "interactive", "cce", "fa")

__all__ = [
    "ESTIMATORS",
    "PanelError",
    "cluster",
    "eigenvalue_ratio_factors",
    "estimate",
    "monte_carlo",
    "pseudo_distance",
    "read_panel_csv",
    "simulate_panel",
]
