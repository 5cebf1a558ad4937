"""Monte Carlo of the population and of explicit small trees."""

from .population import (
    DEFAULT_CAP,
    Ensemble,
    ScaledStats,
    Start,
    SurvivalEstimate,
    Trajectory,
    ensemble_scaled_stats,
    estimate_survival,
    scaled_stats,
    simulate_ensemble,
    simulate_trajectory,
    write_ensemble_csv,
    write_trajectory_csv,
)
from .trees import SimTree, coupled_trees, is_subtree, simulate_tree, tree_identity_sides

__all__ = [
    "DEFAULT_CAP",
    "Ensemble",
    "ScaledStats",
    "SimTree",
    "Start",
    "SurvivalEstimate",
    "Trajectory",
    "coupled_trees",
    "ensemble_scaled_stats",
    "estimate_survival",
    "is_subtree",
    "scaled_stats",
    "simulate_ensemble",
    "simulate_tree",
    "simulate_trajectory",
    "tree_identity_sides",
    "write_ensemble_csv",
    "write_trajectory_csv",
]
