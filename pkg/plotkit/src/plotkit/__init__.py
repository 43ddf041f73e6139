"""plotkit: figure rendering for channel-learning CSV traces."""

from .figures import (
    cumulative_weights,
    loss_series,
    normalization_factor,
    plane_vertices,
    plot_cumulative_distribution,
    plot_loss_curves,
    plot_simplex_trajectory,
    trajectory_markers,
    trajectory_points,
)
from .traces import SeedTrace, TraceBundle, load_bundle, load_final_probs

__all__ = [name for name in dir() if not name.startswith("_")]
