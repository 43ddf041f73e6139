"""The three figure kinds: loss curves, simplex trajectories, cumulative weights.

Pure data helpers are exposed separately from the rendering so tests can pin
exact values (plane position, marker rows, normalization factors) without
parsing image files. Output files are written atomically.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .traces import TraceBundle


def _atomic_save(fig, out_path) -> None:
    out_path = Path(out_path)
    fd, tmp = tempfile.mkstemp(dir=out_path.parent, suffix=out_path.suffix)
    os.close(fd)
    try:
        fig.savefig(tmp, bbox_inches="tight", dpi=150)
        os.replace(tmp, out_path)
    finally:
        plt.close(fig)
        if os.path.exists(tmp):
            os.unlink(tmp)


def normalization_factor(bundle: TraceBundle, mode: str) -> float:
    if mode == "none":
        return 1.0
    if mode == "qubits":
        n = bundle.metadata.get("target.n")
        if n is None:
            raise ValueError("per-qubit normalization needs target.n in the sidecar")
        return float(n)
    raise ValueError(f"unknown normalization {mode!r}")


def loss_series(bundle: TraceBundle, normalization: str = "none"):
    """(iterations, per-seed loss arrays) with the normalization applied."""
    factor = normalization_factor(bundle, normalization)
    column = bundle.loss_column()
    xs = np.asarray(bundle.traces[0].columns[bundle.header[0]])
    series = [np.asarray(t.columns[column]) / factor for t in bundle.traces]
    return xs, series


def plot_loss_curves(bundle: TraceBundle, out_path, normalization: str = "none"):
    """Log-scale loss versus iteration, one line per seed plus the mean."""
    xs, series = loss_series(bundle, normalization)
    fig, ax = plt.subplots(figsize=(5, 3.4))
    for trace, ys in zip(bundle.traces, series):
        ax.semilogy(xs[: len(ys)], ys, alpha=0.45, lw=0.9, label=f"seed {trace.seed}")
    shortest = min(len(ys) for ys in series)
    mean = np.mean([ys[:shortest] for ys in series], axis=0)
    ax.semilogy(xs[:shortest], mean, color="black", lw=1.8, label="mean")
    ax.set_xlabel(bundle.header[0])
    label = bundle.loss_column()
    if normalization == "qubits":
        label += " / qubit"
    ax.set_ylabel(label)
    ax.legend(fontsize=7)
    _atomic_save(fig, out_path)
    return out_path


def trajectory_points(bundle: TraceBundle):
    """Per-seed (p_X, p_Y, p_Z) paths from the trace columns."""
    for name in ("p_X", "p_Y", "p_Z"):
        if name not in bundle.header:
            raise ValueError(f"missing column {name} for a simplex trajectory")
    return [
        np.column_stack([t.columns["p_X"], t.columns["p_Y"], t.columns["p_Z"]])
        for t in bundle.traces
    ]


def trajectory_markers(path: np.ndarray):
    """(start, midpoint, final) rows of one trajectory."""
    return path[0], path[len(path) // 2], path[-1]


def plane_vertices(plane_sum: float) -> np.ndarray:
    """Corners of the triangle p_X + p_Y + p_Z = plane_sum in the positive octant."""
    s = plane_sum
    return np.array([[s, 0, 0], [0, s, 0], [0, 0, s]], dtype=float)


def plot_simplex_trajectory(bundle: TraceBundle, out_path, plane_sum=None):
    """3D coefficient trajectories with the constant-sum plane and markers."""
    if plane_sum is None:
        p_i = bundle.metadata.get("plane.p_identity")
        if p_i is None:
            raise ValueError("plane position not given and not in the sidecar")
        plane_sum = 1.0 - float(p_i)
    paths = trajectory_points(bundle)
    fig = plt.figure(figsize=(4.6, 4.2))
    ax = fig.add_subplot(projection="3d")
    verts = plane_vertices(plane_sum)
    ax.plot_trisurf(verts[:, 0], verts[:, 1], verts[:, 2], color="gray", alpha=0.25)
    for path in paths:
        ax.plot(path[:, 0], path[:, 1], path[:, 2], lw=1.0)
        start, mid, final = trajectory_markers(path)
        ax.scatter(*start, marker="o", color="tab:blue", s=18)
        ax.scatter(*mid, marker="^", color="red", s=30)
        ax.scatter(*final, marker="x", color="green", s=34)
    ax.set_xlabel("$p_X$")
    ax.set_ylabel("$p_Y$")
    ax.set_zlabel("$p_Z$")
    _atomic_save(fig, out_path)
    return out_path


def cumulative_weights(probs: dict) -> np.ndarray:
    """Descending-sorted cumulative weights of one probability map."""
    values = np.sort(np.asarray(list(probs.values())))[::-1]
    return np.cumsum(values)


def plot_cumulative_distribution(final_probs: list, out_path):
    """Ordered cumulative probability curves with cross-seed variance whiskers."""
    curves = [cumulative_weights(p) for p in final_probs]
    width = max(len(c) for c in curves)
    padded = np.array([np.pad(c, (0, width - len(c)), constant_values=1.0) for c in curves])
    mean = padded.mean(axis=0)
    std = padded.std(axis=0)
    xs = np.arange(1, width + 1)
    fig, ax = plt.subplots(figsize=(5, 3.2))
    for curve in padded:
        ax.plot(xs, curve, alpha=0.35, lw=0.8, color="tab:blue")
    ax.errorbar(xs, mean, yerr=std, color="black", lw=1.6, capsize=2, label="mean")
    ax.set_xlabel("ordered index")
    ax.set_ylabel("cumulative probability")
    ax.set_ylim(0, 1.05)
    ax.legend(fontsize=7)
    _atomic_save(fig, out_path)
    return out_path
