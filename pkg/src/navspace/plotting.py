"""Figures for sweep reports, episode trajectories and distance-field panels."""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import LinearSegmentedColormap  # noqa: E402

from .distance_field import HEATMAP_HIGH, HEATMAP_LOW  # noqa: E402
from .sim import EpisodeResult, SweepSummary, WorldMap  # noqa: E402

_HEAT = LinearSegmentedColormap.from_list(
    "blue_red", [np.array(HEATMAP_LOW) / 255.0, np.array(HEATMAP_HIGH) / 255.0])


def _by_env(summary: Sequence[SweepSummary]):
    envs: dict[int, list[SweepSummary]] = {}
    for s in summary:
        envs.setdefault(s.env, []).append(s)
    for rows in envs.values():
        rows.sort(key=lambda r: r.alpha)
    return dict(sorted(envs.items()))


def plot_success_rate(summary: Sequence[SweepSummary], path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    for env, rows in _by_env(summary).items():
        ax.plot([r.alpha for r in rows], [r.success_rate for r in rows], "o-", label=f"Env#{env}")
    ax.set_xlabel("alpha")
    ax.set_ylabel("success rate")
    ax.set_ylim(-0.05, 1.05)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def plot_action_steps(summary: Sequence[SweepSummary], path) -> None:
    """Mean steps over successful trials with one-sigma bars; alphas without a success are skipped."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for env, rows in _by_env(summary).items():
        rows = [r for r in rows if not np.isnan(r.mean_steps)]
        if not rows:
            continue
        ax.errorbar([r.alpha for r in rows], [r.mean_steps for r in rows],
                    yerr=[np.nan_to_num(r.std_steps) for r in rows], fmt="o-", capsize=3,
                    label=f"Env#{env}")
    ax.set_xlabel("alpha")
    ax.set_ylabel("action steps (successful trials)")
    ax.grid(alpha=0.3)
    if ax.get_legend_handles_labels()[0]:
        ax.legend()
    else:
        ax.text(0.5, 0.5, "no successful trials", transform=ax.transAxes, ha="center")
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def plot_episode(world: WorldMap, result: EpisodeResult, path) -> None:
    fig, ax = plt.subplots(figsize=(5, 5))
    for cx, cy, hx, hy in world.obstacles:
        ax.add_patch(plt.Rectangle((cx - hx, cy - hy), 2 * hx, 2 * hy, color="0.5"))
    traj = np.array([p.as_array() for p in result.trajectory])
    ax.plot(traj[:, 0], traj[:, 1], ".-", ms=3)
    ax.plot(world.start.x, world.start.y, "go")
    ax.plot(world.goal.x, world.goal.y, "r*", ms=12)
    ax.set_xlim(0, world.size)
    ax.set_ylim(0, world.size)
    ax.set_aspect("equal")
    ax.set_title(f"{result.outcome}, {result.steps} steps")
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def plot_field_panels(fields: Sequence[np.ndarray], titles: Sequence[str], path) -> None:
    """Side-by-side heatmaps, each scaled to its own maximum."""
    fig, axes = plt.subplots(1, len(fields), figsize=(3.2 * len(fields), 2.8), squeeze=False)
    for ax, f, t in zip(axes[0], fields, titles):
        ax.imshow(f, cmap=_HEAT, vmin=0, vmax=max(float(np.max(f)), 1e-12))
        ax.set_title(t)
        ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
