"""Desk-scale 2D navigation simulator and the alpha-sweep experiment.

Worlds are square maps with axis-aligned box obstacles. A synthetic camera
renders the navigability mask the planner would otherwise get from a
segmentation network; the receding-horizon loop then plans on that mask.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Iterable, Optional, Sequence

import numpy as np

from .distance_field import SedfConfig, apply_scale, compute_edge_map, exact_edt, filter_sob
from .mask_geometry import SegMask
from .planner import (CameraModel, MotionPrimitive, PlannerWeights, Pose2, PrimitiveLibrary,
                      generate_primitives, select_primitive)

log = logging.getLogger(__name__)

ENV_SIZES = {1: 3.0, 2: 5.0, 3: 7.0}
ENV_OBSTACLES = {1: 4, 2: 9, 3: 14}
OBSTACLE_HALF_EXTENT = 0.3
START_INSET = 0.5
# obstacles keep this much free space around start and goal centres
ENDPOINT_CLEARANCE = 0.7
DEFAULT_ALPHAS = (0.01, 0.03, 0.05, 0.07, 0.10, 0.15, 0.20, 0.25, 0.35, 0.55, 1.00)
CSV_HEADER = ("env", "alpha", "trial", "outcome", "steps", "seed")


class EnvironmentTooDenseError(RuntimeError):
    pass


@dataclass(frozen=True)
class WorldMap:
    size: float
    obstacles: np.ndarray  # (n, 4): centre x, centre y, half-extent x, half-extent y
    start: Pose2
    goal: Pose2

    def __eq__(self, other):
        return (isinstance(other, WorldMap) and self.size == other.size
                and np.array_equal(self.obstacles, other.obstacles)
                and self.start == other.start and self.goal == other.goal)

    def __hash__(self):
        return hash((self.size, self.obstacles.tobytes(), self.start, self.goal))


def point_box_distance(x: float, y: float, boxes: np.ndarray) -> np.ndarray:
    """Euclidean distance from a point to each closed box (0 inside)."""
    if len(boxes) == 0:
        return np.zeros(0)
    dx = np.maximum(np.abs(x - boxes[:, 0]) - boxes[:, 2], 0.0)
    dy = np.maximum(np.abs(y - boxes[:, 1]) - boxes[:, 3], 0.0)
    return np.hypot(dx, dy)


def build_env(kind: int, seed: int, n_obstacles: Optional[int] = None,
              half_extent: float = OBSTACLE_HALF_EXTENT, max_tries: int = 10_000) -> WorldMap:
    """Environment ``kind`` (1, 2, 3) with obstacles placed by seeded rejection sampling."""
    if kind not in ENV_SIZES:
        raise ValueError(f"unknown environment kind {kind}")
    size = ENV_SIZES[kind]
    count = ENV_OBSTACLES[kind] if n_obstacles is None else n_obstacles
    heading = math.pi / 4
    start = Pose2(START_INSET, START_INSET, heading)
    goal = Pose2(size - START_INSET, size - START_INSET, heading)
    rng = np.random.default_rng(seed)
    boxes: list[list[float]] = []
    tries = 0
    while len(boxes) < count:
        tries += 1
        if tries > max_tries:
            raise EnvironmentTooDenseError(
                f"environment too dense: placed {len(boxes)} of {count} obstacles")
        cx, cy = rng.uniform(half_extent, size - half_extent, size=2)
        cand = np.array([[cx, cy, half_extent, half_extent]])
        if point_box_distance(start.x, start.y, cand)[0] < ENDPOINT_CLEARANCE:
            continue
        if point_box_distance(goal.x, goal.y, cand)[0] < ENDPOINT_CLEARANCE:
            continue
        if boxes:
            b = np.array(boxes)
            overlap = (np.abs(b[:, 0] - cx) < b[:, 2] + half_extent) & \
                      (np.abs(b[:, 1] - cy) < b[:, 3] + half_extent)
            if np.any(overlap):
                continue
        boxes.append([cx, cy, half_extent, half_extent])
    return WorldMap(size, np.array(boxes, dtype=float).reshape(-1, 4), start, goal)


def check_collision(world: WorldMap, robot: Pose2, radius: float) -> bool:
    """Disc of ``radius`` touches an obstacle or leaves the map (contact counts)."""
    if (robot.x - radius < 0 or robot.y - radius < 0
            or robot.x + radius > world.size or robot.y + radius > world.size):
        return True
    return bool(np.any(point_box_distance(robot.x, robot.y, world.obstacles) <= radius))


@lru_cache(maxsize=8)
def _ground_lookup(cam: CameraModel):
    """Body-frame ground point of every below-horizon pixel; NaN elsewhere."""
    right, down, fwd = cam.axes()
    vv, uu = np.indices((cam.height, cam.width), dtype=float)
    rays = (fwd[None, None, :] + right[None, None, :] * ((uu - cam.cx) / cam.fx)[..., None]
            + down[None, None, :] * ((vv - cam.cy) / cam.fy)[..., None])
    dz = rays[..., 2]
    below = dz < -1e-12
    t = np.where(below, cam.cam_height / np.where(below, -dz, 1.0), np.nan)
    gx = t * rays[..., 0]
    gy = t * rays[..., 1]
    gx.setflags(write=False)
    gy.setflags(write=False)
    return gx, gy, below


def render_mask(world: WorldMap, robot: Pose2, cam: CameraModel) -> SegMask:
    """Synthetic navigability mask seen from ``robot``.

    A ground pixel is navigable when the straight ground path from the robot
    to its back-projected point stays inside the map and misses every box;
    obstacles are taller than the camera, so they hide everything behind them.
    """
    gx, gy, below = _ground_lookup(cam)
    c, s = math.cos(robot.psi), math.sin(robot.psi)
    idx = np.flatnonzero(below.ravel())
    bx = gx.ravel()[idx]
    by = gy.ravel()[idx]
    wx = robot.x + c * bx - s * by
    wy = robot.y + s * bx + c * by
    ok = (wx >= 0) & (wx <= world.size) & (wy >= 0) & (wy <= world.size)
    dx = wx - robot.x
    dy = wy - robot.y
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_x = 1.0 / dx
        inv_y = 1.0 / dy
    for ox, oy, hx, hy in world.obstacles:
        # slab test of the segment robot -> ground point against the box
        tx1 = (ox - hx - robot.x) * inv_x
        tx2 = (ox + hx - robot.x) * inv_x
        ty1 = (oy - hy - robot.y) * inv_y
        ty2 = (oy + hy - robot.y) * inv_y
        tx_lo = np.where(dx == 0, np.where(abs(robot.x - ox) <= hx, -np.inf, np.inf), np.minimum(tx1, tx2))
        tx_hi = np.where(dx == 0, np.where(abs(robot.x - ox) <= hx, np.inf, -np.inf), np.maximum(tx1, tx2))
        ty_lo = np.where(dy == 0, np.where(abs(robot.y - oy) <= hy, -np.inf, np.inf), np.minimum(ty1, ty2))
        ty_hi = np.where(dy == 0, np.where(abs(robot.y - oy) <= hy, np.inf, -np.inf), np.maximum(ty1, ty2))
        t_in = np.maximum(tx_lo, ty_lo)
        t_out = np.minimum(tx_hi, ty_hi)
        ok &= ~((t_in <= t_out) & (t_out >= 0) & (t_in <= 1))
    cells = np.zeros(cam.height * cam.width, dtype=bool)
    cells[idx] = ok
    return SegMask(cells.reshape(cam.height, cam.width))


def step_dynamics(robot: Pose2, prim: MotionPrimitive, commit: int = 1) -> Pose2:
    """Advance along ``prim`` to its ``commit``-th pose."""
    if not 1 <= commit < len(prim):
        raise ValueError(f"commit must lie in [1, {len(prim) - 1}]")
    return robot.compose(Pose2(*prim.poses[commit]))


@dataclass(frozen=True)
class EpisodeConfig:
    alpha: float = 0.25
    v_thres: Optional[float] = None  # defaults to half the image height
    weights: PlannerWeights = field(default_factory=PlannerWeights)
    n_curvatures: int = 15
    m_poses: int = 10
    arc_length: float = 1.0
    kappa_max: float = 1.2
    max_steps: Optional[int] = None  # defaults to steps_per_meter * map size
    steps_per_meter: int = 60
    robot_radius: float = 0.15
    goal_tolerance: float = 0.3
    commit: int = 1
    literal_collision: bool = False
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.alpha <= 1:
            raise ValueError("alpha must lie in [0, 1]")
        if self.max_steps is not None and self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if not self.robot_radius > 0:
            raise ValueError("robot_radius must be positive")

    def library(self) -> PrimitiveLibrary:
        return _library(self.n_curvatures, self.m_poses, self.arc_length, self.kappa_max)

    def step_limit(self, world: WorldMap) -> int:
        return self.max_steps if self.max_steps is not None else int(round(self.steps_per_meter * world.size))

    def sedf_config(self, cam: CameraModel) -> SedfConfig:
        v = 0.5 * cam.height if self.v_thres is None else self.v_thres
        return SedfConfig(self.alpha, v)


@lru_cache(maxsize=16)
def _library(n, m, length, kappa_max) -> PrimitiveLibrary:
    return generate_primitives(n, m, length, kappa_max)


@dataclass
class EpisodeResult:
    outcome: str  # "success" | "collision" | "timeout"
    steps: int
    trajectory: list[Pose2]


def plan_step(world: WorldMap, robot: Pose2, cam: CameraModel, cfg: EpisodeConfig,
              lib: PrimitiveLibrary) -> int:
    mask = render_mask(world, robot, cam)
    sedf_cfg = cfg.sedf_config(cam)
    omega = filter_sob(compute_edge_map(mask), sedf_cfg.v_thres)
    edf = exact_edt(omega, cam.width, cam.height)
    sedf = apply_scale(edf, cfg.alpha)
    idx, _ = select_primitive(lib, sedf, cfg.alpha * edf.d_max, cam, robot, world.goal,
                              cfg.weights, cfg.literal_collision)
    return idx


def run_episode(world: WorldMap, cam: CameraModel, cfg: EpisodeConfig) -> EpisodeResult:
    """Plan, commit one step, repeat until goal, collision or the step limit."""
    lib = cfg.library()
    robot = world.start
    traj = [robot]
    limit = cfg.step_limit(world)
    for step in range(1, limit + 1):
        idx = plan_step(world, robot, cam, cfg, lib)
        robot = step_dynamics(robot, lib[idx], cfg.commit)
        traj.append(robot)
        if check_collision(world, robot, cfg.robot_radius):
            return EpisodeResult("collision", step, traj)
        if robot.distance_to(world.goal) <= cfg.goal_tolerance:
            return EpisodeResult("success", step, traj)
    return EpisodeResult("timeout", limit, traj)


def trial_seed(base_seed: int, env: int, trial: int) -> int:
    return int(np.random.SeedSequence([base_seed, env, trial]).generate_state(1)[0])


@dataclass(frozen=True)
class EpisodeRecord:
    env: int
    alpha: float
    trial: int
    outcome: str
    steps: int
    seed: int


@dataclass(frozen=True)
class SweepSummary:
    env: int
    alpha: float
    trials: int
    success_rate: float
    mean_steps: float  # NaN when no trial succeeded
    std_steps: float


def sweep_alpha(envs: Sequence[int], alphas: Sequence[float], trials: int, base_cfg: EpisodeConfig,
                cam: CameraModel = CameraModel(), progress=None) -> list[EpisodeRecord]:
    """Run every (env, alpha, trial) episode; maps depend on (env, trial) only."""
    if not envs or not alphas or trials < 1:
        raise ValueError("need at least one env, one alpha and one trial")
    records = []
    for env in envs:
        for trial in range(trials):
            seed = trial_seed(base_cfg.seed, env, trial)
            world = build_env(env, seed)
            for alpha in alphas:
                cfg = replace(base_cfg, alpha=float(alpha), seed=seed)
                res = run_episode(world, cam, cfg)
                records.append(EpisodeRecord(env, float(alpha), trial, res.outcome, res.steps, seed))
                log.debug("env %d alpha %.3f trial %d: %s in %d steps", env, alpha, trial,
                          res.outcome, res.steps)
                if progress is not None:
                    progress(records[-1])
    return records


def summarize(records: Iterable[EpisodeRecord]) -> list[SweepSummary]:
    groups: dict[tuple[int, float], list[EpisodeRecord]] = {}
    for r in records:
        groups.setdefault((r.env, r.alpha), []).append(r)
    out = []
    for (env, alpha), rs in sorted(groups.items()):
        steps = np.array([r.steps for r in rs if r.outcome == "success"], dtype=float)
        out.append(SweepSummary(env, alpha, len(rs), len(steps) / len(rs),
                                float(steps.mean()) if len(steps) else float("nan"),
                                float(steps.std()) if len(steps) else float("nan")))
    return out


def records_to_csv(records: Sequence[EpisodeRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow([r.env, f"{r.alpha:g}", r.trial, r.outcome, r.steps, r.seed])
    return buf.getvalue()


def records_from_csv(text: str) -> list[EpisodeRecord]:
    rows = list(csv.DictReader(io.StringIO(text)))
    return [EpisodeRecord(int(r["env"]), float(r["alpha"]), int(r["trial"]), r["outcome"],
                          int(r["steps"]), int(r["seed"])) for r in rows]


def summary_to_csv(summary: Sequence[SweepSummary]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("env", "alpha", "trials", "success_rate", "mean_steps", "std_steps"))
    for s in summary:
        w.writerow([s.env, f"{s.alpha:g}", s.trials, f"{s.success_rate:.6g}",
                    f"{s.mean_steps:.6g}", f"{s.std_steps:.6g}"])
    return buf.getvalue()
