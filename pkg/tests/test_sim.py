import math

import numpy as np
import pytest

from navspace.mask_geometry import extract_boundary
from navspace.planner import CameraModel, Pose2, arc_poses, generate_primitives, project_pose
from navspace.sim import (CSV_HEADER, ENV_OBSTACLES, ENV_SIZES, EnvironmentTooDenseError, EpisodeConfig,
                          MotionPrimitive, WorldMap, build_env, check_collision, point_box_distance,
                          records_from_csv, records_to_csv, render_mask, run_episode, step_dynamics,
                          summarize, sweep_alpha, trial_seed)

CAM = CameraModel()


def back_project(u, v, cam):
    """Body-frame ground point of pixel (u, v), by intersecting the pixel ray with z = 0."""
    c, s = math.cos(cam.pitch), math.sin(cam.pitch)
    fwd, right = np.array([c, 0.0, -s]), np.array([0.0, -1.0, 0.0])
    down = np.cross(fwd, right)
    ray = fwd + right * (u - cam.cx) / cam.fx + down * (v - cam.cy) / cam.fy
    if ray[2] >= 0:
        return None
    t = cam.cam_height / -ray[2]
    return t * ray[0], t * ray[1]


def to_world_xy(robot, bx, by):
    c, s = math.cos(robot.psi), math.sin(robot.psi)
    return robot.x + c * bx - s * by, robot.y + s * bx + c * by


# ---- environments ------------------------------------------------------------

def test_env_sizes_and_counts():
    w = build_env(1, 3)
    assert w.size == 3.0 and len(w.obstacles) == 4
    assert (ENV_SIZES[2], ENV_OBSTACLES[2], ENV_SIZES[3], ENV_OBSTACLES[3]) == (5.0, 9, 7.0, 14)


def test_env_deterministic():
    assert build_env(2, 99) == build_env(2, 99)
    assert build_env(2, 99) != build_env(2, 100)


@pytest.mark.parametrize("kind", [1, 2, 3])
def test_env_start_goal_clearance(kind):
    for seed in range(25):
        w = build_env(kind, seed)
        for p in (w.start, w.goal):
            assert not check_collision(w, p, 0.15)
        assert (w.start.x, w.start.y) == (0.5, 0.5)
        assert (w.goal.x, w.goal.y) == (w.size - 0.5, w.size - 0.5)
        # boxes stay inside the map and do not overlap
        o = w.obstacles
        assert np.all(o[:, :2] - o[:, 2:] >= 0) and np.all(o[:, :2] + o[:, 2:] <= w.size)
        for i in range(len(o)):
            for j in range(i):
                overlap = (abs(o[i, 0] - o[j, 0]) < o[i, 2] + o[j, 2]) and \
                          (abs(o[i, 1] - o[j, 1]) < o[i, 3] + o[j, 3])
                assert not overlap


def test_env_too_dense():
    with pytest.raises(EnvironmentTooDenseError, match="environment too dense"):
        build_env(1, 0, n_obstacles=60, max_tries=2000)
    with pytest.raises(ValueError):
        build_env(4, 0)


# ---- rendering --------------------------------------------------------------------

def _empty(size=10.0):
    return WorldMap(size, np.zeros((0, 4)), Pose2(1, 1), Pose2(size - 1, size - 1))


def test_render_empty_world_oracle():
    world = _empty()
    robot = Pose2(5.0, 5.0, 0.7)
    mask = render_mask(world, robot, CAM).cells
    for v in range(CAM.height):
        for u in range(CAM.width):
            g = back_project(u, v, CAM)
            inside = False
            if g is not None:
                wx, wy = to_world_xy(robot, *g)
                inside = 0 <= wx <= world.size and 0 <= wy <= world.size
            assert mask[v, u] == inside, (u, v)


def test_render_wall_boundary_row():
    r = 1.5
    robot = Pose2(2.0, 10.0, 0.0)
    wall = np.array([[robot.x + r + 0.1, 10.0, 0.1, 9.0]])
    world = WorldMap(20.0, wall, robot, Pose2(19, 19))
    bf = extract_boundary(render_mask(world, robot, CAM))
    _, v_r = project_pose(Pose2(r, 0.0), CAM)
    assert bf.valid.all()
    assert np.all(np.abs(bf.values - v_r) <= 1.0)


def test_render_obstacle_behind_is_invisible():
    robot = Pose2(5.0, 5.0, 0.0)
    behind = WorldMap(10.0, np.array([[3.0, 5.0, 0.3, 0.3]]), robot, Pose2(9, 9))
    assert render_mask(behind, robot, CAM) == render_mask(_empty(), robot, CAM)


def test_render_navigable_pixels_are_reachable():
    world = build_env(3, 4)
    rng = np.random.default_rng(0)
    robot = Pose2(3.0, 2.0, 1.0)
    assert not check_collision(world, robot, 0.0)
    mask = render_mask(world, robot, CAM).cells
    vs, us = np.nonzero(mask)
    pick = rng.choice(len(us), 1000, replace=True)
    for u, v in zip(us[pick], vs[pick]):
        wx, wy = to_world_xy(robot, *back_project(u, v, CAM))
        for t in np.linspace(0, 1, 200):
            px, py = robot.x + t * (wx - robot.x), robot.y + t * (wy - robot.y)
            assert 0 <= px <= world.size and 0 <= py <= world.size
            assert np.all(point_box_distance(px, py, world.obstacles) > 0)


# ---- dynamics and collisions ------------------------------------------------------------

def test_step_straight():
    lib = generate_primitives()
    prim = lib[lib.straight_index]
    p = step_dynamics(Pose2(1.0, 1.0, math.pi / 2), prim, 3)
    assert (p.x, p.y, p.psi) == pytest.approx((1.0, 1.0 + 3 / 9, math.pi / 2))


def test_step_associativity():
    lib = generate_primitives()
    a, b = lib[3], lib[11]
    r = Pose2(0.3, -0.2, 0.4)
    two = step_dynamics(step_dynamics(r, a, 1), b, 1)
    composed = r.compose(a.pose(1).compose(b.pose(1)))
    assert (two.x, two.y, two.psi) == pytest.approx((composed.x, composed.y, composed.psi), abs=1e-12)


def test_step_quarter_circle():
    rad = 0.7
    prim = MotionPrimitive(arc_poses(1 / rad, 9, math.pi * rad / 2), 1 / rad)
    p = step_dynamics(Pose2(0, 0, 0), prim, 8)
    assert (p.x, p.y, p.psi) == pytest.approx((rad, rad, math.pi / 2), abs=1e-12)
    with pytest.raises(ValueError):
        step_dynamics(Pose2(0, 0, 0), prim, 9)


def test_collision_cases():
    world = WorldMap(10.0, np.array([[5.0, 5.0, 0.5, 0.5]]), Pose2(1, 1), Pose2(9, 9))
    assert not check_collision(world, Pose2(2.0, 2.0), 0.15)
    assert check_collision(world, Pose2(5.1, 4.9), 0.15)
    assert check_collision(world, Pose2(5.75, 5.0), 0.25)  # tangent to the x face, exact in binary
    assert not check_collision(world, Pose2(5.76, 5.0), 0.25)
    assert check_collision(world, Pose2(0.1, 3.0), 0.15)  # leaves the map


# ---- episodes ------------------------------------------------------------------------------

def test_episode_empty_world_straight_line():
    start, goal = Pose2(1.0, 5.0, 0.0), Pose2(6.0, 5.0, 0.0)
    world = WorldMap(10.0, np.zeros((0, 4)), start, goal)
    cfg = EpisodeConfig(alpha=0.25)
    res = run_episode(world, CAM, cfg)
    step = 1.0 / (cfg.m_poses - 1)
    # first step that ends within the goal tolerance
    want = math.ceil((start.distance_to(goal) - cfg.goal_tolerance) / step)
    assert res.outcome == "success"
    assert abs(res.steps - want) <= 1
    assert res.trajectory[-1].distance_to(goal) <= cfg.goal_tolerance


def test_episode_enclosed_start_never_succeeds():
    ring = np.array([[2.0, 0.9, 1.1, 0.1], [2.0, 3.1, 1.1, 0.1], [0.9, 2.0, 0.1, 1.1], [3.1, 2.0, 0.1, 1.1]])
    world = WorldMap(8.0, ring, Pose2(2.0, 2.0, 0.3), Pose2(7.0, 7.0, 0.0))
    res = run_episode(world, CAM, EpisodeConfig(alpha=0.5, max_steps=80))
    assert res.outcome in ("collision", "timeout")
    assert res.steps <= 80


def test_episode_deterministic_and_audited():
    for env in (1, 2):
        world = build_env(env, trial_seed(0, env, 1))
        cfg = EpisodeConfig(alpha=0.35)
        a, b = run_episode(world, CAM, cfg), run_episode(world, CAM, cfg)
        assert a.outcome == b.outcome and a.steps == b.steps
        assert [p.as_array().tolist() for p in a.trajectory] == [p.as_array().tolist() for p in b.trajectory]
        assert a.steps <= cfg.step_limit(world)
        if a.outcome == "success":
            assert not any(check_collision(world, p, cfg.robot_radius) for p in a.trajectory)


def test_episode_config_validation():
    with pytest.raises(ValueError):
        EpisodeConfig(max_steps=0)
    with pytest.raises(ValueError):
        EpisodeConfig(robot_radius=0.0)


# ---- sweep ----------------------------------------------------------------------------------

def test_degenerate_sweep_matches_episode():
    cfg = EpisodeConfig(seed=4)
    recs = sweep_alpha([2], [0.25], 1, cfg)
    assert len(recs) == 1
    seed = trial_seed(4, 2, 0)
    res = run_episode(build_env(2, seed), CAM, EpisodeConfig(alpha=0.25, seed=seed))
    assert (recs[0].outcome, recs[0].steps, recs[0].seed) == (res.outcome, res.steps, seed)
    summary = summarize(recs)
    assert len(summary) == 1 and summary[0].trials == 1


def test_csv_round_trip_and_header():
    recs = sweep_alpha([1], [0.1, 0.5], 2, EpisodeConfig())
    text = records_to_csv(recs)
    assert text.splitlines()[0] == ",".join(CSV_HEADER)
    assert records_from_csv(text) == recs
    assert len(text.splitlines()) == 1 + 4


def test_trial_seeds_distinct():
    seeds = {trial_seed(0, e, t) for e in (1, 2, 3) for t in range(30)}
    assert len(seeds) == 90
