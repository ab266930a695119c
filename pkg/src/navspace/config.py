"""Plain ``key = value`` run configuration.

One setting per line, ``#`` starts a comment. Unknown keys and out-of-range
values are rejected while parsing, with the offending line number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import Any, Callable

from .planner import CameraModel, PlannerWeights, TargetCostParams
from .sim import DEFAULT_ALPHAS, EpisodeConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    # distance field
    alpha: float = 0.25
    v_thres: float = -1.0  # negative: half the image height
    # planner
    w1: float = 0.5
    w2: float = 0.5
    target_a: float = 1.0
    target_b: float = 1.0
    n_curvatures: int = 15
    m_poses: int = 10
    arc_length: float = 1.0
    kappa_max: float = 1.2
    # camera
    width: int = 160
    height: int = 120
    fx: float = 120.0
    fy: float = 120.0
    cx: float = 80.0
    cy: float = 60.0
    cam_height: float = 0.5
    pitch_deg: float = 15.0
    # episodes
    env: int = 3
    robot_radius: float = 0.15
    goal_tolerance: float = 0.3
    max_steps: int = 0  # 0: steps_per_meter times the map size
    steps_per_meter: int = 60
    commit: int = 1
    literal_collision: bool = False
    # sweep
    envs: tuple = (1, 2, 3)
    alphas: tuple = DEFAULT_ALPHAS
    trials: int = 10
    seed: int = 0
    # geometry
    k_vertices: int = 16

    def camera(self) -> CameraModel:
        return CameraModel(fx=self.fx, fy=self.fy, cx=self.cx, cy=self.cy,
                           cam_height=self.cam_height, pitch=math.radians(self.pitch_deg),
                           width=self.width, height=self.height)

    def episode(self) -> EpisodeConfig:
        weights = PlannerWeights(self.w1, self.w2, TargetCostParams(self.target_a, self.target_b))
        return EpisodeConfig(
            alpha=self.alpha, v_thres=self.resolved_v_thres(), weights=weights,
            n_curvatures=self.n_curvatures, m_poses=self.m_poses, arc_length=self.arc_length,
            kappa_max=self.kappa_max, max_steps=self.max_steps or None,
            steps_per_meter=self.steps_per_meter, robot_radius=self.robot_radius,
            goal_tolerance=self.goal_tolerance, commit=self.commit,
            literal_collision=self.literal_collision, seed=self.seed)

    def resolved_v_thres(self) -> float:
        return 0.5 * self.height if self.v_thres < 0 else self.v_thres

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            val = getattr(self, f.name)
            if isinstance(val, tuple):
                val = ",".join(repr(x) for x in val)
            elif isinstance(val, bool):
                val = "true" if val else "false"
            lines.append(f"{f.name} = {val}")
        return "\n".join(lines) + "\n"


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int_list(text: str) -> tuple:
    return tuple(int(x) for x in text.split(",") if x.strip())


def _float_list(text: str) -> tuple:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _pos(x):
    return x > 0


def _nonneg(x):
    return x >= 0


def _unit(x):
    return 0.0 <= x <= 1.0


# key -> (parser, range check, description of the allowed range)
_SCHEMA: dict[str, tuple[Callable[[str], Any], Callable[[Any], bool], str]] = {
    "alpha": (float, _unit, "in [0, 1]"),
    "v_thres": (float, math.isfinite, "finite (negative for half the height)"),
    "w1": (float, _nonneg, ">= 0"),
    "w2": (float, _nonneg, ">= 0"),
    "target_a": (float, _pos, "> 0"),
    "target_b": (float, _pos, "> 0"),
    "n_curvatures": (int, lambda n: n >= 1 and n % 2 == 1, "odd and >= 1"),
    "m_poses": (int, lambda n: n >= 2, ">= 2"),
    "arc_length": (float, _pos, "> 0"),
    "kappa_max": (float, _nonneg, ">= 0"),
    "width": (int, lambda n: n >= 2, ">= 2"),
    "height": (int, lambda n: n >= 2, ">= 2"),
    "fx": (float, _pos, "> 0"),
    "fy": (float, _pos, "> 0"),
    "cx": (float, math.isfinite, "finite"),
    "cy": (float, math.isfinite, "finite"),
    "cam_height": (float, _pos, "> 0"),
    "pitch_deg": (float, lambda p: 0 <= p < 90, "in [0, 90)"),
    "env": (int, lambda e: e in (1, 2, 3), "one of 1, 2, 3"),
    "robot_radius": (float, _pos, "> 0"),
    "goal_tolerance": (float, _pos, "> 0"),
    "max_steps": (int, _nonneg, ">= 0 (0 selects the size-based limit)"),
    "steps_per_meter": (int, _pos, "> 0"),
    "commit": (int, lambda n: n >= 1, ">= 1"),
    "literal_collision": (_bool, lambda b: True, "boolean"),
    "envs": (_int_list, lambda t: bool(t) and all(e in (1, 2, 3) for e in t), "non-empty list of 1, 2, 3"),
    "alphas": (_float_list, lambda t: bool(t) and all(0 <= a <= 1 for a in t), "non-empty list in [0, 1]"),
    "trials": (int, lambda n: n >= 1, ">= 1"),
    "seed": (int, _nonneg, ">= 0"),
    "k_vertices": (int, lambda n: n >= 2, ">= 2"),
}


def parse_config(text: str, base: RunConfig = RunConfig()) -> RunConfig:
    values: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw.strip()!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        parse, ok, allowed = _SCHEMA[key]
        try:
            parsed = parse(val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
        if not ok(parsed):
            raise ConfigError(f"line {lineno}: {key} = {val} out of range, must be {allowed}")
        values[key] = parsed
    cfg = replace(base, **values)
    if cfg.w1 == 0 and cfg.w2 == 0:
        raise ConfigError("w1 and w2 cannot both be zero")
    if cfg.commit >= cfg.m_poses:
        raise ConfigError(f"commit must be below m_poses ({cfg.m_poses})")
    return cfg


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
