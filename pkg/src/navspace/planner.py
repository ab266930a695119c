"""Receding-horizon motion-primitive selection against an image-space cost field.

Body frame: x forward, y left, z up. World poses are planar ``(x, y, psi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .distance_field import DistanceField, potential_field
from .kernels import bilinear_sample

TIE_RTOL = 1e-12


def wrap_angle(a):
    """Wrap to (-pi, pi]; values already inside are returned untouched."""
    a = np.asarray(a, dtype=float)
    inside = (a > -np.pi) & (a <= np.pi)
    w = np.arctan2(np.sin(a), np.cos(a))
    w = np.where(w <= -np.pi, w + 2 * np.pi, w)
    w = np.where(inside, a, w)
    return float(w) if w.ndim == 0 else w


@dataclass(frozen=True)
class Pose2:
    x: float
    y: float
    psi: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "psi", wrap_angle(float(self.psi)))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.psi])

    def compose(self, local: "Pose2") -> "Pose2":
        """Apply a body-frame displacement ``local`` from this pose."""
        c, s = math.cos(self.psi), math.sin(self.psi)
        return Pose2(self.x + c * local.x - s * local.y,
                     self.y + s * local.x + c * local.y,
                     self.psi + local.psi)

    def distance_to(self, other: "Pose2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


def to_world(robot: Pose2, local: np.ndarray) -> np.ndarray:
    """Map body-frame poses ``(..., 3)`` into the world frame of ``robot``."""
    c, s = math.cos(robot.psi), math.sin(robot.psi)
    x = robot.x + c * local[..., 0] - s * local[..., 1]
    y = robot.y + s * local[..., 0] + c * local[..., 1]
    psi = wrap_angle(robot.psi + local[..., 2])
    return np.stack([x, y, psi], axis=-1)


@dataclass(frozen=True)
class MotionPrimitive:
    poses: np.ndarray  # (m, 3) body-frame x, y, psi
    curvature: float = 0.0

    def __len__(self):
        return len(self.poses)

    def pose(self, j: int) -> Pose2:
        return Pose2(*self.poses[j])


@dataclass(frozen=True)
class PrimitiveLibrary:
    poses: np.ndarray  # (n, m, 3)
    curvatures: np.ndarray  # (n,)

    def __post_init__(self):
        if self.poses.ndim != 3 or self.poses.shape[0] < 1 or self.poses.shape[2] != 3:
            raise ValueError("library needs shape (n >= 1, m, 3)")

    def __len__(self):
        return self.poses.shape[0]

    def __getitem__(self, i) -> MotionPrimitive:
        return MotionPrimitive(self.poses[i], float(self.curvatures[i]))

    @property
    def m(self) -> int:
        return self.poses.shape[1]

    @property
    def straight_index(self) -> int:
        return int(np.argmin(np.abs(self.curvatures)))

    def to_text(self) -> str:
        blocks = []
        for prim in self.poses:
            blocks.append("".join(f"{x:.12g} {y:.12g} {p:.12g}\n" for x, y, p in prim))
        return "\n".join(blocks)

    @classmethod
    def from_text(cls, text: str) -> "PrimitiveLibrary":
        blocks = [b for b in text.strip().split("\n\n") if b.strip()]
        poses = np.array([[[float(t) for t in line.split()] for line in b.strip().splitlines()]
                          for b in blocks])
        # constant-curvature arc: chord = 2 sin(dpsi / 2) / kappa between neighbours
        chord = np.hypot(poses[:, 1, 0] - poses[:, 0, 0], poses[:, 1, 1] - poses[:, 0, 1])
        dpsi = poses[:, 1, 2] - poses[:, 0, 2]
        kappa = np.where(chord > 0, 2.0 * np.sin(dpsi / 2.0) / np.where(chord > 0, chord, 1.0), 0.0)
        return cls(poses, kappa)


def arc_poses(kappa: float, m: int, arc_length: float) -> np.ndarray:
    s = np.linspace(0.0, arc_length, m)
    if kappa == 0.0:
        return np.column_stack([s, np.zeros(m), np.zeros(m)])
    theta = kappa * s
    return np.column_stack([np.sin(theta) / kappa, (1.0 - np.cos(theta)) / kappa, theta])


def generate_primitives(n_curvatures: int = 15, m_poses: int = 10, arc_length: float = 1.0,
                        kappa_max: float = 1.2) -> PrimitiveLibrary:
    """Constant-curvature arcs, curvatures evenly spaced over [-kappa_max, kappa_max]."""
    if n_curvatures < 1 or n_curvatures % 2 == 0:
        raise ValueError("n_curvatures must be a positive odd number")
    if m_poses < 2:
        raise ValueError("m_poses must be at least 2")
    if not arc_length > 0 or kappa_max < 0:
        raise ValueError("arc_length must be positive and kappa_max non-negative")
    half = n_curvatures // 2
    kappas = np.array([kappa_max * i / half for i in range(-half, half + 1)]) if half else np.zeros(1)
    return PrimitiveLibrary(np.stack([arc_poses(float(k), m_poses, arc_length) for k in kappas]), kappas)


@dataclass(frozen=True)
class CameraModel:
    fx: float = 120.0
    fy: float = 120.0
    cx: float = 80.0
    cy: float = 60.0
    cam_height: float = 0.5
    pitch: float = math.radians(15.0)
    width: int = 160
    height: int = 120

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError("focal lengths must be positive")
        if not self.cam_height > 0:
            raise ValueError("camera height must be positive")
        if not 0 <= self.pitch < math.pi / 2:
            raise ValueError("pitch must lie in [0, pi/2)")
        if self.width < 2 or self.height < 2:
            raise ValueError("image must be at least 2x2")

    @property
    def horizon_row(self) -> float:
        return self.cy - self.fy * math.tan(self.pitch)

    def axes(self):
        """Camera right, down and forward axes expressed in the body frame."""
        c, s = math.cos(self.pitch), math.sin(self.pitch)
        return (np.array([0.0, -1.0, 0.0]), np.array([-s, 0.0, -c]), np.array([c, 0.0, -s]))


def project_ground(x, y, cam: CameraModel):
    """Pinhole projection of body-frame ground points.

    Returns ``(u, v, visible)``; ``u, v`` are NaN where the point is behind
    the camera.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    c, s = math.cos(cam.pitch), math.sin(cam.pitch)
    xc = -y
    yc = -s * x + c * cam.cam_height
    zc = c * x + s * cam.cam_height
    front = zc > 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(front, cam.cx + cam.fx * xc / zc, np.nan)
        v = np.where(front, cam.cy + cam.fy * yc / zc, np.nan)
    visible = front & (v > cam.horizon_row) & (u >= 0) & (u <= cam.width - 1) \
        & (v >= 0) & (v <= cam.height - 1)
    return u, v, visible


def project_pose(pose: Pose2, cam: CameraModel) -> Optional[tuple[float, float]]:
    """Pixel of the ground point under ``pose``, or None when out of view."""
    u, v, vis = project_ground(pose.x, pose.y, cam)
    return (float(u), float(v)) if bool(vis) else None


def primitive_collision_costs(poses: np.ndarray, potential: np.ndarray, alpha_dmax: float,
                              cam: CameraModel) -> np.ndarray:
    """Summed per-pose potential for each primitive in ``poses`` (n, m, 3).

    Out-of-view poses are charged the largest value the potential takes, which
    is ``alpha_dmax`` whenever a strong boundary exists and 0 when none does.
    """
    u, v, vis = project_ground(poses[..., 0], poses[..., 1], cam)
    charge = min(float(alpha_dmax), float(potential.max())) if potential.size else float(alpha_dmax)
    per_pose = np.full(u.shape, charge)
    if np.any(vis):
        per_pose[vis] = bilinear_sample(potential, u[vis], v[vis])
    return per_pose.sum(axis=-1)


def primitive_collision_cost(prim: MotionPrimitive, sedf: DistanceField, alpha_dmax: float,
                             cam: CameraModel, literal: bool = False) -> float:
    pot = potential_field(sedf, alpha_dmax, literal)
    return float(primitive_collision_costs(prim.poses[None], pot, alpha_dmax, cam)[0])


def _check_rotation(r: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3):
        raise ValueError(f"rotation must be 3x3, got {r.shape}")
    if np.max(np.abs(r.T @ r - np.eye(3))) > tol or np.linalg.det(r) <= 0:
        raise ValueError("matrix is not a proper rotation")
    return r


def rotation_geodesic(r1, r2) -> float:
    """Angle of the relative rotation ``r1^T r2``, in [0, pi].

    Same value as ``arccos((trace - 1) / 2)``, evaluated through atan2 of the
    skew and symmetric parts so it stays accurate near 0 and pi.
    """
    rel = _check_rotation(r1).T @ _check_rotation(r2)
    cos_part = (np.trace(rel) - 1.0) / 2.0
    skew = np.array([rel[2, 1] - rel[1, 2], rel[0, 2] - rel[2, 0], rel[1, 0] - rel[0, 1]])
    sin_part = np.linalg.norm(skew) / 2.0
    return float(np.arctan2(sin_part, np.clip(cos_part, -1.0, 1.0)))


def yaw_matrix(psi: float) -> np.ndarray:
    c, s = math.cos(psi), math.sin(psi)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


@dataclass(frozen=True)
class TargetCostParams:
    a: float = 1.0
    b: float = 1.0
    p: int = 2

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError("a and b must be strictly positive")
        if self.p != 2:
            raise ValueError("only p = 2 is supported")


def target_cost(pose: Pose2, goal: Pose2, params: TargetCostParams = TargetCostParams()) -> float:
    d_rot = rotation_geodesic(yaw_matrix(pose.psi), yaw_matrix(goal.psi))
    d_trans = pose.distance_to(goal)
    return math.sqrt(params.a * d_rot ** 2 + params.b * d_trans ** 2)


def target_costs(world_poses: np.ndarray, goal: Pose2, params: TargetCostParams) -> np.ndarray:
    """Vectorised ``target_cost``; for planar yaw the geodesic is the wrapped heading gap."""
    d_rot = np.abs(wrap_angle(world_poses[..., 2] - goal.psi))
    d_trans_sq = (world_poses[..., 0] - goal.x) ** 2 + (world_poses[..., 1] - goal.y) ** 2
    return np.sqrt(params.a * d_rot ** 2 + params.b * d_trans_sq)


@dataclass(frozen=True)
class PlannerWeights:
    w1: float = 0.5
    w2: float = 0.5
    target: TargetCostParams = field(default_factory=TargetCostParams)

    def __post_init__(self):
        if self.w1 < 0 or self.w2 < 0 or (self.w1 == 0 and self.w2 == 0):
            raise ValueError("weights must be non-negative and not both zero")


def score_primitives(lib: PrimitiveLibrary, sedf: DistanceField, alpha_dmax: float, cam: CameraModel,
                     robot: Pose2, goal: Pose2, weights: PlannerWeights = PlannerWeights(),
                     literal: bool = False):
    """Per-primitive ``(collision_cost, target_cost)`` arrays."""
    pot = potential_field(sedf, alpha_dmax, literal)
    c_c = primitive_collision_costs(lib.poses, pot, alpha_dmax, cam)
    c_t = target_costs(to_world(robot, lib.poses), goal, weights.target).sum(axis=-1)
    return c_c, c_t


def select_primitive(lib: PrimitiveLibrary, sedf: DistanceField, alpha_dmax: float, cam: CameraModel,
                     robot: Pose2, goal: Pose2, weights: PlannerWeights = PlannerWeights(),
                     literal: bool = False) -> tuple[int, float]:
    """Index and value of the cheapest primitive under ``w1 C_c + w2 C_t``.

    Totals within a relative 1e-12 of the minimum count as tied; the lowest
    index wins, which keeps the choice stable under rescaling of the weights.
    """
    if len(lib) == 0:
        raise ValueError("empty primitive library")
    c_c, c_t = score_primitives(lib, sedf, alpha_dmax, cam, robot, goal, weights, literal)
    total = weights.w1 * c_c + weights.w2 * c_t
    best = total.min()
    tol = TIE_RTOL * max(abs(best), np.abs(total).max(), 1e-300)
    idx = int(np.flatnonzero(total <= best + tol)[0])
    return idx, float(total[idx])
