"""Image-space navigable-space geometry, distance fields and primitive planning."""

from .distance_field import (DistanceField, ObstacleBoundarySet, SedfConfig, apply_scale,
                             compute_edge_map, exact_edt, filter_sob, sedf_from_mask)
from .mask_geometry import (Polyline, SegMask, extract_boundary, reconstruct, sample_vertices,
                            segmentation_metrics)
from .planner import CameraModel, PlannerWeights, Pose2, generate_primitives, select_primitive
from .sim import EpisodeConfig, build_env, run_episode, sweep_alpha

__version__ = "0.1.0"
